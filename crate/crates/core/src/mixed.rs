//! Mixed-state evolution by vectorizing the density matrix onto a doubled
//! qubit register.
//!
//! A density matrix `rho` on `N` qubits becomes a unit vector of length
//! `4^N` with layout `v[c * 2^N + r] = rho[r, c]`, divided by the Frobenius
//! norm of `rho`. The high-order `N` qubits (the column register) evolve
//! under `exp(+i H^T t)` and the low-order `N` qubits (the row register)
//! under `exp(-i H t)`, so the doubled propagator factorizes as
//! `kron(exp(i H^T t), exp(-i H t))` and the conjugation
//! `rho -> U rho U^dagger` becomes plain matrix-vector action. Unitarity of
//! the doubled propagator preserves the Euclidean norm of the vector, which
//! is the Frobenius norm of the density matrix.
//!
//! Both factors reuse the pure-state product-formula machinery: the column
//! register runs the schedule of the negated transpose of the Hamiltonian,
//! obtained either from [`liouvillian`] at the operator level or from
//! [`transpose_negate_schedule`] at the schedule level. Diagonal mixtures
//! are prepared directly as amplitude vectors; purification circuits are
//! exported as gate lists but never required for the dense path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::dense::{DenseOperator, DENSE_QUBIT_LIMIT};
use crate::hamiltonian::{build_schrodinger, HamiltonianParts};
use crate::model::ModelParams;
use crate::partition::{partition_structured, Picture};
use crate::sim::{self, SimError, StateVector, NORM_TOL};
use crate::trotter::{
    controlled, lower_to_gates, schedule_first_order, schedule_interaction,
    schedule_second_order, GateList, ScheduleStep, SliceIntegrator, TermOrdering, TrotterError,
    TrotterSchedule,
};

#[derive(Debug, Error)]
pub enum MixedError {
    #[error("matrix has zero Frobenius norm")]
    ZeroNorm,
    #[error("trace magnitude {0:.3e} is too small to renormalize against")]
    ZeroTrace(f64),
    #[error("vector length {0} is not a power of four")]
    BadLength(usize),
    #[error("vector norm {0} differs from 1 beyond tolerance")]
    NotNormalized(f64),
    #[error("size mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("doubled register of {0} qubits exceeds the dense simulation limit")]
    TooLarge(usize),
    #[error("unsupported product formula order {0} for mixed evolution")]
    UnsupportedOrder(u8),
    #[error(transparent)]
    Synthesis(#[from] TrotterError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// A Frobenius-normalized vectorized density matrix on a doubled register.
///
/// The wrapped vector always has unit Euclidean norm and a length that is a
/// power of four; `n_qubits` counts the qubits of the underlying single
/// register, so the vector lives on `2 * n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct VecDensity {
    v: DVector<Complex64>,
    n_qubits: usize,
}

impl VecDensity {
    pub fn new(v: DVector<Complex64>) -> Result<Self, MixedError> {
        let len = v.len();
        if len == 0 || !len.is_power_of_two() || len.trailing_zeros() % 2 != 0 {
            return Err(MixedError::BadLength(len));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(MixedError::NotNormalized(norm));
        }
        Ok(VecDensity {
            n_qubits: (len.trailing_zeros() / 2) as usize,
            v,
        })
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.v
    }

    /// Qubits of the underlying single register.
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Dimension of the underlying single register, `2^n_qubits`.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }
}

/// Flattens a square matrix into the doubled-register layout and divides by
/// its Frobenius norm.
pub fn vectorize(rho: &DenseOperator) -> Result<VecDensity, MixedError> {
    let dim = rho.dim();
    let mut v = DVector::<Complex64>::zeros(dim * dim);
    for c in 0..dim {
        for r in 0..dim {
            v[c * dim + r] = rho.matrix()[(r, c)];
        }
    }
    let norm = v.norm();
    if norm < f64::MIN_POSITIVE {
        return Err(MixedError::ZeroNorm);
    }
    Ok(VecDensity {
        v: v.map(|z| z / norm),
        n_qubits: rho.n_qubits(),
    })
}

/// Reshapes a vectorized density back into a matrix without rescaling; the
/// result has unit Frobenius norm rather than unit trace.
pub fn unvectorize_raw(v: &VecDensity) -> DenseOperator {
    let dim = v.dim();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            m[(r, c)] = v.v[c * dim + r];
        }
    }
    DenseOperator::from_matrix(m)
}

/// Reshapes a vectorized density back into a matrix and rescales it to unit
/// trace. Fails when the trace is too small to divide by, as for traceless
/// or zero input.
pub fn unvectorize_normalized(v: &VecDensity) -> Result<DenseOperator, MixedError> {
    let raw = unvectorize_raw(v);
    let tr = raw.trace();
    if tr.norm() < 1e-12 {
        return Err(MixedError::ZeroTrace(tr.norm()));
    }
    Ok(raw.scaled(Complex64::new(1.0, 0.0) / tr))
}

/// The two independent evolution problems whose tensor product implements
/// the vectorized conjugation channel. The column register runs the negated
/// transpose, so its ordinary `exp(-iHt)` synthesis realizes the required
/// `exp(+iH^T t)` factor; the row register runs the Hamiltonian unchanged.
#[derive(Debug, Clone)]
pub struct LiouvillianPair {
    pub column: HamiltonianParts,
    pub row: HamiltonianParts,
}

/// Splits a Hamiltonian into the paired problems of [`LiouvillianPair`].
///
/// Transposition flips the sign of Pauli terms with an odd Y count and
/// leaves the rest alone, so term tags stay valid and the transposed
/// interaction partitions exactly like the original.
pub fn liouvillian(parts: &HamiltonianParts) -> LiouvillianPair {
    let minus = Complex64::new(-1.0, 0.0);
    LiouvillianPair {
        column: HamiltonianParts {
            h_photon: parts.h_photon.transpose().scaled(minus),
            h_atom: parts.h_atom.transpose().scaled(minus),
            h_int: parts.h_int.transpose().scaled(minus),
            identity_shift: -parts.identity_shift,
        },
        row: parts.clone(),
    }
}

/// Maps a schedule approximating `exp(-iHt)` into one approximating
/// `exp(+iH^T t)` on the same register.
///
/// Transposing a product reverses factor order, and inverting reverses it
/// back, so step order is preserved; each factor obeys
/// `(exp(-i a P)^{-1})^T = exp(-i a' P)` with `a' = -a` for even-Y strings
/// and `a' = a` for odd-Y strings. Rotations inside one step commute, so
/// their listed order never matters.
pub fn transpose_negate_schedule(schedule: &TrotterSchedule) -> TrotterSchedule {
    let steps = schedule
        .steps
        .iter()
        .map(|step| match step {
            ScheduleStep::DiagonalLayer { rotations } => ScheduleStep::DiagonalLayer {
                rotations: rotations.iter().map(|&(a, q)| (-a, q)).collect(),
            },
            ScheduleStep::GroupExp { group, rotations } => ScheduleStep::GroupExp {
                group: *group,
                rotations: rotations
                    .iter()
                    .map(|(a, s)| {
                        let angle = if s.n_y() % 2 == 1 { *a } else { -*a };
                        (angle, s.clone())
                    })
                    .collect(),
            },
        })
        .collect();
    TrotterSchedule {
        n_qubits: schedule.n_qubits,
        steps,
        meta: schedule.meta.clone(),
    }
}

fn embed_step(step: &ScheduleStep, n_total: usize, offset: usize) -> ScheduleStep {
    match step {
        ScheduleStep::DiagonalLayer { rotations } => ScheduleStep::DiagonalLayer {
            rotations: rotations.iter().map(|&(a, q)| (a, q + offset)).collect(),
        },
        ScheduleStep::GroupExp { group, rotations } => ScheduleStep::GroupExp {
            group: *group,
            rotations: rotations
                .iter()
                .map(|(a, s)| (*a, s.embed_at(n_total, offset)))
                .collect(),
        },
    }
}

/// Concatenates two same-size schedules onto a doubled register, the first
/// on the high-order qubits (the column register) and the second on the
/// low-order qubits (the row register). The halves act on disjoint qubits,
/// so the combined unitary is their tensor product regardless of step
/// interleaving.
pub fn doubled_schedule(column: &TrotterSchedule, row: &TrotterSchedule) -> TrotterSchedule {
    assert_eq!(column.n_qubits, row.n_qubits, "register sizes differ");
    let n = column.n_qubits;
    let total = 2 * n;
    let mut steps = Vec::with_capacity(column.steps.len() + row.steps.len());
    steps.extend(column.steps.iter().map(|s| embed_step(s, total, 0)));
    steps.extend(row.steps.iter().map(|s| embed_step(s, total, n)));
    TrotterSchedule {
        n_qubits: total,
        steps,
        meta: row.meta.clone(),
    }
}

/// Synthesis settings for one vectorized evolution.
#[derive(Debug, Clone, Copy)]
pub struct MixedConfig {
    pub picture: Picture,
    /// Product formula order, 1 or 2.
    pub order: u8,
    pub duration: f64,
    /// Trotter steps, per slice in the interaction picture.
    pub trotter_steps: u64,
    /// Outer time slices; ignored in the Schroedinger picture.
    pub slices: u64,
    pub integrator: SliceIntegrator,
    pub ordering: TermOrdering,
    pub seed: u64,
}

/// Builds the row-register schedule for one picture and order.
fn row_schedule(params: &ModelParams, config: &MixedConfig) -> Result<TrotterSchedule, MixedError> {
    match config.picture {
        Picture::Schrodinger => {
            let parts = build_schrodinger(params);
            let partition =
                partition_structured(&parts.h_int, params, Picture::Schrodinger, 0.0);
            let schedule = match config.order {
                1 => schedule_first_order(
                    &parts,
                    &partition,
                    config.duration,
                    config.trotter_steps,
                    config.ordering,
                    config.seed,
                )?,
                2 => schedule_second_order(
                    &parts,
                    &partition,
                    config.duration,
                    config.trotter_steps,
                    config.ordering,
                    config.seed,
                )?,
                o => return Err(MixedError::UnsupportedOrder(o)),
            };
            Ok(schedule)
        }
        Picture::Interaction => Ok(schedule_interaction(
            params,
            config.duration,
            config.slices,
            config.trotter_steps,
            config.order,
            config.integrator,
            config.ordering,
            config.seed,
        )?),
    }
}

/// The complete doubled-register schedule for one vectorized evolution:
/// the transposed-and-negated copy on the column register, the ordinary
/// schedule on the row register. In the interaction picture each half is
/// the sliced frozen-Hamiltonian product followed by its single free
/// correction layer.
pub fn vectorized_schedule(
    params: &ModelParams,
    config: &MixedConfig,
) -> Result<TrotterSchedule, MixedError> {
    let row = row_schedule(params, config)?;
    let column = transpose_negate_schedule(&row);
    Ok(doubled_schedule(&column, &row))
}

/// Evolves a vectorized density matrix. The doubled propagator is unitary,
/// so the output keeps unit Euclidean norm.
pub fn evolve_vectorized(
    params: &ModelParams,
    config: &MixedConfig,
    rho0: &VecDensity,
) -> Result<VecDensity, MixedError> {
    let n = params.n_qubits();
    if rho0.n_qubits != n {
        return Err(MixedError::DimensionMismatch {
            expected: n,
            got: rho0.n_qubits,
        });
    }
    if 2 * n > DENSE_QUBIT_LIMIT {
        return Err(MixedError::TooLarge(2 * n));
    }
    let schedule = vectorized_schedule(params, config)?;
    let state = StateVector::new(rho0.v.clone()).map_err(MixedError::Simulation)?;
    let evolved = sim::apply_schedule(&schedule, &state)?;
    Ok(VecDensity {
        v: evolved.amplitudes().clone(),
        n_qubits: n,
    })
}

/// A trace readout obtained from the overlap with the maximally entangled
/// pair state on the doubled register.
#[derive(Debug, Clone, Copy)]
pub struct TraceEstimate {
    /// Signed real part of `sqrt(2^N) <Phi|v>`; the trace divided by the
    /// Frobenius norm of the unvectorized matrix.
    pub value: f64,
    /// Magnitude of the imaginary part of the same product; small for
    /// Hermitian input.
    pub imag_residual: f64,
    /// Set when the signed estimate comes out negative, which a physical
    /// density matrix never produces but arbitrary vectors can.
    pub flagged_negative: bool,
    /// `|<Phi|v>|^2`, the quantity a destructive overlap measurement
    /// estimates; it loses the sign that `value` keeps.
    pub overlap_squared_proxy: f64,
}

/// Reads the trace of a vectorized matrix as `sqrt(2^N) <Phi|v>` with
/// `|Phi>` the uniform pair state `sum_x |x>|x> / sqrt(2^N)`. The signed
/// value is reported as is; positivity is never assumed.
pub fn trace_via_bell(v: &VecDensity) -> TraceEstimate {
    let dim = v.dim();
    let scale = (dim as f64).sqrt();
    let mut diag_sum = Complex64::new(0.0, 0.0);
    for x in 0..dim {
        diag_sum += v.v[x * dim + x];
    }
    let overlap = diag_sum / scale;
    TraceEstimate {
        value: diag_sum.re,
        imag_residual: diag_sum.im.abs(),
        flagged_negative: diag_sum.re < 0.0,
        overlap_squared_proxy: overlap.norm_sqr(),
    }
}

/// Inner product `<observable|rho>` between a vectorized observable and a
/// vectorized density; equals `Tr(O^dagger rho)` divided by the Frobenius
/// norms carried by the two vectors.
pub fn observable_overlap(
    observable: &DVector<Complex64>,
    rho: &VecDensity,
) -> Result<Complex64, MixedError> {
    if observable.len() != rho.v.len() {
        return Err(MixedError::DimensionMismatch {
            expected: rho.v.len(),
            got: observable.len(),
        });
    }
    Ok(observable.dotc(&rho.v))
}

/// Lowers a schedule to gates and promotes every Z rotation to its
/// ancilla-controlled form, for overlap estimation circuits.
pub fn controlled_evolution_circuit(
    schedule: &TrotterSchedule,
    ancilla: usize,
) -> Result<GateList, MixedError> {
    let gates = lower_to_gates(schedule);
    Ok(controlled(&gates, ancilla)?)
}

/// The vectorized total photon-number observable on the doubled photon
/// register, atom excluded: amplitude `p(x)` at `|x>|x>` where `p(x)` sums
/// the `k`-bit occupation fields of `x`, divided by the Frobenius norm
/// `sqrt(sum_x p(x)^2)`. Returns the normalized vector and that norm, so
/// `Tr(N rho) = norm * <vector|vec(rho)> * ||rho||_F`.
pub fn vectorized_number_observable(params: &ModelParams) -> (DVector<Complex64>, f64) {
    let k = params.trunc_bits() as usize;
    let nf = params.n_modes();
    let bits = nf * k;
    let dim = 1usize << bits;
    let mask = (1u64 << k) - 1;
    let mut v = DVector::<Complex64>::zeros(dim * dim);
    let mut norm_sq = 0.0;
    for x in 0..dim {
        let mut p = 0u64;
        for m in 0..nf {
            p += ((x as u64) >> (k * m)) & mask;
        }
        let val = p as f64;
        v[x * dim + x] = Complex64::new(val, 0.0);
        norm_sq += val * val;
    }
    let norm = norm_sq.sqrt();
    (v.map(|z| z / norm), norm)
}
