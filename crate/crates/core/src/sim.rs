//! Dense desk-scale reference simulation: normalized state vectors, exact
//! propagators, schedule and gate-list application, error norms, photon
//! number statistics, and the analytic Jaynes-Cummings survival probability.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::dense::{column_phase, DenseOperator};
use crate::hamiltonian::{build_interaction, build_schrodinger};
use crate::model::ModelParams;
use crate::partition::{partition_structured, Picture};
use crate::pauli::{number_operator, PauliString, PauliSum};
use crate::trotter::{
    schedule_first_order, Gate, GateList, ScheduleStep, SliceIntegrator, TermOrdering,
    TrotterError, TrotterSchedule,
};

/// States must be normalized to within this L2 tolerance.
pub const NORM_TOL: f64 = 1e-10;

/// Hard ceiling on reference-propagator refinement.
const REFERENCE_L_MAX: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("operator is not Hermitian within 1e-10")]
    NonHermitian,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state norm {0} differs from 1 by more than 1e-10")]
    NotNormalized(f64),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("reference propagator did not converge within {l_max} slices")]
    NoConvergence { l_max: u64 },
    #[error("precision must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("schedule synthesis failed: {0}")]
    Synthesis(#[from] TrotterError),
}

/// A normalized pure state on a power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wraps an already normalized amplitude vector.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self, SimError> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(SimError::NotPowerOfTwo(dim));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(StateVector { amplitudes })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self, SimError> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(SimError::NotPowerOfTwo(dim));
        }
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(SimError::ZeroVector);
        }
        Ok(StateVector {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// The computational basis state |index> on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Probability of measuring the computational basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }
}

/// Measured error of an approximate evolution against an exact one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// Spectral norm of the difference of the two unitaries.
    pub operator_error: f64,
    /// L2 error on one concrete initial state.
    pub state_error: f64,
}

/// e^{-iHt} through a Hermitian eigendecomposition.
pub fn exact_unitary(h: &DenseOperator, t: f64) -> Result<DenseOperator, SimError> {
    if !h.is_hermitian(1e-10) {
        return Err(SimError::NonHermitian);
    }
    Ok(h.propagator(t))
}

/// Product of `slices` exactly-evolved frozen-Hamiltonian segments: the
/// time-ordered interaction-picture propagator with only the time
/// discretization approximated, no product-formula error.
pub fn sliced_propagator_interaction(
    params: &ModelParams,
    t: f64,
    slices: u64,
    integrator: SliceIntegrator,
) -> DenseOperator {
    let offset = match integrator {
        SliceIntegrator::Left => 0.0,
        SliceIntegrator::Midpoint => 0.5,
    };
    let dt = t / slices as f64;
    let mut u = DenseOperator::identity(params.n_qubits());
    for k in 0..slices {
        let t_k = (k as f64 + offset) * dt;
        let h = build_interaction(params, t_k).to_dense();
        u = h.propagator(dt).mul(&u);
    }
    u
}

fn midpoint_product(params: &ModelParams, t: f64, slices: u64) -> DenseOperator {
    sliced_propagator_interaction(params, t, slices, SliceIntegrator::Midpoint)
}

/// Converged reference for the time-ordered interaction-picture propagator:
/// midpoint-frozen slice products with the slice count doubled until two
/// successive refinements agree to `tol` in spectral norm. Also returns the
/// slice count of the accepted refinement.
pub fn reference_propagator_interaction_detailed(
    params: &ModelParams,
    t: f64,
    tol: f64,
) -> Result<(DenseOperator, u64), SimError> {
    let mut slices: u64 = 1;
    let mut current = midpoint_product(params, t, slices);
    loop {
        let refined_slices = slices * 2;
        if refined_slices > REFERENCE_L_MAX {
            return Err(SimError::NoConvergence {
                l_max: REFERENCE_L_MAX,
            });
        }
        let refined = midpoint_product(params, t, refined_slices);
        if refined.sub(&current).spectral_norm() < tol {
            return Ok((refined, refined_slices));
        }
        slices = refined_slices;
        current = refined;
    }
}

/// See [`reference_propagator_interaction_detailed`]; drops the slice count.
pub fn reference_propagator_interaction(
    params: &ModelParams,
    t: f64,
    tol: f64,
) -> Result<DenseOperator, SimError> {
    reference_propagator_interaction_detailed(params, t, tol).map(|(u, _)| u)
}

/// Eigenphase of a product of single-qubit Z rotations on basis index `i`:
/// exp(-i sum_entries angle * (-1)^{bit}).
fn diagonal_phase(rotations: &[(f64, usize)], n_qubits: usize, index: usize) -> Complex64 {
    let mut total = 0.0;
    for &(angle, qubit) in rotations {
        let bit = (index >> (n_qubits - 1 - qubit)) & 1;
        total += if bit == 0 { angle } else { -angle };
    }
    Complex64::new(0.0, -total).exp()
}

/// Applies `exp(-i angle P)` to a state in place. Pauli strings square to
/// the identity, so the exponential is `cos(angle) I - i sin(angle) P` and
/// each amplitude mixes with at most one partner. Group members commute, so
/// applying them one at a time reproduces the group exponential exactly.
fn rotate_state(v: &mut DVector<Complex64>, angle: f64, string: &PauliString) {
    let (x_mask, z_mask) = string.dense_masks();
    let n_y = string.n_y();
    let dim = v.len();
    let cos = Complex64::new(angle.cos(), 0.0);
    let m_i_sin = Complex64::new(0.0, -angle.sin());
    if x_mask == 0 {
        for r in 0..dim {
            v[r] *= cos + m_i_sin * column_phase(n_y, z_mask, r as u64);
        }
        return;
    }
    for r in 0..dim {
        let partner = r ^ x_mask as usize;
        if partner < r {
            continue;
        }
        let from_r = m_i_sin * column_phase(n_y, z_mask, r as u64);
        let from_partner = m_i_sin * column_phase(n_y, z_mask, partner as u64);
        let a = v[r];
        let b = v[partner];
        v[r] = cos * a + from_partner * b;
        v[partner] = cos * b + from_r * a;
    }
}

/// Row-space version of [`rotate_state`]: left-multiplies a matrix by
/// `exp(-i angle P)` in place.
fn rotate_rows(u: &mut DMatrix<Complex64>, angle: f64, string: &PauliString) {
    let (x_mask, z_mask) = string.dense_masks();
    let n_y = string.n_y();
    let dim = u.nrows();
    let cos = Complex64::new(angle.cos(), 0.0);
    let m_i_sin = Complex64::new(0.0, -angle.sin());
    if x_mask == 0 {
        for r in 0..dim {
            let phase = cos + m_i_sin * column_phase(n_y, z_mask, r as u64);
            for col in 0..dim {
                u[(r, col)] *= phase;
            }
        }
        return;
    }
    for r in 0..dim {
        let partner = r ^ x_mask as usize;
        if partner < r {
            continue;
        }
        let from_r = m_i_sin * column_phase(n_y, z_mask, r as u64);
        let from_partner = m_i_sin * column_phase(n_y, z_mask, partner as u64);
        for col in 0..dim {
            let a = u[(r, col)];
            let b = u[(partner, col)];
            u[(r, col)] = cos * a + from_partner * b;
            u[(partner, col)] = cos * b + from_r * a;
        }
    }
}

/// Applies a schedule to a state, step by step in application order.
pub fn apply_schedule(
    schedule: &TrotterSchedule,
    psi0: &StateVector,
) -> Result<StateVector, SimError> {
    if psi0.n_qubits() != schedule.n_qubits {
        return Err(SimError::DimensionMismatch {
            expected: 1 << schedule.n_qubits,
            got: psi0.dim(),
        });
    }
    let n = schedule.n_qubits;
    let mut v = psi0.amplitudes().clone();
    for step in &schedule.steps {
        match step {
            ScheduleStep::DiagonalLayer { rotations } => {
                for (i, amp) in v.iter_mut().enumerate() {
                    *amp *= diagonal_phase(rotations, n, i);
                }
            }
            ScheduleStep::GroupExp { rotations, .. } => {
                for (angle, string) in rotations {
                    rotate_state(&mut v, *angle, string);
                }
            }
        }
    }
    StateVector::new(v)
}

/// The full unitary synthesized by a schedule.
pub fn schedule_unitary(schedule: &TrotterSchedule) -> Result<DenseOperator, SimError> {
    let n = schedule.n_qubits;
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for step in &schedule.steps {
        match step {
            ScheduleStep::DiagonalLayer { rotations } => {
                for i in 0..dim {
                    let phase = diagonal_phase(rotations, n, i);
                    for col in 0..dim {
                        u[(i, col)] *= phase;
                    }
                }
            }
            ScheduleStep::GroupExp { rotations, .. } => {
                for (angle, string) in rotations {
                    rotate_rows(&mut u, *angle, string);
                }
            }
        }
    }
    Ok(DenseOperator::from_matrix(u))
}

fn apply_single_qubit_rows(
    u: &mut DMatrix<Complex64>,
    n_qubits: usize,
    qubit: usize,
    m: [[Complex64; 2]; 2],
) {
    let dim = u.nrows();
    let mask = 1usize << (n_qubits - 1 - qubit);
    for i0 in 0..dim {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        for col in 0..u.ncols() {
            let a = u[(i0, col)];
            let b = u[(i1, col)];
            u[(i0, col)] = m[0][0] * a + m[0][1] * b;
            u[(i1, col)] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Dense unitary of a lowered gate list, gates applied in list order.
pub fn gate_list_unitary(gates: &GateList) -> DenseOperator {
    let n = gates.n_qubits;
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    let zero = Complex64::new(0.0, 0.0);
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for gate in &gates.gates {
        match gate {
            Gate::H { qubit } => {
                let h = [[inv_sqrt2, inv_sqrt2], [inv_sqrt2, -inv_sqrt2]];
                apply_single_qubit_rows(&mut u, n, *qubit, h);
            }
            Gate::RxPlus { qubit } | Gate::RxMinus { qubit } => {
                let sign = if matches!(gate, Gate::RxPlus { .. }) {
                    1.0
                } else {
                    -1.0
                };
                let c = inv_sqrt2;
                let s = Complex64::new(0.0, -sign * std::f64::consts::FRAC_1_SQRT_2);
                let m = [[c, s], [s, c]];
                apply_single_qubit_rows(&mut u, n, *qubit, m);
            }
            Gate::Rz { qubit, theta } => {
                let minus = Complex64::new(0.0, -theta / 2.0).exp();
                let plus = Complex64::new(0.0, theta / 2.0).exp();
                let m = [[minus, zero], [zero, plus]];
                apply_single_qubit_rows(&mut u, n, *qubit, m);
            }
            Gate::Cx { control, target } => {
                let c_mask = 1usize << (n - 1 - control);
                let t_mask = 1usize << (n - 1 - target);
                for i in 0..dim {
                    if i & c_mask != 0 && i & t_mask == 0 {
                        let j = i | t_mask;
                        u.swap_rows(i, j);
                    }
                }
            }
            Gate::Crz {
                control,
                target,
                theta,
            } => {
                let c_mask = 1usize << (n - 1 - control);
                let t_mask = 1usize << (n - 1 - target);
                for i in 0..dim {
                    if i & c_mask == 0 {
                        continue;
                    }
                    let angle = if i & t_mask == 0 { -theta } else { *theta };
                    let phase = Complex64::new(0.0, angle / 2.0).exp();
                    for col in 0..dim {
                        u[(i, col)] *= phase;
                    }
                }
            }
        }
    }
    DenseOperator::from_matrix(u)
}

/// Spectral-norm and initial-state errors of a schedule against an exact
/// unitary.
pub fn error_metrics(
    schedule: &TrotterSchedule,
    exact: &DenseOperator,
    psi0: &StateVector,
) -> Result<ErrorMetrics, SimError> {
    let approx = schedule_unitary(schedule)?;
    if approx.dim() != exact.dim() {
        return Err(SimError::DimensionMismatch {
            expected: exact.dim(),
            got: approx.dim(),
        });
    }
    if psi0.dim() != exact.dim() {
        return Err(SimError::DimensionMismatch {
            expected: exact.dim(),
            got: psi0.dim(),
        });
    }
    let diff = exact.sub(&approx);
    let operator_error = diff.spectral_norm();
    let state_error = diff.apply(psi0.amplitudes()).norm();
    Ok(ErrorMetrics {
        operator_error,
        state_error,
    })
}

/// Survival probability of the initially excited emitter in the two-level
/// single-mode model: 1 - (4g^2/(Delta^2+4g^2)) sin^2(Omega t / 2) with
/// Omega = sqrt(Delta^2 + 4g^2).
pub fn jc_survival(g: f64, delta: f64, t: f64) -> f64 {
    let omega_sq = delta * delta + 4.0 * g * g;
    if omega_sq == 0.0 {
        return 1.0;
    }
    let s = (0.5 * omega_sq.sqrt() * t).sin();
    1.0 - (4.0 * g * g / omega_sq) * s * s
}

/// The vacuum-photon, excited-emitter product state |0...0>|1>.
pub fn jc_initial_state(params: &ModelParams) -> StateVector {
    StateVector::basis(params.n_qubits(), 1)
}

/// Survival probability measured on a first-order fixed-ordering schedule.
pub fn jc_survival_simulated(
    params: &ModelParams,
    t: f64,
    n_t: u64,
) -> Result<f64, SimError> {
    let parts = build_schrodinger(params);
    let partition = partition_structured(&parts.h_int, params, Picture::Schrodinger, 0.0);
    let schedule = schedule_first_order(&parts, &partition, t, n_t, TermOrdering::Fixed, 0)?;
    let out = apply_schedule(&schedule, &jc_initial_state(params))?;
    Ok(out.probability(1))
}

/// Truncated coherent-state amplitudes with the untruncated prefactor
/// e^{-|alpha|^2/2} alpha^b / sqrt(b!), b = 0..2^k-1. The result is not
/// normalized.
pub fn coherent_state_unnormalized(alpha: Complex64, k: u32) -> DVector<Complex64> {
    assert!(k >= 1, "at least one photon qubit required");
    let dim = 1usize << k;
    let prefactor = (-alpha.norm_sqr() / 2.0).exp();
    let mut v = DVector::zeros(dim);
    let mut term = Complex64::new(prefactor, 0.0);
    for b in 0..dim {
        if b > 0 {
            term *= alpha / Complex64::new((b as f64).sqrt(), 0.0);
        }
        v[b] = term;
    }
    v
}

/// Truncated coherent state renormalized over the kept Fock levels.
pub fn coherent_state(alpha: Complex64, k: u32) -> DVector<Complex64> {
    let v = coherent_state_unnormalized(alpha, k);
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Expectation of a product of Z letters on the given qubits.
pub fn z_product_expectation(psi: &StateVector, qubits: &[usize]) -> f64 {
    let n = psi.n_qubits();
    let mut mask = 0usize;
    for &q in qubits {
        assert!(q < n, "qubit index out of range");
        mask |= 1 << (n - 1 - q);
    }
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(i, amp)| {
            let sign = if (i & mask).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            sign * amp.norm_sqr()
        })
        .sum()
}

fn embed_sum(sum: &PauliSum, n_total: usize, offset: usize) -> PauliSum {
    let mut out = PauliSum::new(n_total);
    for term in sum.terms() {
        out.push(term.coeff, term.string.embed_at(n_total, offset));
    }
    out.canonicalize();
    out
}

/// Total photon number operator on the full register: the sum of the
/// per-mode Z-decomposed number operators, identity on the emitter qubit.
pub fn mean_photon_operator(params: &ModelParams) -> PauliSum {
    let k = params.trunc_bits() as usize;
    let n_total = params.n_qubits();
    let single = number_operator(params.trunc_bits());
    let mut out = PauliSum::new(n_total);
    for m in 0..params.n_modes() {
        out = out.add(&embed_sum(&single, n_total, m * k));
    }
    out
}

/// Z-decomposition of the squared number operator on one k-qubit mode:
/// a constant, single-Z terms, and ZZ terms whose diagonal is b^2.
pub fn number_squared_operator(k: u32) -> PauliSum {
    let kk = k as usize;
    let n = ((1u64 << k) - 1) as f64;
    let mut sum = PauliSum::new(kk);
    let mut constant = n * n / 4.0;
    for j in 0..kk {
        constant += 2f64.powi(2 * (k as i32 - j as i32 - 2));
    }
    sum.push(
        Complex64::new(constant, 0.0),
        PauliString::identity(kk),
    );
    for j in 0..kk {
        let coeff = -n * 2f64.powi(k as i32 - j as i32 - 2);
        sum.push(
            Complex64::new(coeff, 0.0),
            PauliString::single(kk, j, crate::pauli::Pauli::Z),
        );
    }
    for j in 1..kk {
        for l in 0..j {
            let coeff = 2f64.powi(2 * k as i32 - j as i32 - l as i32 - 3);
            let string = PauliString::single(kk, j, crate::pauli::Pauli::Z)
                .with_letter(l, crate::pauli::Pauli::Z);
            sum.push(Complex64::new(coeff, 0.0), string);
        }
    }
    sum.canonicalize();
    sum
}

/// The Z-type operator combining per-mode squared-number operators with a
/// doubled negative cross term between distinct modes. Its expectation is
/// exposed for comparison only; reported variances use the scalar definition
/// of the second central moment instead.
pub fn variance_operator(params: &ModelParams) -> PauliSum {
    let k = params.trunc_bits() as usize;
    let n_total = params.n_qubits();
    let squared = number_squared_operator(params.trunc_bits());
    let single = number_operator(params.trunc_bits());
    let mut out = PauliSum::new(n_total);
    for m in 0..params.n_modes() {
        out = out.add(&embed_sum(&squared, n_total, m * k));
    }
    for m in 1..params.n_modes() {
        for l in 0..m {
            let a = embed_sum(&single, n_total, m * k);
            let b = embed_sum(&single, n_total, l * k);
            let mut cross = PauliSum::new(n_total);
            for ta in a.terms() {
                for tb in b.terms() {
                    cross.push(
                        ta.coeff * tb.coeff * Complex64::new(-2.0, 0.0),
                        ta.string.z_type_product(&tb.string),
                    );
                }
            }
            cross.canonicalize();
            out = out.add(&cross);
        }
    }
    out
}

/// Photon number statistics of a state on the full register.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStatistics {
    pub mean: f64,
    pub variance: f64,
    pub per_mode_means: Vec<f64>,
}

/// Mean and variance of the total photon number, evaluated through the
/// Z-type decompositions term by term: per-mode means from single-Z
/// expectations, the second moment from per-mode squared operators plus
/// cross-mode products of number operators.
pub fn photon_statistics(
    psi: &StateVector,
    params: &ModelParams,
) -> Result<PhotonStatistics, SimError> {
    if psi.n_qubits() != params.n_qubits() {
        return Err(SimError::DimensionMismatch {
            expected: 1 << params.n_qubits(),
            got: psi.dim(),
        });
    }
    let k = params.trunc_bits() as usize;
    let n = ((1u64 << k) - 1) as f64;
    let n_modes = params.n_modes();

    let mode_qubit = |m: usize, j: usize| m * k + j;
    let z1 = |q: usize| z_product_expectation(psi, &[q]);
    let z2 = |a: usize, b: usize| z_product_expectation(psi, &[a, b]);

    // Ladder weight of bit j inside one mode register.
    let weight = |j: usize| 2f64.powi(k as i32 - j as i32 - 1) / 2.0;

    let per_mode_means: Vec<f64> = (0..n_modes)
        .map(|m| {
            let mut mean = n / 2.0;
            for j in 0..k {
                mean -= weight(j) * z1(mode_qubit(m, j));
            }
            mean
        })
        .collect();
    let mean: f64 = per_mode_means.iter().sum();

    let mut second_moment = 0.0;
    for m in 0..n_modes {
        let mut s = n * n / 4.0;
        for j in 0..k {
            s += 2f64.powi(2 * (k as i32 - j as i32 - 2));
            s -= n * 2f64.powi(k as i32 - j as i32 - 2) * z1(mode_qubit(m, j));
        }
        for j in 1..k {
            for l in 0..j {
                s += 2f64.powi(2 * k as i32 - j as i32 - l as i32 - 3)
                    * z2(mode_qubit(m, j), mode_qubit(m, l));
            }
        }
        second_moment += s;
    }
    for m in 1..n_modes {
        for l in 0..m {
            let mut cross = n * n / 4.0;
            for j in 0..k {
                cross -= n / 2.0 * weight(j) * (z1(mode_qubit(m, j)) + z1(mode_qubit(l, j)));
            }
            for j in 0..k {
                for jp in 0..k {
                    cross += weight(j)
                        * weight(jp)
                        * z2(mode_qubit(m, j), mode_qubit(l, jp));
                }
            }
            second_moment += 2.0 * cross;
        }
    }

    Ok(PhotonStatistics {
        mean,
        variance: second_moment - mean * mean,
        per_mode_means,
    })
}

/// Measurement count guaranteeing additive precision eps on a mean with the
/// given variance, floored at one shot.
pub fn shot_estimate(variance: f64, eps: f64) -> Result<u64, SimError> {
    if eps <= 0.0 {
        return Err(SimError::BadEpsilon(eps));
    }
    Ok((variance / (eps * eps)).ceil().max(1.0) as u64)
}

/// Worst-case measurement count from the photon-number range bound
/// (N_F 2^k)^2 / eps^2.
pub fn worst_case_shot_estimate(params: &ModelParams, eps: f64) -> Result<u64, SimError> {
    if eps <= 0.0 {
        return Err(SimError::BadEpsilon(eps));
    }
    let range = params.n_modes() as f64 * 2f64.powi(params.trunc_bits() as i32);
    Ok(((range * range) / (eps * eps)).ceil().max(1.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::HamiltonianParts;
    use crate::partition::{verify_partition, CommutingPartition, PartitionMethod};
    use crate::pauli::Pauli;
    use crate::trotter::{lower_to_gates, schedule_second_order};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n_qubits: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = DVector::from_iterator(
            1 << n_qubits,
            (0..1usize << n_qubits)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)),
        );
        StateVector::normalized(v).unwrap()
    }

    #[test]
    fn state_vector_checks_shape_and_norm() {
        let good = DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        assert!(StateVector::new(good).is_ok());

        let bad_dim = DVector::from_vec(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(matches!(
            StateVector::new(bad_dim),
            Err(SimError::NotPowerOfTwo(3))
        ));

        let unnormalized = DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        assert!(matches!(
            StateVector::new(unnormalized.clone()),
            Err(SimError::NotNormalized(_))
        ));
        let fixed = StateVector::normalized(unnormalized).unwrap();
        assert!((fixed.norm() - 1.0).abs() < 1e-12);

        let zero = DVector::zeros(4);
        assert!(matches!(
            StateVector::normalized(zero),
            Err(SimError::ZeroVector)
        ));

        let basis = StateVector::basis(2, 3);
        assert_eq!(basis.probability(3), 1.0);
        assert_eq!(basis.n_qubits(), 2);
    }

    #[test]
    fn exact_unitary_reproduces_analytic_cases() {
        let z = PauliString::from_label("Z").unwrap().to_dense();
        let u0 = exact_unitary(&z, 0.0).unwrap();
        assert!(u0.sub(&DenseOperator::identity(1)).spectral_norm() < 1e-12);

        let u = exact_unitary(&z, std::f64::consts::FRAC_PI_2).unwrap();
        let expected = DenseOperator::from_matrix(DMatrix::from_diagonal(
            &DVector::from_vec(vec![
                Complex64::new(0.0, -std::f64::consts::FRAC_PI_2).exp(),
                Complex64::new(0.0, std::f64::consts::FRAC_PI_2).exp(),
            ]),
        ));
        assert!(u.sub(&expected).spectral_norm() < 1e-12);

        let params = ModelParams::uniform(1, 2, 1.0, 1.0, 1.0).unwrap();
        let h = build_schrodinger(&params).total().to_dense();
        let ua = exact_unitary(&h, 0.4).unwrap();
        let ub = exact_unitary(&h, 0.9).unwrap();
        let uab = exact_unitary(&h, 1.3).unwrap();
        assert!(ua.mul(&ub).sub(&uab).spectral_norm() < 1e-10);
        assert!(ua.is_unitary(1e-10));

        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            exact_unitary(&DenseOperator::from_matrix(m), 1.0),
            Err(SimError::NonHermitian)
        ));
    }

    #[test]
    fn reference_propagator_handles_resonant_and_detuned_instances() {
        let resonant = ModelParams::uniform(1, 1, 1.0, 1.0, 1.0).unwrap();
        let t = 0.7;
        let reference = reference_propagator_interaction(&resonant, t, 1e-10).unwrap();
        let frozen = build_interaction(&resonant, 0.0).to_dense();
        let exact = exact_unitary(&frozen, t).unwrap();
        assert!(reference.sub(&exact).spectral_norm() < 1e-9);

        let detuned = ModelParams::new(1, 1, vec![1.6], 1.0, vec![0.8]).unwrap();
        let tol = 1e-10;
        let (reference, slices) =
            reference_propagator_interaction_detailed(&detuned, t, tol).unwrap();
        assert!(slices > 1);
        assert!(reference.is_unitary(1e-9));

        let parts = build_schrodinger(&detuned);
        let free = exact_unitary(&parts.diagonal().to_dense(), t).unwrap();
        let schrodinger = exact_unitary(&parts.total().to_dense(), t).unwrap();
        assert!(
            free.mul(&reference).sub(&schrodinger).spectral_norm() < 10.0 * tol,
            "free evolution times the reference must match the full propagator"
        );
    }

    #[test]
    fn sliced_propagator_freezes_at_the_requested_offsets() {
        let detuned = ModelParams::new(1, 1, vec![1.6], 1.0, vec![0.8]).unwrap();
        let t = 0.9;

        let left_one = sliced_propagator_interaction(&detuned, t, 1, SliceIntegrator::Left);
        let frozen_start = exact_unitary(&build_interaction(&detuned, 0.0).to_dense(), t).unwrap();
        assert!(left_one.sub(&frozen_start).spectral_norm() < 1e-12);

        let mid_one = sliced_propagator_interaction(&detuned, t, 1, SliceIntegrator::Midpoint);
        let frozen_mid =
            exact_unitary(&build_interaction(&detuned, t / 2.0).to_dense(), t).unwrap();
        assert!(mid_one.sub(&frozen_mid).spectral_norm() < 1e-12);

        let reference = reference_propagator_interaction(&detuned, t, 1e-10).unwrap();
        let l = 16;
        let left_err = sliced_propagator_interaction(&detuned, t, l, SliceIntegrator::Left)
            .sub(&reference)
            .spectral_norm();
        let mid_err = sliced_propagator_interaction(&detuned, t, l, SliceIntegrator::Midpoint)
            .sub(&reference)
            .spectral_norm();
        assert!(mid_err < left_err, "midpoint {mid_err} vs left {left_err}");
        assert!(
            sliced_propagator_interaction(&detuned, t, l, SliceIntegrator::Midpoint)
                .is_unitary(1e-10)
        );
    }

    #[test]
    fn apply_schedule_matches_schedule_unitary() {
        let params = ModelParams::new(2, 1, vec![1.2, 0.9], 1.0, vec![0.7, 0.5]).unwrap();
        let parts = build_schrodinger(&params);
        let partition = partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
        let schedule =
            schedule_first_order(&parts, &partition, 0.6, 3, TermOrdering::Fixed, 0).unwrap();
        let u = schedule_unitary(&schedule).unwrap();
        assert!(u.is_unitary(1e-10));
        for seed in 0..5 {
            let psi = random_state(params.n_qubits(), seed);
            let via_state = apply_schedule(&schedule, &psi).unwrap();
            let via_matrix = u.apply(psi.amplitudes());
            assert!((via_state.amplitudes() - via_matrix).norm() < 1e-10);
        }

        let wrong = random_state(2, 0);
        assert!(matches!(
            apply_schedule(&schedule, &wrong),
            Err(SimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_schedule_is_the_identity() {
        let schedule = TrotterSchedule {
            n_qubits: 2,
            steps: Vec::new(),
            meta: crate::trotter::ScheduleMeta {
                picture: Picture::Schrodinger,
                order: 1,
                slices: 1,
                trotter_steps: 1,
                duration: 0.0,
                ordering: TermOrdering::Fixed,
                seed: None,
            },
        };
        let u = schedule_unitary(&schedule).unwrap();
        assert!(u.sub(&DenseOperator::identity(2)).spectral_norm() < 1e-15);
        let psi = random_state(2, 9);
        let out = apply_schedule(&schedule, &psi).unwrap();
        assert_eq!(out, psi);
    }

    fn single_group_toy() -> (HamiltonianParts, CommutingPartition) {
        let n = 2;
        let mut h_int = PauliSum::new(n);
        h_int.push(
            Complex64::new(0.3, 0.0),
            PauliString::from_label("XX").unwrap(),
        );
        h_int.push(
            Complex64::new(0.2, 0.0),
            PauliString::from_label("YY").unwrap(),
        );
        h_int.canonicalize();
        let parts = HamiltonianParts {
            h_photon: PauliSum::new(n),
            h_atom: PauliSum::new(n),
            h_int,
            identity_shift: 0.0,
        };
        let partition = CommutingPartition {
            groups: vec![vec![0, 1]],
            method: PartitionMethod::Greedy,
            seed: None,
            used_fallback: false,
        };
        assert!(verify_partition(&parts.h_int, &partition));
        (parts, partition)
    }

    #[test]
    fn single_commuting_group_makes_every_order_exact() {
        let (parts, partition) = single_group_toy();
        let t = 0.9;
        let exact = exact_unitary(&parts.total().to_dense(), t).unwrap();
        let s1 = schedule_first_order(&parts, &partition, t, 1, TermOrdering::Fixed, 0).unwrap();
        let s2 = schedule_second_order(&parts, &partition, t, 1, TermOrdering::Fixed, 0).unwrap();
        let u1 = schedule_unitary(&s1).unwrap();
        let u2 = schedule_unitary(&s2).unwrap();
        assert!(u1.sub(&exact).spectral_norm() < 1e-10);
        assert!(u2.sub(&exact).spectral_norm() < 1e-10);
        assert!(u1.sub(&u2).spectral_norm() < 1e-10);
    }

    #[test]
    fn error_metrics_vanish_on_an_exact_schedule_and_bound_state_error() {
        let (parts, partition) = single_group_toy();
        let t = 0.8;
        let exact = exact_unitary(&parts.total().to_dense(), t).unwrap();
        let schedule =
            schedule_first_order(&parts, &partition, t, 1, TermOrdering::Fixed, 0).unwrap();
        let psi = random_state(2, 1);
        let metrics = error_metrics(&schedule, &exact, &psi).unwrap();
        assert!(metrics.operator_error < 1e-10);
        assert!(metrics.state_error < 1e-10);

        let params = ModelParams::uniform(1, 2, 1.0, 1.0, 1.0).unwrap();
        let parts = build_schrodinger(&params);
        let partition = partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
        let exact = exact_unitary(&parts.total().to_dense(), 1.0).unwrap();
        let schedule =
            schedule_first_order(&parts, &partition, 1.0, 4, TermOrdering::Fixed, 0).unwrap();
        for seed in 0..50 {
            let psi = random_state(params.n_qubits(), seed);
            let metrics = error_metrics(&schedule, &exact, &psi).unwrap();
            assert!(metrics.state_error <= metrics.operator_error + 1e-9);
            assert!(metrics.operator_error > 0.0);
        }
    }

    #[test]
    fn lowered_gates_match_the_schedule_unitary() {
        let params = ModelParams::new(1, 2, vec![1.4], 1.0, vec![0.8]).unwrap();
        let parts = build_schrodinger(&params);
        let partition = partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
        for order in [1u8, 2u8] {
            let schedule = match order {
                1 => schedule_first_order(&parts, &partition, 0.7, 2, TermOrdering::Fixed, 0)
                    .unwrap(),
                _ => schedule_second_order(&parts, &partition, 0.7, 2, TermOrdering::Fixed, 0)
                    .unwrap(),
            };
            let dense_schedule = schedule_unitary(&schedule).unwrap();
            let gates = lower_to_gates(&schedule);
            let dense_gates = gate_list_unitary(&gates);
            assert!(
                dense_schedule.sub(&dense_gates).spectral_norm() < 1e-10,
                "order {order} lowering diverged"
            );
        }
    }

    #[test]
    fn controlled_gate_lists_apply_conditionally() {
        let (parts, partition) = single_group_toy();
        let schedule =
            schedule_first_order(&parts, &partition, 0.5, 1, TermOrdering::Fixed, 0).unwrap();
        let gates = lower_to_gates(&schedule);
        let data_u = gate_list_unitary(&gates);
        let ancilla = 2;
        let controlled_gates = crate::trotter::controlled(&gates, ancilla).unwrap();
        let full = gate_list_unitary(&controlled_gates);

        // The ancilla is the last qubit, so basis indices interleave: even
        // indices carry ancilla |0>, odd indices ancilla |1>.
        let dim = data_u.dim();
        for row in 0..dim {
            for col in 0..dim {
                let block0 = full.matrix()[(2 * row, 2 * col)];
                let block1 = full.matrix()[(2 * row + 1, 2 * col + 1)];
                let expect0 = if row == col {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((block0 - expect0).norm() < 1e-10);
                assert!((block1 - data_u.matrix()[(row, col)]).norm() < 1e-10);
                let off0 = full.matrix()[(2 * row, 2 * col + 1)];
                let off1 = full.matrix()[(2 * row + 1, 2 * col)];
                assert!(off0.norm() < 1e-12 && off1.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jc_survival_closed_form_examples() {
        assert!((jc_survival(1.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!(jc_survival(1.0, 0.0, std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((jc_survival(1.0, 0.0, std::f64::consts::FRAC_PI_4) - 0.5).abs() < 1e-15);
        assert!((jc_survival(0.0, 1.0, 2.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simulated_jc_survival_tracks_the_closed_form() {
        let delta = 1.0;
        let g = 1.0;
        let params = ModelParams::new(1, 1, vec![1.0 + delta], 1.0, vec![g]).unwrap();
        for &t in &[0.4, 1.1, 2.9] {
            let simulated = jc_survival_simulated(&params, t, 512).unwrap();
            let analytic = jc_survival(g, delta, t);
            assert!(
                (simulated - analytic).abs() <= 1e-2,
                "t={t}: {simulated} vs {analytic}"
            );
        }
    }

    #[test]
    fn coherent_state_amplitudes_and_truncation() {
        let zero = coherent_state(Complex64::new(0.0, 0.0), 3);
        assert!((zero[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(zero.rows_range(1..).norm() < 1e-15);

        let v = coherent_state(Complex64::new(1.0, 0.0), 2);
        let raw = [1.0, 1.0, 1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt()];
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (b, &expect) in raw.iter().enumerate() {
            assert!((v[b].re - expect / norm).abs() < 1e-12, "level {b}");
            assert!(v[b].im.abs() < 1e-15);
        }

        let unnormalized = coherent_state_unnormalized(Complex64::new(1.0, 0.0), 2);
        assert!(unnormalized.norm() < 1.0);
        assert!((unnormalized[0].re - (-0.5f64).exp()).abs() < 1e-15);
    }

    fn with_atom_ground(photon: &DVector<Complex64>) -> StateVector {
        let mut v = DVector::zeros(photon.len() * 2);
        for (b, amp) in photon.iter().enumerate() {
            v[2 * b] = *amp;
        }
        StateVector::normalized(v).unwrap()
    }

    #[test]
    fn coherent_state_mean_approaches_alpha_squared() {
        let params = ModelParams::uniform(1, 4, 1.0, 1.0, 0.5).unwrap();
        let photon = coherent_state(Complex64::new(1.0, 0.0), 4);
        let psi = with_atom_ground(&photon);
        let stats = photon_statistics(&psi, &params).unwrap();
        assert!(
            (stats.mean - 1.0).abs() < 1e-3,
            "mean {} should be close to |alpha|^2 = 1",
            stats.mean
        );
    }

    #[test]
    fn photon_statistics_on_fock_and_vacuum_states() {
        let params = ModelParams::uniform(1, 2, 1.0, 1.0, 1.0).unwrap();
        // Fock level 2 with the emitter in its lower state: bits 10,0.
        let psi = StateVector::basis(3, 0b100);
        let stats = photon_statistics(&psi, &params).unwrap();
        assert!((stats.mean - 2.0).abs() < 1e-12);
        assert!(stats.variance.abs() < 1e-12);
        assert_eq!(stats.per_mode_means.len(), 1);

        let vacuum = StateVector::basis(3, 0);
        let stats = photon_statistics(&vacuum, &params).unwrap();
        assert!(stats.mean.abs() < 1e-12);
        assert!(stats.variance.abs() < 1e-12);

        let wrong = StateVector::basis(2, 0);
        assert!(matches!(
            photon_statistics(&wrong, &params),
            Err(SimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn number_squared_operator_is_the_squared_diagonal() {
        for k in 1..=3u32 {
            let op = number_squared_operator(k).to_dense();
            let dim = 1usize << k;
            for b in 0..dim {
                for c in 0..dim {
                    let expect = if b == c { (b * b) as f64 } else { 0.0 };
                    assert!(
                        (op.matrix()[(b, c)] - Complex64::new(expect, 0.0)).norm() < 1e-10,
                        "k={k} entry ({b},{c})"
                    );
                }
            }
        }
    }

    #[test]
    fn photon_statistics_match_dense_operator_evaluation() {
        let params = ModelParams::new(2, 2, vec![1.1, 0.9], 1.0, vec![0.6, 0.4]).unwrap();
        let psi = random_state(params.n_qubits(), 42);
        let stats = photon_statistics(&psi, &params).unwrap();

        let n_op = mean_photon_operator(&params).to_dense();
        let v = psi.amplitudes();
        let mean_dense = v.dotc(&n_op.apply(v)).re;
        assert!((stats.mean - mean_dense).abs() < 1e-10);

        let n_sq = n_op.mul(&n_op);
        let second_dense = v.dotc(&n_sq.apply(v)).re;
        assert!((stats.variance - (second_dense - mean_dense * mean_dense)).abs() < 1e-10);

        let per_mode_dense: f64 = stats.per_mode_means.iter().sum();
        assert!((per_mode_dense - mean_dense).abs() < 1e-10);
    }

    #[test]
    fn variance_operator_is_z_type_and_single_mode_consistent() {
        let params = ModelParams::new(2, 2, vec![1.1, 0.9], 1.0, vec![0.6, 0.4]).unwrap();
        let op = variance_operator(&params);
        for term in op.terms() {
            for q in 0..op.n_qubits() {
                assert!(matches!(term.string.letter(q), Pauli::I | Pauli::Z));
            }
        }

        let single = ModelParams::uniform(1, 2, 1.0, 1.0, 1.0).unwrap();
        let single_op = variance_operator(&single).to_dense();
        let squared = embed_sum(&number_squared_operator(2), 3, 0).to_dense();
        assert!(single_op.sub(&squared).spectral_norm() < 1e-12);
    }

    #[test]
    fn shot_estimates_floor_and_scale() {
        assert_eq!(shot_estimate(0.0, 0.1).unwrap(), 1);
        assert_eq!(shot_estimate(4.0, 0.1).unwrap(), 400);
        assert!(matches!(
            shot_estimate(1.0, 0.0),
            Err(SimError::BadEpsilon(_))
        ));
        let params = ModelParams::uniform(2, 2, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(worst_case_shot_estimate(&params, 0.1).unwrap(), 6400);
    }

    #[test]
    fn resonant_single_mode_first_order_is_exact() {
        // At resonance the single-mode interaction splits into disjoint
        // two-level blocks that also absorb the free part, so every product
        // formula is exact up to rounding.
        let params = ModelParams::uniform(1, 2, 1.0, 1.0, 1.0).unwrap();
        let parts = build_schrodinger(&params);
        let partition = partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
        let exact = exact_unitary(&parts.total().to_dense(), 1.0).unwrap();
        let psi = jc_initial_state(&params);
        let schedule =
            schedule_first_order(&parts, &partition, 1.0, 4, TermOrdering::Fixed, 0).unwrap();
        let metrics = error_metrics(&schedule, &exact, &psi).unwrap();
        assert!(metrics.operator_error < 1e-10);
    }

    #[test]
    fn small_instance_error_is_below_the_first_order_bound() {
        let params = ModelParams::new(1, 2, vec![1.7], 1.0, vec![1.0]).unwrap();
        let parts = build_schrodinger(&params);
        let partition = partition_structured(&parts.h_int, &params, Picture::Schrodinger, 0.0);
        let exact = exact_unitary(&parts.total().to_dense(), 1.0).unwrap();
        let psi = jc_initial_state(&params);

        let mut previous = f64::INFINITY;
        for n_t in [8u64, 16, 32] {
            let schedule =
                schedule_first_order(&parts, &partition, 1.0, n_t, TermOrdering::Fixed, 0)
                    .unwrap();
            let metrics = error_metrics(&schedule, &exact, &psi).unwrap();
            let bound = crate::bounds::first_order_bound_schrodinger(
                &params,
                partition.group_count(),
                1.0,
                n_t,
            )
            .unwrap();
            assert!(metrics.operator_error <= bound.epsilon_bound);
            assert!(metrics.operator_error > 1e-12);
            assert!(metrics.operator_error < previous);
            previous = metrics.operator_error;
        }
    }
}
