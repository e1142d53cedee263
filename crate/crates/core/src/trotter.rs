//! Product-formula schedule synthesis: first, second, and higher even-order
//! Trotter schedules in the Schrodinger picture, sliced schedules in the
//! interaction picture, and lowering of schedules to an elementary gate set
//! with optional ancilla control.
//!
//! A schedule lists steps in application order: a state is evolved by
//! applying the steps front to back, so the synthesized unitary is the
//! reverse-order matrix product of the step unitaries.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonian::{build_interaction, build_schrodinger, HamiltonianParts};
use crate::model::ModelParams;
use crate::partition::{partition_structured, verify_partition, CommutingPartition, Picture};
use crate::pauli::{Pauli, PauliString, PauliSum};

#[derive(Debug, Error, PartialEq)]
pub enum TrotterError {
    #[error("partition does not split the interaction sum into commuting groups")]
    InvalidPartition,
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("slice count must be at least 1")]
    ZeroSlices,
    #[error("duration must be finite, got {0}")]
    NonFiniteDuration(f64),
    #[error("product formula order {0} is not supported here")]
    UnsupportedOrder(u8),
    #[error("recursion index must be at least 2, got {0}")]
    RecursionIndex(u32),
    #[error("expected a single-Z diagonal term, found {0}")]
    NonDiagonalTerm(String),
    #[error("ancilla qubit {ancilla} overlaps the {data_qubits}-qubit data register")]
    AncillaOverlap { ancilla: usize, data_qubits: usize },
    #[error("gate list already contains controlled rotations")]
    AlreadyControlled,
}

/// Order in which group exponentials and their terms are emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrdering {
    /// Groups in partition order, terms within a group in canonical order.
    Fixed,
    /// Fresh seeded permutations of group order and within-group term order
    /// for every Trotter step.
    Randomized,
}

/// Where each interaction-picture slice freezes its time argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceIntegrator {
    /// Slice k uses the Hamiltonian at the slice start, t_k = k dt.
    Left,
    /// Slice k uses the Hamiltonian at the slice midpoint, t_k = (k + 1/2) dt.
    Midpoint,
}

/// One entry of a schedule. Every rotation angle is the coefficient of the
/// unitary exp(-i angle P), so lowering maps it to RZ(2 angle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleStep {
    /// Commuting single-qubit Z rotations, one (angle, qubit) pair each.
    DiagonalLayer { rotations: Vec<(f64, usize)> },
    /// The exponential of one commuting group, emitted as a product of the
    /// individual Pauli exponentials listed here.
    GroupExp {
        group: usize,
        rotations: Vec<(f64, PauliString)>,
    },
}

impl ScheduleStep {
    pub fn rotation_count(&self) -> usize {
        match self {
            ScheduleStep::DiagonalLayer { rotations } => rotations.len(),
            ScheduleStep::GroupExp { rotations, .. } => rotations.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMeta {
    pub picture: Picture,
    /// Product formula order: 1, 2, or an even order 2r from the recursion.
    pub order: u32,
    /// Outer time slices; always 1 in the Schrodinger picture.
    pub slices: u64,
    /// Trotter steps per slice.
    pub trotter_steps: u64,
    pub duration: f64,
    pub ordering: TermOrdering,
    /// RNG seed, present only for randomized ordering.
    pub seed: Option<u64>,
}

/// A synthesized product-formula circuit at the Pauli-exponential level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterSchedule {
    pub n_qubits: usize,
    pub steps: Vec<ScheduleStep>,
    pub meta: ScheduleMeta,
}

impl TrotterSchedule {
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Total number of rotations across all steps.
    pub fn rotation_count(&self) -> usize {
        self.steps.iter().map(ScheduleStep::rotation_count).sum()
    }
}

/// The Suzuki recursion weight u_r = 1 / (4 - 4^(1/(2r-1))).
pub fn recursion_weight(r: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * f64::from(r) - 1.0)))
}

fn single_z_qubit(s: &PauliString) -> Option<usize> {
    let mut found = None;
    for q in 0..s.n_qubits() {
        match s.letter(q) {
            Pauli::I => {}
            Pauli::Z if found.is_none() => found = Some(q),
            _ => return None,
        }
    }
    found
}

/// Unit-time (coefficient, qubit) pairs for the diagonal part of the
/// Hamiltonian. The scalar identity shift is a global phase and is dropped.
fn diagonal_entries(parts: &HamiltonianParts) -> Result<Vec<(f64, usize)>, TrotterError> {
    let diag = parts.diagonal();
    let mut out = Vec::with_capacity(diag.len());
    for term in diag.terms() {
        let qubit = single_z_qubit(&term.string)
            .ok_or_else(|| TrotterError::NonDiagonalTerm(term.string.label()))?;
        out.push((term.coeff.re, qubit));
    }
    Ok(out)
}

/// Emits sweeps over the commuting groups of one interaction sum, drawing
/// permutations from the RNG when one is present.
struct SweepBuilder<'a> {
    sum: &'a PauliSum,
    groups: &'a [Vec<usize>],
    diag: &'a [(f64, usize)],
    rng: Option<ChaCha8Rng>,
}

impl SweepBuilder<'_> {
    fn sweep(&mut self) -> Vec<(usize, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.groups.len()).collect();
        if let Some(rng) = self.rng.as_mut() {
            order.shuffle(rng);
        }
        let mut out = Vec::with_capacity(order.len());
        for g in order {
            let mut terms = self.groups[g].clone();
            if let Some(rng) = self.rng.as_mut() {
                terms.shuffle(rng);
            }
            out.push((g, terms));
        }
        out
    }

    fn push_groups(&self, sweep: &[(usize, Vec<usize>)], dt: f64, out: &mut Vec<ScheduleStep>) {
        for (g, terms) in sweep {
            let rotations = terms
                .iter()
                .map(|&i| {
                    let term = &self.sum.terms()[i];
                    (term.coeff.re * dt, term.string.clone())
                })
                .collect();
            out.push(ScheduleStep::GroupExp {
                group: *g,
                rotations,
            });
        }
    }

    fn push_diagonal(&self, dt: f64, out: &mut Vec<ScheduleStep>) {
        out.push(ScheduleStep::DiagonalLayer {
            rotations: self.diag.iter().map(|&(c, q)| (c * dt, q)).collect(),
        });
    }

    fn emit_first_order_step(&mut self, dt: f64, out: &mut Vec<ScheduleStep>) {
        self.push_diagonal(dt, out);
        let sweep = self.sweep();
        self.push_groups(&sweep, dt, out);
    }

    fn emit_second_order_step(&mut self, dt: f64, out: &mut Vec<ScheduleStep>) {
        self.push_diagonal(dt / 2.0, out);
        let sweep = self.sweep();
        self.push_groups(&sweep, dt / 2.0, out);
        self.push_groups(&mirror(&sweep), dt / 2.0, out);
        self.push_diagonal(dt / 2.0, out);
    }

    fn emit_even_order_step(&mut self, order: u32, dt: f64, out: &mut Vec<ScheduleStep>) {
        if order == 2 {
            self.emit_second_order_step(dt, out);
            return;
        }
        let u = recursion_weight(order / 2);
        for _ in 0..2 {
            self.emit_even_order_step(order - 2, u * dt, out);
        }
        self.emit_even_order_step(order - 2, (1.0 - 4.0 * u) * dt, out);
        for _ in 0..2 {
            self.emit_even_order_step(order - 2, u * dt, out);
        }
    }
}

fn mirror(sweep: &[(usize, Vec<usize>)]) -> Vec<(usize, Vec<usize>)> {
    sweep
        .iter()
        .rev()
        .map(|(g, terms)| (*g, terms.iter().rev().copied().collect()))
        .collect()
}

fn check_schrodinger_inputs(
    parts: &HamiltonianParts,
    partition: &CommutingPartition,
    duration: f64,
    n_t: u64,
) -> Result<Vec<(f64, usize)>, TrotterError> {
    if n_t == 0 {
        return Err(TrotterError::ZeroSteps);
    }
    if !duration.is_finite() {
        return Err(TrotterError::NonFiniteDuration(duration));
    }
    if !verify_partition(&parts.h_int, partition) {
        return Err(TrotterError::InvalidPartition);
    }
    diagonal_entries(parts)
}

fn seeded_rng(ordering: TermOrdering, seed: u64) -> Option<ChaCha8Rng> {
    match ordering {
        TermOrdering::Fixed => None,
        TermOrdering::Randomized => Some(ChaCha8Rng::seed_from_u64(seed)),
    }
}

fn meta_seed(ordering: TermOrdering, seed: u64) -> Option<u64> {
    match ordering {
        TermOrdering::Fixed => None,
        TermOrdering::Randomized => Some(seed),
    }
}

/// First-order schedule: N_T repetitions of a diagonal layer followed by one
/// exponential per commuting group.
pub fn schedule_first_order(
    parts: &HamiltonianParts,
    partition: &CommutingPartition,
    duration: f64,
    n_t: u64,
    ordering: TermOrdering,
    seed: u64,
) -> Result<TrotterSchedule, TrotterError> {
    let diag = check_schrodinger_inputs(parts, partition, duration, n_t)?;
    let dt = duration / n_t as f64;
    let mut builder = SweepBuilder {
        sum: &parts.h_int,
        groups: &partition.groups,
        diag: &diag,
        rng: seeded_rng(ordering, seed),
    };
    let mut steps = Vec::new();
    for _ in 0..n_t {
        builder.emit_first_order_step(dt, &mut steps);
    }
    Ok(TrotterSchedule {
        n_qubits: parts.n_qubits(),
        steps,
        meta: ScheduleMeta {
            picture: Picture::Schrodinger,
            order: 1,
            slices: 1,
            trotter_steps: n_t,
            duration,
            ordering,
            seed: meta_seed(ordering, seed),
        },
    })
}

/// Second-order (symmetric) schedule: each step is a palindrome of half-angle
/// layers, diagonal, forward groups, reversed groups, diagonal.
pub fn schedule_second_order(
    parts: &HamiltonianParts,
    partition: &CommutingPartition,
    duration: f64,
    n_t: u64,
    ordering: TermOrdering,
    seed: u64,
) -> Result<TrotterSchedule, TrotterError> {
    let diag = check_schrodinger_inputs(parts, partition, duration, n_t)?;
    let dt = duration / n_t as f64;
    let mut builder = SweepBuilder {
        sum: &parts.h_int,
        groups: &partition.groups,
        diag: &diag,
        rng: seeded_rng(ordering, seed),
    };
    let mut steps = Vec::new();
    for _ in 0..n_t {
        builder.emit_second_order_step(dt, &mut steps);
    }
    Ok(TrotterSchedule {
        n_qubits: parts.n_qubits(),
        steps,
        meta: ScheduleMeta {
            picture: Picture::Schrodinger,
            order: 2,
            slices: 1,
            trotter_steps: n_t,
            duration,
            ordering,
            seed: meta_seed(ordering, seed),
        },
    })
}

/// Even-order 2r schedule from the five-fold Suzuki recursion on the order
/// 2r-2 formula, with weight [`recursion_weight`]. Requires r >= 2.
pub fn schedule_higher_order(
    r: u32,
    parts: &HamiltonianParts,
    partition: &CommutingPartition,
    duration: f64,
    n_t: u64,
    ordering: TermOrdering,
    seed: u64,
) -> Result<TrotterSchedule, TrotterError> {
    if r < 2 {
        return Err(TrotterError::RecursionIndex(r));
    }
    let diag = check_schrodinger_inputs(parts, partition, duration, n_t)?;
    let dt = duration / n_t as f64;
    let mut builder = SweepBuilder {
        sum: &parts.h_int,
        groups: &partition.groups,
        diag: &diag,
        rng: seeded_rng(ordering, seed),
    };
    let mut steps = Vec::new();
    for _ in 0..n_t {
        builder.emit_even_order_step(2 * r, dt, &mut steps);
    }
    Ok(TrotterSchedule {
        n_qubits: parts.n_qubits(),
        steps,
        meta: ScheduleMeta {
            picture: Picture::Schrodinger,
            order: 2 * r,
            slices: 1,
            trotter_steps: n_t,
            duration,
            ordering,
            seed: meta_seed(ordering, seed),
        },
    })
}

/// Interaction-picture schedule: the duration is split into L slices, each
/// slice Trotterizes the interaction Hamiltonian frozen at the slice start or
/// midpoint, and one final diagonal layer applies the free evolution over the
/// whole duration.
#[allow(clippy::too_many_arguments)]
pub fn schedule_interaction(
    params: &ModelParams,
    duration: f64,
    slices: u64,
    n_t: u64,
    order: u8,
    integrator: SliceIntegrator,
    ordering: TermOrdering,
    seed: u64,
) -> Result<TrotterSchedule, TrotterError> {
    if slices == 0 {
        return Err(TrotterError::ZeroSlices);
    }
    if n_t == 0 {
        return Err(TrotterError::ZeroSteps);
    }
    if !duration.is_finite() {
        return Err(TrotterError::NonFiniteDuration(duration));
    }
    if !matches!(order, 1 | 2) {
        return Err(TrotterError::UnsupportedOrder(order));
    }

    let free_parts = build_schrodinger(params);
    let diag = diagonal_entries(&free_parts)?;
    let dt_slice = duration / slices as f64;
    let offset = match integrator {
        SliceIntegrator::Left => 0.0,
        SliceIntegrator::Midpoint => 0.5,
    };
    let mut rng = seeded_rng(ordering, seed);
    let mut steps = Vec::new();
    for k in 0..slices {
        let t_k = (k as f64 + offset) * dt_slice;
        let h_slice = build_interaction(params, t_k);
        let partition = partition_structured(&h_slice, params, Picture::Interaction, t_k);
        if !verify_partition(&h_slice, &partition) {
            return Err(TrotterError::InvalidPartition);
        }
        let mut builder = SweepBuilder {
            sum: &h_slice,
            groups: &partition.groups,
            diag: &[],
            rng: rng.take(),
        };
        let dt = dt_slice / n_t as f64;
        for _ in 0..n_t {
            if order == 1 {
                let sweep = builder.sweep();
                builder.push_groups(&sweep, dt, &mut steps);
            } else {
                let sweep = builder.sweep();
                builder.push_groups(&sweep, dt / 2.0, &mut steps);
                builder.push_groups(&mirror(&sweep), dt / 2.0, &mut steps);
            }
        }
        rng = builder.rng.take();
    }
    steps.push(ScheduleStep::DiagonalLayer {
        rotations: diag.iter().map(|&(c, q)| (c * duration, q)).collect(),
    });
    Ok(TrotterSchedule {
        n_qubits: params.n_qubits(),
        steps,
        meta: ScheduleMeta {
            picture: Picture::Interaction,
            order: u32::from(order),
            slices,
            trotter_steps: n_t,
            duration,
            ordering,
            seed: meta_seed(ordering, seed),
        },
    })
}

/// Elementary gates for lowered schedules. RZ(theta) denotes
/// exp(-i theta Z / 2); RX+/RX- are X-axis rotations by +pi/2 and -pi/2.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Cx { control: usize, target: usize },
    H { qubit: usize },
    RxPlus { qubit: usize },
    RxMinus { qubit: usize },
    Rz { qubit: usize, theta: f64 },
    Crz { control: usize, target: usize, theta: f64 },
}

#[derive(Serialize, Deserialize)]
struct GateWire {
    g: String,
    q: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            Gate::Cx { control, target } => GateWire {
                g: "CX".into(),
                q: vec![*control, *target],
                theta: None,
            },
            Gate::H { qubit } => GateWire {
                g: "H".into(),
                q: vec![*qubit],
                theta: None,
            },
            Gate::RxPlus { qubit } => GateWire {
                g: "RX+".into(),
                q: vec![*qubit],
                theta: None,
            },
            Gate::RxMinus { qubit } => GateWire {
                g: "RX-".into(),
                q: vec![*qubit],
                theta: None,
            },
            Gate::Rz { qubit, theta } => GateWire {
                g: "RZ".into(),
                q: vec![*qubit],
                theta: Some(*theta),
            },
            Gate::Crz {
                control,
                target,
                theta,
            } => GateWire {
                g: "CRZ".into(),
                q: vec![*control, *target],
                theta: Some(*theta),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = GateWire::deserialize(deserializer)?;
        let gate = match (wire.g.as_str(), wire.q.as_slice(), wire.theta) {
            ("CX", &[control, target], None) => Gate::Cx { control, target },
            ("H", &[qubit], None) => Gate::H { qubit },
            ("RX+", &[qubit], None) => Gate::RxPlus { qubit },
            ("RX-", &[qubit], None) => Gate::RxMinus { qubit },
            ("RZ", &[qubit], Some(theta)) => Gate::Rz { qubit, theta },
            ("CRZ", &[control, target], Some(theta)) => Gate::Crz {
                control,
                target,
                theta,
            },
            _ => {
                return Err(serde::de::Error::custom(format!(
                    "malformed gate record \"{}\"",
                    wire.g
                )))
            }
        };
        Ok(gate)
    }
}

/// A flat gate sequence in application order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateList {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateList {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn rz_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Rz { .. }))
            .count()
    }

    pub fn crz_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Crz { .. }))
            .count()
    }
}

/// Lowers exp(-i angle P) to basis changes, a CNOT parity ladder onto the
/// last active qubit, and a single RZ(2 angle). X positions are conjugated by
/// H and Y positions by RX(pi/2), which maps Y to Z. Identity strings produce
/// no gates.
fn lower_pauli_exponential(angle: f64, string: &PauliString, gates: &mut Vec<Gate>) {
    let active: Vec<(usize, Pauli)> = (0..string.n_qubits())
        .filter_map(|q| match string.letter(q) {
            Pauli::I => None,
            p => Some((q, p)),
        })
        .collect();
    let Some(&(last, _)) = active.last() else {
        return;
    };
    for &(q, p) in &active {
        match p {
            Pauli::X => gates.push(Gate::H { qubit: q }),
            Pauli::Y => gates.push(Gate::RxPlus { qubit: q }),
            _ => {}
        }
    }
    for pair in active.windows(2) {
        gates.push(Gate::Cx {
            control: pair[0].0,
            target: pair[1].0,
        });
    }
    gates.push(Gate::Rz {
        qubit: last,
        theta: 2.0 * angle,
    });
    for pair in active.windows(2).rev() {
        gates.push(Gate::Cx {
            control: pair[0].0,
            target: pair[1].0,
        });
    }
    for &(q, p) in &active {
        match p {
            Pauli::X => gates.push(Gate::H { qubit: q }),
            Pauli::Y => gates.push(Gate::RxMinus { qubit: q }),
            _ => {}
        }
    }
}

/// Lowers a schedule to the elementary gate set, one RZ per rotation.
pub fn lower_to_gates(schedule: &TrotterSchedule) -> GateList {
    let mut gates = Vec::new();
    for step in &schedule.steps {
        match step {
            ScheduleStep::DiagonalLayer { rotations } => {
                for &(angle, qubit) in rotations {
                    gates.push(Gate::Rz {
                        qubit,
                        theta: 2.0 * angle,
                    });
                }
            }
            ScheduleStep::GroupExp { rotations, .. } => {
                for (angle, string) in rotations {
                    lower_pauli_exponential(*angle, string, &mut gates);
                }
            }
        }
    }
    GateList {
        n_qubits: schedule.n_qubits,
        gates,
    }
}

/// Controls a lowered gate list on an ancilla: every RZ becomes a CRZ from
/// the ancilla, all Clifford conjugation gates stay unchanged. With the
/// ancilla in |0> the circuit acts as the identity on the data register; in
/// |1> it applies the original unitary.
pub fn controlled(gates: &GateList, ancilla: usize) -> Result<GateList, TrotterError> {
    if ancilla < gates.n_qubits {
        return Err(TrotterError::AncillaOverlap {
            ancilla,
            data_qubits: gates.n_qubits,
        });
    }
    let mut out = Vec::with_capacity(gates.gates.len());
    for gate in &gates.gates {
        out.push(match gate {
            Gate::Rz { qubit, theta } => Gate::Crz {
                control: ancilla,
                target: *qubit,
                theta: *theta,
            },
            Gate::Crz { .. } => return Err(TrotterError::AlreadyControlled),
            other => other.clone(),
        });
    }
    Ok(GateList {
        n_qubits: ancilla + 1,
        gates: out,
    })
}
