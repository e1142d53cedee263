//! Assembly of the extended Jaynes-Cummings Hamiltonian as Pauli sums, in
//! the Schroedinger and interaction pictures, plus the closed-form term
//! counts.
//!
//! Basis conventions: each mode stores its photon count in binary across its
//! `k` qubits (qubit 0 of the block is the most significant bit), the
//! emitter qubit comes last, and the emitter's excited state is `|1>`. With
//! those choices the free emitter term is `-(omega/2) Z` on the atom qubit
//! and the interaction attaches `Re(beta) X + Im(beta) Y` to each photon
//! string, where `beta` folds in the ladder coefficient, the coupling and
//! (in the interaction picture) the detuning phase.
//!
//! Builders materialize explicit strings and therefore require the full
//! register to fit in 64 qubits; the count formulas have no such limit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::pauli::{ladder_terms, Axis, LadderKind, Pauli, PauliString, PauliSum, Term, TermTag};

/// The three Hermitian pieces of the Schroedinger-picture Hamiltonian,
/// with the scalar identity offset of the photon term kept out of band.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    /// Photon energies: one Z string per mode qubit.
    pub h_photon: PauliSum,
    /// Emitter energy: a single Z string on the atom qubit.
    pub h_atom: PauliSum,
    /// Photon-emitter exchange, tagged for the structured partitioner.
    pub h_int: PauliSum,
    /// Coefficient of the identity carried by the photon term; a global
    /// phase, excluded from rotation counts and schedules.
    pub identity_shift: f64,
}

impl HamiltonianParts {
    pub fn n_qubits(&self) -> usize {
        self.h_int.n_qubits()
    }

    /// The free (diagonal) part `H_Photon + H_Atom`, without the identity
    /// shift.
    pub fn diagonal(&self) -> PauliSum {
        self.h_photon.add(&self.h_atom)
    }

    /// The complete Hamiltonian as one sum, without the identity shift.
    pub fn total(&self) -> PauliSum {
        self.diagonal().add(&self.h_int)
    }
}

/// Closed-form string counts for an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCounts {
    /// Single-qubit Z rotations per first-order step: `N_F k + 1`.
    pub n_z: usize,
    /// Interaction strings: `N_F 2^k k`.
    pub n_p: usize,
    /// Total strings including the identity: `N_Z + 1 + N_P`.
    pub m: usize,
    /// Interaction-picture strings at `t = 0`, where every phase is 1.
    pub n_i_time_zero: usize,
    /// Interaction-picture strings at generic `t != 0`:
    /// `(2 N_F - M0) 2^k k` with `M0` the number of resonant modes.
    pub n_i_generic: usize,
}

pub fn term_counts(params: &ModelParams) -> TermCounts {
    let nf = params.n_modes();
    let k = params.trunc_bits() as usize;
    let r = (1usize << k) * k;
    let n_z = nf * k + 1;
    let n_p = nf * r;
    let m0 = params.derive().m0;
    TermCounts {
        n_z,
        n_p,
        m: n_z + 1 + n_p,
        n_i_time_zero: nf * r,
        n_i_generic: (2 * nf - m0) * r,
    }
}

/// Builds the Schroedinger-picture Hamiltonian.
pub fn build_schrodinger(params: &ModelParams) -> HamiltonianParts {
    let n = params.n_qubits();
    let k = params.trunc_bits() as usize;
    let cutoff = params.cutoff() as f64;

    let mut h_photon = PauliSum::new(n);
    let mut identity_shift = 0.0;
    for (m, &omega_m) in params.mode_freqs().iter().enumerate() {
        identity_shift += omega_m * cutoff / 2.0;
        for j in 0..k {
            let coeff = -omega_m * (1u64 << (k - 1 - j)) as f64 / 2.0;
            h_photon.push(
                Complex64::new(coeff, 0.0),
                PauliString::single(n, m * k + j, Pauli::Z),
            );
        }
    }
    h_photon.canonicalize();

    let h_atom = PauliSum::from_terms(
        n,
        vec![(
            Complex64::new(-params.atom_freq() / 2.0, 0.0),
            PauliString::single(n, params.atom_qubit(), Pauli::Z),
        )],
    );

    HamiltonianParts {
        h_photon,
        h_atom,
        h_int: interaction_sum(params, 0.0),
        identity_shift,
    }
}

/// Builds the interaction-picture Hamiltonian `H_I(t)`, equal to the
/// Schroedinger interaction term conjugated by the free propagator: each
/// mode's exchange terms pick up the detuning phase `exp(-i delta_m t)`.
/// At `t = 0`, or for resonant modes at any `t`, the result coincides with
/// the Schroedinger interaction term exactly.
pub fn build_interaction(params: &ModelParams, t: f64) -> PauliSum {
    interaction_sum(params, t)
}

fn interaction_sum(params: &ModelParams, t: f64) -> PauliSum {
    let n = params.n_qubits();
    let k = params.trunc_bits();
    let atom = params.atom_qubit();
    let derived = params.derive();
    let ladder = ladder_terms(k, LadderKind::Annihilate);

    let mut sum = PauliSum::new(n);
    for (m, &gamma) in params.couplings().iter().enumerate() {
        let phase = Complex64::new(0.0, -derived.delta[m] * t).exp();
        for lt in &ladder {
            let beta = gamma * lt.coeff * phase;
            let photon = lt.string.embed_at(n, m * k as usize);
            let photon_y_odd = lt.string.n_y() % 2 == 1;
            sum.push_term(Term {
                coeff: Complex64::new(beta.re, 0.0),
                string: photon.with_letter(atom, Pauli::X),
                tag: Some(TermTag {
                    mode: m,
                    hamming: lt.hamming,
                    photon_y_odd,
                    atom_axis: Axis::X,
                }),
            });
            sum.push_term(Term {
                coeff: Complex64::new(beta.im, 0.0),
                string: photon.with_letter(atom, Pauli::Y),
                tag: Some(TermTag {
                    mode: m,
                    hamming: lt.hamming,
                    photon_y_odd,
                    atom_axis: Axis::Y,
                }),
            });
        }
    }
    sum.canonicalize();
    sum
}
