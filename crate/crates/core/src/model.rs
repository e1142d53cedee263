//! Physical parameters of an eJCM instance and the derived scalars used by
//! every bound.
//!
//! The system is `n_modes` photon modes, each truncated to occupation
//! `n = 2^trunc_bits - 1` and binary-encoded on `trunc_bits` qubits, coupled
//! to a single two-level emitter. Natural units, hbar = 1. Qubit layout: mode
//! `m` (1-based) occupies qubits `[(m-1)k, mk)`, the emitter is the last
//! qubit. Within a mode, qubit `j` carries bit `k-1-j` of the occupation
//! number, so qubit 0 is the most significant bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("n_modes must be at least 1")]
    NoModes,
    #[error("trunc_bits must be at least 1")]
    NoTruncBits,
    #[error("trunc_bits {0} exceeds the supported maximum of 16")]
    TruncTooLarge(u32),
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} contains a non-finite value")]
    NonFinite { what: &'static str },
    #[error("parameter file is not valid JSON: {0}")]
    Json(String),
}

/// Validated description of one eJCM instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    n_modes: usize,
    trunc_bits: u32,
    mode_freqs: Vec<f64>,
    atom_freq: f64,
    couplings: Vec<f64>,
}

/// Wire format; `ModelParams` is only constructed through validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawParams {
    n_modes: usize,
    trunc_bits: u32,
    mode_freqs: Vec<f64>,
    atom_freq: f64,
    couplings: Vec<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = ModelError;
    fn try_from(raw: RawParams) -> Result<Self, ModelError> {
        ModelParams::new(
            raw.n_modes,
            raw.trunc_bits,
            raw.mode_freqs,
            raw.atom_freq,
            raw.couplings,
        )
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            n_modes: p.n_modes,
            trunc_bits: p.trunc_bits,
            mode_freqs: p.mode_freqs,
            atom_freq: p.atom_freq,
            couplings: p.couplings,
        }
    }
}

impl ModelParams {
    pub fn new(
        n_modes: usize,
        trunc_bits: u32,
        mode_freqs: Vec<f64>,
        atom_freq: f64,
        couplings: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if n_modes == 0 {
            return Err(ModelError::NoModes);
        }
        if trunc_bits == 0 {
            return Err(ModelError::NoTruncBits);
        }
        if trunc_bits > 16 {
            return Err(ModelError::TruncTooLarge(trunc_bits));
        }
        if mode_freqs.len() != n_modes {
            return Err(ModelError::LengthMismatch {
                what: "mode frequencies",
                expected: n_modes,
                got: mode_freqs.len(),
            });
        }
        if couplings.len() != n_modes {
            return Err(ModelError::LengthMismatch {
                what: "couplings",
                expected: n_modes,
                got: couplings.len(),
            });
        }
        if !mode_freqs.iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite {
                what: "mode_freqs",
            });
        }
        if !atom_freq.is_finite() {
            return Err(ModelError::NonFinite { what: "atom_freq" });
        }
        if !couplings.iter().all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite { what: "couplings" });
        }
        Ok(ModelParams {
            n_modes,
            trunc_bits,
            mode_freqs,
            atom_freq,
            couplings,
        })
    }

    /// Uniform instance: every mode at frequency `omega_m`, every coupling
    /// `gamma`. Convenient for the bound and table reproductions.
    pub fn uniform(
        n_modes: usize,
        trunc_bits: u32,
        omega_m: f64,
        atom_freq: f64,
        gamma: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            n_modes,
            trunc_bits,
            vec![omega_m; n_modes],
            atom_freq,
            vec![gamma; n_modes],
        )
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn trunc_bits(&self) -> u32 {
        self.trunc_bits
    }

    pub fn mode_freqs(&self) -> &[f64] {
        &self.mode_freqs
    }

    pub fn atom_freq(&self) -> f64 {
        self.atom_freq
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Per-mode occupation cutoff n = 2^k - 1.
    pub fn cutoff(&self) -> u64 {
        (1u64 << self.trunc_bits) - 1
    }

    /// Total register size: photon qubits plus the emitter qubit.
    pub fn n_qubits(&self) -> usize {
        self.n_modes * self.trunc_bits as usize + 1
    }

    /// Index of the emitter qubit (always the last one).
    pub fn atom_qubit(&self) -> usize {
        self.n_modes * self.trunc_bits as usize
    }

    /// Scalars derived with exact resonance comparison.
    pub fn derive(&self) -> DerivedScalars {
        self.derive_with_tolerance(0.0)
    }

    /// Scalars derived with `|omega_m - omega| <= tol` counting as resonant.
    /// The default tolerance is exactly zero: the resonant-mode count `m0` is
    /// discrete and feeds term counts, so a silent tolerance would change
    /// them.
    pub fn derive_with_tolerance(&self, tol: f64) -> DerivedScalars {
        let n = self.cutoff();
        let omega_max = self
            .mode_freqs
            .iter()
            .map(|w| w.abs())
            .fold(self.atom_freq.abs(), f64::max);
        let gamma_max = self.couplings.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let delta: Vec<f64> = self
            .mode_freqs
            .iter()
            .map(|w| w - self.atom_freq)
            .collect();
        let delta_max = delta.iter().map(|d| d.abs()).fold(0.0, f64::max);
        let m0 = delta.iter().filter(|d| d.abs() <= tol).count();
        let lambda_k = lambda_k(self.trunc_bits);
        DerivedScalars {
            n,
            omega_max,
            gamma_max,
            delta,
            delta_max,
            m0,
            lambda_k,
        }
    }
}

/// Lambda_k = (2^k + 1)^{3/2} - 1, the coefficient-sum bound for a truncated
/// ladder operator.
pub fn lambda_k(trunc_bits: u32) -> f64 {
    let d = (1u64 << trunc_bits) as f64;
    (d + 1.0).powf(1.5) - 1.0
}

/// Scalar quantities consumed by the error bounds and cost optimizers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedScalars {
    /// Occupation cutoff 2^k - 1.
    pub n: u64,
    /// max(|omega_m|, |omega|) over all modes and the emitter.
    pub omega_max: f64,
    /// max |gamma_m|.
    pub gamma_max: f64,
    /// Detunings delta_m = omega_m - omega.
    pub delta: Vec<f64>,
    /// max |delta_m|.
    pub delta_max: f64,
    /// Number of modes resonant with the emitter.
    pub m0: usize,
    /// (2^k + 1)^{3/2} - 1.
    pub lambda_k: f64,
}
