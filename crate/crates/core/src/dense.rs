//! Dense matrix backend for desk-scale verification: explicit operators,
//! Hermitian propagators, spectral norms and Pauli projections.
//!
//! Everything here scales exponentially in qubit count and is meant for
//! registers of at most [`DENSE_QUBIT_LIMIT`] qubits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pauli::{PauliString, PauliSum, Term};

/// Largest register the dense backend accepts.
pub const DENSE_QUBIT_LIMIT: usize = 14;

/// Above this dimension spectral norms switch from full SVD to power
/// iteration.
const SVD_DIM_LIMIT: usize = 1 << 10;

const POWER_ITER_TOL: f64 = 1e-10;
const POWER_ITER_MAX: usize = 10_000;

/// Phase picked up by a basis column under a Pauli string:
/// `P |j> = phase(j) |j ^ x_mask>` with the masks from
/// [`PauliString::dense_masks`].
pub fn column_phase(n_y: u32, z_mask: u64, j: u64) -> Complex64 {
    let i_pow = match n_y % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    if (j & z_mask).count_ones() % 2 == 1 {
        -i_pow
    } else {
        i_pow
    }
}

/// A dense operator on a power-of-two dimensional space, with qubit 0 on the
/// most significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    m: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "dense operator must be square");
        assert!(
            m.nrows().is_power_of_two(),
            "dense operator dimension must be a power of two"
        );
        DenseOperator { m }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DenseOperator {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DenseOperator {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.m.nrows().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn mul(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            m: &self.m * &other.m,
        }
    }

    pub fn add(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            m: &self.m - &other.m,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> DenseOperator {
        DenseOperator {
            m: self.m.clone() * factor,
        }
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            m: self.m.adjoint(),
        }
    }

    pub fn kron(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.m * v
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_entry_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.adjoint().mul(self);
        prod.max_entry_diff(&DenseOperator::identity(self.n_qubits())) <= tol
    }

    /// Largest entrywise absolute difference.
    pub fn max_entry_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest singular value. Full SVD below dimension 1024, power
    /// iteration on the Gram operator above.
    pub fn spectral_norm(&self) -> f64 {
        if self.dim() < SVD_DIM_LIMIT {
            self.m
                .clone()
                .singular_values()
                .iter()
                .fold(0.0, |acc, s| acc.max(*s))
        } else {
            self.spectral_norm_power()
        }
    }

    fn spectral_norm_power(&self) -> f64 {
        let dim = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0123);
        let mut v = DVector::from_fn(dim, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v /= Complex64::new(norm, 0.0);
        let mut sigma = 0.0f64;
        for _ in 0..POWER_ITER_MAX {
            let w = &self.m * &v;
            let new_sigma = w.norm();
            if new_sigma == 0.0 {
                return 0.0;
            }
            let mut u = self.m.adjoint() * w;
            let u_norm = u.norm();
            if u_norm == 0.0 {
                return new_sigma;
            }
            u /= Complex64::new(u_norm, 0.0);
            v = u;
            if (new_sigma - sigma).abs() <= POWER_ITER_TOL * new_sigma.max(1.0) {
                return new_sigma;
            }
            sigma = new_sigma;
        }
        sigma
    }

    /// Propagator `exp(-i * self * t)` of a Hermitian operator, computed by
    /// eigendecomposition.
    pub fn propagator(&self, t: f64) -> DenseOperator {
        debug_assert!(self.is_hermitian(1e-9), "propagator of non-Hermitian operator");
        self.exp_scaled(Complex64::new(0.0, -t))
    }

    /// `exp(factor * self)` for Hermitian `self` via eigendecomposition.
    pub fn exp_scaled(&self, factor: Complex64) -> DenseOperator {
        let eig = self.m.clone().symmetric_eigen();
        let dim = self.dim();
        let mut diag = DMatrix::zeros(dim, dim);
        for (i, lambda) in eig.eigenvalues.iter().enumerate() {
            diag[(i, i)] = (factor * Complex64::new(*lambda, 0.0)).exp();
        }
        let v = eig.eigenvectors;
        DenseOperator {
            m: &v * diag * v.adjoint(),
        }
    }
}

impl PauliString {
    /// Dense matrix of the string under the MSB-first qubit convention.
    pub fn to_dense(&self) -> DenseOperator {
        assert!(
            self.n_qubits() <= DENSE_QUBIT_LIMIT,
            "dense form of {} qubits exceeds the {}-qubit dense limit",
            self.n_qubits(),
            DENSE_QUBIT_LIMIT
        );
        let dim = 1usize << self.n_qubits();
        let (x_mask, z_mask) = self.dense_masks();
        let n_y = self.n_y();
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim as u64 {
            m[((j ^ x_mask) as usize, j as usize)] = column_phase(n_y, z_mask, j);
        }
        DenseOperator { m }
    }
}

impl PauliSum {
    /// Dense matrix of the sum; refuses registers beyond the dense limit.
    pub fn to_dense(&self) -> DenseOperator {
        assert!(
            self.n_qubits() <= DENSE_QUBIT_LIMIT,
            "dense form of {} qubits exceeds the {}-qubit dense limit",
            self.n_qubits(),
            DENSE_QUBIT_LIMIT
        );
        let dim = 1usize << self.n_qubits();
        let mut m = DMatrix::zeros(dim, dim);
        for Term { coeff, string, .. } in self.terms() {
            let (x_mask, z_mask) = string.dense_masks();
            let n_y = string.n_y();
            for j in 0..dim as u64 {
                m[((j ^ x_mask) as usize, j as usize)] += coeff * column_phase(n_y, z_mask, j);
            }
        }
        DenseOperator { m }
    }
}

/// Expands an operator in the Pauli basis: coefficient of string `P` is
/// `Tr(P * A) / 2^N`. Exhaustive over all `4^N` strings, so the register is
/// capped at 8 qubits. Coefficients below `threshold` are dropped.
pub fn project_to_pauli(op: &DenseOperator, threshold: f64) -> PauliSum {
    let n = op.n_qubits();
    assert!(n <= 8, "Pauli projection is exhaustive and capped at 8 qubits");
    let dim = 1u64 << n;
    let mut terms = Vec::new();
    let total = 4usize.pow(n as u32);
    for code in 0..total {
        let mut string = PauliString::identity(n);
        let mut rest = code;
        for q in 0..n {
            let letter = match rest % 4 {
                0 => crate::pauli::Pauli::I,
                1 => crate::pauli::Pauli::X,
                2 => crate::pauli::Pauli::Y,
                _ => crate::pauli::Pauli::Z,
            };
            string = string.with_letter(q, letter);
            rest /= 4;
        }
        let (x_mask, z_mask) = string.dense_masks();
        let n_y = string.n_y();
        let mut tr = Complex64::new(0.0, 0.0);
        for j in 0..dim {
            // Tr(P A) picks the entry A[j, j ^ x] weighted by the phase of
            // column j under P.
            tr += column_phase(n_y, z_mask, j) * op.matrix()[(j as usize, (j ^ x_mask) as usize)];
        }
        let coeff = tr / Complex64::new(dim as f64, 0.0);
        if coeff.norm() >= threshold {
            terms.push((coeff, string));
        }
    }
    PauliSum::from_terms(n, terms)
}
