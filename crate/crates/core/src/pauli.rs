//! Pauli-string algebra: symplectic representation, canonicalized sums, and
//! the analytic number/ladder operator decompositions.
//!
//! Conventions used throughout the crate:
//! - Qubit `q` of an `n`-qubit string is bit `q` of the `x`/`z` masks.
//! - Labels list qubit 0 first, e.g. `"XYZ"` puts X on qubit 0.
//! - In dense matrices, qubit 0 is the most significant bit of the basis
//!   index: bit of qubit `q` in index `i` is `(i >> (n-1-q)) & 1`. With that
//!   convention the `k`-qubit number operator is `diag(0, 1, ..., 2^k - 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Coefficients below this magnitude are dropped during canonicalization.
pub const COEFF_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PauliError {
    #[error("invalid Pauli letter '{0}' (expected I, X, Y or Z)")]
    BadLetter(char),
    #[error("label length {got} does not match register size {expected}")]
    BadLabelLength { expected: usize, got: usize },
    #[error("string lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("register size {0} exceeds the 64-qubit packing limit")]
    TooManyQubits(usize),
    #[error("cannot parse term line '{0}'")]
    BadTermLine(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self, PauliError> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(PauliError::BadLetter(other)),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (u64, u64) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        }
    }

    /// Rank giving the label order I < X < Y < Z.
    fn rank(self) -> u8 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }
}

/// An N-qubit Pauli string in symplectic bit-pair form: bit `q` of `x`/`z`
/// encodes the letter on qubit `q` ((0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
    n: u32,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "register size exceeds 64 qubits");
        PauliString {
            x: 0,
            z: 0,
            n: n_qubits as u32,
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        Self::identity(n_qubits).with_letter(qubit, p)
    }

    pub fn from_label(label: &str) -> Result<Self, PauliError> {
        let chars: Vec<char> = label.chars().collect();
        if chars.len() > 64 {
            return Err(PauliError::TooManyQubits(chars.len()));
        }
        let mut s = PauliString::identity(chars.len());
        for (q, c) in chars.iter().enumerate() {
            s = s.with_letter(q, Pauli::from_char(*c)?);
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        debug_assert!(qubit < self.n as usize);
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn with_letter(mut self, qubit: usize, p: Pauli) -> Self {
        debug_assert!(qubit < self.n as usize);
        let (xb, zb) = p.bits();
        self.x = (self.x & !(1 << qubit)) | (xb << qubit);
        self.z = (self.z & !(1 << qubit)) | (zb << qubit);
        self
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Number of Y letters.
    pub fn n_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// True iff the two strings commute as operators (even number of
    /// positions with anticommuting letters).
    pub fn commutes(&self, other: &PauliString) -> bool {
        assert_eq!(
            self.n, other.n,
            "commutation check on strings of different length"
        );
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti % 2 == 0
    }

    pub fn label(&self) -> String {
        (0..self.n as usize).map(|q| self.letter(q).to_char()).collect()
    }

    /// Masks over dense basis indices: bit `n-1-q` of each mask carries the
    /// x/z bit of qubit `q`. Column `j` of the dense matrix holds the single
    /// entry `phase * |j ^ x_mask><j|` with
    /// `phase = i^{#Y} * (-1)^{popcount(j & z_mask)}`.
    pub fn dense_masks(&self) -> (u64, u64) {
        let mut xm = 0u64;
        let mut zm = 0u64;
        let n = self.n as u64;
        for q in 0..n {
            xm |= ((self.x >> q) & 1) << (n - 1 - q);
            zm |= ((self.z >> q) & 1) << (n - 1 - q);
        }
        (xm, zm)
    }

    /// Embed into a larger register with this string's qubit 0 at `offset`.
    pub fn embed_at(&self, n_total: usize, offset: usize) -> Self {
        assert!(n_total <= 64 && offset + self.n as usize <= n_total);
        PauliString {
            x: self.x << offset,
            z: self.z << offset,
            n: n_total as u32,
        }
    }

    /// Product of two strings built from I and Z letters only: coinciding Z
    /// letters cancel and no phase arises. Panics on X or Y content.
    pub fn z_type_product(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n, "string lengths differ");
        assert!(
            self.x == 0 && other.x == 0,
            "z_type_product requires strings without X or Y letters"
        );
        PauliString {
            x: 0,
            z: self.z ^ other.z,
            n: self.n,
        }
    }

    fn rank_key(&self) -> u128 {
        // Two bits per qubit, qubit 0 in the highest position, so integer
        // order equals lexicographic label order with I < X < Y < Z.
        let mut key = 0u128;
        for q in 0..self.n as usize {
            key = (key << 2) | self.letter(q).rank() as u128;
        }
        key
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank_key().cmp(&other.rank_key())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        PauliString::from_label(&label).map_err(serde::de::Error::custom)
    }
}

/// Atomic Pauli attached to a photon string in the interaction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Structural labels attached to interaction-term strings at construction
/// time; the structured partitioner keys on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermTag {
    /// Photon mode index, 0-based.
    pub mode: usize,
    /// Hamming class h in 1..=k of the underlying ladder transition.
    pub hamming: u32,
    /// Parity of the Y count in the photon block (true = odd).
    pub photon_y_odd: bool,
    /// Letter on the emitter qubit.
    pub atom_axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub string: PauliString,
    pub tag: Option<TermTag>,
}

/// A sum of Pauli strings with complex coefficients, kept canonical:
/// lexicographically sorted, duplicates merged, coefficients below
/// [`COEFF_EPS`] dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: u32,
    terms: Vec<Term>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64);
        PauliSum {
            n: n_qubits as u32,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<(Complex64, PauliString)>) -> Self {
        let mut sum = PauliSum::new(n_qubits);
        for (coeff, string) in terms {
            sum.push(coeff, string);
        }
        sum.canonicalize();
        sum
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Appends a term without re-canonicalizing; call [`Self::canonicalize`]
    /// after a batch of pushes.
    pub fn push(&mut self, coeff: Complex64, string: PauliString) {
        self.push_term(Term {
            coeff,
            string,
            tag: None,
        });
    }

    pub fn push_term(&mut self, term: Term) {
        assert_eq!(term.string.n_qubits(), self.n as usize);
        self.terms.push(term);
    }

    /// Sorts terms lexicographically, merges equal strings and drops
    /// negligible coefficients. Merged terms keep their tag; merging terms
    /// with contradictory tags is a construction bug.
    pub fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.string.cmp(&b.string));
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.string == term.string => {
                    debug_assert!(
                        last.tag.is_none() || term.tag.is_none() || last.tag == term.tag,
                        "merging terms with contradictory structural tags"
                    );
                    last.coeff += term.coeff;
                    if last.tag.is_none() {
                        last.tag = term.tag;
                    }
                }
                _ => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff.norm() >= COEFF_EPS);
        self.terms = merged;
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        out.terms.extend_from_slice(&other.terms);
        out.canonicalize();
        out
    }

    pub fn scaled(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out.canonicalize();
        out
    }

    /// Conjugates every coefficient; for sums of Hermitian strings this is
    /// the operator adjoint.
    pub fn adjoint(&self) -> PauliSum {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coeff = t.coeff.conj();
        }
        out
    }

    /// Transpose: Pauli strings are real except for Y, so transposition
    /// flips the sign of terms with an odd Y count.
    pub fn transpose(&self) -> PauliSum {
        let mut out = self.clone();
        for t in &mut out.terms {
            if t.string.n_y() % 2 == 1 {
                t.coeff = -t.coeff;
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coeff.im.abs() <= tol)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes (the 1-norm of the coefficient vector).
    pub fn coeff_one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn has_tags(&self) -> bool {
        !self.terms.is_empty() && self.terms.iter().all(|t| t.tag.is_some())
    }

    /// Text serialization, one term per line: `(<re>,<im>) <LABEL>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!(
                "({:.17e},{:.17e}) {}\n",
                t.coeff.re,
                t.coeff.im,
                t.string.label()
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PauliError> {
        let mut terms = Vec::new();
        let mut n_qubits = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (coeff_part, label) = line
                .split_once(' ')
                .ok_or_else(|| PauliError::BadTermLine(line.to_string()))?;
            let inner = coeff_part
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| PauliError::BadTermLine(line.to_string()))?;
            let (re, im) = inner
                .split_once(',')
                .ok_or_else(|| PauliError::BadTermLine(line.to_string()))?;
            let re: f64 = re
                .parse()
                .map_err(|_| PauliError::BadTermLine(line.to_string()))?;
            let im: f64 = im
                .parse()
                .map_err(|_| PauliError::BadTermLine(line.to_string()))?;
            let string = PauliString::from_label(label.trim())?;
            match n_qubits {
                None => n_qubits = Some(string.n_qubits()),
                Some(n) if n != string.n_qubits() => {
                    return Err(PauliError::LengthMismatch(n, string.n_qubits()))
                }
                _ => {}
            }
            terms.push((Complex64::new(re, im), string));
        }
        Ok(PauliSum::from_terms(n_qubits.unwrap_or(0), terms))
    }
}

/// Pauli decomposition of the truncated number operator on `k` qubits:
/// `(n/2) I - sum_j 2^{k-1-j}/2 * Z_j` with `n = 2^k - 1`; exactly `k + 1`
/// terms, dense form `diag(0, 1, ..., 2^k - 1)`.
pub fn number_operator(k: u32) -> PauliSum {
    assert!(k >= 1 && k <= 16);
    let n = (1u64 << k) - 1;
    let mut terms = vec![(
        Complex64::new(n as f64 / 2.0, 0.0),
        PauliString::identity(k as usize),
    )];
    for j in 0..k as usize {
        let coeff = -((1u64 << (k as usize - 1 - j)) as f64) / 2.0;
        terms.push((
            Complex64::new(coeff, 0.0),
            PauliString::single(k as usize, j, Pauli::Z),
        ));
    }
    PauliSum::from_terms(k as usize, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
}

/// One merged string of a ladder decomposition together with its Hamming
/// class (the number of bits flipped by the underlying transitions).
#[derive(Debug, Clone, Copy)]
pub struct LadderTerm {
    pub coeff: Complex64,
    pub string: PauliString,
    pub hamming: u32,
}

/// Pauli decomposition of the truncated annihilation operator
/// `a = sum_{b=1}^{n} sqrt(b) |b-1><b|` on `k` qubits (or its adjoint),
/// grouped by Hamming class. `2^k * k` strings in total, `2^k` per class.
///
/// The transition `|b-1><b|` with `s` trailing zero bits in `b` flips bits
/// `0..=s` (class `h = s + 1`): bit `s` drops 1 -> 0 (factor `(X+iY)/2`),
/// bits below rise 0 -> 1 (factor `(X-iY)/2`), higher bits are projected
/// onto their shared value (factor `(I +/- Z)/2`).
pub fn ladder_terms(k: u32, kind: LadderKind) -> Vec<LadderTerm> {
    assert!(k >= 1 && k <= 16);
    let kq = k as usize;
    let dim = 1u64 << k;
    let mut acc: HashMap<PauliString, (Complex64, u32)> = HashMap::new();
    for b in 1..dim {
        let s = b.trailing_zeros() as u64;
        let root = (b as f64).sqrt();
        // Choice bit beta of `mask` selects the second element of the
        // two-term factor at bit position beta.
        for mask in 0..dim {
            let mut coeff = Complex64::new(root, 0.0);
            let mut string = PauliString::identity(kq);
            for beta in 0..k as u64 {
                let qubit = (k as u64 - 1 - beta) as usize;
                let second = (mask >> beta) & 1 == 1;
                if beta > s {
                    coeff *= 0.5;
                    if second {
                        string = string.with_letter(qubit, Pauli::Z);
                        if (b >> beta) & 1 == 1 {
                            coeff = -coeff;
                        }
                    }
                } else if beta == s {
                    coeff *= 0.5;
                    if second {
                        string = string.with_letter(qubit, Pauli::Y);
                        coeff *= Complex64::new(0.0, 1.0);
                    } else {
                        string = string.with_letter(qubit, Pauli::X);
                    }
                } else {
                    coeff *= 0.5;
                    if second {
                        string = string.with_letter(qubit, Pauli::Y);
                        coeff *= Complex64::new(0.0, -1.0);
                    } else {
                        string = string.with_letter(qubit, Pauli::X);
                    }
                }
            }
            let entry = acc
                .entry(string)
                .or_insert((Complex64::new(0.0, 0.0), s as u32 + 1));
            debug_assert_eq!(entry.1, s as u32 + 1);
            entry.0 += coeff;
        }
    }
    let mut out: Vec<LadderTerm> = acc
        .into_iter()
        .filter(|(_, (c, _))| c.norm() >= COEFF_EPS)
        .map(|(string, (coeff, hamming))| LadderTerm {
            coeff: match kind {
                LadderKind::Annihilate => coeff,
                LadderKind::Create => coeff.conj(),
            },
            string,
            hamming,
        })
        .collect();
    out.sort_by(|a, b| a.string.cmp(&b.string));
    out
}

/// Ladder decomposition as a plain sum.
pub fn ladder_operator(k: u32, kind: LadderKind) -> PauliSum {
    PauliSum::from_terms(
        k as usize,
        ladder_terms(k, kind)
            .into_iter()
            .map(|t| (t.coeff, t.string))
            .collect(),
    )
}
