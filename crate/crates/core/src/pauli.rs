//! Sparse Pauli strings and weighted sums of them.
//!
//! A [`PauliString`] maps qubit indices to single-qubit Paulis; qubits not
//! listed carry the identity. A [`PauliSum`] is a real-weighted sum of
//! strings and is Hermitian by construction. These are the common currency
//! between the Hamiltonian builders, the statevector engine and the
//! gauge-violation observables.

use num_complex::Complex64;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-qubit product `self * other` as (phase, result).
    /// `None` result means the product is the identity.
    fn mul(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (X, X) | (Y, Y) | (Z, Z) => (one, None),
            (X, Y) => (i, Some(Z)),
            (Y, X) => (-i, Some(Z)),
            (Y, Z) => (i, Some(X)),
            (Z, Y) => (-i, Some(X)),
            (Z, X) => (i, Some(Y)),
            (X, Z) => (-i, Some(Y)),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pauli::X => write!(f, "X"),
            Pauli::Y => write!(f, "Y"),
            Pauli::Z => write!(f, "Z"),
        }
    }
}

/// Sparse Pauli string, kept sorted by qubit index. The empty string is the
/// identity operator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn identity() -> Self {
        Self { ops: Vec::new() }
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self {
            ops: vec![(qubit, p)],
        }
    }

    /// Build from (qubit, Pauli) pairs. Panics on duplicate qubits; callers
    /// assemble strings over distinct qubits.
    pub fn from_ops(mut ops: Vec<(usize, Pauli)>) -> Self {
        ops.sort_by_key(|&(q, _)| q);
        for w in ops.windows(2) {
            assert_ne!(w[0].0, w[1].0, "duplicate qubit {} in Pauli string", w[0].0);
        }
        Self { ops }
    }

    pub fn is_identity(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.ops.iter().copied()
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.ops.last().map(|&(q, _)| q)
    }

    /// Operator product `self * other`, merging per-qubit factors.
    /// Returns the accumulated phase and the resulting string.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.ops.len() + other.ops.len());
        let (mut a, mut b) = (self.ops.iter().peekable(), other.ops.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(qa, pa)), Some(&&(qb, pb))) => {
                    if qa < qb {
                        out.push((qa, pa));
                        a.next();
                    } else if qb < qa {
                        out.push((qb, pb));
                        b.next();
                    } else {
                        let (ph, p) = pa.mul(pb);
                        phase *= ph;
                        if let Some(p) = p {
                            out.push((qa, p));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some(&&(qa, pa)), None) => {
                    out.push((qa, pa));
                    a.next();
                }
                (None, Some(&&(qb, pb))) => {
                    out.push((qb, pb));
                    b.next();
                }
                (None, None) => break,
            }
        }
        (phase, PauliString { ops: out })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ops.is_empty() {
            return write!(f, "I");
        }
        for (i, (q, p)) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{p}{q}")?;
        }
        Ok(())
    }
}

/// Real-weighted sum of Pauli strings (a Hermitian operator).
#[derive(Debug, Clone, Default)]
pub struct PauliSum {
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<(f64, PauliString)>) -> Self {
        Self { terms }
    }

    /// Add a term, dropping exact zeros and merging into an existing equal
    /// string if present.
    pub fn push(&mut self, coeff: f64, string: PauliString) {
        if coeff == 0.0 {
            return;
        }
        if let Some((c, _)) = self.terms.iter_mut().find(|(_, s)| *s == string) {
            *c += coeff;
            if *c == 0.0 {
                self.terms.retain(|(c, _)| *c != 0.0);
            }
        } else {
            self.terms.push((coeff, string));
        }
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        PauliSum {
            terms: self
                .terms
                .iter()
                .map(|(c, s)| (c * factor, s.clone()))
                .collect(),
        }
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.terms.iter().filter_map(|(_, s)| s.max_qubit()).max()
    }

    /// Constant shift: adds `c * I`.
    pub fn push_identity(&mut self, c: f64) {
        self.push(c, PauliString::identity());
    }

    /// Square of `self - shift * I`, expanded into Pauli strings.
    ///
    /// Products of strings are merged with their phases; for sums built from
    /// commuting single-qubit factors the phases are all real.
    pub fn shifted_square(&self, shift: f64) -> PauliSum {
        let mut shifted = self.clone();
        shifted.push_identity(-shift);
        let mut out = PauliSum::new();
        for (ca, sa) in &shifted.terms {
            for (cb, sb) in &shifted.terms {
                let (phase, s) = sa.mul(sb);
                debug_assert!(
                    phase.im.abs() < 1e-12,
                    "non-Hermitian square: phase {phase} on {s}"
                );
                out.push(ca * cb * phase.re, s);
            }
        }
        out
    }
}
