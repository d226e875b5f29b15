//! Sparse Pauli strings with an explicit phase in {+1, +i, -1, -i}.
//!
//! Qubits are addressed by site index (see [`crate::lattice::Lattice`] for the
//! ordering). Identity factors are never stored.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Symplectic (x, z) bits. `Y` is (1, 1).
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Product `self * rhs` as (power of i, Pauli).
    pub fn mul_with_phase(self, rhs: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::PlusOne, p),
            (a, b) if a == b => (Phase::PlusOne, I),
            (X, Y) => (Phase::PlusI, Z),
            (Y, X) => (Phase::MinusI, Z),
            (Y, Z) => (Phase::PlusI, X),
            (Z, Y) => (Phase::MinusI, X),
            (Z, X) => (Phase::PlusI, Y),
            (X, Z) => (Phase::MinusI, Y),
            _ => unreachable!(),
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Global phase i^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Phase {
    #[default]
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    /// Exponent k of i^k.
    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }

    /// +1 or -1 for real phases.
    pub fn sign(self) -> Option<i8> {
        match self {
            Phase::PlusOne => Some(1),
            Phase::MinusOne => Some(-1),
            _ => None,
        }
    }

    pub fn negate(self) -> Self {
        Phase::from_exponent(self.exponent() + 2)
    }
}

impl Mul for Phase {
    type Output = Phase;
    // i^a * i^b = i^(a+b)
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_exponent(self.exponent() + rhs.exponent())
    }
}

/// A multi-qubit Pauli operator `phase * prod_q P_q`, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliString {
    factors: BTreeMap<usize, Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(site: usize, p: Pauli) -> Self {
        let mut s = Self::identity();
        s.set(site, p);
        s
    }

    pub fn from_factors<I: IntoIterator<Item = (usize, Pauli)>>(factors: I) -> Self {
        let mut s = Self::identity();
        for (q, p) in factors {
            s = s * PauliString::single(q, p);
        }
        s
    }

    /// `X_center * prod_{j in neighbors} Z_j` with phase +1.
    pub fn graph_stabilizer<I: IntoIterator<Item = usize>>(center: usize, neighbors: I) -> Self {
        let mut s = Self::single(center, Pauli::X);
        for j in neighbors {
            debug_assert_ne!(j, center);
            s.set(j, Pauli::Z);
        }
        s
    }

    /// Overwrite the factor on `site` (no phase bookkeeping).
    pub fn set(&mut self, site: usize, p: Pauli) {
        if p == Pauli::I {
            self.factors.remove(&site);
        } else {
            self.factors.insert(site, p);
        }
    }

    pub fn get(&self, site: usize) -> Pauli {
        self.factors.get(&site).copied().unwrap_or(Pauli::I)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn negated(mut self) -> Self {
        self.phase = self.phase.negate();
        self
    }

    /// Non-identity factors in ascending site order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.factors.iter().map(|(&q, &p)| (q, p))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.keys().copied()
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Largest site index touched, if any.
    pub fn max_site(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let (small, large) = if self.weight() <= other.weight() { (self, other) } else { (other, self) };
        small.iter().filter(|&(q, p)| p.anticommutes(large.get(q))).count() % 2 == 0
    }

    /// Errors with [`Error::NonHermitian`] unless the phase is +1 or -1.
    pub fn require_hermitian(&self) -> Result<(), Error> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NonHermitian(self.to_string()))
        }
    }

    /// Dense word over `n` qubits, e.g. `+XZI`.
    pub fn to_dense(&self, n: usize) -> String {
        let mut out = String::with_capacity(n + 2);
        out.push_str(match self.phase {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        });
        for q in 0..n {
            out.push(self.get(q).symbol());
        }
        out
    }
}

impl Mul for PauliString {
    type Output = PauliString;
    fn mul(self, rhs: PauliString) -> PauliString {
        &self * &rhs
    }
}

impl<'a> Mul<&'a PauliString> for &'a PauliString {
    type Output = PauliString;
    fn mul(self, rhs: &PauliString) -> PauliString {
        let mut phase = self.phase * rhs.phase;
        let mut factors = self.factors.clone();
        for (q, p) in rhs.iter() {
            let lhs = factors.get(&q).copied().unwrap_or(Pauli::I);
            let (ph, prod) = lhs.mul_with_phase(p);
            phase = phase * ph;
            if prod == Pauli::I {
                factors.remove(&q);
            } else {
                factors.insert(q, prod);
            }
        }
        PauliString { factors, phase }
    }
}

impl fmt::Display for PauliString {
    /// Sparse form, e.g. `+X0 Z3 Z4`; identity prints as `+I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            Phase::PlusOne => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        write!(f, "{sign}")?;
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{}", p.symbol(), q)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a dense word such as `-XZIY` (leading sign optional; `+i`/`-i`
    /// accepted).
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (Phase::PlusI, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MinusI, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::PlusOne, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MinusOne, rest)
        } else {
            (Phase::PlusOne, s)
        };
        let mut out = PauliString::identity().with_phase(phase);
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' | '.' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse { line: 1, message: format!("bad Pauli symbol {other:?}") }),
            };
            out.set(q, p);
        }
        Ok(out)
    }
}
