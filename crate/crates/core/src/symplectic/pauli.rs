//! Phase-tracked Pauli operators.
//!
//! An operator is stored as `i^phase · X^x · Z^z`, where `X^x = ⊗ X^{x_j}` and
//! `Z^z = ⊗ Z^{z_j}`, with the whole X string to the left of the Z string. In
//! this convention the single-qubit `Y` is `i·X·Z`, i.e. `x = z = 1, phase = 1`.
//! Qubit 0 is the leftmost tensor factor.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::bits::Bits;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    x: Bits,
    z: Bits,
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        Self {
            x: Bits::zeros(n),
            z: Bits::zeros(n),
            phase: 0,
        }
    }

    pub fn new(x: Bits, z: Bits, phase: u8) -> Result<Self> {
        Error::check_dim(x.len(), z.len())?;
        Ok(Self {
            x,
            z,
            phase: phase & 3,
        })
    }

    /// `X^x Z^z` with phase zero.
    pub fn from_xz(x: Bits, z: Bits) -> Self {
        assert_eq!(x.len(), z.len());
        Self { x, z, phase: 0 }
    }

    /// Hermitian Pauli with the given bits and sign (`true` for `-1`).
    pub fn hermitian(x: Bits, z: Bits, negative: bool) -> Self {
        let mut p = Self::from_xz(x, z);
        p.phase = p.hermitian_phase(negative);
        p
    }

    pub fn single(n: usize, qubit: usize, letter: char) -> Self {
        let mut p = Self::identity(n);
        let (x, z) = match letter {
            'I' => (false, false),
            'X' => (true, false),
            'Z' => (false, true),
            'Y' => (true, true),
            other => panic!("not a Pauli letter: {other}"),
        };
        p.x.set(qubit, x);
        p.z.set(qubit, z);
        p.phase = p.hermitian_phase(false);
        p
    }

    pub fn x_on(n: usize, qubit: usize) -> Self {
        Self::single(n, qubit, 'X')
    }

    pub fn z_on(n: usize, qubit: usize) -> Self {
        Self::single(n, qubit, 'Z')
    }

    /// Uniform over the `4^n` bit patterns, phase zero.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = Bits::random(n, rng);
        let z = Bits::random(n, rng);
        Self::from_xz(x, z)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x(&self) -> &Bits {
        &self.x
    }

    #[inline]
    pub fn z(&self) -> &Bits {
        &self.z
    }

    #[inline]
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn x_mut(&mut self) -> &mut Bits {
        &mut self.x
    }

    pub fn z_mut(&mut self) -> &mut Bits {
        &mut self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Same bit pattern, ignoring phase.
    pub fn same_bits(&self, other: &PauliOp) -> bool {
        self.x == other.x && self.z == other.z
    }

    /// Number of qubits on which the operator is not the identity.
    pub fn weight(&self) -> usize {
        let mut acc = 0;
        for (a, b) in self.x.words().iter().zip(self.z.words()) {
            acc += (a | b).count_ones() as usize;
        }
        acc
    }

    fn y_count(&self) -> usize {
        self.x.and_weight(&self.z)
    }

    /// Phase making `X^x Z^z` Hermitian with the requested sign.
    fn hermitian_phase(&self, negative: bool) -> u8 {
        ((self.y_count() % 4) as u8 + if negative { 2 } else { 0 }) & 3
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + self.y_count()) % 2 == 0
    }

    /// For Hermitian operators: whether the sign is `-1`.
    pub fn is_negative(&self) -> bool {
        debug_assert!(self.is_hermitian());
        (self.phase + 4 - self.hermitian_phase(false)) & 3 == 2
    }

    pub fn commutes_with(&self, other: &PauliOp) -> bool {
        let s = self.x.and_weight(&other.z) + self.z.and_weight(&other.x);
        s % 2 == 0
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &PauliOp) -> Result<PauliOp> {
        Error::check_dim(self.num_qubits(), other.num_qubits())?;
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self ← self · other`. Dimensions must agree.
    #[inline]
    pub fn mul_assign_right(&mut self, other: &PauliOp) {
        debug_assert_eq!(self.num_qubits(), other.num_qubits());
        // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
        let sign = self.z.and_weight(&other.x) as u8 & 1;
        self.phase = (self.phase + other.phase + 2 * sign) & 3;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn adjoint(&self) -> PauliOp {
        // (i^p X^x Z^z)† = i^{-p} Z^z X^x = i^{-p} (-1)^{x·z} X^x Z^z
        let mut out = self.clone();
        let yc = (self.y_count() & 1) as u8;
        out.phase = (4 - self.phase + 2 * yc) & 3;
        out
    }

    /// Phase-free copy; with the `i^p X^x Z^z` convention this is the
    /// operator up to a global phase.
    pub fn without_phase(&self) -> PauliOp {
        Self::from_xz(self.x.clone(), self.z.clone())
    }

    /// The tensor factor on `positions`, phase zero.
    pub fn gather(&self, positions: &[usize]) -> PauliOp {
        Self::from_xz(self.x.gather(positions), self.z.gather(positions))
    }

    /// Qubits `start..end` as a standalone operator, phase zero.
    pub fn slice(&self, start: usize, end: usize) -> PauliOp {
        Self::from_xz(self.x.slice(start, end), self.z.slice(start, end))
    }

    /// Embeds `self` into an `n`-qubit operator with local qubit `k` at
    /// `positions[k]`, keeping the phase.
    pub fn embed(&self, positions: &[usize], n: usize) -> PauliOp {
        assert_eq!(positions.len(), self.num_qubits());
        let mut out = PauliOp::identity(n);
        out.x.scatter(positions, &self.x);
        out.z.scatter(positions, &self.z);
        out.phase = self.phase;
        out
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliOp) -> PauliOp {
        // X^{a}Z^{b} ⊗ X^{c}Z^{d} = X^{ac} Z^{bd} since the middle factors act
        // on disjoint qubits and commute.
        Self {
            x: self.x.concat(&other.x),
            z: self.z.concat(&other.z),
            phase: (self.phase + other.phase) & 3,
        }
    }

    /// Letters and a prefactor such that `self = prefactor · ⊗ letters`.
    fn letters(&self) -> (u8, String) {
        let n = self.num_qubits();
        let mut s = String::with_capacity(n);
        for j in 0..n {
            s.push(match (self.x.get(j), self.z.get(j)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        // Y = i X Z, so X^x Z^z = i^{-#Y} ⊗ letters.
        let pre = (self.phase as usize + 4 * n + 4 - self.y_count() % 4) % 4;
        (pre as u8, s)
    }
}

impl fmt::Display for PauliOp {
    /// Canonical text form, e.g. `+XIZY`, `-iZZ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (pre, s) = self.letters();
        let prefix = ["+", "+i", "-", "-i"][pre as usize];
        write!(f, "{prefix}{s}")
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (pre, body) = if let Some(r) = s.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let n = body.chars().count();
        let mut x = Bits::zeros(n);
        let mut z = Bits::zeros(n);
        let mut ys = 0u8;
        for (j, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x.set(j, true),
                'Z' => z.set(j, true),
                'Y' => {
                    x.set(j, true);
                    z.set(j, true);
                    ys = ys.wrapping_add(1);
                }
                other => return Err(Error::Parse(format!("bad Pauli letter {other:?} in {s:?}"))),
            }
        }
        Ok(Self {
            x,
            z,
            phase: (pre + ys) & 3,
        })
    }
}

impl Serialize for PauliOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn x_squared_is_identity() {
        let x = p("X");
        let xx = x.compose(&x).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.phase(), 0);
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let xz = p("X").compose(&p("Z")).unwrap();
        assert!(xz.x().get(0) && xz.z().get(0));
        assert_eq!(xz.phase(), 0);
        assert_eq!(xz, p("-iY"));
    }

    #[test]
    fn text_roundtrip_and_hermiticity() {
        for s in ["+XIZY", "-YY", "+iZ", "-iXY", "+IIII"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!(p("-YY").is_hermitian());
        assert!(p("-YY").is_negative());
        assert!(!p("+iZ").is_hermitian());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            p("XX").compose(&p("X")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_inverts() {
        for s in ["+iXZY", "-YXZ", "+Y", "-iZ"] {
            let a = p(s);
            let prod = a.compose(&a.adjoint()).unwrap();
            assert!(prod.is_identity());
            assert_eq!(prod.phase(), 0, "{s}");
        }
    }
}
