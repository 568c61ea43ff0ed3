//! Clifford operators as generator-image tables.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::bits::Bits;
use super::pauli::PauliOp;
use crate::error::{Error, Result};

/// A Clifford unitary `C`, stored as the images `C X_i C†` and `C Z_i C†`.
///
/// Every constructor checks that the images are Hermitian and satisfy the
/// canonical commutation relations, so a value of this type always describes
/// a Clifford unitary (up to global phase).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CliffordRepr", into = "CliffordRepr")]
pub struct CliffordOp {
    x_img: Vec<PauliOp>,
    z_img: Vec<PauliOp>,
}

#[derive(Serialize, Deserialize)]
struct CliffordRepr {
    x: Vec<PauliOp>,
    z: Vec<PauliOp>,
}

impl TryFrom<CliffordRepr> for CliffordOp {
    type Error = Error;

    fn try_from(r: CliffordRepr) -> Result<Self> {
        CliffordOp::from_images(r.x, r.z)
    }
}

impl From<CliffordOp> for CliffordRepr {
    fn from(c: CliffordOp) -> Self {
        CliffordRepr {
            x: c.x_img,
            z: c.z_img,
        }
    }
}

impl CliffordOp {
    pub fn identity(n: usize) -> Self {
        Self {
            x_img: (0..n).map(|i| PauliOp::x_on(n, i)).collect(),
            z_img: (0..n).map(|i| PauliOp::z_on(n, i)).collect(),
        }
    }

    pub fn from_images(x_img: Vec<PauliOp>, z_img: Vec<PauliOp>) -> Result<Self> {
        let c = Self::from_images_unchecked(x_img, z_img);
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn from_images_unchecked(x_img: Vec<PauliOp>, z_img: Vec<PauliOp>) -> Self {
        Self { x_img, z_img }
    }

    /// Checks the symplectic conditions on the image table.
    pub fn validate(&self) -> Result<()> {
        let n = self.x_img.len();
        if self.z_img.len() != n {
            return Err(Error::InvalidClifford(format!(
                "{} X images but {} Z images",
                n,
                self.z_img.len()
            )));
        }
        for (kind, imgs) in [("X", &self.x_img), ("Z", &self.z_img)] {
            for (i, p) in imgs.iter().enumerate() {
                if p.num_qubits() != n {
                    return Err(Error::InvalidClifford(format!(
                        "image of {kind}{i} acts on {} qubits, expected {n}",
                        p.num_qubits()
                    )));
                }
                if !p.is_hermitian() {
                    return Err(Error::InvalidClifford(format!("image of {kind}{i} is not Hermitian")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let xz = !self.x_img[i].commutes_with(&self.z_img[j]);
                if xz != (i == j) {
                    return Err(Error::InvalidClifford(format!(
                        "images of X{i} and Z{j} have the wrong commutation relation"
                    )));
                }
                if j > i
                    && (!self.x_img[i].commutes_with(&self.x_img[j])
                        || !self.z_img[i].commutes_with(&self.z_img[j]))
                {
                    return Err(Error::InvalidClifford(format!(
                        "images of generators {i} and {j} anticommute"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x_img.len()
    }

    pub fn x_image(&self, i: usize) -> &PauliOp {
        &self.x_img[i]
    }

    pub fn z_image(&self, i: usize) -> &PauliOp {
        &self.z_img[i]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.num_qubits())
    }

    /// `C · P · C†`.
    pub fn conjugate(&self, p: &PauliOp) -> Result<PauliOp> {
        Error::check_dim(self.num_qubits(), p.num_qubits())?;
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliOp) -> PauliOp {
        let n = self.num_qubits();
        let mut out = PauliOp::identity(n);
        out.set_phase(p.phase());
        for j in p.x().ones_iter() {
            out.mul_assign_right(&self.x_img[j]);
        }
        for j in p.z().ones_iter() {
            out.mul_assign_right(&self.z_img[j]);
        }
        out
    }

    /// The operator product `self · other` (apply `other` first).
    pub fn compose(&self, other: &CliffordOp) -> Result<CliffordOp> {
        Error::check_dim(self.num_qubits(), other.num_qubits())?;
        let x_img = other.x_img.iter().map(|p| self.conjugate_unchecked(p)).collect();
        let z_img = other.z_img.iter().map(|p| self.conjugate_unchecked(p)).collect();
        let out = Self::from_images_unchecked(x_img, z_img);
        debug_assert!(out.validate().is_ok());
        Ok(out)
    }

    pub fn inverse(&self) -> CliffordOp {
        let n = self.num_qubits();
        let mut x_img = Vec::with_capacity(n);
        let mut z_img = Vec::with_capacity(n);
        for i in 0..n {
            // Symplectic duality: the preimage of X_i has x_k = z_i(C Z_k C†)
            // and z_k = z_i(C X_k C†); for Z_i read the x_i components instead.
            let mut qx = (Bits::zeros(n), Bits::zeros(n));
            let mut qz = (Bits::zeros(n), Bits::zeros(n));
            for k in 0..n {
                qx.0.set(k, self.z_img[k].z().get(i));
                qx.1.set(k, self.x_img[k].z().get(i));
                qz.0.set(k, self.z_img[k].x().get(i));
                qz.1.set(k, self.x_img[k].x().get(i));
            }
            x_img.push(self.signed_preimage(qx, &PauliOp::x_on(n, i)));
            z_img.push(self.signed_preimage(qz, &PauliOp::z_on(n, i)));
        }
        let out = Self::from_images_unchecked(x_img, z_img);
        debug_assert!(out.validate().is_ok());
        out
    }

    fn signed_preimage(&self, (x, z): (Bits, Bits), target: &PauliOp) -> PauliOp {
        let q = PauliOp::hermitian(x.clone(), z.clone(), false);
        let img = self.conjugate_unchecked(&q);
        debug_assert!(img.same_bits(target));
        if img.phase() == target.phase() {
            q
        } else {
            PauliOp::hermitian(x, z, true)
        }
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &CliffordOp) -> CliffordOp {
        let (a, b) = (self.num_qubits(), other.num_qubits());
        let ia = PauliOp::identity(a);
        let ib = PauliOp::identity(b);
        let x_img = self
            .x_img
            .iter()
            .map(|p| p.tensor(&ib))
            .chain(other.x_img.iter().map(|p| ia.tensor(p)))
            .collect();
        let z_img = self
            .z_img
            .iter()
            .map(|p| p.tensor(&ib))
            .chain(other.z_img.iter().map(|p| ia.tensor(p)))
            .collect();
        Self::from_images_unchecked(x_img, z_img)
    }

    /// Lifts `self` to `n` qubits, acting with local qubit `k` on `positions[k]`.
    pub fn embed(&self, positions: &[usize], n: usize) -> Result<CliffordOp> {
        Error::check_dim(self.num_qubits(), positions.len())?;
        check_positions(positions, n)?;
        let mut out = Self::identity(n);
        for (k, &p) in positions.iter().enumerate() {
            out.x_img[p] = self.x_img[k].embed(positions, n);
            out.z_img[p] = self.z_img[k].embed(positions, n);
        }
        Ok(out)
    }

    /// The Clifford sending qubit `k` to `perm[k]`.
    pub fn permutation(perm: &[usize]) -> Result<CliffordOp> {
        let n = perm.len();
        check_positions(perm, n)?;
        let mut out = Self::identity(n);
        for (k, &p) in perm.iter().enumerate() {
            out.x_img[k] = PauliOp::x_on(n, p);
            out.z_img[k] = PauliOp::z_on(n, p);
        }
        Ok(out)
    }

    /// The Clifford `P` acting by conjugation: `X_i ↦ ±X_i`, `Z_i ↦ ±Z_i`.
    pub fn from_pauli(p: &PauliOp) -> CliffordOp {
        let n = p.num_qubits();
        let mut out = Self::identity(n);
        for i in 0..n {
            if p.z().get(i) {
                out.x_img[i].set_phase(2);
            }
            if p.x().get(i) {
                out.z_img[i].set_phase(2);
            }
        }
        out
    }
}

pub(crate) fn check_positions(positions: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &p in positions {
        if p >= n {
            return Err(Error::IndexOutOfRange { index: p, n });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::DuplicateIndex(p));
        }
    }
    Ok(())
}

impl fmt::Display for CliffordOp {
    /// One line per generator, e.g. `X0 -> +ZI`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.x_img.iter().enumerate() {
            writeln!(f, "X{i} -> {p}")?;
        }
        for (i, p) in self.z_img.iter().enumerate() {
            writeln!(f, "Z{i} -> {p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CliffordOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
