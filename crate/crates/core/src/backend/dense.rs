//! Dense state vectors for small systems and arbitrary unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::symplectic::clifford::check_positions;
use crate::symplectic::{CliffordOp, PauliOp};

/// Largest number of qubits the dense backend accepts.
pub const CAPACITY: usize = 12;

const UNITARY_TOL: f64 = 1e-10;

type C = Complex64;

#[inline]
fn bit_of(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn i_pow(p: u8) -> C {
    match p & 3 {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, 1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, -1.0),
    }
}

/// Applies `p` (local qubit `k` on `positions[k]`) to an amplitude vector.
pub(crate) fn apply_pauli_amps(amps: &mut [C], n: usize, positions: &[usize], p: &PauliOp) {
    let mut xmask = 0usize;
    let mut zmask = 0usize;
    for (k, &q) in positions.iter().enumerate() {
        if p.x().get(k) {
            xmask |= bit_of(n, q);
        }
        if p.z().get(k) {
            zmask |= bit_of(n, q);
        }
    }
    let phase = i_pow(p.phase());
    // X^x Z^z |i⟩ = (-1)^{z·i} |i ⊕ x⟩
    let src = amps.to_vec();
    for (i, a) in src.into_iter().enumerate() {
        let sign = if (i & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        amps[i ^ xmask] = a * phase * sign;
    }
}

/// The `2^n × 2^n` matrix of `p`.
pub fn pauli_matrix(p: &PauliOp) -> DMatrix<C> {
    let n = p.num_qubits();
    let dim = 1 << n;
    let all: Vec<usize> = (0..n).collect();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut v = vec![C::new(0.0, 0.0); dim];
        v[col] = C::new(1.0, 0.0);
        apply_pauli_amps(&mut v, n, &all, p);
        for (row, a) in v.into_iter().enumerate() {
            m[(row, col)] = a;
        }
    }
    m
}

/// A unitary implementing `c`, fixed up to global phase.
///
/// Column `0` is the state stabilized by the images of all `Z_i`; column
/// `x` is obtained from it by the images of the `X_i` selected by `x`.
pub fn clifford_unitary(c: &CliffordOp) -> Result<DMatrix<C>> {
    let n = c.num_qubits();
    if n > CAPACITY {
        return Err(Error::CapacityExceeded {
            capacity: CAPACITY,
            requested: n,
        });
    }
    let dim = 1 << n;
    let all: Vec<usize> = (0..n).collect();
    let mut col0 = None;
    for seed in 0..dim {
        let mut v = vec![C::new(0.0, 0.0); dim];
        v[seed] = C::new(1.0, 0.0);
        for i in 0..n {
            let mut gv = v.clone();
            apply_pauli_amps(&mut gv, n, &all, c.z_image(i));
            for (a, b) in v.iter_mut().zip(&gv) {
                *a = (*a + *b) * 0.5;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|a| *a /= norm);
            col0 = Some(v);
            break;
        }
    }
    let col0 = col0.expect("stabilizer state has support on some basis state");
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut v = col0.clone();
        for i in 0..n {
            if col & bit_of(n, i) != 0 {
                apply_pauli_amps(&mut v, n, &all, c.x_image(i));
            }
        }
        for (row, a) in v.into_iter().enumerate() {
            u[(row, col)] = a;
        }
    }
    Ok(u)
}

/// Largest entry of `U†U - I`.
pub fn unitarity_deviation(u: &DMatrix<C>) -> f64 {
    let prod = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((prod[(r, c)] - C::new(target, 0.0)).norm());
        }
    }
    dev
}

/// A normalized state vector on at most [`CAPACITY`] qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C>,
}

impl DenseState {
    pub fn new(n: usize) -> Result<Self> {
        if n > CAPACITY {
            return Err(Error::CapacityExceeded {
                capacity: CAPACITY,
                requested: n,
            });
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[0] = C::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        if n > CAPACITY {
            return Err(Error::CapacityExceeded {
                capacity: CAPACITY,
                requested: n,
            });
        }
        let s = Self { n, amps };
        if (s.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Parse(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Appends `k` qubits in `|0⟩`.
    pub fn add_qubits(&mut self, k: usize) -> Result<std::ops::Range<usize>> {
        let start = self.n;
        if start + k > CAPACITY {
            return Err(Error::CapacityExceeded {
                capacity: CAPACITY,
                requested: start + k,
            });
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << (start + k)];
        for (i, a) in self.amps.iter().enumerate() {
            amps[i << k] = *a;
        }
        self.amps = amps;
        self.n = start + k;
        Ok(start..start + k)
    }

    pub fn apply_pauli(&mut self, positions: &[usize], p: &PauliOp) -> Result<()> {
        Error::check_dim(positions.len(), p.num_qubits())?;
        check_positions(positions, self.n)?;
        apply_pauli_amps(&mut self.amps, self.n, positions, p);
        Ok(())
    }

    /// Applies a `2^k × 2^k` unitary with local qubit `j` on `positions[j]`.
    pub fn apply_unitary(&mut self, positions: &[usize], u: &DMatrix<C>) -> Result<()> {
        let k = positions.len();
        Error::check_dim(1 << k, u.nrows())?;
        Error::check_dim(1 << k, u.ncols())?;
        check_positions(positions, self.n)?;
        let deviation = unitarity_deviation(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        let masks: Vec<usize> = positions.iter().map(|&q| bit_of(self.n, q)).collect();
        let all_mask: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|local| {
                (0..k)
                    .filter(|&j| local & (1 << (k - 1 - j)) != 0)
                    .map(|j| masks[j])
                    .sum()
            })
            .collect();
        let mut buf = vec![C::new(0.0, 0.0); 1 << k];
        for base in 0..self.amps.len() {
            if base & all_mask != 0 {
                continue;
            }
            for (b, &off) in buf.iter_mut().zip(&offsets) {
                *b = self.amps[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let mut acc = C::new(0.0, 0.0);
                for (c, b) in buf.iter().enumerate() {
                    acc += u[(r, c)] * b;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    pub fn apply_clifford(&mut self, positions: &[usize], c: &CliffordOp) -> Result<()> {
        Error::check_dim(positions.len(), c.num_qubits())?;
        self.apply_unitary(positions, &clifford_unitary(c)?)
    }

    pub fn prob_one(&self, q: usize) -> Result<f64> {
        if q >= self.n {
            return Err(Error::IndexOutOfRange { index: q, n: self.n });
        }
        let m = bit_of(self.n, q);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        let p1 = self.prob_one(q)?;
        let outcome = rng.gen::<f64>() < p1;
        let m = bit_of(self.n, q);
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & m) != 0) == outcome {
                *a *= scale;
            } else {
                *a = C::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        Error::check_dim(self.n, other.n)?;
        let ip: C = self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.norm_sqr())
    }

    /// Expectation value of a Hermitian Pauli on `positions`.
    pub fn expectation(&self, positions: &[usize], p: &PauliOp) -> Result<f64> {
        let mut v = self.clone();
        v.apply_pauli(positions, p)?;
        let ip: C = self.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum();
        Ok(ip.re)
    }

    pub fn density_matrix(&self) -> DMatrix<C> {
        let v = nalgebra::DVector::from_vec(self.amps.clone());
        &v * v.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{gates, random_clifford};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t_gate() -> DMatrix<C> {
        let mut m = DMatrix::identity(2, 2);
        m[(1, 1)] = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        m
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(DenseState::new(13), Err(Error::CapacityExceeded { .. })));
        let mut s = DenseState::new(12).unwrap();
        assert!(s.add_qubits(1).is_err());
    }

    #[test]
    fn t_squared_equals_s() {
        let mut a = DenseState::new(1).unwrap();
        a.apply_clifford(&[0], &gates::h()).unwrap();
        let mut b = a.clone();
        a.apply_unitary(&[0], &t_gate()).unwrap();
        a.apply_unitary(&[0], &t_gate()).unwrap();
        b.apply_clifford(&[0], &gates::s()).unwrap();
        assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let mut s = DenseState::new(1).unwrap();
        let m = DMatrix::from_element(2, 2, C::new(1.0, 0.0));
        assert!(matches!(s.apply_unitary(&[0], &m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn clifford_unitary_reproduces_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..4 {
            let c = random_clifford(n, &mut rng);
            let u = clifford_unitary(&c).unwrap();
            assert!(unitarity_deviation(&u) < 1e-10);
            for i in 0..n {
                for (src, img) in [
                    (PauliOp::x_on(n, i), c.x_image(i)),
                    (PauliOp::z_on(n, i), c.z_image(i)),
                ] {
                    let lhs = &u * pauli_matrix(&src) * u.adjoint();
                    assert!((lhs - pauli_matrix(img)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = DenseState::new(2).unwrap();
        s.apply_pauli(&[0], &"X".parse().unwrap()).unwrap();
        assert!((s.amplitudes()[2].re - 1.0).abs() < 1e-12);
        s.add_qubits(1).unwrap();
        assert!((s.amplitudes()[4].re - 1.0).abs() < 1e-12);
    }
}
