//! Stabilizer tableau with destabilizers.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::symplectic::{CliffordOp, PauliOp};

use super::dense;

/// A pure stabilizer state on `n` qubits.
///
/// Row `i` of `stab` is the `i`-th stabilizer generator (a Hermitian Pauli
/// with sign), and `destab[i]` is a Pauli anticommuting with `stab[i]` and
/// commuting with every other generator. Measurements cost `O(n)` row
/// operations.
#[derive(Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    destab: Vec<PauliOp>,
    stab: Vec<PauliOp>,
}

impl Tableau {
    /// `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            destab: (0..n).map(|i| PauliOp::x_on(n, i)).collect(),
            stab: (0..n).map(|i| PauliOp::z_on(n, i)).collect(),
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Appends `k` qubits in `|0⟩` and returns their indices.
    pub fn add_qubits(&mut self, k: usize) -> std::ops::Range<usize> {
        let start = self.n;
        let n = start + k;
        for row in self.destab.iter_mut().chain(self.stab.iter_mut()) {
            row.x_mut().extend_zeros(k);
            row.z_mut().extend_zeros(k);
        }
        for i in start..n {
            self.destab.push(PauliOp::x_on(n, i));
            self.stab.push(PauliOp::z_on(n, i));
        }
        self.n = n;
        start..n
    }

    fn check(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: q, n: self.n })
        }
    }

    fn rows_mut(&mut self) -> impl Iterator<Item = &mut PauliOp> {
        self.destab.iter_mut().chain(self.stab.iter_mut())
    }

    pub fn h(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for row in self.rows_mut() {
            let (x, z) = (row.x().get(q), row.z().get(q));
            if x && z {
                row.set_phase(row.phase() + 2);
            }
            row.x_mut().set(q, z);
            row.z_mut().set(q, x);
        }
        Ok(())
    }

    pub fn s(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for row in self.rows_mut() {
            if row.x().get(q) {
                row.z_mut().flip(q);
                row.set_phase(row.phase() + 1);
            }
        }
        Ok(())
    }

    pub fn sdg(&mut self, q: usize) -> Result<()> {
        self.z(q)?;
        self.s(q)
    }

    pub fn x(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for row in self.rows_mut() {
            if row.z().get(q) {
                row.set_phase(row.phase() + 2);
            }
        }
        Ok(())
    }

    pub fn z(&mut self, q: usize) -> Result<()> {
        self.check(q)?;
        for row in self.rows_mut() {
            if row.x().get(q) {
                row.set_phase(row.phase() + 2);
            }
        }
        Ok(())
    }

    pub fn cx(&mut self, c: usize, t: usize) -> Result<()> {
        self.check(c)?;
        self.check(t)?;
        if c == t {
            return Err(Error::DuplicateIndex(c));
        }
        for row in self.rows_mut() {
            if row.x().get(c) {
                row.x_mut().flip(t);
            }
            if row.z().get(t) {
                row.z_mut().flip(c);
            }
        }
        Ok(())
    }

    /// Applies the Pauli `p` with local qubit `k` on `positions[k]`.
    pub fn apply_pauli(&mut self, positions: &[usize], p: &PauliOp) -> Result<()> {
        Error::check_dim(positions.len(), p.num_qubits())?;
        crate::symplectic::clifford::check_positions(positions, self.n)?;
        let full = p.embed(positions, self.n);
        for row in self.rows_mut() {
            if !row.commutes_with(&full) {
                row.set_phase(row.phase() + 2);
            }
        }
        Ok(())
    }

    /// Applies `c` with local qubit `k` on `positions[k]`.
    pub fn apply_clifford(&mut self, positions: &[usize], c: &CliffordOp) -> Result<()> {
        Error::check_dim(positions.len(), c.num_qubits())?;
        crate::symplectic::clifford::check_positions(positions, self.n)?;
        for row in self.rows_mut() {
            let local = row.gather(positions);
            if local.is_identity() {
                continue;
            }
            // The X-then-Z ordering factorises over disjoint qubit sets
            // without a sign, so conjugating the local factor is enough.
            let img = c.conjugate_unchecked(&local);
            row.x_mut().scatter(positions, img.x());
            row.z_mut().scatter(positions, img.z());
            row.set_phase(row.phase() + img.phase());
        }
        Ok(())
    }

    /// `Some(bit)` if a Z measurement of `q` is deterministic.
    pub fn peek_z(&self, q: usize) -> Result<Option<bool>> {
        self.check(q)?;
        if self.stab.iter().any(|g| g.x().get(q)) {
            return Ok(None);
        }
        let mut acc = PauliOp::identity(self.n);
        for (d, g) in self.destab.iter().zip(&self.stab) {
            if d.x().get(q) {
                acc.mul_assign_right(g);
            }
        }
        debug_assert!(acc.same_bits(&PauliOp::z_on(self.n, q)));
        Ok(Some(acc.phase() == 2))
    }

    /// `Some(bit)` if measuring the Hermitian Pauli `p` (on `positions`) has a
    /// deterministic outcome; bit `1` means eigenvalue `-1`.
    pub fn peek_pauli(&self, positions: &[usize], p: &PauliOp) -> Result<Option<bool>> {
        Error::check_dim(positions.len(), p.num_qubits())?;
        crate::symplectic::clifford::check_positions(positions, self.n)?;
        if !p.is_hermitian() {
            return Err(Error::Parse(format!("{p} is not Hermitian")));
        }
        let full = p.embed(positions, self.n);
        if self.stab.iter().any(|g| !g.commutes_with(&full)) {
            return Ok(None);
        }
        let mut acc = PauliOp::identity(self.n);
        for (d, g) in self.destab.iter().zip(&self.stab) {
            if !d.commutes_with(&full) {
                acc.mul_assign_right(g);
            }
        }
        debug_assert!(acc.same_bits(&full));
        Ok(Some(acc.phase() != full.phase()))
    }

    /// Z measurement of qubit `q`, collapsing the state.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        self.check(q)?;
        let Some(p) = (0..self.n).find(|&i| self.stab[i].x().get(q)) else {
            return Ok(self.peek_z(q)?.expect("deterministic outcome"));
        };
        let pivot = self.stab[p].clone();
        for i in 0..self.n {
            if i != p && self.stab[i].x().get(q) {
                self.stab[i].mul_assign_right(&pivot);
            }
            if i != p && self.destab[i].x().get(q) {
                self.destab[i].mul_assign_right(&pivot);
            }
        }
        let outcome: bool = rng.gen();
        self.destab[p] = pivot;
        let mut z = PauliOp::z_on(self.n, q);
        if outcome {
            z.set_phase(2);
        }
        self.stab[p] = z;
        Ok(outcome)
    }

    /// Stabilizer generators in reduced row-echelon form; two tableaux
    /// describe the same state iff their canonical forms are equal.
    pub fn canonical_stabilizers(&self) -> Vec<PauliOp> {
        let n = self.n;
        let mut rows = self.stab.clone();
        let mut rank = 0;
        for part in 0..2 {
            for col in 0..n {
                let bit = |r: &PauliOp| if part == 0 { r.x().get(col) } else { r.z().get(col) };
                let Some(piv) = (rank..n).find(|&r| bit(&rows[r])) else {
                    continue;
                };
                rows.swap(rank, piv);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && bit(row) {
                        row.mul_assign_right(&pivot);
                    }
                }
                rank += 1;
            }
        }
        rows
    }

    pub fn same_state(&self, other: &Tableau) -> bool {
        self.n == other.n && self.canonical_stabilizers() == other.canonical_stabilizers()
    }

    pub fn stabilizers(&self) -> &[PauliOp] {
        &self.stab
    }

    pub fn destabilizers(&self) -> &[PauliOp] {
        &self.destab
    }

    /// Checks the tableau invariants; used by tests and debug assertions.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if !self.stab[i].is_hermitian() {
                return Err(Error::InvalidClifford(format!("stabilizer {i} is not Hermitian")));
            }
            for j in 0..n {
                let anti = !self.destab[i].commutes_with(&self.stab[j]);
                if anti != (i == j) || !self.stab[i].commutes_with(&self.stab[j]) {
                    return Err(Error::InvalidClifford(format!("rows {i}, {j} violate the tableau relations")));
                }
            }
        }
        Ok(())
    }

    /// Dense amplitudes (qubit 0 most significant), up to a global phase.
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        if self.n > dense::CAPACITY {
            return Err(Error::CapacityExceeded {
                capacity: dense::CAPACITY,
                requested: self.n,
            });
        }
        // Any basis state with nonzero overlap works as a seed for the
        // projector; a measurement of a copy yields one.
        let mut probe = self.clone();
        let mut rng = crate::rng::trial_rng(0, 0);
        let mut seed = 0usize;
        for q in 0..self.n {
            if probe.measure(q, &mut rng)? {
                seed |= 1 << (self.n - 1 - q);
            }
        }
        let dim = 1usize << self.n;
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[seed] = Complex64::new(1.0, 0.0);
        let all: Vec<usize> = (0..self.n).collect();
        for g in &self.stab {
            let mut gv = v.clone();
            dense::apply_pauli_amps(&mut gv, self.n, &all, g);
            for (a, b) in v.iter_mut().zip(&gv) {
                *a = (*a + *b) * 0.5;
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in v.iter_mut() {
            *a /= norm;
        }
        Ok(v)
    }

    /// Stabilizer rows as sign+Pauli strings, one per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for g in &self.stab {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::gates;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_state_stabilizers() {
        let mut t = Tableau::new(2);
        t.h(0).unwrap();
        t.cx(0, 1).unwrap();
        let xx: PauliOp = "XX".parse().unwrap();
        let zz: PauliOp = "ZZ".parse().unwrap();
        let yy: PauliOp = "YY".parse().unwrap();
        assert_eq!(t.peek_pauli(&[0, 1], &xx).unwrap(), Some(false));
        assert_eq!(t.peek_pauli(&[0, 1], &zz).unwrap(), Some(false));
        assert_eq!(t.peek_pauli(&[0, 1], &yy).unwrap(), Some(true));
        assert_eq!(t.peek_z(0).unwrap(), None);
        assert_eq!(t.dump(), "+XX\n+ZZ\n");
    }

    #[test]
    fn fast_gates_match_generic_clifford() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = Tableau::new(3);
        let mut b = Tableau::new(3);
        for _ in 0..200 {
            let q = rng.gen_range(0..3);
            let r = (q + rng.gen_range(1..3)) % 3;
            match rng.gen_range(0..6) {
                0 => {
                    a.h(q).unwrap();
                    b.apply_clifford(&[q], &gates::h()).unwrap();
                }
                1 => {
                    a.s(q).unwrap();
                    b.apply_clifford(&[q], &gates::s()).unwrap();
                }
                2 => {
                    a.sdg(q).unwrap();
                    b.apply_clifford(&[q], &gates::sdg()).unwrap();
                }
                3 => {
                    a.x(q).unwrap();
                    b.apply_clifford(&[q], &gates::x()).unwrap();
                }
                4 => {
                    a.z(q).unwrap();
                    b.apply_clifford(&[q], &gates::z()).unwrap();
                }
                _ => {
                    a.cx(q, r).unwrap();
                    b.apply_clifford(&[q, r], &gates::cx()).unwrap();
                }
            }
            assert_eq!(a, b);
        }
        a.validate().unwrap();
    }

    #[test]
    fn measuring_twice_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let mut t = Tableau::new(3);
            t.h(0).unwrap();
            t.cx(0, 2).unwrap();
            let a = t.measure(0, &mut rng).unwrap();
            assert_eq!(t.measure(0, &mut rng).unwrap(), a);
            assert_eq!(t.measure(2, &mut rng).unwrap(), a);
            t.validate().unwrap();
        }
    }

    #[test]
    fn add_qubits_keeps_existing_state() {
        let mut t = Tableau::new(1);
        t.x(0).unwrap();
        let r = t.add_qubits(2);
        assert_eq!(r, 1..3);
        assert_eq!(t.peek_z(0).unwrap(), Some(true));
        assert_eq!(t.peek_z(2).unwrap(), Some(false));
        t.validate().unwrap();
    }

    #[test]
    fn canonical_form_ignores_generator_choice() {
        let mut a = Tableau::new(2);
        a.h(0).unwrap();
        a.cx(0, 1).unwrap();
        let mut b = Tableau::new(2);
        b.h(1).unwrap();
        b.cx(1, 0).unwrap();
        assert!(a.same_state(&b));
        b.z(0).unwrap();
        assert!(!a.same_state(&b));
    }
}
