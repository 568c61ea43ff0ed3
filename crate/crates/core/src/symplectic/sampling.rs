//! Uniform sampling of Pauli and Clifford operators.

use rand::Rng;

use super::bits::Bits;
use super::clifford::CliffordOp;
use super::pauli::PauliOp;

/// Uniform over the `4^n` Pauli bit patterns, phase zero.
pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliOp {
    PauliOp::random(n, rng)
}

/// A symplectic vector `(x | z)` of length `2n`.
#[derive(Clone)]
struct Sv(Bits);

impl Sv {
    fn form(&self, other: &Sv, n: usize) -> bool {
        let (a, b) = (&self.0, &other.0);
        let mut acc = false;
        for i in 0..n {
            acc ^= (a.get(i) & b.get(n + i)) ^ (a.get(n + i) & b.get(i));
        }
        acc
    }

    fn to_pauli(&self, n: usize, negative: bool) -> PauliOp {
        PauliOp::hermitian(self.0.slice(0, n), self.0.slice(n, 2 * n), negative)
    }
}

fn combination<R: Rng + ?Sized>(basis: &[Sv], len: usize, rng: &mut R) -> Sv {
    let mut v = Bits::zeros(len);
    for b in basis {
        if rng.gen::<bool>() {
            v.xor_assign(&b.0);
        }
    }
    Sv(v)
}

/// Reduces `vs` to a linearly independent spanning subset.
fn independent(vs: Vec<Sv>) -> Vec<Sv> {
    let mut pivots: Vec<(usize, Bits)> = Vec::new();
    let mut out = Vec::new();
    for v in vs {
        let mut r = v.0.clone();
        for (p, row) in &pivots {
            if r.get(*p) {
                r.xor_assign(row);
            }
        }
        let first = r.ones_iter().next();
        if let Some(p) = first {
            pivots.push((p, r));
            out.push(v);
        }
    }
    out
}

/// Uniform over the `n`-qubit Clifford group modulo global phase.
///
/// Builds the image table one symplectic pair at a time: the image of `X_i`
/// is a uniform nonzero vector of the current complement space, the image of
/// `Z_i` a uniform vector of that space anticommuting with it, after which the
/// space shrinks to the symplectic complement of the pair. Signs are uniform.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordOp {
    assert!(n >= 1, "random_clifford needs at least one qubit");
    let len = 2 * n;
    let mut basis: Vec<Sv> = (0..len)
        .map(|i| {
            let mut b = Bits::zeros(len);
            b.set(i, true);
            Sv(b)
        })
        .collect();
    let mut x_img = Vec::with_capacity(n);
    let mut z_img = Vec::with_capacity(n);
    for _ in 0..n {
        let a = loop {
            let v = combination(&basis, len, rng);
            if !v.0.is_zero() {
                break v;
            }
        };
        let b = loop {
            let v = combination(&basis, len, rng);
            if a.form(&v, n) {
                break v;
            }
        };
        x_img.push(a.to_pauli(n, rng.gen()));
        z_img.push(b.to_pauli(n, rng.gen()));
        let projected = basis
            .iter()
            .map(|v| {
                let mut w = v.0.clone();
                if v.form(&b, n) {
                    w.xor_assign(&a.0);
                }
                if v.form(&a, n) {
                    w.xor_assign(&b.0);
                }
                Sv(w)
            })
            .collect();
        basis = independent(projected);
    }
    debug_assert!(basis.is_empty());
    let c = CliffordOp::from_images_unchecked(x_img, z_img);
    debug_assert!(c.validate().is_ok());
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn valid_for_many_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..12 {
            random_clifford(n, &mut rng).validate().unwrap();
        }
    }

    #[test]
    fn seed_determinism() {
        let a = random_clifford(5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_clifford(5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let pa = random_pauli(9, &mut ChaCha8Rng::seed_from_u64(3));
        let pb = random_pauli(9, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(pa, pb);
    }
}
