//! Small dense linear algebra over GF(2).

use crate::symplectic::Bits;

/// Row-reduces `rows` in place and returns the pivot column of each
/// nonzero row, in order. Zero rows are dropped.
pub fn row_reduce(rows: &mut Vec<Bits>) -> Vec<usize> {
    let Some(cols) = rows.first().map(Bits::len) else {
        return Vec::new();
    };
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}

pub fn rank(rows: &[Bits]) -> usize {
    row_reduce(&mut rows.to_vec()).len()
}

/// A solution `v` of `rows[i] · v = rhs[i]` for all `i`, if one exists.
pub fn solve(rows: &[Bits], rhs: &Bits) -> Option<Bits> {
    let cols = rows.first().map_or(0, Bits::len);
    let mut aug: Vec<Bits> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut a = r.clone();
            a.push(rhs.get(i));
            a
        })
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut v = Bits::zeros(cols);
    for (row, &p) in aug.iter().zip(&pivots) {
        v.set(p, row.get(cols));
    }
    Some(v)
}

/// A basis of `{v : rows[i] · v = 0 for all i}` on `cols` columns.
pub fn kernel(rows: &[Bits], cols: usize) -> Vec<Bits> {
    let mut red = rows.to_vec();
    let pivots = row_reduce(&mut red);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = Bits::zeros(cols);
        v.set(free, true);
        for (row, &p) in red.iter().zip(&pivots) {
            if row.get(free) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Every element of the span of `basis`.
pub fn span(basis: &[Bits], cols: usize) -> Vec<Bits> {
    let mut out = vec![Bits::zeros(cols)];
    for b in basis {
        let more: Vec<Bits> = out.iter().map(|v| v.xor(b)).collect();
        out.extend(more);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Bits {
        Bits::from_bools(&s.bytes().map(|c| c == b'1').collect::<Vec<_>>())
    }

    #[test]
    fn hamming_kernel_has_sixteen_words() {
        let h = [b("0001111"), b("0110011"), b("1010101")];
        let k = kernel(&h, 7);
        assert_eq!(k.len(), 4);
        for v in span(&k, 7) {
            assert!(h.iter().all(|r| !r.dot(&v)));
        }
    }

    #[test]
    fn solve_finds_solutions_and_detects_inconsistency() {
        let rows = [b("110"), b("011")];
        let v = solve(&rows, &b("10")).unwrap();
        assert!(rows[0].dot(&v) && !rows[1].dot(&v));
        let rows = [b("110"), b("110")];
        assert!(solve(&rows, &b("10")).is_none());
    }
}
