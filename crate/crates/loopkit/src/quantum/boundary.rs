//! Boundary vectors built from matchings of the virtual legs.
//!
//! A vector on `2N` boundary qubits is indexed so that bit `k - 1` holds the
//! value on stub `k`. The matching vector `m(p)` is the unnormalised product
//! of `|00> + |11>` over the pairs of `p`.

use nalgebra::DMatrix;

use crate::error::{LoopError, Result};
use crate::matchings::{enumerate_matchings, ConnectivityPattern};

use super::tensor::{c, C64};

/// Largest `2N` for which boundary vectors are built.
pub const MAX_BOUNDARY_QUBITS: usize = 16;

fn check_size(n: usize) -> Result<()> {
    if 2 * n > MAX_BOUNDARY_QUBITS {
        return Err(LoopError::Guard { what: "boundary vector", needed: 2 * n, cap: MAX_BOUNDARY_QUBITS });
    }
    Ok(())
}

/// Boundary assignments consistent with every pair of `p`, as bit masks.
pub fn consistent_assignments(p: &ConnectivityPattern) -> Vec<usize> {
    let pairs = p.pairs();
    let mut out = Vec::with_capacity(1 << pairs.len());
    for choice in 0..(1usize << pairs.len()) {
        let mut a = 0usize;
        for (k, &(x, y)) in pairs.iter().enumerate() {
            if (choice >> k) & 1 == 1 {
                a |= (1 << (x - 1)) | (1 << (y - 1));
            }
        }
        out.push(a);
    }
    out
}

pub fn matching_vector(p: &ConnectivityPattern) -> Result<Vec<C64>> {
    check_size(p.n())?;
    let mut v = vec![c(0.0); 1 << (2 * p.n())];
    for a in consistent_assignments(p) {
        v[a] = c(1.0);
    }
    Ok(v)
}

/// `<X|m(p)>`.
pub fn overlap_with_matching(x: &[C64], p: &ConnectivityPattern) -> Result<C64> {
    if x.len() != 1 << (2 * p.n()) {
        return Err(LoopError::DimensionMismatch { expected: 1 << (2 * p.n()), got: x.len() });
    }
    Ok(consistent_assignments(p).into_iter().map(|a| x[a].conj()).sum())
}

/// Number of cycles of the union of two perfect matchings.
pub fn union_cycles(p: &ConnectivityPattern, q: &ConnectivityPattern) -> usize {
    let pp = p.partners();
    let qp = q.partners();
    let mut seen = vec![false; pp.len()];
    let mut cycles = 0;
    for start in 1..pp.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        loop {
            seen[x] = true;
            let y = pp[x];
            seen[y] = true;
            x = qp[y];
            if x == start {
                break;
            }
        }
    }
    cycles
}

/// `<m(p)|m(q)> = 2^{cycles of p and q}`.
pub fn matching_gram(matchings: &[ConnectivityPattern]) -> DMatrix<f64> {
    let n = matchings.len();
    DMatrix::from_fn(n, n, |i, j| 2f64.powi(union_cycles(&matchings[i], &matchings[j]) as i32))
}

/// The dual vector `m*(p)` with `<m*(p)|m(q)> = delta_{pq}` for all
/// non-crossing `q` on the same number of points.
pub fn dual_matching(p: &ConnectivityPattern) -> Result<Vec<C64>> {
    let n = p.n();
    check_size(n)?;
    let all = enumerate_matchings(n)?;
    let idx = all
        .iter()
        .position(|q| q == p)
        .ok_or_else(|| LoopError::Malformed("matching not found among non-crossing matchings".into()))?;
    let gram = matching_gram(&all);
    let inv = gram
        .try_inverse()
        .ok_or_else(|| LoopError::Construction("singular matching Gram matrix".into()))?;
    let mut v = vec![c(0.0); 1 << (2 * n)];
    for (r, q) in all.iter().enumerate() {
        let coeff = inv[(r, idx)];
        if coeff == 0.0 {
            continue;
        }
        for a in consistent_assignments(q) {
            v[a] += c(coeff);
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inner(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn gram_matches_vector_inner_products() {
        let all = enumerate_matchings(3).unwrap();
        let g = matching_gram(&all);
        for (i, p) in all.iter().enumerate() {
            for (j, q) in all.iter().enumerate() {
                let v = inner(&matching_vector(p).unwrap(), &matching_vector(q).unwrap());
                assert!((v - c(g[(i, j)])).norm() < 1e-12);
            }
        }
        assert_eq!(g[(0, 0)], 8.0);
    }

    #[test]
    fn duals_are_biorthogonal() {
        for n in 1..=5 {
            let all = enumerate_matchings(n).unwrap();
            for p in &all {
                let d = dual_matching(p).unwrap();
                for q in &all {
                    let want = if p == q { 1.0 } else { 0.0 };
                    let got = inner(&d, &matching_vector(q).unwrap());
                    assert!((got - c(want)).norm() < 1e-10, "n={} p={} q={} got {}", n, p, q, got);
                }
            }
        }
    }

    #[test]
    fn two_point_gram_is_invertible() {
        let all = enumerate_matchings(2).unwrap();
        let g = matching_gram(&all);
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 4.0]));
        assert!(g.try_inverse().is_some());
    }
}
