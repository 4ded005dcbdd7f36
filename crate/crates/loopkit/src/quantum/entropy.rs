//! Schmidt ranks across rectangular regions.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;
use crate::lattice::Dims;

use super::state::StateVector;
use super::tensor::C64;

/// Default relative cutoff on singular values.
pub const SCHMIDT_TOL: f64 = 1e-10;

/// Rectangle of `height x width` tiles with top-left corner `(row, col)`,
/// wrapping on a torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub row: usize,
    pub col: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn new(row: usize, col: usize, width: usize, height: usize) -> Self {
        Region { row, col, width, height }
    }

    pub fn sites(&self, dims: Dims) -> Result<Vec<usize>> {
        let fits = |start: usize, len: usize, n: usize| len <= n && (dims.is_torus() || start + len <= n);
        if self.width == 0 || self.height == 0 || !fits(self.col, self.width, dims.n_h) || !fits(self.row, self.height, dims.n_v) {
            return Err(LoopError::Precondition(format!(
                "region {}x{} at ({},{}) does not fit a {}x{} lattice",
                self.width, self.height, self.row, self.col, dims.n_h, dims.n_v
            )));
        }
        let mut out = Vec::with_capacity(self.width * self.height);
        for r in 0..self.height {
            for cc in 0..self.width {
                out.push(dims.site((self.row + r) % dims.n_v, (self.col + cc) % dims.n_h));
            }
        }
        Ok(out)
    }
}

/// Index of `basis` restricted to `sites` (bit `i` = tile of `sites[i]`).
fn restrict(basis: usize, sites: &[usize]) -> usize {
    sites.iter().enumerate().fold(0, |acc, (i, &s)| acc | (((basis >> s) & 1) << i))
}

fn split(state: &StateVector, region: &Region) -> Result<(Vec<usize>, Vec<usize>)> {
    let dims = state.dims;
    guard::check("Schmidt decomposition", dims.sites(), guard::PATTERN_BITS)?;
    let inside = region.sites(dims)?;
    let set: HashSet<usize> = inside.iter().copied().collect();
    let outside = (0..dims.sites()).filter(|s| !set.contains(s)).collect();
    Ok((inside, outside))
}

/// Amplitudes reshaped to `[region configuration][complement configuration]`.
pub fn reshape(state: &StateVector, region: &Region) -> Result<DMatrix<C64>> {
    let (inside, outside) = split(state, region)?;
    let mut m = DMatrix::<C64>::zeros(1 << inside.len(), 1 << outside.len());
    for (k, a) in state.nonzero() {
        m[(restrict(k, &inside), restrict(k, &outside))] = a;
    }
    Ok(m)
}

pub fn schmidt_values(state: &StateVector, region: &Region) -> Result<Vec<f64>> {
    let m = reshape(state, region)?;
    let m = if m.nrows() > m.ncols() { m.transpose() } else { m };
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv)
}

/// Number of singular values above `tol` times the largest.
pub fn schmidt_rank(state: &StateVector, region: &Region, tol: f64) -> Result<usize> {
    let sv = schmidt_values(state, region)?;
    let top = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| top > 0.0 && s > tol * top).count())
}

/// Exact rank over the rationals of the reshaped amplitude matrix.
///
/// Every amplitude must be an integer. Complement configurations with
/// identical columns are grouped first; the grouped integer matrix is then
/// reduced by fraction-free Gaussian elimination.
pub fn schmidt_rank_exact(state: &StateVector, region: &Region) -> Result<usize> {
    let (inside, outside) = split(state, region)?;
    let rows = 1usize << inside.len();
    let mut columns: std::collections::HashMap<usize, Vec<i64>> = std::collections::HashMap::new();
    for (k, a) in state.nonzero() {
        if a.im != 0.0 || a.re.fract() != 0.0 || a.re.abs() > 2f64.powi(52) {
            return Err(LoopError::Precondition(format!("amplitude {} is not an integer", a)));
        }
        columns.entry(restrict(k, &outside)).or_insert_with(|| vec![0; rows])[restrict(k, &inside)] = a.re as i64;
    }
    let distinct: HashSet<Vec<i64>> = columns.into_values().collect();
    let m: Vec<Vec<BigInt>> = (0..rows)
        .map(|r| distinct.iter().map(|col| BigInt::from(col[r])).collect())
        .collect();
    Ok(bareiss_rank(m))
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for cc in col + 1..cols {
                let v = (&m[r][cc] * &m[rank][col] - &m[r][col] * &m[rank][cc]) / &prev;
                m[r][cc] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Product state check helper: `|L>` has Schmidt rank 1 across any cut.
pub fn is_product(state: &StateVector, region: &Region) -> Result<bool> {
    Ok(schmidt_rank(state, region, SCHMIDT_TOL)? == 1)
}

/// Rank of a complex matrix by singular values.
pub fn numerical_rank(m: &DMatrix<C64>, tol: f64) -> usize {
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    sv.iter().filter(|&&s| top > 0.0 && s > tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LoopPattern;

    #[test]
    fn basis_state_is_a_product() {
        let d = Dims::torus(4, 2).unwrap();
        let s = StateVector::basis(&LoopPattern::filled(d, 1)).unwrap();
        let r = Region::new(0, 0, 2, 2);
        assert_eq!(schmidt_rank(&s, &r, SCHMIDT_TOL).unwrap(), 1);
        assert_eq!(schmidt_rank_exact(&s, &r).unwrap(), 1);
    }

    #[test]
    fn bareiss_matches_small_ranks() {
        let m = |rows: &[&[i64]]| rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        assert_eq!(bareiss_rank(m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(bareiss_rank(m(&[&[0, 1, 2], &[1, 0, 3], &[1, 1, 5]])), 2);
        assert_eq!(bareiss_rank(m(&[&[2, 0, 0], &[0, 3, 0], &[0, 0, 5]])), 3);
        assert_eq!(bareiss_rank(m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(bareiss_rank(m(&[&[0, 1, 1, 2], &[0, 2, 2, 4], &[1, 0, 1, 0], &[3, 1, 4, 2]])), 2);
    }

    #[test]
    fn bareiss_agrees_with_singular_values() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (r, k) = (rng.random_range(1..6), rng.random_range(1..6));
            // Low-rank integer matrices: products of r x t and t x k factors.
            let t = rng.random_range(0..4);
            let a: Vec<Vec<i64>> = (0..r).map(|_| (0..t).map(|_| rng.random_range(-3..4)).collect()).collect();
            let b: Vec<Vec<i64>> = (0..t).map(|_| (0..k).map(|_| rng.random_range(-3..4)).collect()).collect();
            let prod: Vec<Vec<i64>> =
                (0..r).map(|i| (0..k).map(|j| (0..t).map(|x| a[i][x] * b[x][j]).sum()).collect()).collect();
            let dm = DMatrix::<C64>::from_fn(r, k, |i, j| C64::new(prod[i][j] as f64, 0.0));
            let big = prod.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
            assert_eq!(bareiss_rank(big), numerical_rank(&dm, 1e-9), "{:?}", prod);
        }
    }

    #[test]
    fn region_must_fit() {
        let d = Dims::open(3, 3).unwrap();
        assert!(Region::new(2, 2, 2, 2).sites(d).is_err());
        let t = Dims::torus(4, 4).unwrap();
        assert_eq!(Region::new(3, 3, 2, 2).sites(t).unwrap(), vec![15, 12, 3, 0]);
    }
}
