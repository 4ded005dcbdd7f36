//! Staggered spin expectations and two-point correlators, optionally in a
//! non-orthogonal physical basis.

use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::lattice::Dims;

use super::state::StateVector;
use super::tensor::{c, C64};

/// Overlap `u = <0|1>` of the two physical site states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GramBasis {
    pub u: C64,
}

impl Default for GramBasis {
    fn default() -> Self {
        GramBasis { u: c(0.0) }
    }
}

impl GramBasis {
    pub fn new(u: C64) -> Result<Self> {
        if u.norm() >= 1.0 || !u.norm().is_finite() {
            return Err(LoopError::Precondition(format!("site overlap |u| = {} must be below 1", u.norm())));
        }
        Ok(GramBasis { u })
    }

    pub fn is_orthonormal(&self) -> bool {
        self.u == c(0.0)
    }

    /// `G^{(x) n} v` with `G = [[1, u], [conj u, 1]]` on every site.
    pub fn apply(&self, dims: Dims, v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        if self.is_orthonormal() {
            return out;
        }
        for s in 0..dims.sites() {
            let bit = 1usize << s;
            for k in 0..out.len() {
                if k & bit != 0 {
                    continue;
                }
                let (a0, a1) = (out[k], out[k | bit]);
                out[k] = a0 + self.u * a1;
                out[k | bit] = self.u.conj() * a0 + a1;
            }
        }
        out
    }

    /// `<a|b>` in this basis.
    pub fn inner(&self, dims: Dims, a: &[C64], b: &[C64]) -> C64 {
        let gb = self.apply(dims, b);
        a.iter().zip(&gb).map(|(x, y)| x.conj() * y).sum()
    }
}

/// `sigma~_z(x)` on a basis state: `+1` for tile 0 on an even site (row +
/// column even) or tile 1 on an odd site, `-1` otherwise.
pub fn staggered_sign(dims: Dims, site: usize, basis: usize) -> f64 {
    let (r, cc) = dims.row_col(site);
    let z = if (basis >> site) & 1 == 0 { 1.0 } else { -1.0 };
    if (r + cc) % 2 == 0 {
        z
    } else {
        -z
    }
}

/// Expectation of an operator diagonal in the tile basis.
pub fn diagonal_expectation(state: &StateVector, gram: &GramBasis, f: impl Fn(usize) -> f64) -> Result<C64> {
    let dims = state.dims;
    let norm = gram.inner(dims, &state.amplitudes, &state.amplitudes);
    if norm.norm() == 0.0 {
        return Err(LoopError::Precondition("expectation in the zero state".into()));
    }
    let fv: Vec<C64> = state.amplitudes.iter().enumerate().map(|(k, a)| a * f(k)).collect();
    Ok(gram.inner(dims, &state.amplitudes, &fv) / norm)
}

/// Staggered magnetisations and connected correlators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observables {
    pub sites: Vec<usize>,
    /// `<sigma~_z(x)>` (real part).
    pub sigma: Vec<f64>,
    /// `C[x, y] = <sigma~_z(x) sigma~_z(y)> - <sigma~_z(x)><sigma~_z(y)>`.
    pub correlator: Vec<Vec<f64>>,
    /// Largest imaginary part met (non-zero only for `u` off the real axis).
    pub max_imag: f64,
}

pub fn observables(state: &StateVector, sites: &[usize], gram: &GramBasis) -> Result<Observables> {
    let dims = state.dims;
    if let Some(&s) = sites.iter().find(|&&s| s >= dims.sites()) {
        return Err(LoopError::OutOfRange { what: "site", value: s as i64, min: 0, max: dims.sites() as i64 - 1 });
    }
    GramBasis::new(gram.u)?;
    let mut imag: f64 = 0.0;
    let mut sigma = Vec::with_capacity(sites.len());
    for &x in sites {
        let e = diagonal_expectation(state, gram, |k| staggered_sign(dims, x, k))?;
        imag = imag.max(e.im.abs());
        sigma.push(e.re);
    }
    let mut correlator = vec![vec![0.0; sites.len()]; sites.len()];
    for (i, &x) in sites.iter().enumerate() {
        for (j, &y) in sites.iter().enumerate().skip(i) {
            let e = diagonal_expectation(state, gram, |k| staggered_sign(dims, x, k) * staggered_sign(dims, y, k))?;
            imag = imag.max(e.im.abs());
            let v = e.re - sigma[i] * sigma[j];
            correlator[i][j] = v;
            correlator[j][i] = v;
        }
    }
    Ok(Observables { sites: sites.to_vec(), sigma, correlator, max_imag: imag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LoopPattern;
    use crate::moves::stacked_rows;

    #[test]
    fn stacked_state_has_definite_signs() {
        let d = Dims::torus(4, 4).unwrap();
        let s = StateVector::basis(&stacked_rows(d, &[0, 1, 0, 1]).unwrap()).unwrap();
        let all: Vec<usize> = (0..16).collect();
        let o = observables(&s, &all, &GramBasis::default()).unwrap();
        for (x, v) in all.iter().zip(&o.sigma) {
            let (r, cc) = d.row_col(*x);
            let tile = cc % 2;
            let want = if (tile == 0) == ((r + cc) % 2 == 0) { 1.0 } else { -1.0 };
            assert_eq!(*v, want);
        }
        assert!(o.correlator.iter().flatten().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_overlap_is_the_standard_inner_product() {
        let d = Dims::open(2, 2).unwrap();
        let a: Vec<C64> = (0..16).map(|k| C64::new(k as f64, 1.0)).collect();
        let b: Vec<C64> = (0..16).map(|k| C64::new(1.0, -(k as f64))).collect();
        let plain: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        assert_eq!(GramBasis::default().inner(d, &a, &b), plain);
    }

    #[test]
    fn gram_inner_product_on_basis_states() {
        let d = Dims::open(2, 1).unwrap();
        let g = GramBasis::new(C64::new(0.3, 0.1)).unwrap();
        let zero = StateVector::basis(&LoopPattern::filled(d, 0)).unwrap();
        let one = StateVector::basis(&LoopPattern::filled(d, 1)).unwrap();
        let ov = g.inner(d, &zero.amplitudes, &one.amplitudes);
        assert!((ov - g.u * g.u).norm() < 1e-15);
        assert!(GramBasis::new(c(1.0)).is_err());
    }
}
