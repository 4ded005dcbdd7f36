//! Physical state vectors from loop sums and from tensor contraction.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;
use crate::lattice::{boundary_entry, trace_loops, Dims, LoopPattern, DOWN, LEFT, RIGHT, UP};
use crate::matchings::ConnectivityPattern;

use super::boundary::overlap_with_matching;
use super::network::{contract_all, Tensor};
use super::tensor::{c, conj2, mat_mul, transpose2, site_tensor, tensor_entries, Mat2, TensorParams, Variant, C64};

/// Dense amplitudes over the product basis; bit `i` of an index is the tile
/// at site `i` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub dims: Dims,
    pub amplitudes: Vec<C64>,
}

pub(crate) fn check_hilbert(dims: Dims) -> Result<()> {
    guard::check("Hilbert space", dims.sites(), guard::HILBERT_BITS)
}

impl StateVector {
    pub fn zeros(dims: Dims) -> Result<Self> {
        check_hilbert(dims)?;
        Ok(StateVector { dims, amplitudes: vec![c(0.0); 1 << dims.sites()] })
    }

    pub fn from_amplitudes(dims: Dims, amplitudes: Vec<C64>) -> Result<Self> {
        check_hilbert(dims)?;
        if amplitudes.len() != 1 << dims.sites() {
            return Err(LoopError::DimensionMismatch { expected: 1 << dims.sites(), got: amplitudes.len() });
        }
        Ok(StateVector { dims, amplitudes })
    }

    /// The product state of one loop pattern.
    pub fn basis(pattern: &LoopPattern) -> Result<Self> {
        let mut s = Self::zeros(pattern.dims())?;
        s.amplitudes[pattern.basis_index() as usize] = c(1.0);
        Ok(s)
    }

    pub fn amplitude(&self, pattern: &LoopPattern) -> C64 {
        self.amplitudes[pattern.basis_index() as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `||self - other|| / ||self||` (absolute distance when `self` vanishes).
    pub fn relative_distance(&self, other: &StateVector) -> f64 {
        let d: f64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let n = self.norm();
        if n > 0.0 {
            d / n
        } else {
            d
        }
    }

    /// `|<a|b>| / (||a|| ||b||)`, zero if either vanishes.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let n = self.norm() * other.norm();
        if n == 0.0 {
            0.0
        } else {
            self.inner(other).norm() / n
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.amplitudes.iter().all(|a| a.norm() <= tol)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
        self.amplitudes.iter().enumerate().filter(|(_, a)| a.re != 0.0 || a.im != 0.0).map(|(i, &a)| (i, a))
    }

    /// CSV `index,re,im` of the nonzero amplitudes, sorted by index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, a) in self.nonzero() {
            let _ = writeln!(out, "{},{},{}", i, a.re, a.im);
        }
        out
    }
}

/// Closed-loop count and zero-tile count of every basis pattern, plus the
/// realised matching on an open patch.
pub struct PatternTable {
    pub dims: Dims,
    pub n_closed: Vec<u16>,
    pub n_zero: Vec<u16>,
    pub matchings: Vec<ConnectivityPattern>,
    pub class_of: Vec<u32>,
}

impl PatternTable {
    pub fn build(dims: Dims) -> Result<Self> {
        check_hilbert(dims)?;
        let total = 1usize << dims.sites();
        let mut n_closed = Vec::with_capacity(total);
        let mut n_zero = Vec::with_capacity(total);
        let mut matchings: Vec<ConnectivityPattern> = Vec::new();
        let mut ids: HashMap<ConnectivityPattern, u32> = HashMap::new();
        let mut class_of = Vec::new();
        for k in 0..total {
            let pat = LoopPattern::from_index(dims, k as u64);
            let dec = trace_loops(&pat);
            n_closed.push(dec.closed_loops.len() as u16);
            n_zero.push(pat.zero_tiles() as u16);
            if !dims.is_torus() {
                let p = ConnectivityPattern::new(dims.half_perimeter(), dec.open_paths.iter().map(|o| o.ends).collect())?;
                let next = matchings.len() as u32;
                let id = *ids.entry(p.clone()).or_insert_with(|| {
                    matchings.push(p);
                    next
                });
                class_of.push(id);
            }
        }
        Ok(PatternTable { dims, n_closed, n_zero, matchings, class_of })
    }

    /// `2^{n_L} lambda^{b_L}` for basis index `k`.
    pub fn weight(&self, k: usize, lambda: C64) -> C64 {
        c(2f64.powi(self.n_closed[k] as i32)) * lambda.powu(self.n_zero[k] as u32)
    }
}

/// `sum_{L in C_p} 2^{n_L} lambda^{b_L} |L>`; zero for a forbidden `p`.
pub fn psi_class(dims: Dims, p: &ConnectivityPattern, lambda: C64) -> Result<StateVector> {
    if dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    if p.n() != dims.half_perimeter() {
        return Err(LoopError::DimensionMismatch { expected: dims.half_perimeter(), got: p.n() });
    }
    let table = PatternTable::build(dims)?;
    let mut s = StateVector::zeros(dims)?;
    if let Some(id) = table.matchings.iter().position(|q| q == p) {
        for k in 0..s.amplitudes.len() {
            if table.class_of[k] as usize == id {
                s.amplitudes[k] = table.weight(k, lambda);
            }
        }
    }
    Ok(s)
}

fn check_boundary(dims: Dims, x: &[C64]) -> Result<()> {
    if dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    let want = 1usize << (2 * dims.half_perimeter());
    if x.len() != want {
        return Err(LoopError::DimensionMismatch { expected: want, got: x.len() });
    }
    Ok(())
}

/// Open-patch state with boundary vector `X`, by summing over loop patterns:
/// `sum_L <X|m(p_L)> 2^{n_L} lambda^{b_L} |L>`.
pub fn psi_obc(dims: Dims, x: &[C64], lambda: C64) -> Result<StateVector> {
    check_boundary(dims, x)?;
    let table = PatternTable::build(dims)?;
    let coeff: Vec<C64> = table
        .matchings
        .iter()
        .map(|p| overlap_with_matching(x, p))
        .collect::<Result<_>>()?;
    let amplitudes = (0..1usize << dims.sites())
        .map(|k| coeff[table.class_of[k] as usize] * table.weight(k, lambda))
        .collect();
    StateVector::from_amplitudes(dims, amplitudes)
}

/// Label of a physical leg and of a virtual bond in contraction networks.
fn phys_label(site: usize) -> usize {
    site
}

fn edge_label(dims: Dims, edge: usize) -> usize {
    dims.sites() + edge
}

fn leg_labels(dims: Dims, site: usize) -> [usize; 4] {
    [UP, LEFT, DOWN, RIGHT].map(|s| edge_label(dims, dims.side_edge(site, s)))
}

fn finish(dims: Dims, t: Tensor) -> Result<StateVector> {
    let order: Vec<usize> = (0..dims.sites()).map(phys_label).collect();
    StateVector::from_amplitudes(dims, t.permuted(&order)?)
}

/// The same state by contracting `conj(X)` with one tensor per site.
pub fn psi_obc_contract(dims: Dims, x: &[C64], params: TensorParams) -> Result<StateVector> {
    check_boundary(dims, x)?;
    check_hilbert(dims)?;
    let entries = tensor_entries(params);
    let stubs: Vec<usize> = (1..=2 * dims.half_perimeter())
        .map(|k| {
            let (site, side) = boundary_entry(dims, k);
            edge_label(dims, dims.side_edge(site, side))
        })
        .collect();
    let mut tensors = vec![Tensor::new(stubs, x.iter().map(|v| v.conj()).collect())?];
    for site in 0..dims.sites() {
        tensors.push(site_tensor(&entries, phys_label(site), leg_labels(dims, site)));
    }
    finish(dims, contract_all(tensors)?)
}

/// Commuting virtual unitaries threaded around the two torus cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringSpec {
    /// Acts on the bonds crossing a vertical cut (one per row).
    pub u: Mat2,
    /// Acts on the bonds crossing a horizontal cut (one per column).
    pub v: Mat2,
}

impl StringSpec {
    pub fn new(u: Mat2, v: Mat2) -> Result<Self> {
        let uv = mat_mul(&u, &v);
        let vu = mat_mul(&v, &u);
        let mut diff: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                diff = diff.max((uv[i][j] - vu[i][j]).norm());
            }
        }
        if diff > 1e-12 {
            return Err(LoopError::Precondition(format!("string unitaries do not commute (|[U,V]| = {:.3e})", diff)));
        }
        Ok(StringSpec { u, v })
    }

    /// `U = D_phi`, `V = D_theta`.
    pub fn from_angles(phi: f64, theta: f64) -> Self {
        StringSpec { u: super::tensor::phase_diag(phi), v: super::tensor::phase_diag(theta) }
    }
}

fn check_torus(dims: Dims) -> Result<()> {
    if !dims.is_torus() {
        return Err(LoopError::Topology("torus"));
    }
    check_hilbert(dims)
}

/// Torus state. Without strings: `sum_L 2^{n_L} lambda^{b_L} |L>`; with
/// strings: contraction with the string cuts at the wrap-around bonds.
pub fn psi_torus(dims: Dims, lambda: C64, strings: Option<&StringSpec>) -> Result<StateVector> {
    check_torus(dims)?;
    match strings {
        None => {
            let table = PatternTable::build(dims)?;
            let amplitudes = (0..1usize << dims.sites()).map(|k| table.weight(k, lambda)).collect();
            StateVector::from_amplitudes(dims, amplitudes)
        }
        Some(s) => psi_torus_contract(dims, TensorParams { lambda, ..Default::default() }, Some(s), (0, 0)),
    }
}

/// Torus state by contraction. The `U` string crosses the bonds between
/// columns `cut.0 - 1` and `cut.0` (cyclically), the `V` string the bonds
/// between rows `cut.1 - 1` and `cut.1`. A bond carries the plain unitary
/// when the tile right of (or below) the cut is on the even sublattice and
/// its conjugate otherwise, so at cut `(0, 0)` both strings start plain.
/// Bond matrices are indexed `[left][right]` and `[above][below]`; the `U`
/// string is laid down transposed so that it commutes with `V` where the
/// two strings cross.
pub fn psi_torus_contract(
    dims: Dims,
    params: TensorParams,
    strings: Option<&StringSpec>,
    cut: (usize, usize),
) -> Result<StateVector> {
    check_torus(dims)?;
    let entries = tensor_entries(params);
    let mut fresh = dims.sites() + dims.n_edges();
    let mut strings_t = Vec::with_capacity(dims.n_h + dims.n_v);
    let mut labels: Vec<[usize; 4]> = (0..dims.sites()).map(|s| leg_labels(dims, s)).collect();
    if let Some(spec) = strings {
        let col = cut.0 % dims.n_h;
        for r in 0..dims.n_v {
            let m = if (r + col) % 2 == 0 { transpose2(&spec.u) } else { transpose2(&conj2(&spec.u)) };
            let right = dims.site(r, col);
            let left_label = labels[right][LEFT as usize];
            labels[right][LEFT as usize] = fresh;
            strings_t.push(Tensor::matrix(left_label, fresh, m));
            fresh += 1;
        }
        let row = cut.1 % dims.n_v;
        for col in 0..dims.n_h {
            let m = if (row + col) % 2 == 0 { spec.v } else { conj2(&spec.v) };
            let below = dims.site(row, col);
            let up_label = labels[below][UP as usize];
            labels[below][UP as usize] = fresh;
            strings_t.push(Tensor::matrix(up_label, fresh, m));
            fresh += 1;
        }
    }
    let mut tensors: Vec<Tensor> =
        labels.iter().enumerate().map(|(site, legs)| site_tensor(&entries, phys_label(site), *legs)).collect();
    tensors.extend(strings_t);
    finish(dims, contract_all(tensors)?)
}

/// Largest relative change of the string state over all cut positions,
/// measured against the cut at `(0, 0)`.
pub fn string_movability(dims: Dims, params: TensorParams, strings: &StringSpec) -> Result<f64> {
    let base = psi_torus_contract(dims, params, Some(strings), (0, 0))?;
    let mut worst: f64 = 0.0;
    for cc in 0..dims.n_h {
        for rc in 0..dims.n_v {
            if (cc, rc) == (0, 0) {
                continue;
            }
            let s = psi_torus_contract(dims, params, Some(strings), (cc, rc))?;
            worst = worst.max(base.relative_distance(&s));
        }
    }
    Ok(worst)
}

/// Torus states of the two tensor variants compared by contraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeComparison {
    /// `||psi(A, lambda) - psi(At, -lambda)|| / ||psi(A, lambda)||`.
    pub paired_distance: f64,
    /// `||psi(A, lambda) - psi(At, lambda)|| / ||psi(A, lambda)||`.
    pub same_lambda_distance: f64,
    /// `|<psi(A, lambda)|psi(At, lambda)>|^2` over the norms.
    pub same_lambda_fidelity: f64,
}

/// The `Y` gauge on up/right legs maps `At(lambda)` to `A(-lambda)`; on an
/// even torus the gauge matrices cancel in pairs, so the states agree.
pub fn gauge_comparison(dims: Dims, lambda: C64) -> Result<GaugeComparison> {
    let a = psi_torus_contract(dims, TensorParams { lambda, variant: Variant::A }, None, (0, 0))?;
    let paired = psi_torus_contract(dims, TensorParams { lambda: -lambda, variant: Variant::ATilde }, None, (0, 0))?;
    let same = psi_torus_contract(dims, TensorParams { lambda, variant: Variant::ATilde }, None, (0, 0))?;
    Ok(GaugeComparison {
        paired_distance: a.relative_distance(&paired),
        same_lambda_distance: a.relative_distance(&same),
        same_lambda_fidelity: a.fidelity(&same),
    })
}

/// Summary of a state usable in manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSummary {
    pub sites: usize,
    pub nonzero: usize,
    pub norm: f64,
}

impl From<&StateVector> for StateSummary {
    fn from(s: &StateVector) -> Self {
        StateSummary { sites: s.dims.sites(), nonzero: s.nonzero().count(), norm: s.norm() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::boundary::{dual_matching, matching_vector};
    use crate::quantum::tensor::phase_diag;

    #[test]
    fn single_tile_zero_has_amplitude_lambda() {
        let d = Dims::open(1, 1).unwrap();
        let p = ConnectivityPattern::from_text("1-4,2-3").unwrap();
        let s = psi_class(d, &p, c(0.5)).unwrap();
        assert_eq!(s.amplitudes, vec![c(0.5), c(0.0)]);
    }

    #[test]
    fn loop_sum_equals_contraction_on_small_patches() {
        for (h, v) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let d = Dims::open(h, v).unwrap();
            let p = ConnectivityPattern::nearest_neighbour(h + v);
            let x = matching_vector(&p).unwrap();
            let a = psi_obc(d, &x, c(0.8)).unwrap();
            let b = psi_obc_contract(d, &x, TensorParams::a(0.8)).unwrap();
            assert!(a.relative_distance(&b) < 1e-12, "{}x{}", h, v);
        }
    }

    #[test]
    fn dual_boundary_selects_one_class() {
        let d = Dims::open(2, 2).unwrap();
        let p = ConnectivityPattern::from_text("1-8,2-3,4-5,6-7").unwrap();
        let a = psi_obc(d, &dual_matching(&p).unwrap(), c(1.0)).unwrap();
        let b = psi_class(d, &p, c(1.0)).unwrap();
        assert!(b.relative_distance(&a) < 1e-12);
    }

    #[test]
    fn torus_contraction_matches_loop_sum() {
        for (h, v) in [(2, 2), (4, 2), (2, 4)] {
            let d = Dims::torus(h, v).unwrap();
            let a = psi_torus(d, c(1.0), None).unwrap();
            let b = psi_torus_contract(d, TensorParams::a(1.0), None, (0, 0)).unwrap();
            assert!(a.relative_distance(&b) < 1e-12);
        }
    }

    #[test]
    fn identity_strings_change_nothing() {
        let d = Dims::torus(2, 2).unwrap();
        let id = phase_diag(0.0);
        let a = psi_torus(d, c(1.0), None).unwrap();
        let b = psi_torus(d, c(1.0), Some(&StringSpec::new(id, id).unwrap())).unwrap();
        assert!(a.relative_distance(&b) < 1e-12);
    }
}
