//! String-inserted torus states, their span, and their expansion in
//! winding sectors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::lattice::{enumerate_patterns, trace_loops, Dims, LoopPattern};
use crate::moves::{isolated_states, winding_sector, WindingSector};

use super::hamiltonian::{assemble_h, kernel, span_rank, BoundaryCondition, KERNEL_TOL};
use super::state::{check_hilbert, psi_torus_contract, StateVector, StringSpec};
use super::tensor::{c, TensorParams, C64};

/// Relative tolerance for numerical ranks of state families.
pub const RANK_TOL: f64 = 1e-8;

fn check_even_torus(dims: Dims) -> Result<()> {
    if !dims.is_torus() {
        return Err(LoopError::Topology("torus"));
    }
    if dims.n_h % 2 != 0 || dims.n_v % 2 != 0 {
        return Err(LoopError::InvalidDims { n_h: dims.n_h, n_v: dims.n_v, reason: "string states need even extents" });
    }
    check_hilbert(dims)
}

/// Angles `(phi, theta) = (pi l / (N_v + 1), pi m / (N_h + 1))`.
pub fn grid_angles(dims: Dims, l: i64, m: i64) -> (f64, f64) {
    (PI * l as f64 / (dims.n_v + 1) as f64, PI * m as f64 / (dims.n_h + 1) as f64)
}

/// `psi~_{l,m}`: the string state with `U = D_phi`, `V = D_theta` on the grid.
pub fn psi_grid(dims: Dims, l: i64, m: i64, params: TensorParams) -> Result<StateVector> {
    check_even_torus(dims)?;
    let (phi, theta) = grid_angles(dims, l, m);
    psi_torus_contract(dims, params, Some(&StringSpec::from_angles(phi, theta)), (0, 0))
}

/// All `(N_v + 1)(N_h + 1)` grid states, `l` major.
pub fn grid_states(dims: Dims, params: TensorParams) -> Result<Vec<((i64, i64), StateVector)>> {
    let mut out = Vec::new();
    for l in 0..=dims.n_v as i64 {
        for m in 0..=dims.n_h as i64 {
            out.push(((l, m), psi_grid(dims, l, m, params)?));
        }
    }
    Ok(out)
}

/// `((N_h + 1)(N_v + 1) + 1) / 2`.
pub fn string_subspace_formula(dims: Dims) -> usize {
    ((dims.n_h + 1) * (dims.n_v + 1) + 1) / 2
}

/// Numerical rank of the grid states at `lambda = 1`.
pub fn string_subspace_rank(dims: Dims) -> Result<usize> {
    let states = grid_states(dims, TensorParams::default())?;
    let v: Vec<Vec<C64>> = states.into_iter().map(|(_, s)| s.amplitudes).collect();
    Ok(span_rank(&v, RANK_TOL))
}

/// Largest relative violation of `psi~_{l,m} = psi~_{-l,-m}` and of the
/// periodicities `l -> l + N_v + 1`, `m -> m + N_h + 1` over the grid.
pub fn grid_relation_residual(dims: Dims, params: TensorParams) -> Result<f64> {
    let (lv, mh) = (dims.n_v as i64 + 1, dims.n_h as i64 + 1);
    let mut worst: f64 = 0.0;
    for l in 0..lv {
        for m in 0..mh {
            let base = psi_grid(dims, l, m, params)?;
            for (l2, m2) in [(-l, -m), (l + lv, m), (l, m + mh)] {
                worst = worst.max(base.relative_distance(&psi_grid(dims, l2, m2, params)?));
            }
        }
    }
    Ok(worst)
}

/// `g(j, k)`: `gcd(j, |k|)` with the conventions `g(j, 0) = j`,
/// `g(0, k) = |k|` and `g(0, 0) = 1`.
pub fn winding_gcd(j: i64, k: i64) -> i64 {
    match (j, k) {
        (0, 0) => 1,
        (j, 0) => j.abs(),
        (0, k) => k.abs(),
        (j, k) => j.gcd(&k.abs()),
    }
}

/// `[2 cos(pi j l / (g N~_v) + pi k m / (g N~_h))]^{2g}` with `g = g(j, k)`.
pub fn m_formula(dims: Dims, j: i64, k: i64, l: i64, m: i64) -> f64 {
    let g = winding_gcd(j, k) as f64;
    let arg = PI * (j * l) as f64 / (g * (dims.n_v + 1) as f64) + PI * (k * m) as f64 / (g * (dims.n_h + 1) as f64);
    (2.0 * arg.cos()).powi(2 * winding_gcd(j, k) as i32)
}

/// Coefficient of `|j,k>` in `psi~_{l,m}`: the closed form above, except
/// in the sector without non-contractible loops where it is 1.
pub fn m_coefficient(dims: Dims, j: i64, k: i64, l: i64, m: i64) -> f64 {
    if (j, k) == (0, 0) {
        1.0
    } else {
        m_formula(dims, j, k, l, m)
    }
}

/// The states `|j,k> = sum_{W(L)=(j,k)} 2^{n_L} |L>`, with `n_L` counting
/// contractible loops only.
pub fn winding_basis(dims: Dims) -> Result<BTreeMap<WindingSector, StateVector>> {
    check_even_torus(dims)?;
    let mut out: BTreeMap<WindingSector, StateVector> = BTreeMap::new();
    for l in enumerate_patterns(dims)? {
        let w = winding_sector(&l)?;
        let contractible = trace_loops(&l).closed_loops.iter().filter(|x| x.contractible()).count();
        let entry = match out.entry(w) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => e.insert(StateVector::zeros(dims)?),
        };
        entry.amplitudes[l.basis_index() as usize] = c(2f64.powi(contractible as i32));
    }
    Ok(out)
}

/// One compared coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapRow {
    pub l: i64,
    pub m: i64,
    pub j: i64,
    pub k: i64,
    pub extracted_re: f64,
    pub extracted_im: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindingOverlapReport {
    pub sectors: usize,
    pub grid_points: usize,
    /// Largest `|extracted - predicted|` over every sector and grid point.
    pub max_deviation: f64,
    /// Largest relative norm of the part of a grid state outside the sectors.
    pub max_residual: f64,
    /// Largest `|<j,k|j',k'>|` between distinct sectors.
    pub max_cross_overlap: f64,
    pub rows: Vec<OverlapRow>,
}

/// Expands every grid state in the winding basis at `lambda = 1` and
/// compares the coefficients with [`m_coefficient`].
pub fn winding_overlap_check(dims: Dims) -> Result<WindingOverlapReport> {
    let basis = winding_basis(dims)?;
    let sectors: Vec<(&WindingSector, &StateVector)> = basis.iter().collect();
    let mut cross: f64 = 0.0;
    for (a, (_, x)) in sectors.iter().enumerate() {
        for (_, y) in sectors.iter().skip(a + 1) {
            cross = cross.max(x.inner(y).norm());
        }
    }
    let mut rows = Vec::new();
    let mut dev: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let grid = grid_states(dims, TensorParams::default())?;
    for ((l, m), psi) in &grid {
        let mut rest = psi.amplitudes.clone();
        for (w, ket) in &sectors {
            let coeff = ket.inner(psi) / c(ket.norm_sqr());
            let predicted = m_coefficient(dims, w.j, w.k, *l, *m);
            dev = dev.max((coeff - c(predicted)).norm());
            for (r, a) in rest.iter_mut().zip(&ket.amplitudes) {
                *r -= coeff * a;
            }
            rows.push(OverlapRow {
                l: *l,
                m: *m,
                j: w.j,
                k: w.k,
                extracted_re: coeff.re,
                extracted_im: coeff.im,
                predicted,
            });
        }
        let rn: f64 = rest.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        residual = residual.max(rn / psi.norm().max(f64::MIN_POSITIVE));
    }
    Ok(WindingOverlapReport {
        sectors: sectors.len(),
        grid_points: grid.len(),
        max_deviation: dev,
        max_residual: residual,
        max_cross_overlap: cross,
        rows,
    })
}

/// Ground-space census of the torus parent Hamiltonian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusGroundSpace {
    pub kernel_dimension: usize,
    pub string_rank: usize,
    pub string_formula: usize,
    pub isolated: usize,
    pub span_rank: usize,
    /// Largest plaquette-term residual over the grid states.
    pub string_residual: f64,
    /// Largest plaquette-term residual over the isolated states.
    pub isolated_residual: f64,
    /// Largest norm of a grid or isolated state outside the numerical kernel.
    pub outside_kernel: f64,
}

pub fn torus_ground_space(dims: Dims, params: TensorParams) -> Result<TorusGroundSpace> {
    check_even_torus(dims)?;
    let h = assemble_h(dims, BoundaryCondition::Torus, params)?;
    let ker = kernel(&h.op, KERNEL_TOL, true)?;
    let strings: Vec<StateVector> = grid_states(dims, params)?.into_iter().map(|(_, s)| s).collect();
    let isolated: Vec<LoopPattern> = isolated_states(dims)?;
    let iso_states: Vec<StateVector> = isolated.iter().map(StateVector::basis).collect::<Result<_>>()?;
    let string_residual = strings.iter().map(|s| h.max_term_residual(s) / s.norm()).fold(0.0, f64::max);
    let isolated_residual = iso_states.iter().map(|s| h.max_term_residual(s)).fold(0.0, f64::max);
    let mut outside: f64 = 0.0;
    for s in strings.iter().chain(&iso_states) {
        let mut rest = s.amplitudes.clone();
        for b in &ker.basis {
            let ov: C64 = b.iter().zip(&s.amplitudes).map(|(x, y)| x.conj() * y).sum();
            for (r, x) in rest.iter_mut().zip(b) {
                *r -= ov * x;
            }
        }
        let rn: f64 = rest.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        outside = outside.max(rn / s.norm());
    }
    let string_vecs: Vec<Vec<C64>> = strings.iter().map(|s| s.amplitudes.clone()).collect();
    let mut all = string_vecs.clone();
    all.extend(iso_states.iter().map(|s| s.amplitudes.clone()));
    Ok(TorusGroundSpace {
        kernel_dimension: ker.dimension,
        string_rank: span_rank(&string_vecs, RANK_TOL),
        string_formula: string_subspace_formula(dims),
        isolated: isolated.len(),
        span_rank: span_rank(&all, RANK_TOL),
        string_residual,
        isolated_residual,
        outside_kernel: outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_conventions() {
        assert_eq!(winding_gcd(0, 0), 1);
        assert_eq!(winding_gcd(2, 0), 2);
        assert_eq!(winding_gcd(0, -3), 3);
        assert_eq!(winding_gcd(2, -2), 2);
        assert_eq!(winding_gcd(1, 2), 1);
    }

    #[test]
    fn zero_angles_give_powers_of_four() {
        let d = Dims::torus(4, 4).unwrap();
        assert_eq!(m_formula(d, 2, 0, 0, 0), 16.0);
        assert_eq!(m_formula(d, 1, 1, 0, 0), 4.0);
        assert_eq!(m_coefficient(d, 0, 0, 3, 1), 1.0);
    }

    #[test]
    fn two_by_two_string_rank() {
        let d = Dims::torus(2, 2).unwrap();
        assert_eq!(string_subspace_rank(d).unwrap(), 5);
        assert!(grid_relation_residual(d, TensorParams::default()).unwrap() < 1e-10);
    }
}
