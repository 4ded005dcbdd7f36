//! Local parent terms, sparse Hamiltonians and their kernels.
//!
//! A term is `1 - P` with `P` the projector onto the states a small patch
//! can take for some boundary condition. Plaquette terms act on 2x2 windows;
//! domino terms act on pairs of boundary tiles whose outward legs are joined
//! by a maximally entangled pair.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;
use crate::lattice::{boundary_entry, Dims, Side, DOWN, LEFT, RIGHT, UP};

use super::network::{contract_all, Tensor};
use super::state::{check_hilbert, StateVector};
use super::tensor::{c, site_tensor, tensor_entries, TensorParams, C64};

/// Physical-by-boundary map of an open patch: entry `[phys][bdry]` is the
/// amplitude of physical configuration `phys` when the boundary legs are
/// fixed to `bdry` (bit `k - 1` for stub `k`).
pub fn boundary_to_bulk_map(dims: Dims, params: TensorParams) -> Result<DMatrix<C64>> {
    if dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    let nb = 2 * dims.half_perimeter();
    guard::check("boundary-to-bulk map", dims.sites() + nb, guard::HILBERT_BITS)?;
    let entries = tensor_entries(params);
    let label = |site: usize, side: u8| dims.sites() + dims.side_edge(site, side);
    let tensors: Vec<Tensor> = (0..dims.sites())
        .map(|s| site_tensor(&entries, s, [UP, LEFT, DOWN, RIGHT].map(|side| label(s, side))))
        .collect();
    let t = contract_all(tensors)?;
    let mut order: Vec<usize> = (0..dims.sites()).collect();
    for k in 1..=nb {
        let (site, side) = boundary_entry(dims, k);
        order.push(label(site, side));
    }
    let data = t.permuted(&order)?;
    let rows = 1usize << dims.sites();
    Ok(DMatrix::from_fn(rows, 1 << nb, |p, b| data[p | (b << dims.sites())]))
}

/// Orthogonal projector onto the column space of `m`, and its rank.
pub fn column_projector(m: &DMatrix<C64>, rel_tol: f64) -> (DMatrix<C64>, usize) {
    let gram = m * m.adjoint();
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let n = m.nrows();
    let mut p = DMatrix::<C64>::zeros(n, n);
    let mut rank = 0;
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if top > 0.0 && ev > rel_tol * top {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            p += &v * v.adjoint();
        }
    }
    (p, rank)
}

/// Which side of an open patch a domino term sits on.
pub const SIDES: [Side; 4] = [Side::Top, Side::Right, Side::Bottom, Side::Left];

fn side_slot(side: Side) -> usize {
    match side {
        Side::Top => 0,
        Side::Right => 1,
        Side::Bottom => 2,
        Side::Left => 3,
    }
}

/// Boundary-to-bulk map of a two-tile domino on `side`, with the two
/// outward legs on that side contracted into `|00> + |11>`.
///
/// Top and bottom dominos are horizontal (tile bit 0 is the left tile),
/// left and right dominos are vertical (tile bit 0 is the upper tile).
pub fn domino_map(side: Side, params: TensorParams) -> Result<DMatrix<C64>> {
    let (dims, arc) = match side {
        Side::Top => (Dims::open(2, 1)?, (1, 2)),
        Side::Bottom => (Dims::open(2, 1)?, (4, 5)),
        Side::Right => (Dims::open(1, 2)?, (2, 3)),
        Side::Left => (Dims::open(1, 2)?, (5, 6)),
    };
    let full = boundary_to_bulk_map(dims, params)?;
    let (a, b) = (arc.0 - 1, arc.1 - 1);
    let rest: Vec<usize> = (0..6).filter(|&k| k != a && k != b).collect();
    Ok(DMatrix::from_fn(4, 16, |p, r| {
        let mut bdry = 0usize;
        for (j, &k) in rest.iter().enumerate() {
            if (r >> j) & 1 == 1 {
                bdry |= 1 << k;
            }
        }
        full[(p, bdry)] + full[(p, bdry | (1 << a) | (1 << b))]
    }))
}

/// The plaquette term and the four side-resolved domino terms.
#[derive(Debug, Clone)]
pub struct LocalTerms {
    pub params: TensorParams,
    /// `1 - P` on a 2x2 window, local bit order row-major.
    pub plaquette: DMatrix<C64>,
    /// Rank of the 2x2 boundary-to-bulk map (dimension of the kernel of `plaquette`).
    pub plaquette_rank: usize,
    /// Indexed by [`SIDES`] order: top, right, bottom, left.
    pub domino: [DMatrix<C64>; 4],
    pub domino_rank: [usize; 4],
}

impl LocalTerms {
    pub fn domino_for(&self, side: Side) -> &DMatrix<C64> {
        &self.domino[side_slot(side)]
    }
}

pub const PROJECTOR_TOL: f64 = 1e-10;

pub fn build_local_terms(params: TensorParams) -> Result<LocalTerms> {
    let map = boundary_to_bulk_map(Dims::open(2, 2)?, params)?;
    let (p, plaquette_rank) = column_projector(&map, PROJECTOR_TOL);
    let plaquette = DMatrix::<C64>::identity(16, 16) - p;
    let mut domino = Vec::with_capacity(4);
    let mut domino_rank = [0usize; 4];
    for (k, &side) in SIDES.iter().enumerate() {
        let (q, r) = column_projector(&domino_map(side, params)?, PROJECTOR_TOL);
        domino.push(DMatrix::<C64>::identity(4, 4) - q);
        domino_rank[k] = r;
    }
    let domino: [DMatrix<C64>; 4] = domino.try_into().expect("four sides");
    Ok(LocalTerms { params, plaquette, plaquette_rank, domino, domino_rank })
}

/// Boundary conditions of a parent Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Obc,
    ObcGapped,
    Torus,
}

impl BoundaryCondition {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "obc" => Ok(BoundaryCondition::Obc),
            "obc_gapped" | "gapped" => Ok(BoundaryCondition::ObcGapped),
            "torus" | "pbc" => Ok(BoundaryCondition::Torus),
            other => Err(LoopError::Malformed(format!("unknown boundary condition '{}'", other))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Obc => "obc",
            BoundaryCondition::ObcGapped => "obc_gapped",
            BoundaryCondition::Torus => "torus",
        }
    }
}

/// Where one local term acts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    Plaquette,
    Domino(Side),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermPlacement {
    pub kind: TermKind,
    /// Sites in local bit order.
    pub sites: Vec<usize>,
}

/// Positions of all terms of `H` for the given boundary condition.
pub fn term_placements(dims: Dims, bc: BoundaryCondition) -> Result<Vec<TermPlacement>> {
    let mut out = Vec::new();
    match bc {
        BoundaryCondition::Torus => {
            if !dims.is_torus() {
                return Err(LoopError::Topology("torus"));
            }
            for r in 0..dims.n_v {
                for c in 0..dims.n_h {
                    let (r1, c1) = ((r + 1) % dims.n_v, (c + 1) % dims.n_h);
                    out.push(TermPlacement {
                        kind: TermKind::Plaquette,
                        sites: vec![dims.site(r, c), dims.site(r, c1), dims.site(r1, c), dims.site(r1, c1)],
                    });
                }
            }
        }
        BoundaryCondition::Obc | BoundaryCondition::ObcGapped => {
            if dims.is_torus() {
                return Err(LoopError::Topology("open"));
            }
            if bc == BoundaryCondition::ObcGapped && (dims.n_h % 2 != 0 || dims.n_v % 2 != 0) {
                return Err(LoopError::InvalidDims { n_h: dims.n_h, n_v: dims.n_v, reason: "gapped boundary needs even extents" });
            }
            for r in 0..dims.n_v.saturating_sub(1) {
                for c in 0..dims.n_h.saturating_sub(1) {
                    out.push(TermPlacement {
                        kind: TermKind::Plaquette,
                        sites: vec![dims.site(r, c), dims.site(r, c + 1), dims.site(r + 1, c), dims.site(r + 1, c + 1)],
                    });
                }
            }
            if bc == BoundaryCondition::ObcGapped {
                let (h, v) = (dims.n_h, dims.n_v);
                for n in 0..h / 2 {
                    let (a, b) = (2 * n, 2 * n + 1);
                    out.push(TermPlacement { kind: TermKind::Domino(Side::Top), sites: vec![dims.site(0, a), dims.site(0, b)] });
                    out.push(TermPlacement {
                        kind: TermKind::Domino(Side::Bottom),
                        sites: vec![dims.site(v - 1, a), dims.site(v - 1, b)],
                    });
                }
                for n in 0..v / 2 {
                    let (a, b) = (2 * n, 2 * n + 1);
                    out.push(TermPlacement { kind: TermKind::Domino(Side::Left), sites: vec![dims.site(a, 0), dims.site(b, 0)] });
                    out.push(TermPlacement {
                        kind: TermKind::Domino(Side::Right),
                        sites: vec![dims.site(a, h - 1), dims.site(b, h - 1)],
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Sparse Hermitian operator in compressed-row form.
#[derive(Debug, Clone)]
pub struct SparseOp {
    pub dim: usize,
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl SparseOp {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| (self.row_start[r]..self.row_start[r + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum())
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Coordinate triplets `row,col,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for r in 0..self.dim {
            for k in self.row_start[r]..self.row_start[r + 1] {
                let _ = writeln!(out, "{},{},{},{}", r, self.cols[k], self.vals[k].re, self.vals[k].im);
            }
        }
        out
    }

    /// Largest eigenvalue estimate by power iteration from a seeded start.
    pub fn norm_estimate(&self, iterations: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<C64> = (0..self.dim).map(|_| c(rng.random_range(0.5..1.5))).collect();
        let mut est = 0.0;
        for _ in 0..iterations {
            let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= n);
            let w = self.apply(&v);
            est = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v = w;
        }
        est
    }
}

/// Parent Hamiltonian with its term list.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub dims: Dims,
    pub bc: BoundaryCondition,
    pub terms: Vec<TermPlacement>,
    pub local: LocalTerms,
    pub op: SparseOp,
}

fn local_index(basis: usize, sites: &[usize]) -> usize {
    sites.iter().enumerate().fold(0, |acc, (j, &s)| acc | (((basis >> s) & 1) << j))
}

fn replace_local(basis: usize, sites: &[usize], local: usize) -> usize {
    sites.iter().enumerate().fold(basis, |acc, (j, &s)| (acc & !(1 << s)) | (((local >> j) & 1) << s))
}

impl Hamiltonian {
    fn matrix_of(&self, kind: &TermKind) -> &DMatrix<C64> {
        match kind {
            TermKind::Plaquette => &self.local.plaquette,
            TermKind::Domino(side) => self.local.domino_for(*side),
        }
    }

    /// Applies one term to a state.
    pub fn apply_term(&self, term: &TermPlacement, x: &[C64]) -> Vec<C64> {
        let m = self.matrix_of(&term.kind);
        let mut out = vec![c(0.0); x.len()];
        for (b, &amp) in x.iter().enumerate() {
            if amp == c(0.0) {
                continue;
            }
            let li = local_index(b, &term.sites);
            for lo in 0..m.nrows() {
                let h = m[(lo, li)];
                if h.norm() > 1e-15 {
                    out[replace_local(b, &term.sites, lo)] += h * amp;
                }
            }
        }
        out
    }

    /// Largest `||h_t psi|| / ||psi||` over all terms.
    pub fn max_term_residual(&self, psi: &StateVector) -> f64 {
        let n = psi.norm();
        if n == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| self.apply_term(t, &psi.amplitudes).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() / n)
            .fold(0.0, f64::max)
    }
}

pub fn assemble_h(dims: Dims, bc: BoundaryCondition, params: TensorParams) -> Result<Hamiltonian> {
    check_hilbert(dims)?;
    let terms = term_placements(dims, bc)?;
    let local = build_local_terms(params)?;
    let dim = 1usize << dims.sites();
    let mut row_start = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_start.push(0);
    let mut row: HashMap<usize, C64> = HashMap::new();
    let mut h = Hamiltonian {
        dims,
        bc,
        terms,
        local,
        op: SparseOp { dim, row_start: Vec::new(), cols: Vec::new(), vals: Vec::new() },
    };
    for r in 0..dim {
        row.clear();
        for t in &h.terms {
            let m = h.matrix_of(&t.kind);
            let lr = local_index(r, &t.sites);
            for lc in 0..m.ncols() {
                let v = m[(lr, lc)];
                if v.norm() > 1e-15 {
                    *row.entry(replace_local(r, &t.sites, lc)).or_insert(c(0.0)) += v;
                }
            }
        }
        let mut entries: Vec<(usize, C64)> = row.iter().filter(|(_, v)| v.norm() > 1e-14).map(|(&k, &v)| (k, v)).collect();
        entries.sort_by_key(|e| e.0);
        for (k, v) in entries {
            cols.push(k);
            vals.push(v);
        }
        row_start.push(cols.len());
    }
    h.op = SparseOp { dim, row_start, cols, vals };
    Ok(h)
}

/// Connected components of the off-diagonal pattern of `op`.
pub fn blocks(op: &SparseOp) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..op.dim).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for r in 0..op.dim {
        for k in op.row_start[r]..op.row_start[r + 1] {
            let (a, b) = (find(&mut parent, r), find(&mut parent, op.cols[k]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in 0..op.dim {
        let root = find(&mut parent, x);
        groups.entry(root).or_default().push(x);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

/// Largest block diagonalised densely.
pub const MAX_DENSE_BLOCK: usize = 4096;

/// Default kernel tolerance relative to `||H||`.
pub const KERNEL_TOL: f64 = 1e-9;

/// Kernel of a positive semidefinite operator.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub dimension: usize,
    pub norm: f64,
    pub threshold: f64,
    /// Smallest eigenvalue above the threshold (the gap), if any.
    pub gap: Option<f64>,
    pub largest_block: usize,
    pub basis: Vec<Vec<C64>>,
}

/// Eigenvalues below `rel_tol * ||H||` counted block by block.
pub fn kernel(op: &SparseOp, rel_tol: f64, keep_vectors: bool) -> Result<Kernel> {
    let norm = op.norm_estimate(300, 0x5eed);
    let threshold = rel_tol * norm.max(f64::MIN_POSITIVE);
    let mut dimension = 0;
    let mut gap: Option<f64> = None;
    let mut basis = Vec::new();
    let mut largest = 0;
    for block in blocks(op) {
        let n = block.len();
        largest = largest.max(n);
        if n > MAX_DENSE_BLOCK {
            return Err(LoopError::Guard { what: "dense block diagonalisation", needed: n, cap: MAX_DENSE_BLOCK });
        }
        let pos: HashMap<usize, usize> = block.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (i, &r) in block.iter().enumerate() {
            for k in op.row_start[r]..op.row_start[r + 1] {
                m[(i, pos[&op.cols[k]])] = op.vals[k];
            }
        }
        let eig = SymmetricEigen::new(m);
        for (k, &ev) in eig.eigenvalues.iter().enumerate() {
            if ev.abs() < threshold {
                dimension += 1;
                if keep_vectors {
                    let mut v = vec![c(0.0); op.dim];
                    for (i, &b) in block.iter().enumerate() {
                        v[b] = eig.eigenvectors[(i, k)];
                    }
                    basis.push(v);
                }
            } else if ev > 0.0 {
                gap = Some(gap.map_or(ev, |g: f64| g.min(ev)));
            }
        }
    }
    Ok(Kernel { dimension, norm, threshold, gap, largest_block: largest, basis })
}

pub fn kernel_dimension(h: &Hamiltonian, rel_tol: f64) -> Result<usize> {
    Ok(kernel(&h.op, rel_tol, false)?.dimension)
}

/// Numerical rank of a set of vectors: singular values above `rel_tol`
/// times the largest.
pub fn span_rank(vectors: &[Vec<C64>], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let dim = vectors[0].len();
    let m = DMatrix::<C64>::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    sv.iter().filter(|&&s| top > 0.0 && s > rel_tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plaquette_map_has_rank_twelve() {
        let t = build_local_terms(TensorParams::a(1.0)).unwrap();
        assert_eq!(t.plaquette_rank, 12);
        assert_eq!(t.domino_rank, [2, 2, 2, 2]);
    }

    #[test]
    fn bubble_superposition_is_annihilated() {
        let t = build_local_terms(TensorParams::a(1.0)).unwrap();
        // Local index = t00 + 2 t01 + 4 t10 + 8 t11.
        let idx = |a: usize, b: usize, cc: usize, d: usize| a | (b << 1) | (cc << 2) | (d << 3);
        let mut v = DMatrix::<C64>::zeros(16, 1);
        v[idx(0, 1, 1, 0)] = c(2.0);
        for e in [idx(0, 0, 1, 0), idx(0, 1, 0, 0), idx(1, 1, 1, 0), idx(0, 1, 1, 1)] {
            v[e] = c(1.0);
        }
        assert!((&t.plaquette * &v).norm() < 1e-12);
        let mut o3 = DMatrix::<C64>::zeros(16, 1);
        o3[idx(1, 0, 1, 1)] = c(1.0);
        assert!((&t.plaquette * &o3).norm() < 1e-12);
        let mut b = DMatrix::<C64>::zeros(16, 1);
        b[idx(0, 1, 1, 0)] = c(1.0);
        assert!((&t.plaquette * &b).norm() > 0.1);
    }

    #[test]
    fn term_counts() {
        let d = Dims::open(3, 2).unwrap();
        assert_eq!(term_placements(d, BoundaryCondition::Obc).unwrap().len(), 2);
        let t = Dims::torus(4, 2).unwrap();
        assert_eq!(term_placements(t, BoundaryCondition::Torus).unwrap().len(), 8);
        let g = Dims::open(4, 2).unwrap();
        assert_eq!(term_placements(g, BoundaryCondition::ObcGapped).unwrap().len(), 3 + 2 * 2 + 2);
        assert!(term_placements(Dims::open(3, 2).unwrap(), BoundaryCondition::ObcGapped).is_err());
    }

    #[test]
    fn two_by_two_kernel_is_twelve() {
        let h = assemble_h(Dims::open(2, 2).unwrap(), BoundaryCondition::Obc, TensorParams::a(1.0)).unwrap();
        assert_eq!(kernel_dimension(&h, KERNEL_TOL).unwrap(), 12);
    }
}
