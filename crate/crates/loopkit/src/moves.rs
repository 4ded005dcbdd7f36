//! Surgery moves between loop patterns.
//!
//! A bulk move rewrites one 2x2 window among the five mover classes
//! (the bubble `B` and the tadpoles `E1..E4`); the other eleven window
//! states are inert. On an open patch with even sides, boundary moves
//! rewrite a pair of boundary tiles within a three-state orbit.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;
use crate::lattice::{connectivity_of, enumerate_patterns, trace_loops, Dims, LoopPattern, Side};
use crate::matchings::{forbidden_witness, ConnectivityPattern};

/// Class of a 2x2 window, written as `top row / bottom row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlaquetteClass {
    B,
    E1,
    E2,
    E3,
    E4,
    O1,
    O2,
    O3,
    O4,
    O5,
    O6,
    O7,
    O8,
    O9,
    O10,
    O11,
}

use PlaquetteClass::*;

/// All classes with their tiles `[top-left, top-right, bottom-left, bottom-right]`.
pub const PLAQUETTE_TABLE: [(PlaquetteClass, [u8; 4]); 16] = [
    (B, [0, 1, 1, 0]),
    (E1, [0, 0, 1, 0]),
    (E2, [0, 1, 0, 0]),
    (E3, [1, 1, 1, 0]),
    (E4, [0, 1, 1, 1]),
    (O1, [1, 0, 0, 1]),
    (O2, [1, 0, 0, 0]),
    (O3, [1, 0, 1, 1]),
    (O4, [1, 1, 0, 1]),
    (O5, [0, 0, 0, 1]),
    (O6, [0, 1, 0, 1]),
    (O7, [1, 0, 1, 0]),
    (O8, [0, 0, 1, 1]),
    (O9, [1, 1, 0, 0]),
    (O10, [0, 0, 0, 0]),
    (O11, [1, 1, 1, 1]),
];

/// The five classes coupled by bulk moves.
pub const MOVERS: [PlaquetteClass; 5] = [B, E1, E2, E3, E4];

impl PlaquetteClass {
    pub fn tiles(self) -> [u8; 4] {
        PLAQUETTE_TABLE.iter().find(|(c, _)| *c == self).expect("every class is tabulated").1
    }

    pub fn is_mover(self) -> bool {
        MOVERS.contains(&self)
    }

    /// Relative amplitude of a mover class in the local ground state at
    /// `lambda = 1`; `None` for inert classes.
    pub fn weight(self) -> Option<u32> {
        match self {
            B => Some(2),
            E1 | E2 | E3 | E4 => Some(1),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        format!("{:?}", self)
    }
}

impl fmt::Display for PlaquetteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

pub fn classify_plaquette(tiles: [u8; 4]) -> PlaquetteClass {
    let t = tiles.map(|x| x & 1);
    PLAQUETTE_TABLE.iter().find(|(_, w)| *w == t).expect("16 classes cover 16 windows").0
}

/// Sites of the window with top-left corner `(row, col)`, wrapping on a torus.
fn window_sites(dims: Dims, row: usize, col: usize) -> [usize; 4] {
    let r1 = (row + 1) % dims.n_v;
    let c1 = (col + 1) % dims.n_h;
    [dims.site(row, col), dims.site(row, c1), dims.site(r1, col), dims.site(r1, c1)]
}

/// Top-left corners of all windows: interior ones on a patch, all on a torus.
pub fn window_positions(dims: Dims) -> Vec<(usize, usize)> {
    let (rows, cols) = if dims.is_torus() {
        (dims.n_v, dims.n_h)
    } else {
        (dims.n_v.saturating_sub(1), dims.n_h.saturating_sub(1))
    };
    (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect()
}

pub fn window_class(pattern: &LoopPattern, row: usize, col: usize) -> PlaquetteClass {
    let s = window_sites(pattern.dims(), row, col);
    classify_plaquette(s.map(|i| pattern.tiles()[i]))
}

fn with_tiles(pattern: &LoopPattern, sites: &[usize], values: &[u8]) -> LoopPattern {
    let mut tiles = pattern.tiles().to_vec();
    for (&s, &v) in sites.iter().zip(values) {
        tiles[s] = v;
    }
    LoopPattern::new(pattern.dims(), tiles).expect("same dims")
}

/// One bulk move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BulkMove {
    pub position: (usize, usize),
    pub from: PlaquetteClass,
    pub to: PlaquetteClass,
    /// Ground-state weight of the target class (2 for `B`, 1 for tadpoles).
    pub weight: u32,
    pub pattern: LoopPattern,
}

/// For every window in a mover class, the four patterns obtained by
/// substituting each other mover class.
pub fn bulk_neighbors(pattern: &LoopPattern) -> Vec<BulkMove> {
    let dims = pattern.dims();
    let mut out = Vec::new();
    for (r, c) in window_positions(dims) {
        let from = window_class(pattern, r, c);
        if !from.is_mover() {
            continue;
        }
        let sites = window_sites(dims, r, c);
        for to in MOVERS {
            if to == from {
                continue;
            }
            out.push(BulkMove {
                position: (r, c),
                from,
                to,
                weight: to.weight().expect("mover"),
                pattern: with_tiles(pattern, &sites, &to.tiles()),
            });
        }
    }
    out
}

/// Three-state orbit of a boundary domino and its stand-alone fourth state.
///
/// Local index `first + 2 * second`, where `first` is the left tile of a
/// horizontal domino and the upper tile of a vertical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominoOrbit {
    pub orbit: [usize; 3],
    pub weights: [u32; 3],
    pub standalone: usize,
}

/// Orbits of the domino terms, read off the kernel of the domino parent
/// term on each side (checked against it in the quantum tests).
pub fn domino_orbit(side: Side) -> DominoOrbit {
    match side {
        Side::Top | Side::Left => DominoOrbit { orbit: [0, 1, 3], weights: [1, 2, 1], standalone: 2 },
        Side::Right | Side::Bottom => DominoOrbit { orbit: [0, 2, 3], weights: [1, 2, 1], standalone: 1 },
    }
}

/// A domino position on the boundary of an even patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DominoPosition {
    pub side: Side,
    /// `n`-th domino along the side, from the left (top/bottom) or the top (left/right).
    pub index: usize,
}

impl DominoPosition {
    pub fn sites(&self, dims: Dims) -> [usize; 2] {
        let (a, b) = (2 * self.index, 2 * self.index + 1);
        match self.side {
            Side::Top => [dims.site(0, a), dims.site(0, b)],
            Side::Bottom => [dims.site(dims.n_v - 1, a), dims.site(dims.n_v - 1, b)],
            Side::Left => [dims.site(a, 0), dims.site(b, 0)],
            Side::Right => [dims.site(a, dims.n_h - 1), dims.site(b, dims.n_h - 1)],
        }
    }
}

fn check_even_open(dims: Dims) -> Result<()> {
    if dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    if dims.n_h % 2 != 0 || dims.n_v % 2 != 0 {
        return Err(LoopError::InvalidDims { n_h: dims.n_h, n_v: dims.n_v, reason: "boundary moves need even extents" });
    }
    Ok(())
}

pub fn domino_positions(dims: Dims) -> Result<Vec<DominoPosition>> {
    check_even_open(dims)?;
    let mut out = Vec::new();
    for side in [Side::Top, Side::Right, Side::Bottom, Side::Left] {
        let count = match side {
            Side::Top | Side::Bottom => dims.n_h / 2,
            Side::Left | Side::Right => dims.n_v / 2,
        };
        out.extend((0..count).map(|index| DominoPosition { side, index }));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMove {
    pub position: DominoPosition,
    pub from: usize,
    pub to: usize,
    pub weight: u32,
    pub pattern: LoopPattern,
}

pub fn boundary_neighbors(pattern: &LoopPattern) -> Result<Vec<BoundaryMove>> {
    let dims = pattern.dims();
    let mut out = Vec::new();
    for pos in domino_positions(dims)? {
        let sites = pos.sites(dims);
        let t = pattern.tiles();
        let local = (t[sites[0]] as usize) | ((t[sites[1]] as usize) << 1);
        let orbit = domino_orbit(pos.side);
        if !orbit.orbit.contains(&local) {
            continue;
        }
        for (k, &to) in orbit.orbit.iter().enumerate() {
            if to == local {
                continue;
            }
            out.push(BoundaryMove {
                position: pos,
                from: local,
                to,
                weight: orbit.weights[k],
                pattern: with_tiles(pattern, &sites, &[(to & 1) as u8, (to >> 1) as u8]),
            });
        }
    }
    Ok(out)
}

/// Disjoint-set forest over pattern indices.
pub struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb) as u32;
        }
    }
}

/// Connectivity of one class graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub matching: String,
    pub size: usize,
    pub components: usize,
    pub connected: bool,
}

/// Components of the bulk-move graph restricted to every non-empty class.
pub fn class_reports(dims: Dims) -> Result<Vec<ClassReport>> {
    if dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    let n = dims.sites();
    guard::check("pattern enumeration", n, guard::PATTERN_BITS)?;
    let total = 1usize << n;
    let mut uf = UnionFind::new(total);
    let mut class_id: Vec<u32> = Vec::with_capacity(total);
    let mut ids: HashMap<ConnectivityPattern, u32> = HashMap::new();
    let mut names: Vec<ConnectivityPattern> = Vec::new();
    for k in 0..total {
        let pat = LoopPattern::from_index(dims, k as u64);
        let p = connectivity_of(&pat)?;
        let next = names.len() as u32;
        let id = *ids.entry(p.clone()).or_insert_with(|| {
            names.push(p);
            next
        });
        class_id.push(id);
        for mv in bulk_neighbors(&pat) {
            uf.union(k, mv.pattern.basis_index() as usize);
        }
    }
    let mut size = vec![0usize; names.len()];
    let mut roots: Vec<HashSet<usize>> = vec![HashSet::new(); names.len()];
    for k in 0..total {
        let id = class_id[k] as usize;
        size[id] += 1;
        roots[id].insert(uf.find(k));
    }
    let mut out: Vec<ClassReport> = names
        .iter()
        .enumerate()
        .map(|(i, p)| ClassReport {
            matching: p.to_text(),
            size: size[i],
            components: roots[i].len(),
            connected: roots[i].len() == 1,
        })
        .collect();
    out.sort_by(|a, b| a.matching.cmp(&b.matching));
    Ok(out)
}

/// Whether the bulk moves connect all of `C_p`.
pub fn class_graph_connected(p: &ConnectivityPattern, dims: Dims) -> Result<bool> {
    if p.n() != dims.half_perimeter() {
        return Err(LoopError::DimensionMismatch { expected: dims.half_perimeter(), got: p.n() });
    }
    if let Some(w) = forbidden_witness(p, dims)? {
        return Err(w);
    }
    let members: Vec<LoopPattern> = enumerate_patterns(dims)?
        .filter(|l| connectivity_of(l).map(|q| &q == p).unwrap_or(false))
        .collect();
    if members.is_empty() {
        return Ok(true);
    }
    let index: HashMap<u64, usize> = members.iter().enumerate().map(|(i, l)| (l.basis_index(), i)).collect();
    let mut uf = UnionFind::new(members.len());
    for (i, l) in members.iter().enumerate() {
        for mv in bulk_neighbors(l) {
            if let Some(&j) = index.get(&mv.pattern.basis_index()) {
                uf.union(i, j);
            }
        }
    }
    let root = uf.find(0);
    Ok((0..members.len()).all(|i| uf.find(i) == root))
}

/// Number of components of the bulk plus boundary move graph over all patterns.
pub fn full_graph_components(dims: Dims) -> Result<usize> {
    check_even_open(dims)?;
    let n = dims.sites();
    guard::check("pattern enumeration", n, guard::PATTERN_BITS)?;
    let total = 1usize << n;
    let mut uf = UnionFind::new(total);
    for k in 0..total {
        let pat = LoopPattern::from_index(dims, k as u64);
        for mv in bulk_neighbors(&pat) {
            uf.union(k, mv.pattern.basis_index() as usize);
        }
        for mv in boundary_neighbors(&pat)? {
            uf.union(k, mv.pattern.basis_index() as usize);
        }
    }
    let mut roots = HashSet::new();
    for k in 0..total {
        roots.insert(uf.find(k));
    }
    Ok(roots.len())
}

pub fn full_graph_connected(dims: Dims) -> Result<bool> {
    Ok(full_graph_components(dims)? == 1)
}

fn check_torus(dims: Dims) -> Result<()> {
    if !dims.is_torus() {
        return Err(LoopError::Topology("torus"));
    }
    Ok(())
}

/// `v(b)`: every row equal to `b` (length `n_h`).
pub fn stacked_rows(dims: Dims, b: &[u8]) -> Result<LoopPattern> {
    if b.len() != dims.n_h {
        return Err(LoopError::DimensionMismatch { expected: dims.n_h, got: b.len() });
    }
    let tiles = (0..dims.sites()).map(|s| b[dims.row_col(s).1]).collect();
    LoopPattern::new(dims, tiles)
}

/// `h(b)`: every column equal to `b` (length `n_v`).
pub fn stacked_columns(dims: Dims, b: &[u8]) -> Result<LoopPattern> {
    if b.len() != dims.n_v {
        return Err(LoopError::DimensionMismatch { expected: dims.n_v, got: b.len() });
    }
    let tiles = (0..dims.sites()).map(|s| b[dims.row_col(s).0]).collect();
    LoopPattern::new(dims, tiles)
}

fn bits(k: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8).collect()
}

/// All `v(b)` and `h(b)`, deduplicated, each checked to have no mover window.
pub fn isolated_states(dims: Dims) -> Result<Vec<LoopPattern>> {
    check_torus(dims)?;
    guard::check("isolated states", dims.n_h.max(dims.n_v), guard::PATTERN_BITS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut push = |l: LoopPattern| {
        if seen.insert(l.basis_index()) {
            out.push(l);
        }
    };
    for k in 0..(1usize << dims.n_h) {
        push(stacked_rows(dims, &bits(k, dims.n_h))?);
    }
    for k in 0..(1usize << dims.n_v) {
        push(stacked_columns(dims, &bits(k, dims.n_v))?);
    }
    for l in &out {
        if !bulk_neighbors(l).is_empty() {
            return Err(LoopError::Construction(format!("stacked state {} has a mover window", l.to_text().replace('\n', "/"))));
        }
    }
    Ok(out)
}

/// Winding sector `(j, k)` of a torus pattern with `j >= 0`.
///
/// `j` counts windings along the horizontal direction (columns), `k` along
/// the vertical direction with rows counted upwards. All non-contractible
/// loops share their winding up to sign; the sector is that winding times
/// half their number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindingSector {
    pub j: i64,
    pub k: i64,
}

impl fmt::Display for WindingSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// Winding of every non-contractible loop, normalised to `j >= 0`, with `k`
/// positive upwards.
pub fn nontrivial_windings(pattern: &LoopPattern) -> Result<Vec<(i64, i64)>> {
    check_torus(pattern.dims())?;
    Ok(trace_loops(pattern)
        .closed_loops
        .iter()
        .filter(|l| !l.contractible())
        .map(|l| {
            // Traced windings count rows downwards.
            let (a, b) = (l.winding.0, -l.winding.1);
            if a < 0 || (a == 0 && b < 0) {
                (-a, -b)
            } else {
                (a, b)
            }
        })
        .collect())
}

pub fn winding_sector(pattern: &LoopPattern) -> Result<WindingSector> {
    let w = nontrivial_windings(pattern)?;
    let Some(&(a, b)) = w.first() else {
        return Ok(WindingSector { j: 0, k: 0 });
    };
    if w.iter().any(|&x| x != (a, b)) {
        return Err(LoopError::Construction("non-contractible loops with different windings".into()));
    }
    if w.len() % 2 != 0 {
        return Err(LoopError::Construction("odd number of non-contractible loops".into()));
    }
    let half = (w.len() / 2) as i64;
    Ok(WindingSector { j: a * half, k: b * half })
}
