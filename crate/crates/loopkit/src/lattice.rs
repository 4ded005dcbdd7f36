//! Loop patterns on the square lattice.
//!
//! A pattern assigns one of two arc tiles to every site of an
//! `n_h x n_v` patch (or torus). Tile 0 joins the (up, left) and
//! (down, right) edge midpoints, tile 1 joins (up, right) and (down, left).
//! Boundary stubs of an open patch are numbered clockwise starting at the
//! top-left: the top row left to right is `1..=n_h`, the right column top to
//! bottom continues, then the bottom row right to left and finally the left
//! column bottom to top, ending at `2N` with `N = n_h + n_v`.

use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;
use crate::matchings::ConnectivityPattern;

/// Open rectangle or periodic torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Open,
    Torus,
}

/// Lattice extent in tiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n_h: usize,
    pub n_v: usize,
    pub topology: Topology,
}

impl Dims {
    pub fn new(n_h: usize, n_v: usize, topology: Topology) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(LoopError::InvalidDims { n_h, n_v, reason: "both extents must be positive" });
        }
        if topology == Topology::Torus && (n_h % 2 != 0 || n_v % 2 != 0) {
            return Err(LoopError::InvalidDims { n_h, n_v, reason: "torus extents must be even" });
        }
        Ok(Dims { n_h, n_v, topology })
    }

    pub fn open(n_h: usize, n_v: usize) -> Result<Self> {
        Self::new(n_h, n_v, Topology::Open)
    }

    pub fn torus(n_h: usize, n_v: usize) -> Result<Self> {
        Self::new(n_h, n_v, Topology::Torus)
    }

    /// Number of tiles.
    pub fn sites(&self) -> usize {
        self.n_h * self.n_v
    }

    /// `N = n_h + n_v`; an open patch has `2N` boundary stubs.
    pub fn half_perimeter(&self) -> usize {
        self.n_h + self.n_v
    }

    pub fn is_torus(&self) -> bool {
        self.topology == Topology::Torus
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.n_h + col
    }

    pub fn row_col(&self, site: usize) -> (usize, usize) {
        (site / self.n_h, site % self.n_h)
    }

    fn n_hedges(&self) -> usize {
        let lines = if self.is_torus() { self.n_v } else { self.n_v + 1 };
        lines * self.n_h
    }

    pub(crate) fn n_edges(&self) -> usize {
        let vlines = if self.is_torus() { self.n_h } else { self.n_h + 1 };
        self.n_hedges() + self.n_v * vlines
    }

    /// Id of the horizontal edge on row line `line` (0 = top) above column `col`.
    fn hedge(&self, line: usize, col: usize) -> usize {
        let line = if self.is_torus() { line % self.n_v } else { line };
        line * self.n_h + col
    }

    /// Id of the vertical edge on column line `line` (0 = left) beside row `row`.
    fn vedge(&self, row: usize, line: usize) -> usize {
        let (line, width) = if self.is_torus() {
            (line % self.n_h, self.n_h)
        } else {
            (line, self.n_h + 1)
        };
        self.n_hedges() + row * width + line
    }

    /// Edge id of a tile side.
    pub(crate) fn side_edge(&self, site: usize, side: u8) -> usize {
        let (r, c) = self.row_col(site);
        match side {
            UP => self.hedge(r, c),
            LEFT => self.vedge(r, c),
            DOWN => self.hedge(r + 1, c),
            _ => self.vedge(r, c + 1),
        }
    }
}

/// Tile sides, in the `(u, l, d, r)` order used for virtual legs.
pub const UP: u8 = 0;
pub const LEFT: u8 = 1;
pub const DOWN: u8 = 2;
pub const RIGHT: u8 = 3;

/// The side joined to `side` by the arc of a tile with value `tile`.
pub fn arc_partner(tile: u8, side: u8) -> u8 {
    match (tile, side) {
        (0, UP) => LEFT,
        (0, LEFT) => UP,
        (0, DOWN) => RIGHT,
        (0, _) => DOWN,
        (_, UP) => RIGHT,
        (_, RIGHT) => UP,
        (_, DOWN) => LEFT,
        (_, _) => DOWN,
    }
}

/// Sides of a patch boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Top,
    Right,
    Bottom,
    Left,
}

/// Boundary number of the stub on `side` at `offset`.
///
/// Offsets count tiles from the left (top and bottom sides) or from the top
/// (left and right sides), starting at 0.
pub fn boundary_index(dims: Dims, side: Side, offset: usize) -> Result<usize> {
    let (n_h, n_v) = (dims.n_h, dims.n_v);
    let len = match side {
        Side::Top | Side::Bottom => n_h,
        Side::Left | Side::Right => n_v,
    };
    if offset >= len {
        return Err(LoopError::OutOfRange {
            what: "boundary offset",
            value: offset as i64,
            min: 0,
            max: len as i64 - 1,
        });
    }
    Ok(match side {
        Side::Top => offset + 1,
        Side::Right => n_h + offset + 1,
        Side::Bottom => n_h + n_v + (n_h - offset),
        Side::Left => 2 * n_h + n_v + (n_v - offset),
    })
}

/// Inverse of [`boundary_index`].
pub fn boundary_side(dims: Dims, index: usize) -> Result<(Side, usize)> {
    let (n_h, n_v) = (dims.n_h, dims.n_v);
    let total = 2 * (n_h + n_v);
    if index == 0 || index > total {
        return Err(LoopError::OutOfRange {
            what: "boundary index",
            value: index as i64,
            min: 1,
            max: total as i64,
        });
    }
    Ok(if index <= n_h {
        (Side::Top, index - 1)
    } else if index <= n_h + n_v {
        (Side::Right, index - n_h - 1)
    } else if index <= 2 * n_h + n_v {
        (Side::Bottom, 2 * n_h + n_v - index)
    } else {
        (Side::Left, total - index)
    })
}

/// Binary tile grid, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoopPattern {
    dims: Dims,
    tiles: Vec<u8>,
}

impl LoopPattern {
    pub fn new(dims: Dims, tiles: Vec<u8>) -> Result<Self> {
        if tiles.len() != dims.sites() {
            return Err(LoopError::DimensionMismatch { expected: dims.sites(), got: tiles.len() });
        }
        if tiles.iter().any(|&t| t > 1) {
            return Err(LoopError::Malformed("tile values must be 0 or 1".into()));
        }
        Ok(LoopPattern { dims, tiles })
    }

    pub fn filled(dims: Dims, value: u8) -> Self {
        LoopPattern { dims, tiles: vec![value & 1; dims.sites()] }
    }

    /// Pattern whose tile at site `i` is bit `i` of `index`.
    pub fn from_index(dims: Dims, index: u64) -> Self {
        let tiles = (0..dims.sites()).map(|i| ((index >> i) & 1) as u8).collect();
        LoopPattern { dims, tiles }
    }

    /// Product-basis index: bit `i` is the tile at site `i` (row-major).
    pub fn basis_index(&self) -> u64 {
        self.tiles
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &t)| acc | ((t as u64) << i))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn tiles(&self) -> &[u8] {
        &self.tiles
    }

    pub fn tile(&self, row: usize, col: usize) -> u8 {
        self.tiles[self.dims.site(row, col)]
    }

    pub fn set_tile(&mut self, row: usize, col: usize, value: u8) {
        let s = self.dims.site(row, col);
        self.tiles[s] = value & 1;
    }

    pub fn zero_tiles(&self) -> usize {
        self.tiles.iter().filter(|&&t| t == 0).count()
    }

    /// Cyclic shift by `dr` rows and `dc` columns (torus symmetry).
    pub fn shifted(&self, dr: usize, dc: usize) -> Self {
        let d = self.dims;
        let mut out = self.clone();
        for r in 0..d.n_v {
            for c in 0..d.n_h {
                out.tiles[d.site((r + dr) % d.n_v, (c + dc) % d.n_h)] = self.tile(r, c);
            }
        }
        out
    }

    /// Rows of `0`/`1` characters joined by newlines.
    pub fn to_text(&self) -> String {
        self.rows().join("\n")
    }

    pub fn rows(&self) -> Vec<String> {
        self.tiles
            .chunks(self.dims.n_h)
            .map(|row| row.iter().map(|&t| if t == 0 { '0' } else { '1' }).collect())
            .collect()
    }

    /// Parses the text form; every row must have the same length.
    pub fn from_text(text: &str, topology: Topology) -> Result<Self> {
        let rows: Vec<&str> = text.trim_end_matches('\n').split('\n').collect();
        Self::from_rows(&rows, topology)
    }

    pub fn from_rows<S: AsRef<str>>(rows: &[S], topology: Topology) -> Result<Self> {
        let n_v = rows.len();
        let n_h = rows.first().map(|r| r.as_ref().trim_end_matches('\r').len()).unwrap_or(0);
        let dims = Dims::new(n_h, n_v, topology)?;
        let mut tiles = Vec::with_capacity(dims.sites());
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref().trim_end_matches('\r');
            if row.len() != n_h {
                return Err(LoopError::Malformed(format!("row {} has length {}, expected {}", i, row.len(), n_h)));
            }
            for ch in row.chars() {
                match ch {
                    '0' => tiles.push(0),
                    '1' => tiles.push(1),
                    other => return Err(LoopError::Malformed(format!("unexpected character {:?}", other))),
                }
            }
        }
        Self::new(dims, tiles)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PatternJson { n_h: self.dims.n_h, n_v: self.dims.n_v, rows: self.rows() })
            .expect("pattern serializes")
    }

    pub fn from_json(value: &serde_json::Value, topology: Topology) -> Result<Self> {
        let pj: PatternJson =
            serde_json::from_value(value.clone()).map_err(|e| LoopError::Malformed(e.to_string()))?;
        let p = Self::from_rows(&pj.rows, topology)?;
        if p.dims.n_h != pj.n_h || p.dims.n_v != pj.n_v {
            return Err(LoopError::Malformed("rows disagree with n_h/n_v".into()));
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    n_h: usize,
    n_v: usize,
    rows: Vec<String>,
}

/// One tile arc: `arc` is 0 for the arc touching the up side, 1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub site: usize,
    pub arc: u8,
}

/// Open path between two boundary stubs, `ends.0 < ends.1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenPath {
    pub ends: (usize, usize),
    pub arcs: Vec<Arc>,
}

/// Closed loop; `winding` counts net turns around the torus (zero on a patch).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedLoop {
    pub arcs: Vec<Arc>,
    pub winding: (i64, i64),
}

impl ClosedLoop {
    pub fn contractible(&self) -> bool {
        self.winding == (0, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopDecomposition {
    pub open_paths: Vec<OpenPath>,
    pub closed_loops: Vec<ClosedLoop>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopStats {
    pub n_closed: usize,
    pub n_zero_tiles: usize,
}

/// Midpoint of a tile side in doubled coordinates (x right, y down).
fn side_point(dims: Dims, site: usize, side: u8) -> (i64, i64) {
    let (r, c) = dims.row_col(site);
    let (r, c) = (r as i64, c as i64);
    match side {
        UP => (2 * c + 1, 2 * r),
        LEFT => (2 * c, 2 * r + 1),
        DOWN => (2 * c + 1, 2 * r + 2),
        _ => (2 * c + 2, 2 * r + 1),
    }
}

fn arc_of(tile: u8, side: u8) -> u8 {
    if side == UP || arc_partner(tile, side) == UP {
        0
    } else {
        1
    }
}

/// Incidence table: for every edge, the (site, side) pairs touching it.
struct Incidence {
    slots: Vec<[(usize, u8); 2]>,
    count: Vec<u8>,
}

impl Incidence {
    fn build(dims: Dims) -> Self {
        let ne = dims.n_edges();
        let mut slots = vec![[(usize::MAX, 0u8); 2]; ne];
        let mut count = vec![0u8; ne];
        for site in 0..dims.sites() {
            for side in 0..4u8 {
                let e = dims.side_edge(site, side);
                slots[e][count[e] as usize] = (site, side);
                count[e] += 1;
            }
        }
        Incidence { slots, count }
    }

    /// The incidence across `edge` from `(site, side)`, if any.
    fn other(&self, edge: usize, site: usize, side: u8) -> Option<(usize, u8)> {
        if self.count[edge] < 2 {
            return None;
        }
        let [a, b] = self.slots[edge];
        if a == (site, side) {
            Some(b)
        } else {
            Some(a)
        }
    }
}

/// Walks every arc once and splits the pattern into open paths and loops.
pub fn trace_loops(pattern: &LoopPattern) -> LoopDecomposition {
    let dims = pattern.dims;
    let inc = Incidence::build(dims);
    let mut visited = vec![false; 2 * dims.sites()];
    let mut open_paths = Vec::new();

    if !dims.is_torus() {
        let total = 2 * dims.half_perimeter();
        let mut done = vec![false; total + 1];
        for start in 1..=total {
            if done[start] {
                continue;
            }
            let (mut site, mut side) = boundary_entry(dims, start);
            let mut arcs = Vec::new();
            let end = loop {
                let t = pattern.tiles[site];
                arcs.push(Arc { site, arc: arc_of(t, side) });
                visited[2 * site + arc_of(t, side) as usize] = true;
                let out = arc_partner(t, side);
                let e = dims.side_edge(site, out);
                match inc.other(e, site, out) {
                    Some((s2, side2)) => {
                        site = s2;
                        side = side2;
                    }
                    None => break stub_number(dims, site, out),
                }
            };
            done[start] = true;
            done[end] = true;
            open_paths.push(OpenPath { ends: (start.min(end), start.max(end)), arcs });
        }
        open_paths.sort_by_key(|p| p.ends.0);
    }

    let mut closed_loops = Vec::new();
    for site in 0..dims.sites() {
        for arc in 0..2u8 {
            if visited[2 * site + arc as usize] {
                continue;
            }
            let start_side = if arc == 0 { UP } else { DOWN };
            let (mut s, mut side) = (site, start_side);
            let mut arcs = Vec::new();
            let (mut dx, mut dy) = (0i64, 0i64);
            loop {
                let tv = pattern.tiles[s];
                let a = arc_of(tv, side);
                visited[2 * s + a as usize] = true;
                arcs.push(Arc { site: s, arc: a });
                let out = arc_partner(tv, side);
                let p0 = side_point(dims, s, side);
                let p1 = side_point(dims, s, out);
                dx += p1.0 - p0.0;
                dy += p1.1 - p0.1;
                let e = dims.side_edge(s, out);
                let (s2, side2) = inc.other(e, s, out).expect("closed loops never reach the boundary");
                s = s2;
                side = side2;
                if s == site && side == start_side {
                    break;
                }
            }
            let winding = (dx / (2 * dims.n_h as i64), dy / (2 * dims.n_v as i64));
            closed_loops.push(ClosedLoop { arcs, winding });
        }
    }
    LoopDecomposition { open_paths, closed_loops }
}

/// Tile and side where the stub with boundary number `index` enters the patch.
pub(crate) fn boundary_entry(dims: Dims, index: usize) -> (usize, u8) {
    let (side, off) = boundary_side(dims, index).expect("valid boundary index");
    match side {
        Side::Top => (dims.site(0, off), UP),
        Side::Right => (dims.site(off, dims.n_h - 1), RIGHT),
        Side::Bottom => (dims.site(dims.n_v - 1, off), DOWN),
        Side::Left => (dims.site(off, 0), LEFT),
    }
}

/// Boundary number of the stub on `side` of a boundary tile.
fn stub_number(dims: Dims, site: usize, side: u8) -> usize {
    let (r, c) = dims.row_col(site);
    let (s, off) = match side {
        UP => (Side::Top, c),
        RIGHT => (Side::Right, r),
        DOWN => (Side::Bottom, c),
        _ => (Side::Left, r),
    };
    boundary_index(dims, s, off).expect("boundary stub")
}

pub fn loop_stats(pattern: &LoopPattern) -> LoopStats {
    LoopStats {
        n_closed: trace_loops(pattern).closed_loops.len(),
        n_zero_tiles: pattern.zero_tiles(),
    }
}

/// Matching of boundary stubs realised by the open paths of `pattern`.
pub fn connectivity_of(pattern: &LoopPattern) -> Result<ConnectivityPattern> {
    if pattern.dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    let dec = trace_loops(pattern);
    ConnectivityPattern::new(pattern.dims.half_perimeter(), dec.open_paths.iter().map(|p| p.ends).collect())
}

/// All `2^(n_h n_v)` patterns, lexicographic in row-major tile order.
pub fn enumerate_patterns(dims: Dims) -> Result<impl Iterator<Item = LoopPattern>> {
    let n = dims.sites();
    guard::check("pattern enumeration", n, guard::PATTERN_BITS)?;
    Ok((0..(1u64 << n)).map(move |k| {
        let tiles = (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8).collect();
        LoopPattern { dims, tiles }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(text: &str) -> LoopPattern {
        LoopPattern::from_text(text, Topology::Open).unwrap()
    }

    fn ends(p: &LoopPattern) -> Vec<(usize, usize)> {
        trace_loops(p).open_paths.iter().map(|p| p.ends).collect()
    }

    #[test]
    fn numbering_matches_figure() {
        let d = Dims::open(3, 3).unwrap();
        assert_eq!(boundary_index(d, Side::Left, 0).unwrap(), 12);
        assert_eq!(boundary_index(d, Side::Top, 0).unwrap(), 1);
        let d1 = Dims::open(1, 1).unwrap();
        let got: Vec<usize> = [Side::Top, Side::Right, Side::Bottom, Side::Left]
            .iter()
            .map(|&s| boundary_index(d1, s, 0).unwrap())
            .collect();
        assert_eq!(got, vec![1, 2, 3, 4]);
        assert!(boundary_index(d, Side::Top, 3).is_err());
    }

    #[test]
    fn numbering_is_a_bijection() {
        let d = Dims::open(4, 3).unwrap();
        for i in 1..=14 {
            let (s, o) = boundary_side(d, i).unwrap();
            assert_eq!(boundary_index(d, s, o).unwrap(), i);
        }
    }

    #[test]
    fn small_traces() {
        assert_eq!(ends(&pat("00\n00")), vec![(1, 8), (2, 7), (3, 6), (4, 5)]);
        let b = pat("01\n10");
        assert_eq!(ends(&b), vec![(1, 8), (2, 3), (4, 5), (6, 7)]);
        assert_eq!(loop_stats(&b), LoopStats { n_closed: 1, n_zero_tiles: 2 });
        assert_eq!(ends(&pat("0")), vec![(1, 4), (2, 3)]);
        assert_eq!(ends(&pat("1")), vec![(1, 2), (3, 4)]);
        assert_eq!(ends(&pat("11\n00")), vec![(1, 6), (2, 3), (4, 5), (7, 8)]);
        assert_eq!(loop_stats(&pat("111\n111\n111")), LoopStats { n_closed: 0, n_zero_tiles: 0 });
    }

    #[test]
    fn torus_all_zero_has_four_loops() {
        let d = Dims::torus(4, 4).unwrap();
        let dec = trace_loops(&LoopPattern::filled(d, 0));
        assert_eq!(dec.closed_loops.len(), 4);
        assert!(dec.closed_loops.iter().all(|l| !l.contractible()));
    }

    #[test]
    fn text_round_trip() {
        let d = Dims::open(2, 2).unwrap();
        for p in enumerate_patterns(d).unwrap() {
            assert_eq!(LoopPattern::from_text(&p.to_text(), Topology::Open).unwrap(), p);
            assert_eq!(LoopPattern::from_json(&p.to_json(), Topology::Open).unwrap(), p);
        }
        assert!(LoopPattern::from_text("01\n1", Topology::Open).is_err());
        assert!(LoopPattern::from_text("02", Topology::Open).is_err());
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_patterns(Dims::open(1, 1).unwrap()).unwrap().count(), 2);
        assert_eq!(enumerate_patterns(Dims::open(3, 3).unwrap()).unwrap().count(), 512);
    }
}
