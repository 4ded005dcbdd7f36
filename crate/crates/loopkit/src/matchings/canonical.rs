//! Canonical loop pattern of an allowed matching.
//!
//! Every pair becomes a monotone lattice path through tile arcs. Pairs are
//! drawn from the inside out: a pair is drawn only once every pair nested on
//! the side it hugs has been drawn. Paths first leave their boundary points
//! one step into the patch, then advance by double steps, hugging the inner
//! side whenever two free points are available there, and finish with
//! straight diagonal steps once the remaining displacement is diagonal.
//! Tiles not touched by any path are filled with bubbles.
//!
//! Coordinates are doubled with the y axis pointing down: edge midpoints of
//! horizontal edges have odd x and even y, those of vertical edges even x and
//! odd y; tile centres have both odd.

use crate::error::{LoopError, Result};
use crate::lattice::{arc_partner, connectivity_of, Dims, LoopPattern, DOWN, LEFT, RIGHT, UP};

use super::flow::{boundary_point, forbidden_witness, tuple_class, TupleClass};
use super::ConnectivityPattern;

type Pt = (i64, i64);

struct Bond {
    a: Pt,
    b: Pt,
    upper: bool,
    left: bool,
    /// Perimeter interval (open) that the path hugs, possibly wrapping.
    inside: (i64, i64, bool),
    inside_ends: (usize, usize),
}

struct Grid {
    w: i64,
    h: i64,
    occupied: Vec<bool>,
}

impl Grid {
    fn idx(&self, p: Pt) -> Option<usize> {
        if p.0 < 0 || p.1 < 0 || p.0 > self.w || p.1 > self.h {
            return None;
        }
        Some((p.1 * (self.w + 1) + p.0) as usize)
    }

    fn on_boundary(&self, p: Pt) -> bool {
        p.0 == 0 || p.1 == 0 || p.0 == self.w || p.1 == self.h
    }

    fn free(&self, p: Pt) -> bool {
        match self.idx(p) {
            Some(i) => !self.occupied[i] && !self.on_boundary(p),
            None => false,
        }
    }

    fn mark(&mut self, p: Pt) {
        if let Some(i) = self.idx(p) {
            self.occupied[i] = true;
        }
    }
}

/// Clockwise perimeter position of a doubled boundary coordinate (y down).
fn perimeter(dims: Dims, p: Pt) -> i64 {
    let (w, h) = (2 * dims.n_h as i64, 2 * dims.n_v as i64);
    if p.1 == 0 {
        p.0
    } else if p.0 == w {
        w + p.1
    } else if p.1 == h {
        2 * w + h - p.0
    } else {
        2 * w + 2 * h - p.1
    }
}

fn in_open_interval(s: i64, lo: i64, hi: i64, wrap: bool) -> bool {
    if wrap {
        s > hi || s < lo
    } else {
        s > lo && s < hi
    }
}

/// Canonical loop pattern of an allowed matching `p`.
pub fn canonical_pattern(p: &ConnectivityPattern, dims: Dims) -> Result<LoopPattern> {
    if dims.is_torus() {
        return Err(LoopError::Topology("open"));
    }
    if let Some(w) = forbidden_witness(p, dims)? {
        return Err(w);
    }
    let (w, h) = (2 * dims.n_h as i64, 2 * dims.n_v as i64);
    let to_pt = |i: usize| -> Result<Pt> {
        let q = boundary_point(dims, i)?;
        Ok((q.x2, h - q.y2))
    };

    let mut bonds = Vec::with_capacity(p.n());
    for &(i, j) in p.pairs() {
        let (pi, pj) = (to_pt(i)?, to_pt(j)?);
        let cls = tuple_class(boundary_point(dims, i)?, boundary_point(dims, j)?);
        let (a, b) = match cls {
            TupleClass::Vertical => {
                if pi.1 <= pj.1 {
                    (pi, pj)
                } else {
                    (pj, pi)
                }
            }
            _ => {
                if pi.0 <= pj.0 {
                    (pi, pj)
                } else {
                    (pj, pi)
                }
            }
        };
        let upper = a.1 + b.1 <= h;
        let left = a.0 + b.0 <= w;
        // Reference point on the side the bond hugs, in quadrupled units to
        // keep midpoints integral.
        let reference = match cls {
            TupleClass::Vertical => {
                let ymid = a.1 + b.1;
                if left {
                    perimeter4(dims, (0, ymid))
                } else {
                    perimeter4(dims, (2 * w, ymid))
                }
            }
            _ => {
                let xmid = a.0 + b.0;
                if upper {
                    perimeter4(dims, (xmid, 0))
                } else {
                    perimeter4(dims, (xmid, 2 * h))
                }
            }
        };
        let (sa, sb) = (2 * perimeter(dims, pi), 2 * perimeter(dims, pj));
        let (lo, hi) = (sa.min(sb), sa.max(sb));
        let wrap = !(reference > lo && reference < hi);
        bonds.push(Bond { a, b, upper, left, inside: (lo, hi, wrap), inside_ends: (i, j) });
    }

    // Drawing order: inner bonds before the bonds enclosing them.
    let nb = bonds.len();
    let mut inside_of: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (t, bt) in bonds.iter().enumerate() {
        let (lo, hi, wrap) = bt.inside;
        for (u, bu) in bonds.iter().enumerate() {
            if u == t {
                continue;
            }
            let s1 = 2 * perimeter(dims, to_pt(bu.inside_ends.0)?);
            let s2 = 2 * perimeter(dims, to_pt(bu.inside_ends.1)?);
            if in_open_interval(s1, lo, hi, wrap) && in_open_interval(s2, lo, hi, wrap) {
                inside_of[t].push(u);
            }
        }
    }
    let mut picked = vec![false; nb];
    let mut order = Vec::with_capacity(nb);
    for _ in 0..nb {
        let next = (0..nb)
            .find(|&t| !picked[t] && inside_of[t].iter().all(|&u| picked[u]))
            .or_else(|| (0..nb).filter(|&t| !picked[t]).min_by_key(|&t| inside_of[t].len()))
            .expect("an unpicked bond exists");
        picked[next] = true;
        order.push(next);
    }

    let mut grid = Grid { w, h, occupied: vec![false; ((w + 1) * (h + 1)) as usize] };
    let mut tiles: Vec<Option<u8>> = vec![None; dims.sites()];
    let mut writes = 0usize;
    for &t in &order {
        let bond = &bonds[t];
        let path = draw_path(bond, &grid, dims)?;
        for q in &path {
            grid.mark(*q);
        }
        for pair in path.windows(2) {
            let (site, value) = arc_tile(dims, pair[0], pair[1])?;
            match tiles[site] {
                None => {
                    tiles[site] = Some(value);
                    writes += 1;
                }
                Some(v) if v == value => {}
                Some(_) => {
                    return Err(LoopError::Construction(format!("conflicting arcs in tile {}", site)));
                }
            }
        }
    }
    debug_assert!(writes <= dims.sites());

    let filled: Vec<u8> = tiles
        .iter()
        .enumerate()
        .map(|(s, t)| {
            t.unwrap_or_else(|| {
                let (r, c) = dims.row_col(s);
                ((r + c) % 2) as u8
            })
        })
        .collect();
    let pattern = LoopPattern::new(dims, filled)?;
    if &connectivity_of(&pattern)? != p {
        return Err(LoopError::Construction("traced connectivity differs from the requested matching".into()));
    }
    Ok(pattern)
}

fn perimeter4(dims: Dims, p: Pt) -> i64 {
    let (w, h) = (4 * dims.n_h as i64, 4 * dims.n_v as i64);
    if p.1 == 0 {
        p.0
    } else if p.0 == w {
        w + p.1
    } else if p.1 == h {
        2 * w + h - p.0
    } else {
        2 * w + 2 * h - p.1
    }
}

/// Lattice points of the path for one bond, endpoints included.
fn draw_path(bond: &Bond, grid: &Grid, dims: Dims) -> Result<Vec<Pt>> {
    let on_x = |q: Pt| q.0 % 2 != 0; // horizontal-edge midpoint (top/bottom)
    let a_bar = shift_start(bond, on_x(bond.a));
    let b_bar = shift_end(bond, on_x(bond.b));
    let mut path = vec![bond.a];
    if a_bar != bond.a {
        path.push(a_bar);
    }
    let mut v = a_bar;
    let limit = 4 * (dims.n_h + dims.n_v + dims.sites()) as usize;
    while v != b_bar {
        if path.len() > limit {
            return Err(LoopError::Construction("path does not terminate".into()));
        }
        let dx = b_bar.0 - v.0;
        let dy = b_bar.1 - v.1;
        if dx.abs() == dy.abs() {
            v = (v.0 + dx.signum(), v.1 + dy.signum());
            path.push(v);
            continue;
        }
        let (s1_in, s2_in, s1_out, s2_out) = if dx.abs() > dy.abs() {
            let sx = dx.signum();
            let yin = if bond.upper { -1 } else { 1 };
            (
                (v.0 + sx, v.1 + yin),
                (v.0 + 2 * sx, v.1 + 2 * yin),
                (v.0 + sx, v.1 - yin),
                (v.0 + 2 * sx, v.1 - 2 * yin),
            )
        } else {
            let sy = dy.signum();
            let xin = if bond.left { -1 } else { 1 };
            (
                (v.0 + xin, v.1 + sy),
                (v.0 + 2 * xin, v.1 + 2 * sy),
                (v.0 - xin, v.1 + sy),
                (v.0 - 2 * xin, v.1 + 2 * sy),
            )
        };
        let (p1, p2) = if grid.free(s1_in) && grid.free(s2_in) { (s1_in, s2_in) } else { (s1_out, s2_out) };
        if grid.idx(p1).is_none() || grid.idx(p2).is_none() {
            return Err(LoopError::Construction("path leaves the patch".into()));
        }
        path.push(p1);
        path.push(p2);
        v = p2;
    }
    if b_bar != bond.b {
        path.push(bond.b);
    }
    Ok(path)
}

fn shift_start(bond: &Bond, on_top_or_bottom: bool) -> Pt {
    let a = bond.a;
    let vertical = is_vertical(bond);
    if !vertical && on_top_or_bottom {
        (a.0 + 1, if a.1 == 0 { a.1 + 1 } else { a.1 - 1 })
    } else if vertical && !on_top_or_bottom {
        (if a.0 == 0 { a.0 + 1 } else { a.0 - 1 }, a.1 + 1)
    } else {
        a
    }
}

fn shift_end(bond: &Bond, on_top_or_bottom: bool) -> Pt {
    let b = bond.b;
    let vertical = is_vertical(bond);
    if !vertical && on_top_or_bottom {
        (b.0 - 1, if b.1 == 0 { b.1 + 1 } else { b.1 - 1 })
    } else if vertical && !on_top_or_bottom {
        (if b.0 == 0 { b.0 + 1 } else { b.0 - 1 }, b.1 - 1)
    } else {
        b
    }
}

fn is_vertical(bond: &Bond) -> bool {
    (bond.a.0 - bond.b.0).abs() < (bond.a.1 - bond.b.1).abs()
}

/// Tile and tile value containing the arc between two adjacent points.
fn arc_tile(dims: Dims, u: Pt, v: Pt) -> Result<(usize, u8)> {
    if (u.0 - v.0).abs() != 1 || (u.1 - v.1).abs() != 1 {
        return Err(LoopError::Construction("path points are not adjacent".into()));
    }
    let centre = if u.0 % 2 == 0 { (v.0, u.1) } else { (u.0, v.1) };
    let side = |q: Pt| -> u8 {
        if q.1 < centre.1 {
            UP
        } else if q.1 > centre.1 {
            DOWN
        } else if q.0 < centre.0 {
            LEFT
        } else {
            RIGHT
        }
    };
    let (row, col) = ((centre.1 - 1) / 2, (centre.0 - 1) / 2);
    if row < 0 || col < 0 || row >= dims.n_v as i64 || col >= dims.n_h as i64 {
        return Err(LoopError::Construction("arc outside the patch".into()));
    }
    let (s1, s2) = (side(u), side(v));
    let value = if arc_partner(0, s1) == s2 { 0 } else { 1 };
    Ok((dims.site(row as usize, col as usize), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::trace_loops;
    use crate::matchings::{enumerate_matchings, is_allowed};

    #[test]
    fn all_allowed_two_by_two() {
        let d = Dims::open(2, 2).unwrap();
        let mut n = 0;
        for p in enumerate_matchings(4).unwrap() {
            if is_allowed(&p, d).unwrap() {
                let l = canonical_pattern(&p, d).unwrap();
                assert_eq!(connectivity_of(&l).unwrap(), p);
                n += 1;
            } else {
                assert!(matches!(canonical_pattern(&p, d), Err(LoopError::Forbidden { .. })));
            }
        }
        assert_eq!(n, 12);
    }

    #[test]
    fn nearest_neighbours_on_four_by_four() {
        let d = Dims::open(4, 4).unwrap();
        let p = ConnectivityPattern::nearest_neighbour(8);
        let l = canonical_pattern(&p, d).unwrap();
        let dec = trace_loops(&l);
        assert!(dec.open_paths.iter().all(|q| q.arcs.len() == 2));
        assert!(!dec.closed_loops.is_empty());
    }
}
