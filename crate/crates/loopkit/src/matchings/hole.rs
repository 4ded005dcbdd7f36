//! Filling the outside of a rectangular hole in a torus so that the traced
//! paths realise a prescribed matching of the hole's boundary stubs.
//!
//! The exterior is built ring by ring around the hole. Every non-corner
//! ring tile has one inner stub (a stub of the previous rectangle) and is
//! set either forward (inner stub continues clockwise) or backward. A
//! forward tile followed by a backward one joins their inner stubs; a
//! backward tile followed by a forward one emits a short wire to the next
//! ring. Corner tiles always pass the ring strand through. In each ring we
//! close every pending pair whose nested pairs are already closed, chaining
//! through the wires lying between its two ends.

use std::collections::HashMap;

use crate::error::{LoopError, Result};
use crate::lattice::{arc_partner, boundary_side, Dims, LoopPattern, Side, DOWN, LEFT, RIGHT, UP};

use super::ConnectivityPattern;

/// Exterior tiling of a torus around a rectangular hole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoleFilling {
    pub torus: Dims,
    pub hole: Dims,
    /// Row and column of the hole's top-left tile.
    pub origin: (usize, usize),
    /// Torus pattern; tiles inside the hole are set to 0 and carry no meaning.
    pub pattern: LoopPattern,
    /// Number of rings around the hole used by the construction.
    pub rings: usize,
}

impl HoleFilling {
    pub fn in_hole(&self, site: usize) -> bool {
        let (r, c) = self.torus.row_col(site);
        in_hole(self.torus, self.hole, self.origin, r, c)
    }

    /// Matching of hole stubs obtained by tracing the exterior tiles.
    pub fn traced_matching(&self) -> Result<ConnectivityPattern> {
        let geo = Geometry::new(self.torus, self.hole, self.origin);
        let tiles: Vec<Option<u8>> = (0..self.torus.sites())
            .map(|s| if self.in_hole(s) { None } else { Some(self.pattern.tiles()[s]) })
            .collect();
        let mut pairs = Vec::new();
        let mut seen = vec![false; geo.stubs.len() + 1];
        for i in 1..=geo.stubs.len() {
            if seen[i] {
                continue;
            }
            let (site, side) = geo.stubs[i - 1];
            match geo.trace(&tiles, site, side) {
                End::Hole(j) => {
                    seen[i] = true;
                    seen[j] = true;
                    pairs.push((i, j));
                }
                End::Open(..) => {
                    return Err(LoopError::Construction(format!("stub {} does not return to the hole", i)));
                }
            }
        }
        ConnectivityPattern::new(self.hole.half_perimeter(), pairs)
    }
}

fn in_hole(torus: Dims, hole: Dims, origin: (usize, usize), r: usize, c: usize) -> bool {
    let dr = (r + torus.n_v - origin.0) % torus.n_v;
    let dc = (c + torus.n_h - origin.1) % torus.n_h;
    dr < hole.n_v && dc < hole.n_h
}

fn opposite(side: u8) -> u8 {
    (side + 2) % 4
}

enum End {
    Hole(usize),
    /// Last assigned tile and the side facing an unassigned tile.
    Open(usize, u8),
}

struct Geometry {
    torus: Dims,
    hole: Dims,
    origin: (usize, usize),
    /// Exterior tile and its side facing the hole, per hole stub.
    stubs: Vec<(usize, u8)>,
    stub_of: HashMap<(usize, u8), usize>,
}

impl Geometry {
    fn new(torus: Dims, hole: Dims, origin: (usize, usize)) -> Self {
        let mut stubs = Vec::with_capacity(2 * hole.half_perimeter());
        for i in 1..=2 * hole.half_perimeter() {
            let (side, off) = boundary_side(hole, i).expect("valid stub");
            let (hr, hc, dir) = match side {
                Side::Top => (0, off, UP),
                Side::Right => (off, hole.n_h - 1, RIGHT),
                Side::Bottom => (hole.n_v - 1, off, DOWN),
                Side::Left => (off, 0, LEFT),
            };
            let inside = torus.site((origin.0 + hr) % torus.n_v, (origin.1 + hc) % torus.n_h);
            stubs.push((neighbour(torus, inside, dir), opposite(dir)));
        }
        let stub_of = stubs.iter().enumerate().map(|(k, &key)| (key, k + 1)).collect();
        Geometry { torus, hole, origin, stubs, stub_of }
    }

    fn is_hole(&self, site: usize) -> bool {
        let (r, c) = self.torus.row_col(site);
        in_hole(self.torus, self.hole, self.origin, r, c)
    }

    /// Follows the strand entering `site` through `side`.
    fn trace(&self, tiles: &[Option<u8>], mut site: usize, mut side: u8) -> End {
        loop {
            let t = tiles[site].expect("trace starts on an assigned tile");
            let out = arc_partner(t, side);
            let next = neighbour(self.torus, site, out);
            if self.is_hole(next) {
                return End::Hole(self.stub_of[&(site, out)]);
            }
            if tiles[next].is_none() {
                return End::Open(site, out);
            }
            site = next;
            side = opposite(out);
        }
    }
}

fn neighbour(dims: Dims, site: usize, side: u8) -> usize {
    let (r, c) = dims.row_col(site);
    let (h, v) = (dims.n_h, dims.n_v);
    match side {
        UP => dims.site((r + v - 1) % v, c),
        DOWN => dims.site((r + 1) % v, c),
        LEFT => dims.site(r, (c + h - 1) % h),
        _ => dims.site(r, (c + 1) % h),
    }
}

/// Rectangle of assigned tiles (hole included), in unwrapped coordinates.
#[derive(Clone, Copy)]
struct Rect {
    top: i64,
    bottom: i64,
    left: i64,
    right: i64,
}

impl Rect {
    fn width(&self) -> usize {
        (self.right - self.left + 1) as usize
    }

    fn height(&self) -> usize {
        (self.bottom - self.top + 1) as usize
    }
}

const TOP: usize = 0;
const RIGHT_SIDE: usize = 1;
const BOTTOM: usize = 2;
const LEFT_SIDE: usize = 3;

/// Boundary stub of a rectangle: inside tile, side, and which rectangle side it is on.
struct Stub {
    row: i64,
    col: i64,
    dir: u8,
    rect_side: usize,
}

/// Stubs of `rect` clockwise from the top-left. Sides spanning the whole
/// torus are skipped since their edges face the rectangle itself; the flag
/// tells whether a stub and its successor in the list are neighbours.
fn stubs_of(rect: Rect, torus: Dims) -> (Vec<Stub>, Vec<bool>) {
    let full_h = rect.width() == torus.n_h;
    let full_v = rect.height() == torus.n_v;
    let mut out = Vec::new();
    if !full_v {
        for c in rect.left..=rect.right {
            out.push(Stub { row: rect.top, col: c, dir: UP, rect_side: TOP });
        }
    }
    if !full_h {
        for r in rect.top..=rect.bottom {
            out.push(Stub { row: r, col: rect.right, dir: RIGHT, rect_side: RIGHT_SIDE });
        }
    }
    if !full_v {
        for c in (rect.left..=rect.right).rev() {
            out.push(Stub { row: rect.bottom, col: c, dir: DOWN, rect_side: BOTTOM });
        }
    }
    if !full_h {
        for r in (rect.top..=rect.bottom).rev() {
            out.push(Stub { row: r, col: rect.left, dir: LEFT, rect_side: LEFT_SIDE });
        }
    }
    let mut linked = vec![true; out.len()];
    if full_h || full_v {
        // Only stubs on one straight side stay adjacent.
        for q in 0..out.len() {
            let q2 = (q + 1) % out.len();
            linked[q] = out[q].rect_side == out[q2].rect_side;
        }
    }
    (out, linked)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    /// Current end of the strand starting at this hole stub.
    Hole(usize),
    /// End of a strand whose other end is this stub position.
    Wire(usize),
}

/// Pair oriented so that its inside runs clockwise from the first stub to
/// the second without crossing the root gap (the gap after stub `root`).
fn oriented(pair: (usize, usize), root: usize) -> (usize, usize) {
    let (a, b) = pair;
    if a <= root && root < b {
        (b, a)
    } else {
        (a, b)
    }
}

fn strictly_inside(x: usize, from: usize, to: usize) -> bool {
    if from < to {
        from < x && x < to
    } else {
        x > from || x < to
    }
}

fn nesting_depth(p: &ConnectivityPattern, root: usize) -> usize {
    let pairs: Vec<(usize, usize)> = p.pairs().iter().map(|&q| oriented(q, root)).collect();
    let size = |&(a, b): &(usize, usize)| if a < b { b - a } else { b + 2 * p.n() - a };
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| size(&pairs[i]));
    let mut depth = vec![0usize; pairs.len()];
    for &i in &order {
        let (a, b) = pairs[i];
        depth[i] = 1 + pairs
            .iter()
            .enumerate()
            .filter(|&(j, &(c, _))| j != i && strictly_inside(c, a, b))
            .map(|(j, _)| depth[j])
            .max()
            .unwrap_or(0);
    }
    depth.into_iter().max().unwrap_or(0)
}

/// Tiles the torus outside an `L_h x L_v` hole so that the exterior joins
/// the hole's stubs according to `p_on_hole`.
///
/// Requires `min(N_h, N_v) > 3 (L_h + L_v) / 2`. Every gap of the hole
/// boundary is tried as the outermost point, shallowest nesting first.
pub fn fill_exterior(hole: Dims, torus: Dims, p_on_hole: &ConnectivityPattern) -> Result<HoleFilling> {
    if !torus.is_torus() {
        return Err(LoopError::Topology("torus"));
    }
    let hole = Dims::open(hole.n_h, hole.n_v)?;
    if 2 * torus.n_h.min(torus.n_v) <= 3 * (hole.n_h + hole.n_v) {
        return Err(LoopError::Precondition(format!(
            "min({}, {}) must exceed 3/2 * ({} + {})",
            torus.n_h, torus.n_v, hole.n_h, hole.n_v
        )));
    }
    if p_on_hole.n() != hole.half_perimeter() {
        return Err(LoopError::DimensionMismatch { expected: hole.half_perimeter(), got: p_on_hole.n() });
    }
    let total = 2 * p_on_hole.n();
    let mut roots: Vec<usize> = (1..=total).collect();
    roots.sort_by_key(|&g| nesting_depth(p_on_hole, g));
    let mut last = LoopError::Construction("no root gap".into());
    for root in roots {
        match build(hole, torus, p_on_hole, root) {
            Ok(f) => return Ok(f),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn build(hole: Dims, torus: Dims, p: &ConnectivityPattern, root: usize) -> Result<HoleFilling> {
    let origin = ((torus.n_v - hole.n_v) / 2, (torus.n_h - hole.n_h) / 2);
    let geo = Geometry::new(torus, hole, origin);
    let (h, v) = (torus.n_h as i64, torus.n_v as i64);
    let at = |r: i64, c: i64| torus.site(r.rem_euclid(v) as usize, c.rem_euclid(h) as usize);
    let partner = p.partners();
    let mut orient = vec![(0usize, 0usize); partner.len()];
    for &q in p.pairs() {
        let o = oriented(q, root);
        orient[q.0] = o;
        orient[q.1] = o;
    }

    let mut tiles: Vec<Option<u8>> = vec![None; torus.sites()];
    let mut rect = Rect {
        top: origin.0 as i64,
        bottom: (origin.0 + hole.n_v) as i64 - 1,
        left: origin.1 as i64,
        right: (origin.1 + hole.n_h) as i64 - 1,
    };
    let mut closed = vec![false; partner.len()];
    closed[0] = true;
    let mut rings = 0;
    while closed.iter().any(|c| !c) {
        rings += 1;
        let (stubs, linked) = stubs_of(rect, torus);
        let m = stubs.len();
        let pos_of: HashMap<(usize, u8), usize> =
            stubs.iter().enumerate().map(|(q, s)| ((at(s.row, s.col), s.dir), q)).collect();
        let mut labels = Vec::with_capacity(m);
        for s in &stubs {
            let site = at(s.row, s.col);
            labels.push(if geo.is_hole(site) {
                let outside = neighbour(torus, site, s.dir);
                Label::Hole(geo.stub_of[&(outside, opposite(s.dir))])
            } else {
                // Walk inwards from the stub to its other end.
                match geo.trace(&tiles, site, s.dir) {
                    End::Hole(i) => Label::Hole(i),
                    End::Open(s2, out) => Label::Wire(pos_of[&(s2, out)]),
                }
            });
        }
        let mut end_of = vec![usize::MAX; partner.len()];
        for (q, l) in labels.iter().enumerate() {
            if let Label::Hole(i) = *l {
                end_of[i] = q;
            }
        }

        let pending: Vec<bool> = closed.iter().map(|c| !c).collect();
        let mut forward: Vec<Option<bool>> = vec![None; m];
        let mut expand = [false; 4];
        for &(a, b) in p.pairs() {
            if closed[a] {
                continue;
            }
            let (first, second) = orient[a];
            let ready = (1..partner.len())
                .filter(|&x| pending[x] && x != first && x != second)
                .all(|x| !strictly_inside(x, first, second));
            if !ready {
                continue;
            }
            let (mut q, stop) = (end_of[first], end_of[second]);
            if q == usize::MAX || stop == usize::MAX {
                return Err(LoopError::Construction("lost track of a pending strand".into()));
            }
            loop {
                let q2 = (q + 1) % m;
                if !linked[q] {
                    return Err(LoopError::Construction("closure across a wrapped side".into()));
                }
                if forward[q].is_some() || forward[q2].is_some() {
                    return Err(LoopError::Construction("overlapping closures".into()));
                }
                if q != end_of[first] && !matches!(labels[q], Label::Wire(_)) {
                    return Err(LoopError::Construction("pending strand inside a closing pair".into()));
                }
                forward[q] = Some(true);
                forward[q2] = Some(false);
                expand[stubs[q].rect_side] = true;
                expand[stubs[q2].rect_side] = true;
                if q2 == stop {
                    break;
                }
                q = (q2 + 1) % m;
                if q == stop {
                    return Err(LoopError::Construction("odd number of stubs inside a pair".into()));
                }
            }
            closed[a] = true;
            closed[b] = true;
        }

        if !expand.iter().any(|&e| e) {
            return Err(LoopError::Construction("no pair could be closed".into()));
        }
        let grow_h = expand[LEFT_SIDE] as usize + expand[RIGHT_SIDE] as usize;
        let grow_v = expand[TOP] as usize + expand[BOTTOM] as usize;
        if rect.width() + grow_h > torus.n_h || rect.height() + grow_v > torus.n_v {
            return Err(LoopError::Construction("ran out of room around the hole".into()));
        }

        // Non-corner tiles: forward joins the inner stub to the clockwise
        // neighbour. The forward tile value is 0 on the top and bottom rows.
        for (q, s) in stubs.iter().enumerate() {
            if !expand[s.rect_side] {
                continue;
            }
            let (r, c) = match s.dir {
                UP => (s.row - 1, s.col),
                DOWN => (s.row + 1, s.col),
                LEFT => (s.row, s.col - 1),
                _ => (s.row, s.col + 1),
            };
            let fwd_value = if s.dir == UP || s.dir == DOWN { 0 } else { 1 };
            let value = if forward[q].unwrap_or(true) { fwd_value } else { 1 - fwd_value };
            tiles[at(r, c)] = Some(value);
        }
        // Corner tiles pass the ring strand through.
        let corners = [
            (TOP, LEFT_SIDE, rect.top - 1, rect.left - 1, 0u8),
            (TOP, RIGHT_SIDE, rect.top - 1, rect.right + 1, 1),
            (BOTTOM, RIGHT_SIDE, rect.bottom + 1, rect.right + 1, 0),
            (BOTTOM, LEFT_SIDE, rect.bottom + 1, rect.left - 1, 1),
        ];
        for (s1, s2, r, c, value) in corners {
            if expand[s1] && expand[s2] {
                tiles[at(r, c)] = Some(value);
            }
        }
        rect.top -= expand[TOP] as i64;
        rect.bottom += expand[BOTTOM] as i64;
        rect.left -= expand[LEFT_SIDE] as i64;
        rect.right += expand[RIGHT_SIDE] as i64;
    }

    let values = (0..torus.sites())
        .map(|s| match tiles[s] {
            Some(t) => t,
            None if geo.is_hole(s) => 0,
            None => {
                let (r, c) = torus.row_col(s);
                ((r + c) % 2) as u8
            }
        })
        .collect();
    let filling = HoleFilling { torus, hole, origin, pattern: LoopPattern::new(torus, values)?, rings };
    if &filling.traced_matching()? != p {
        return Err(LoopError::Construction("traced exterior differs from the requested matching".into()));
    }
    Ok(filling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchings::enumerate_matchings;

    #[test]
    fn every_matching_of_a_small_hole() {
        let hole = Dims::open(2, 2).unwrap();
        let torus = Dims::torus(8, 8).unwrap();
        for p in enumerate_matchings(4).unwrap() {
            let f = fill_exterior(hole, torus, &p).unwrap();
            assert_eq!(f.traced_matching().unwrap(), p);
            assert!(f.rings <= 3);
        }
    }

    #[test]
    fn nearest_neighbours_close_in_one_ring() {
        let hole = Dims::open(2, 2).unwrap();
        let torus = Dims::torus(8, 8).unwrap();
        for p in [ConnectivityPattern::nearest_neighbour(4), ConnectivityPattern::nearest_neighbour_shifted(4)] {
            assert_eq!(fill_exterior(hole, torus, &p).unwrap().rings, 1);
        }
    }

    #[test]
    fn size_condition_is_strict() {
        let hole = Dims::open(2, 2).unwrap();
        let p = ConnectivityPattern::nearest_neighbour(4);
        assert!(matches!(
            fill_exterior(hole, Dims::torus(6, 6).unwrap(), &p),
            Err(LoopError::Precondition(_))
        ));
    }

    #[test]
    fn rectangular_holes() {
        for (lh, lv, n) in [(1, 1, 4), (2, 1, 6), (1, 3, 8), (3, 2, 8), (3, 3, 10)] {
            let hole = Dims::open(lh, lv).unwrap();
            let torus = Dims::torus(n, n).unwrap();
            for p in enumerate_matchings(lh + lv).unwrap() {
                let f = fill_exterior(hole, torus, &p).unwrap();
                assert_eq!(f.traced_matching().unwrap(), p, "{}x{} hole, {}", lh, lv, p);
            }
        }
    }
}
