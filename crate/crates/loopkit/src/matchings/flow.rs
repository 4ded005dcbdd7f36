//! Boundary coordinates, tuple classes and flows through cuts.
//!
//! Coordinates are stored doubled so that every boundary point is integral:
//! x runs from 0 (left) to `2 n_h` (right), y from 0 (bottom) to `2 n_v` (top).

use crate::error::{LoopError, Result};
use crate::lattice::{boundary_side, Dims, Side};

use super::ConnectivityPattern;

/// Boundary stub with its doubled lattice position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryPoint {
    pub index: usize,
    pub x2: i64,
    pub y2: i64,
}

impl BoundaryPoint {
    /// Position in lattice units.
    pub fn coord(&self) -> (f64, f64) {
        (self.x2 as f64 / 2.0, self.y2 as f64 / 2.0)
    }
}

pub fn boundary_point(dims: Dims, index: usize) -> Result<BoundaryPoint> {
    let (side, off) = boundary_side(dims, index)?;
    let (h, v, o) = (dims.n_h as i64, dims.n_v as i64, off as i64);
    let (x2, y2) = match side {
        Side::Top => (2 * o + 1, 2 * v),
        Side::Right => (2 * h, 2 * v - 2 * o - 1),
        Side::Bottom => (2 * o + 1, 0),
        Side::Left => (0, 2 * v - 2 * o - 1),
    };
    Ok(BoundaryPoint { index, x2, y2 })
}

/// Classification of a tuple by its displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleClass {
    Horizontal,
    Vertical,
    Diagonal,
}

pub fn tuple_class(a: BoundaryPoint, b: BoundaryPoint) -> TupleClass {
    let dx = (a.x2 - b.x2).abs();
    let dy = (a.y2 - b.y2).abs();
    match dx.cmp(&dy) {
        std::cmp::Ordering::Greater => TupleClass::Horizontal,
        std::cmp::Ordering::Less => TupleClass::Vertical,
        std::cmp::Ordering::Equal => TupleClass::Diagonal,
    }
}

/// Vertical cuts sit at `x = i`, horizontal cuts at `y = i` (counted from the bottom).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutOrientation {
    Vertical,
    Horizontal,
}

impl CutOrientation {
    fn name(self) -> &'static str {
        match self {
            CutOrientation::Vertical => "vertical",
            CutOrientation::Horizontal => "horizontal",
        }
    }

    /// Number of cuts and the largest admissible flow.
    fn range_and_threshold(self, dims: Dims) -> (usize, usize) {
        match self {
            CutOrientation::Vertical => (dims.n_h.saturating_sub(1), dims.n_v),
            CutOrientation::Horizontal => (dims.n_v.saturating_sub(1), dims.n_h),
        }
    }
}

fn check_pattern(p: &ConnectivityPattern, dims: Dims) -> Result<()> {
    if p.n() != dims.half_perimeter() {
        return Err(LoopError::DimensionMismatch { expected: dims.half_perimeter(), got: p.n() });
    }
    Ok(())
}

fn check_cut(dims: Dims, cut: usize, orientation: CutOrientation) -> Result<()> {
    let (count, _) = orientation.range_and_threshold(dims);
    if cut == 0 || cut > count {
        return Err(LoopError::OutOfRange { what: "cut index", value: cut as i64, min: 1, max: count as i64 });
    }
    Ok(())
}

fn spans(a: i64, b: i64, at: i64) -> bool {
    a.min(b) < at && at < a.max(b)
}

fn count_through(
    p: &ConnectivityPattern,
    dims: Dims,
    cut: usize,
    orientation: CutOrientation,
    class_filter: Option<TupleClass>,
) -> Result<usize> {
    check_pattern(p, dims)?;
    check_cut(dims, cut, orientation)?;
    let at = 2 * cut as i64;
    let mut n = 0;
    for &(a, b) in p.pairs() {
        let pa = boundary_point(dims, a)?;
        let pb = boundary_point(dims, b)?;
        if let Some(cls) = class_filter {
            if tuple_class(pa, pb) != cls {
                continue;
            }
        }
        let crosses = match orientation {
            CutOrientation::Vertical => spans(pa.x2, pb.x2, at),
            CutOrientation::Horizontal => spans(pa.y2, pb.y2, at),
        };
        if crosses {
            n += 1;
        }
    }
    Ok(n)
}

/// Number of tuples going through a cut.
///
/// Only horizontal tuples go through vertical cuts and only vertical tuples
/// go through horizontal cuts; diagonal tuples never count.
pub fn flow(p: &ConnectivityPattern, dims: Dims, cut: usize, orientation: CutOrientation) -> Result<usize> {
    let cls = match orientation {
        CutOrientation::Vertical => TupleClass::Horizontal,
        CutOrientation::Horizontal => TupleClass::Vertical,
    };
    count_through(p, dims, cut, orientation, Some(cls))
}

/// Number of chords whose endpoints lie on opposite sides of a cut,
/// regardless of their class.
pub fn crossings(p: &ConnectivityPattern, dims: Dims, cut: usize, orientation: CutOrientation) -> Result<usize> {
    count_through(p, dims, cut, orientation, None)
}

/// First cut of the given orientation whose flow exceeds its threshold.
fn violation(p: &ConnectivityPattern, dims: Dims, orientation: CutOrientation) -> Result<Option<LoopError>> {
    let (count, threshold) = orientation.range_and_threshold(dims);
    for cut in 1..=count {
        let f = flow(p, dims, cut, orientation)?;
        if f > threshold {
            return Ok(Some(LoopError::Forbidden { orientation: orientation.name(), cut, flow: f, threshold }));
        }
    }
    Ok(None)
}

/// The cut-violation witness of a forbidden matching, `None` if allowed.
pub fn forbidden_witness(p: &ConnectivityPattern, dims: Dims) -> Result<Option<LoopError>> {
    if let Some(w) = violation(p, dims, CutOrientation::Vertical)? {
        return Ok(Some(w));
    }
    violation(p, dims, CutOrientation::Horizontal)
}

/// True when no cut of the given orientation is over its threshold.
pub fn is_allowed_in(p: &ConnectivityPattern, dims: Dims, orientation: CutOrientation) -> Result<bool> {
    Ok(violation(p, dims, orientation)?.is_none())
}

/// True when no vertical cut has flow above `n_v` and no horizontal cut above `n_h`.
pub fn is_allowed(p: &ConnectivityPattern, dims: Dims) -> Result<bool> {
    Ok(forbidden_witness(p, dims)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchings::enumerate_matchings;

    fn d22() -> Dims {
        Dims::open(2, 2).unwrap()
    }

    fn m(text: &str) -> ConnectivityPattern {
        ConnectivityPattern::from_text(text).unwrap()
    }

    #[test]
    fn coordinates_of_the_two_by_two_patch() {
        let want = [(1, 4), (3, 4), (4, 3), (4, 1), (3, 0), (1, 0), (0, 1), (0, 3)];
        for (i, &(x, y)) in want.iter().enumerate() {
            let p = boundary_point(d22(), i + 1).unwrap();
            assert_eq!((p.x2, p.y2), (x, y), "point {}", i + 1);
        }
    }

    #[test]
    fn corner_pairs_have_no_flow() {
        let p = ConnectivityPattern::nearest_neighbour_shifted(4);
        assert_eq!(flow(&p, d22(), 1, CutOrientation::Vertical).unwrap(), 0);
        assert_eq!(flow(&p, d22(), 1, CutOrientation::Horizontal).unwrap(), 0);
        assert!(is_allowed(&p, d22()).unwrap());
        // (1,2) and (5,6) straddle x = 1.
        let q = ConnectivityPattern::nearest_neighbour(4);
        assert_eq!(flow(&q, d22(), 1, CutOrientation::Vertical).unwrap(), 2);
        assert!(is_allowed(&q, d22()).unwrap());
    }

    #[test]
    fn fully_crossing_example_is_forbidden() {
        let p = m("1-6,2-5,3-4,7-8");
        // All four tuples are vertical and span y = 1.
        assert_eq!(flow(&p, d22(), 1, CutOrientation::Horizontal).unwrap(), 4);
        assert!(!is_allowed(&p, d22()).unwrap());
        assert!(matches!(forbidden_witness(&p, d22()).unwrap(), Some(LoopError::Forbidden { flow: 4, .. })));
    }

    #[test]
    fn two_by_two_counts() {
        let all = enumerate_matchings(4).unwrap();
        let allowed = all.iter().filter(|p| is_allowed(p, d22()).unwrap()).count();
        assert_eq!(allowed, 12);
        let per_dir = all
            .iter()
            .filter(|p| is_allowed_in(p, d22(), CutOrientation::Vertical).unwrap())
            .count();
        assert_eq!(per_dir, 13);
    }

    #[test]
    fn cut_range_is_checked() {
        let p = ConnectivityPattern::nearest_neighbour(4);
        assert!(flow(&p, d22(), 0, CutOrientation::Vertical).is_err());
        assert!(flow(&p, d22(), 2, CutOrientation::Vertical).is_err());
    }
}
