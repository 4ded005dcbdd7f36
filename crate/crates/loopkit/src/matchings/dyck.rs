//! Bijections between matchings and Dyck paths.
//!
//! Boundary points are read in a fixed order and each point contributes an
//! up-step when its partner has not been read yet and a down-step otherwise.
//! The height after reading one side of a cut is the number of chords
//! crossing that cut.

use std::collections::VecDeque;

use crate::error::{LoopError, Result};
use crate::lattice::{boundary_index, Dims, Side};

use super::ConnectivityPattern;

/// Which reading order is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Bottom-left point, left side upwards, top-left point, then bottom/top
    /// column pairs left to right, then the right side downwards.
    Horizontal,
    /// Top-left side point, top row, right top point, then left/right row
    /// pairs downwards, then the bottom row from right to left.
    Vertical,
}

/// Sequence of `+1`/`-1` steps with nonnegative prefix sums ending at 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyckPath {
    steps: Vec<i8>,
}

impl DyckPath {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        let mut h: i64 = 0;
        for &s in &steps {
            if s != 1 && s != -1 {
                return Err(LoopError::Malformed(format!("step {} is not +-1", s)));
            }
            h += s as i64;
            if h < 0 {
                return Err(LoopError::Malformed("path dips below zero".into()));
            }
        }
        if h != 0 {
            return Err(LoopError::Malformed("path does not return to zero".into()));
        }
        Ok(DyckPath { steps })
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Heights after each step (length equals the number of steps).
    pub fn heights(&self) -> Vec<usize> {
        let mut h = 0i64;
        self.steps
            .iter()
            .map(|&s| {
                h += s as i64;
                h as usize
            })
            .collect()
    }

    pub fn max_height(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }
}

/// Boundary indices in reading order.
pub fn reading_order(dims: Dims, direction: Direction) -> Vec<usize> {
    let (h, v) = (dims.n_h, dims.n_v);
    let b = |side, off| boundary_index(dims, side, off).expect("in range");
    let mut out = Vec::with_capacity(2 * (h + v));
    match direction {
        Direction::Horizontal => {
            out.push(b(Side::Bottom, 0));
            for r in (0..v).rev() {
                out.push(b(Side::Left, r));
            }
            out.push(b(Side::Top, 0));
            for c in 1..h {
                out.push(b(Side::Bottom, c));
                out.push(b(Side::Top, c));
            }
            for r in 0..v {
                out.push(b(Side::Right, r));
            }
        }
        Direction::Vertical => {
            out.push(b(Side::Left, 0));
            for c in 0..h {
                out.push(b(Side::Top, c));
            }
            out.push(b(Side::Right, 0));
            for r in 1..v {
                out.push(b(Side::Left, r));
                out.push(b(Side::Right, r));
            }
            for c in (0..h).rev() {
                out.push(b(Side::Bottom, c));
            }
        }
    }
    out
}

pub fn dyck_map(p: &ConnectivityPattern, dims: Dims, direction: Direction) -> Result<DyckPath> {
    if p.n() != dims.half_perimeter() {
        return Err(LoopError::DimensionMismatch { expected: dims.half_perimeter(), got: p.n() });
    }
    let partner = p.partners();
    let mut read = vec![false; partner.len()];
    let mut steps = Vec::with_capacity(2 * p.n());
    for idx in reading_order(dims, direction) {
        steps.push(if read[partner[idx]] { -1 } else { 1 });
        read[idx] = true;
    }
    DyckPath::new(steps)
}

/// Inverse of [`dyck_map`].
///
/// The points read so far always form one contiguous arc of the boundary
/// circle, growing at either end. A down-step closes the open point nearest
/// to the end at which the current point is read; closing the most recent
/// open point instead would produce crossing chords whenever the reading
/// alternates between the two ends.
pub fn dyck_unmap(path: &DyckPath, dims: Dims, direction: Direction) -> Result<ConnectivityPattern> {
    let order = reading_order(dims, direction);
    let total = order.len();
    if path.steps.len() != total {
        return Err(LoopError::DimensionMismatch { expected: total, got: path.steps.len() });
    }
    let next = |i: usize| if i == total { 1 } else { i + 1 };
    let mut open: VecDeque<usize> = VecDeque::new();
    let mut pairs = Vec::with_capacity(total / 2);
    let (mut low, mut high) = (order[0], order[0]);
    for (k, (&s, &idx)) in path.steps.iter().zip(&order).enumerate() {
        let at_high = if k == 0 {
            true
        } else if idx == next(high) {
            high = idx;
            true
        } else if next(idx) == low {
            low = idx;
            false
        } else {
            return Err(LoopError::Malformed("reading order is not arc-contiguous".into()));
        };
        if s > 0 {
            if at_high {
                open.push_back(idx);
            } else {
                open.push_front(idx);
            }
        } else {
            let partner = if at_high { open.pop_back() } else { open.pop_front() }
                .ok_or_else(|| LoopError::Malformed("unbalanced path".into()))?;
            pairs.push((partner, idx));
        }
    }
    ConnectivityPattern::new(dims.half_perimeter(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchings::enumerate_matchings;

    #[test]
    fn figure_example_horizontal() {
        let dims = Dims::open(4, 3).unwrap();
        let p = ConnectivityPattern::from_text("1-12,2-3,4-11,5-8,6-7,9-10,13-14").unwrap();
        let path = dyck_map(&p, dims, Direction::Horizontal).unwrap();
        assert_eq!(path.heights(), vec![1, 2, 3, 2, 1, 2, 3, 2, 1, 2, 1, 0, 1, 0]);
        assert_eq!(dyck_unmap(&path, dims, Direction::Horizontal).unwrap(), p);
    }

    #[test]
    fn reading_orders_are_permutations() {
        for (h, v) in [(1, 1), (2, 3), (4, 3), (3, 3)] {
            let d = Dims::open(h, v).unwrap();
            for dir in [Direction::Horizontal, Direction::Vertical] {
                let mut o = reading_order(d, dir);
                o.sort_unstable();
                assert_eq!(o, (1..=2 * (h + v)).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn vertical_order_on_three_by_three() {
        let d = Dims::open(3, 3).unwrap();
        assert_eq!(reading_order(d, Direction::Vertical), vec![12, 1, 2, 3, 4, 11, 5, 10, 6, 7, 8, 9]);
    }

    #[test]
    fn round_trip_small() {
        let d = Dims::open(2, 2).unwrap();
        for p in enumerate_matchings(4).unwrap() {
            for dir in [Direction::Horizontal, Direction::Vertical] {
                let path = dyck_map(&p, d, dir).unwrap();
                assert_eq!(dyck_unmap(&path, d, dir).unwrap(), p);
            }
        }
    }

    #[test]
    fn invalid_paths_are_rejected() {
        assert!(DyckPath::new(vec![-1, 1]).is_err());
        assert!(DyckPath::new(vec![1, 1]).is_err());
    }
}
