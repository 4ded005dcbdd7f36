//! Non-crossing matchings of boundary stubs and everything built on them:
//! flows through cuts, Dyck bijections, allowed-pattern counts, canonical
//! loop patterns and hole filling on the torus.

mod canonical;
mod count;
mod dyck;
mod flow;
mod hole;

pub use canonical::canonical_pattern;
pub use count::{
    asymptotic_ratio, catalan, count_allowed, dyck_height_count, entropy_scaling, dyck_height_count_binomial,
    dyck_height_count_fraction, dyck_height_count_transfer, k_paper, log2_big, paper_closed_forms, per_direction_brute,
    AsymptoticRow, EntropyRow, EntropyScaling,
    ClosedFormReport, CountResult, Strategy,
};
pub use dyck::{dyck_map, dyck_unmap, reading_order, Direction, DyckPath};
pub use flow::{
    boundary_point, crossings, flow, forbidden_witness, is_allowed, is_allowed_in, tuple_class, BoundaryPoint,
    CutOrientation, TupleClass,
};
pub use hole::{fill_exterior, HoleFilling};


use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LoopError, Result};
use crate::guard;

/// Perfect non-crossing matching of the points `1..=2n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConnectivityPattern {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl ConnectivityPattern {
    /// Validates and normalises `pairs` (each pair ordered, list sorted).
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        if pairs.len() != n {
            return Err(LoopError::Malformed(format!("expected {} pairs, got {}", n, pairs.len())));
        }
        let mut seen = vec![false; 2 * n + 1];
        for &(a, b) in &pairs {
            if a == 0 || b > 2 * n || a == b {
                return Err(LoopError::Malformed(format!("invalid pair ({}, {})", a, b)));
            }
            for x in [a, b] {
                if seen[x] {
                    return Err(LoopError::Malformed(format!("point {} matched twice", x)));
                }
                seen[x] = true;
            }
        }
        let p = ConnectivityPattern { n, pairs };
        if let Some((x, y)) = p.first_crossing() {
            return Err(LoopError::Malformed(format!("pairs {:?} and {:?} cross", x, y)));
        }
        Ok(p)
    }

    /// Half the number of matched points.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `partner[i]` is the point matched with `i` (index 0 unused).
    pub fn partners(&self) -> Vec<usize> {
        let mut out = vec![0; 2 * self.n + 1];
        for &(a, b) in &self.pairs {
            out[a] = b;
            out[b] = a;
        }
        out
    }

    fn first_crossing(&self) -> Option<((usize, usize), (usize, usize))> {
        // Stack scan: a chord crosses another exactly when its closing point
        // is not the most recently opened one.
        let partner = self.partners();
        let mut stack = Vec::new();
        for i in 1..=2 * self.n {
            if partner[i] > i {
                stack.push(i);
            } else {
                let top = stack.pop()?;
                if top != partner[i] {
                    return Some(((top, partner[top]), (partner[i], i)));
                }
            }
        }
        None
    }

    /// Pairs `(2k-1, 2k)`.
    pub fn nearest_neighbour(n: usize) -> Self {
        ConnectivityPattern { n, pairs: (1..=n).map(|k| (2 * k - 1, 2 * k)).collect() }
    }

    /// Pairs `(2k, 2k+1)` together with `(1, 2n)`.
    pub fn nearest_neighbour_shifted(n: usize) -> Self {
        let mut pairs: Vec<(usize, usize)> = (1..n).map(|k| (2 * k, 2 * k + 1)).collect();
        pairs.push((1, 2 * n));
        pairs.sort_unstable();
        ConnectivityPattern { n, pairs }
    }

    /// Text form `1-8,2-7,3-6,4-5`.
    pub fn to_text(&self) -> String {
        self.pairs.iter().map(|(a, b)| format!("{}-{}", a, b)).collect::<Vec<_>>().join(",")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for tok in text.trim().split(',').filter(|t| !t.trim().is_empty()) {
            let (a, b) = tok
                .trim()
                .split_once('-')
                .ok_or_else(|| LoopError::Malformed(format!("pair {:?} lacks '-'", tok)))?;
            let a: usize = a.trim().parse().map_err(|_| LoopError::Malformed(format!("bad number {:?}", a)))?;
            let b: usize = b.trim().parse().map_err(|_| LoopError::Malformed(format!("bad number {:?}", b)))?;
            pairs.push((a, b));
        }
        Self::new(pairs.len(), pairs)
    }
}

impl fmt::Display for ConnectivityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// All `C_n` non-crossing perfect matchings of `1..=2n`.
pub fn enumerate_matchings(n: usize) -> Result<Vec<ConnectivityPattern>> {
    let mut out = Vec::new();
    for_each_matching(n, |p| out.push(p.clone()))?;
    Ok(out)
}

/// Streams every non-crossing matching of `1..=2n` in lexicographic order
/// of its Dyck word (up-steps first).
pub fn for_each_matching(n: usize, mut f: impl FnMut(&ConnectivityPattern)) -> Result<()> {
    let cap = guard::cap(guard::MATCHING_HALF_LENGTH);
    if n > cap {
        return Err(LoopError::Guard { what: "matching enumeration (half-length)", needed: n, cap });
    }
    let mut stack = Vec::with_capacity(n);
    let mut pairs = Vec::with_capacity(n);
    walk(1, n, 0, &mut stack, &mut pairs, &mut f);
    Ok(())
}

fn walk(
    pos: usize,
    n: usize,
    opened: usize,
    stack: &mut Vec<usize>,
    pairs: &mut Vec<(usize, usize)>,
    f: &mut impl FnMut(&ConnectivityPattern),
) {
    if pos > 2 * n {
        let mut v = pairs.clone();
        v.sort_unstable();
        f(&ConnectivityPattern { n, pairs: v });
        return;
    }
    if opened < n {
        stack.push(pos);
        walk(pos + 1, n, opened + 1, stack, pairs, f);
        stack.pop();
    }
    if let Some(open) = stack.pop() {
        pairs.push((open, pos));
        walk(pos + 1, n, opened, stack, pairs, f);
        pairs.pop();
        stack.push(open);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalan_counts() {
        for (n, c) in [(0, 1), (1, 1), (2, 2), (3, 5), (4, 14), (6, 132), (7, 429)] {
            let all = enumerate_matchings(n).unwrap();
            assert_eq!(all.len(), c);
            let set: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), c);
            for p in &all {
                assert!(ConnectivityPattern::new(n, p.pairs().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn crossing_is_rejected() {
        assert!(ConnectivityPattern::new(2, vec![(1, 3), (2, 4)]).is_err());
        assert!(ConnectivityPattern::new(2, vec![(1, 2), (2, 4)]).is_err());
        assert!(ConnectivityPattern::new(2, vec![(1, 4), (2, 3)]).is_ok());
    }

    #[test]
    fn text_form() {
        let p = ConnectivityPattern::from_text("4-5,1-8,3-6,2-7").unwrap();
        assert_eq!(p.to_text(), "1-8,2-7,3-6,4-5");
        assert!(ConnectivityPattern::from_text("1-3,2-4").is_err());
    }
}
