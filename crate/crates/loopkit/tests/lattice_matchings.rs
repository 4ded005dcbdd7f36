use loopkit::lattice::{connectivity_of, enumerate_patterns, loop_stats, trace_loops, Dims, LoopPattern, Topology};
use loopkit::matchings::{
    canonical_pattern, count_allowed, crossings, dyck_height_count, dyck_map, dyck_unmap, enumerate_matchings,
    is_allowed, ConnectivityPattern, CutOrientation, Direction, Strategy as CountStrategy,
};
use proptest::prelude::*;

fn open_dims() -> impl Strategy<Value = Dims> {
    (1usize..=4, 1usize..=4).prop_map(|(h, v)| Dims::open(h, v).unwrap())
}

fn pattern_in(dims: Dims) -> impl Strategy<Value = LoopPattern> {
    any::<u64>().prop_map(move |k| LoopPattern::from_index(dims, k & ((1u64 << dims.sites()) - 1)))
}

fn open_pattern() -> impl Strategy<Value = LoopPattern> {
    open_dims().prop_flat_map(pattern_in)
}

fn torus_pattern() -> impl Strategy<Value = LoopPattern> {
    prop::sample::select(vec![(2usize, 2usize), (4, 2), (2, 4), (4, 4), (6, 4)])
        .prop_flat_map(|(h, v)| pattern_in(Dims::torus(h, v).unwrap()))
}

fn is_noncrossing(p: &ConnectivityPattern) -> bool {
    let pairs = p.pairs();
    pairs.iter().all(|&(a, b)| {
        pairs.iter().all(|&(c, d)| {
            let inside = |x: usize| a < x && x < b;
            inside(c) == inside(d)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn basis_index_and_text_round_trip(l in open_pattern()) {
        prop_assert_eq!(LoopPattern::from_index(l.dims(), l.basis_index()), l.clone());
        prop_assert_eq!(LoopPattern::from_text(&l.to_text(), Topology::Open).unwrap(), l.clone());
        let json = l.to_json();
        prop_assert_eq!(LoopPattern::from_json(&json, Topology::Open).unwrap(), l);
    }

    #[test]
    fn realised_patterns_are_noncrossing_and_allowed(l in open_pattern()) {
        let p = connectivity_of(&l).unwrap();
        let d = l.dims();
        prop_assert_eq!(p.n(), d.half_perimeter());
        prop_assert!(is_noncrossing(&p));
        prop_assert!(is_allowed(&p, d).unwrap());
        let t = trace_loops(&l);
        prop_assert_eq!(t.open_paths.len(), d.half_perimeter());
        let arcs: usize = t.open_paths.iter().map(|o| o.arcs.len()).sum::<usize>()
            + t.closed_loops.iter().map(|c| c.arcs.len()).sum::<usize>();
        prop_assert_eq!(arcs, 2 * d.sites());
        prop_assert_eq!(loop_stats(&l).n_zero_tiles, l.zero_tiles());
    }

    #[test]
    fn canonical_pattern_realises_its_class(l in open_pattern()) {
        let p = connectivity_of(&l).unwrap();
        let c = canonical_pattern(&p, l.dims()).unwrap();
        prop_assert_eq!(connectivity_of(&c).unwrap(), p);
    }

    #[test]
    fn dyck_paths_round_trip(l in open_pattern(), horizontal in any::<bool>()) {
        let d = l.dims();
        let dir = if horizontal { Direction::Horizontal } else { Direction::Vertical };
        let p = connectivity_of(&l).unwrap();
        let path = dyck_map(&p, d, dir).unwrap();
        prop_assert_eq!(path.steps().len(), 2 * d.half_perimeter());
        prop_assert_eq!(dyck_unmap(&path, d, dir).unwrap(), p);
    }

    #[test]
    fn torus_loops_are_translation_invariant(l in torus_pattern(), dr in 0usize..6, dc in 0usize..6) {
        let d = l.dims();
        let s = l.shifted(dr % d.n_v, dc % d.n_h);
        prop_assert_eq!(loop_stats(&s), loop_stats(&l));
        // Loops are unoriented; fix the sign of each winding.
        let canon = |w: (i64, i64)| if w < (0, 0) { (-w.0, -w.1) } else { w };
        let mut a: Vec<_> = trace_loops(&l).closed_loops.iter().map(|c| canon(c.winding)).collect();
        let mut b: Vec<_> = trace_loops(&s).closed_loops.iter().map(|c| canon(c.winding)).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn noncontractible_loops_come_in_pairs(l in torus_pattern()) {
        let t = trace_loops(&l);
        prop_assert!(t.open_paths.is_empty());
        let nontrivial = t.closed_loops.iter().filter(|c| !c.contractible()).count();
        prop_assert_eq!(nontrivial % 2, 0);
    }
}

#[test]
fn realised_count_equals_allowed_count() {
    for (h, v) in [(1, 1), (2, 1), (2, 2), (3, 2), (2, 3), (3, 3), (4, 2)] {
        let d = Dims::open(h, v).unwrap();
        let realised: std::collections::HashSet<_> =
            enumerate_patterns(d).unwrap().map(|l| connectivity_of(&l).unwrap()).collect();
        let allowed = enumerate_matchings(d.half_perimeter())
            .unwrap()
            .into_iter()
            .filter(|p| is_allowed(p, d).unwrap())
            .count();
        assert_eq!(realised.len(), allowed, "{}x{}", h, v);
        let dp: usize = count_allowed(d, CountStrategy::Dp).unwrap().value.to_string().parse().unwrap();
        assert_eq!(dp, allowed);
    }
}

#[test]
fn dyck_heights_count_cut_crossings() {
    // Heights are listed after each step, so the height after the left side
    // and `cut` columns sits at index `n_v + 2 cut - 1`.
    for (h, v) in [(3, 2), (2, 3), (3, 3), (4, 2)] {
        let d = Dims::open(h, v).unwrap();
        for p in enumerate_matchings(d.half_perimeter()).unwrap() {
            let heights = dyck_map(&p, d, Direction::Horizontal).unwrap().heights();
            for cut in 1..d.n_h {
                let x = crossings(&p, d, cut, CutOrientation::Vertical).unwrap();
                assert_eq!(heights[d.n_v + 2 * cut - 1], x, "{} vertical cut {}", p, cut);
            }
            let heights = dyck_map(&p, d, Direction::Vertical).unwrap().heights();
            for j in 1..d.n_v {
                let x = crossings(&p, d, d.n_v - j, CutOrientation::Horizontal).unwrap();
                assert_eq!(heights[d.n_h + 2 * j - 1], x, "{} horizontal cut {}", p, d.n_v - j);
            }
        }
    }
}

#[test]
fn height_bound_recovers_catalan_numbers() {
    let catalan = [1u32, 1, 2, 5, 14, 42, 132, 429];
    for (n, &c) in catalan.iter().enumerate() {
        assert_eq!(dyck_height_count(n, n), c.into());
    }
}
