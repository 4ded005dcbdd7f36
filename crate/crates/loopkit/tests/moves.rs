use loopkit::lattice::{connectivity_of, Dims, LoopPattern, Side};
use loopkit::moves::{
    boundary_neighbors, bulk_neighbors, classify_plaquette, domino_orbit, isolated_states, stacked_columns,
    stacked_rows, window_class, window_positions, winding_sector, WindingSector, PLAQUETTE_TABLE,
};
use proptest::prelude::*;

fn pattern_in(dims: Dims) -> impl Strategy<Value = LoopPattern> {
    any::<u64>().prop_map(move |k| LoopPattern::from_index(dims, k & ((1u64 << dims.sites()) - 1)))
}

fn open_pattern() -> impl Strategy<Value = LoopPattern> {
    (2usize..=5, 2usize..=5).prop_flat_map(|(h, v)| pattern_in(Dims::open(h, v).unwrap()))
}

fn even_open_pattern() -> impl Strategy<Value = LoopPattern> {
    prop::sample::select(vec![(2usize, 2usize), (4, 2), (2, 4), (4, 4), (6, 4)])
        .prop_flat_map(|(h, v)| pattern_in(Dims::open(h, v).unwrap()))
}

fn torus_pattern() -> impl Strategy<Value = LoopPattern> {
    prop::sample::select(vec![(2usize, 2usize), (4, 2), (2, 4), (4, 4), (6, 4), (4, 6)])
        .prop_flat_map(|(h, v)| pattern_in(Dims::torus(h, v).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bulk_moves_are_symmetric(l in open_pattern()) {
        for m in bulk_neighbors(&l) {
            prop_assert!(m.from.is_mover() && m.to.is_mover() && m.from != m.to);
            let back = bulk_neighbors(&m.pattern);
            prop_assert!(back.iter().any(|b| b.position == m.position && b.pattern == l));
        }
    }

    #[test]
    fn bulk_moves_preserve_connectivity(l in open_pattern()) {
        let p = connectivity_of(&l).unwrap();
        for m in bulk_neighbors(&l) {
            prop_assert_eq!(connectivity_of(&m.pattern).unwrap(), p.clone());
            prop_assert_eq!(window_class(&m.pattern, m.position.0, m.position.1), m.to);
        }
    }

    #[test]
    fn bulk_moves_preserve_the_winding_sector(l in torus_pattern()) {
        let w = winding_sector(&l).unwrap();
        for m in bulk_neighbors(&l) {
            prop_assert_eq!(winding_sector(&m.pattern).unwrap(), w);
        }
    }

    #[test]
    fn boundary_moves_are_symmetric_and_follow_orbits(l in even_open_pattern()) {
        for m in boundary_neighbors(&l).unwrap() {
            let orbit = domino_orbit(m.position.side);
            prop_assert!(orbit.orbit.contains(&m.from) && orbit.orbit.contains(&m.to));
            let slot = orbit.orbit.iter().position(|&s| s == m.to).unwrap();
            prop_assert_eq!(m.weight, orbit.weights[slot]);
            let back = boundary_neighbors(&m.pattern).unwrap();
            prop_assert!(back.iter().any(|b| b.position == m.position && b.pattern == l));
        }
    }

    #[test]
    fn transposition_swaps_winding_components(l in torus_pattern()) {
        // Transposing the lattice swaps the roles of the two directions.
        let d = l.dims();
        let t = Dims::torus(d.n_v, d.n_h).unwrap();
        let tiles: Vec<u8> = (0..t.sites())
            .map(|s| {
                let (r, c) = t.row_col(s);
                l.tile(c, r)
            })
            .collect();
        let lt = LoopPattern::new(t, tiles).unwrap();
        let a = winding_sector(&l).unwrap();
        let b = winding_sector(&lt).unwrap();
        prop_assert_eq!((a.j.abs(), a.k.abs()), (b.k.abs(), b.j.abs()));
    }
}

#[test]
fn plaquette_table_is_a_bijection() {
    let mut seen = std::collections::HashSet::new();
    for (class, tiles) in PLAQUETTE_TABLE {
        assert_eq!(classify_plaquette(tiles), class);
        assert!(seen.insert(tiles));
    }
    assert_eq!(seen.len(), 16);
}

#[test]
fn domino_orbits_partition_the_local_states() {
    for side in [Side::Top, Side::Right, Side::Bottom, Side::Left] {
        let o = domino_orbit(side);
        let mut all: Vec<usize> = o.orbit.to_vec();
        all.push(o.standalone);
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }
}

#[test]
fn isolated_states_are_frozen() {
    for (h, v, count) in [(2, 2, 6), (4, 2, 18)] {
        let d = Dims::torus(h, v).unwrap();
        let iso = isolated_states(d).unwrap();
        assert_eq!(iso.len(), count, "{}x{}", h, v);
        for l in &iso {
            assert!(bulk_neighbors(l).is_empty());
            assert!(window_positions(d).into_iter().all(|(r, c)| !window_class(l, r, c).is_mover()));
        }
    }
}

#[test]
fn stacked_sectors() {
    let d = Dims::torus(4, 4).unwrap();
    let v = stacked_rows(d, &[0, 1, 0, 1]).unwrap();
    assert_eq!(winding_sector(&v).unwrap(), WindingSector { j: 2, k: 0 });
    let h = stacked_columns(d, &[0, 1, 0, 1]).unwrap();
    assert_eq!(winding_sector(&h).unwrap(), WindingSector { j: 0, k: 2 });
    assert_eq!(winding_sector(&LoopPattern::filled(d, 0)).unwrap(), WindingSector { j: 2, k: 2 });
}
