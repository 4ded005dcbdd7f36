use loopkit::lattice::{trace_loops, Dims, LoopPattern};
use loopkit::potts::{
    bonds_to_loops, cluster_count, correlation_estimate, euler_stats, exact_fk_expectations, has_cross_cluster,
    loops_to_bonds, sw_sample, BondConvention, LinkRule, NetLattice, PottsParams,
};
use proptest::prelude::*;

fn torus_dims() -> impl Strategy<Value = Dims> {
    prop::sample::select(vec![(2usize, 2usize), (4, 2), (2, 4), (4, 4), (6, 4), (4, 6), (6, 6), (8, 6)])
        .prop_map(|(h, v)| Dims::torus(h, v).unwrap())
}

fn bonds_in(dims: Dims) -> impl Strategy<Value = (Dims, u64)> {
    any::<u64>().prop_map(move |g| (dims, g & ((1u64 << dims.sites()) - 1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn bond_and_loop_maps_are_inverse((dims, g) in torus_dims().prop_flat_map(bonds_in), even_zero in any::<bool>()) {
        let conv = if even_zero { BondConvention::EvenZero } else { BondConvention::EvenOne };
        let l = bonds_to_loops(dims, g, conv);
        prop_assert_eq!(loops_to_bonds(&l, conv), g);
        let back = LoopPattern::from_index(dims, l.basis_index());
        prop_assert_eq!(bonds_to_loops(dims, loops_to_bonds(&back, conv), conv), l);
    }

    #[test]
    fn loop_count_follows_clusters_and_cycles((dims, g) in torus_dims().prop_flat_map(bonds_in)) {
        // Euler relation, with a deficit of two when a cluster wraps both ways.
        let net = NetLattice::new(dims).unwrap();
        let l = bonds_to_loops(dims, g, BondConvention::EvenZero);
        let n_l = trace_loops(&l).closed_loops.len();
        let cc = cluster_count(&net, g);
        let expected = cc.components + cc.cycles - if has_cross_cluster(&net, g) { 2 } else { 0 };
        prop_assert_eq!(n_l, expected);
    }

    #[test]
    fn complement_is_the_dual_configuration((dims, g) in torus_dims().prop_flat_map(bonds_in)) {
        // Complementing the bonds swaps the two conventions.
        let mask = (1u64 << dims.sites()) - 1;
        let a = bonds_to_loops(dims, g, BondConvention::EvenZero);
        let b = bonds_to_loops(dims, !g & mask, BondConvention::EvenOne);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn net_lattice_shape() {
    for (h, v) in [(2, 2), (4, 4), (6, 4)] {
        let net = NetLattice::new(Dims::torus(h, v).unwrap()).unwrap();
        assert_eq!(net.n_vertices(), h * v / 2);
        assert_eq!(net.n_edges(), h * v);
        assert!(net.degrees().iter().all(|&d| d == 4));
    }
    assert!(NetLattice::new(Dims::open(4, 4).unwrap()).is_err());
}

#[test]
fn euler_violations_are_all_cross_clusters() {
    for (h, v) in [(2, 2), (4, 2), (2, 4)] {
        let s = euler_stats(Dims::torus(h, v).unwrap(), BondConvention::EvenZero).unwrap();
        assert!(s.bijective);
        assert_eq!(s.unexplained, 0);
        assert_eq!(s.violations, s.cross_configurations);
    }
}

#[test]
fn sampler_reproduces_exact_expectations_on_a_small_torus() {
    let d = Dims::torus(4, 2).unwrap();
    for p in [PottsParams::self_dual(4).unwrap(), PottsParams::new(3, 0.4).unwrap()] {
        let link = exact_fk_expectations(d, p, LinkRule::Link).unwrap();
        let cluster = exact_fk_expectations(d, p, LinkRule::Cluster).unwrap();
        let s = sw_sample(d, p, 32_000, 500, 11).unwrap();
        let mean_cluster = cluster.one_point.iter().sum::<f64>() / d.sites() as f64;
        let m = s.mean_one_point;
        assert!((m.mean - mean_cluster).abs() < 4.0 * m.stderr, "Q={} spin {:?} vs {}", p.q, m, mean_cluster);
        let bond_mean = s.link_one_point.iter().map(|e| e.mean).sum::<f64>() / d.sites() as f64;
        let bond_err = s.link_one_point.iter().map(|e| e.stderr).fold(0.0, f64::max);
        let exact = link.one_point.iter().sum::<f64>() / d.sites() as f64;
        assert!((bond_mean - exact).abs() < 4.0 * bond_err, "Q={} bonds {} vs {}", p.q, bond_mean, exact);
    }
}

#[test]
fn sampler_is_reproducible_from_its_seed() {
    let d = Dims::torus(4, 4).unwrap();
    let p = PottsParams::self_dual(16).unwrap();
    let a = sw_sample(d, p, 64, 8, 5).unwrap();
    let b = sw_sample(d, p, 64, 8, 5).unwrap();
    assert_eq!(a.mean_one_point, b.mean_one_point);
    let c = sw_sample(d, p, 64, 8, 6).unwrap();
    assert_ne!(a.mean_one_point, c.mean_one_point);
}

#[test]
fn correlator_decays_at_the_first_order_point() {
    let d = Dims::torus(16, 16).unwrap();
    let c = correlation_estimate(d, PottsParams::self_dual(16).unwrap(), 4_000, 3).unwrap();
    assert_eq!(c.distances.len(), 9);
    assert!(c.means[1] > 0.0);
    assert!(c.xi_finite(), "slope {} ± {}", c.slope, c.slope_stderr);
    assert!(c.to_csv().starts_with("distance,C,stderr\n"));
}
