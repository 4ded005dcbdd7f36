use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use loopkit::lattice::{Dims, Side};
use loopkit::moves::domino_orbit;
use loopkit::quantum::entropy::{bareiss_rank, numerical_rank};
use loopkit::quantum::hamiltonian::{assemble_h, build_local_terms, BoundaryCondition, Hamiltonian};
use loopkit::quantum::tensor::{mat_mul, random_su2};
use loopkit::quantum::{
    gauge_comparison, psi_obc, psi_obc_contract, psi_torus, schmidt_rank, schmidt_rank_exact, string_movability,
    Region, StateVector, StringSpec, TensorParams, C64, SCHMIDT_TOL,
};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_boundary(dims: Dims, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let n = 1usize << (2 * dims.half_perimeter());
    (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn obc_hamiltonian(h: usize, v: usize, lambda_milli: i64) -> &'static Hamiltonian {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, i64), &'static Hamiltonian>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry((h, v, lambda_milli)).or_insert_with(|| {
        let d = Dims::open(h, v).unwrap();
        let lambda = lambda_milli as f64 / 1000.0;
        Box::leak(Box::new(assemble_h(d, BoundaryCondition::Obc, TensorParams::a(lambda)).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn open_states_are_frustration_free(
        (h, v) in prop::sample::select(vec![(2usize, 2usize), (3, 2), (2, 3), (3, 3)]),
        lambda_milli in prop::sample::select(vec![1000i64, -700, 350, 2500]),
        seed in any::<u64>(),
    ) {
        let d = Dims::open(h, v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_boundary(d, &mut rng);
        let psi = psi_obc(d, &x, C64::new(lambda_milli as f64 / 1000.0, 0.0)).unwrap();
        prop_assume!(psi.norm() > 1e-9);
        let ham = obc_hamiltonian(h, v, lambda_milli);
        prop_assert!(ham.max_term_residual(&psi) / psi.norm() < 1e-10);
    }

    #[test]
    fn paired_gauge_holds_for_any_lambda(re in -3.0f64..3.0, im in -1.0f64..1.0) {
        for (h, v) in [(2, 2), (4, 2)] {
            let g = gauge_comparison(Dims::torus(h, v).unwrap(), C64::new(re, im)).unwrap();
            prop_assert!(g.paired_distance < 1e-12, "{}", g.paired_distance);
        }
    }

    #[test]
    fn bareiss_rank_matches_singular_values(
        rows in 1usize..7, cols in 1usize..7, inner in 0usize..5, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Vec<i64>> = (0..rows).map(|_| (0..inner).map(|_| rng.random_range(-4..5)).collect()).collect();
        let b: Vec<Vec<i64>> = (0..inner).map(|_| (0..cols).map(|_| rng.random_range(-4..5)).collect()).collect();
        let m: Vec<Vec<i64>> = (0..rows)
            .map(|i| (0..cols).map(|j| (0..inner).map(|t| a[i][t] * b[t][j]).sum()).collect())
            .collect();
        let dense = DMatrix::<C64>::from_fn(rows, cols, |i, j| C64::new(m[i][j] as f64, 0.0));
        let big = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let exact = bareiss_rank(big);
        prop_assert!(exact <= inner.min(rows).min(cols));
        prop_assert_eq!(exact, numerical_rank(&dense, 1e-9));
    }
}

#[test]
fn loop_sum_equals_contraction_for_random_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for (h, v) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3), (3, 3)] {
        let d = Dims::open(h, v).unwrap();
        for _ in 0..64 {
            let x = random_boundary(d, &mut rng);
            let lambda: f64 = rng.random_range(-2.0..2.0);
            let a = psi_obc(d, &x, C64::new(lambda, 0.0)).unwrap();
            let b = psi_obc_contract(d, &x, TensorParams::a(lambda)).unwrap();
            assert!(a.relative_distance(&b) < 1e-12, "{}x{} lambda {}", h, v, lambda);
        }
    }
}

#[test]
fn domino_orbits_span_the_domino_kernels() {
    let terms = build_local_terms(TensorParams::a(1.0)).unwrap();
    for side in [Side::Top, Side::Right, Side::Bottom, Side::Left] {
        let term = terms.domino_for(side);
        let o = domino_orbit(side);
        let mut orbit = DMatrix::<C64>::zeros(4, 1);
        for (s, w) in o.orbit.iter().zip(o.weights) {
            orbit[(*s, 0)] = C64::new(w as f64, 0.0);
        }
        let mut alone = DMatrix::<C64>::zeros(4, 1);
        alone[(o.standalone, 0)] = C64::new(1.0, 0.0);
        assert!((term * &orbit).norm() < 1e-12, "{:?} orbit state", side);
        assert!((term * &alone).norm() < 1e-12, "{:?} stand-alone state", side);
        let kernel_dim = 4 - numerical_rank(term, 1e-10);
        assert_eq!(kernel_dim, 2, "{:?}", side);
    }
}

#[test]
fn schmidt_ranks_agree_on_every_region() {
    let d = Dims::torus(4, 4).unwrap();
    let psi: StateVector = psi_torus(d, C64::new(1.0, 0.0), None).unwrap();
    for (w, h) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (4, 1)] {
        for (row, col) in [(0, 0), (1, 2), (3, 3)] {
            let r = Region::new(row, col, w, h);
            let svd = schmidt_rank(&psi, &r, SCHMIDT_TOL).unwrap();
            let exact = schmidt_rank_exact(&psi, &r).unwrap();
            assert_eq!(svd, exact, "{}x{} at ({},{})", w, h, row, col);
        }
    }
}

#[test]
fn strings_move_freely_for_random_commuting_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (h, v) in [(2, 2), (4, 2), (2, 4)] {
        for _ in 0..4 {
            let u = random_su2(&mut rng);
            let spec = StringSpec::new(u, mat_mul(&mat_mul(&u, &u), &u)).unwrap();
            let lambda: f64 = rng.random_range(-2.0..2.0);
            let m = string_movability(Dims::torus(h, v).unwrap(), TensorParams::a(lambda), &spec).unwrap();
            assert!(m < 1e-10, "{}x{}: {}", h, v, m);
        }
    }
}

#[test]
fn non_commuting_strings_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (u, v) = (random_su2(&mut rng), random_su2(&mut rng));
    assert!(StringSpec::new(u, v).is_err());
}
