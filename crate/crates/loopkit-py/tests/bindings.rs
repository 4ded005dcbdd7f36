use loopkit_py::{
    canonical_pattern, count_allowed, entropy_scaling, is_allowed, kernel_dimension, potts_sample, schmidt_rank,
    selftest, GuardError,
};
use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn with_python<R>(f: impl for<'py> FnOnce(Python<'py>) -> R) -> R {
    Python::initialize();
    Python::attach(f)
}

#[test]
fn counts_match_known_values() {
    Python::initialize();
    assert_eq!(count_allowed(2, 2, "brute").unwrap(), BigUint::from(12u32));
    assert_eq!(count_allowed(3, 2, "dp").unwrap(), BigUint::from(33u32));
    // The printed closed forms undercount; the value is kept as evaluated.
    assert_eq!(count_allowed(2, 2, "paper-closed-forms").unwrap(), BigUint::from(2u32));
}

#[test]
fn canonical_rows_round_trip() {
    Python::initialize();
    let rows = canonical_pattern("1-2,3-4", 1, 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(is_allowed("1-2,3-4", 1, 1).unwrap());
}

#[test]
fn ground_space_dimensions() {
    Python::initialize();
    assert_eq!(kernel_dimension(2, 2, "obc", 1.0, "a").unwrap(), 12);
    assert_eq!(kernel_dimension(2, 2, "gapped", 1.0, "a").unwrap(), 1);
}

#[test]
fn torus_schmidt_rank_is_positive() {
    Python::initialize();
    assert!(schmidt_rank(4, 4, (0, 0, 2, 2), 1.0).unwrap() > 1);
}

#[test]
fn errors_map_to_python_exceptions() {
    with_python(|py| {
        let e = kernel_dimension(6, 5, "obc", 1.0, "a").unwrap_err();
        assert!(e.is_instance_of::<GuardError>(py));
        let e = count_allowed(2, 2, "bogus").unwrap_err();
        assert!(e.is_instance_of::<PyValueError>(py));
        let e = kernel_dimension(2, 2, "obc", 1.0, "b").unwrap_err();
        assert!(e.is_instance_of::<PyValueError>(py));
    });
}

#[test]
fn dictionaries_carry_the_results() {
    with_python(|py| {
        let s = entropy_scaling(py, 12, 6).unwrap();
        let rows: Vec<(usize, f64, f64, f64)> = s.get_item("rows").unwrap().unwrap().extract().unwrap();
        assert_eq!(rows.len(), 12);
        let a: Vec<f64> = potts_sample(py, 4, 4, 4, None, 320, 10, 3)
            .unwrap()
            .values()
            .iter()
            .map(|v| v.extract().unwrap())
            .collect();
        let b: Vec<f64> = potts_sample(py, 4, 4, 4, None, 320, 10, 3)
            .unwrap()
            .values()
            .iter()
            .map(|v| v.extract().unwrap())
            .collect();
        assert_eq!(a, b);
    });
}

#[test]
fn selftest_subset() {
    with_python(|py| {
        let r = selftest(py, vec![1, 2], 7);
        assert_eq!(r.iter().map(|t| t.0).collect::<Vec<_>>(), vec![1, 2]);
        assert!(r.iter().all(|t| t.2));
    });
}
