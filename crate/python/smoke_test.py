"""Smoke test for the loopkit_py extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/loopkit-py/Cargo.toml -o dist
    pip install dist/loopkit_py-*.whl
"""

import loopkit_py as lk


def main():
    assert lk.count_allowed(2, 2, "brute") == 12
    assert lk.count_allowed(3, 3) == 112
    assert lk.is_allowed("1-2,3-4", 1, 1)
    assert len(lk.canonical_pattern("1-4,2-3", 1, 1)) == 1
    assert lk.kernel_dimension(2, 2) == 12
    assert lk.kernel_dimension(2, 2, bc="gapped") == 1
    assert lk.schmidt_rank(4, 4, (0, 0, 2, 2)) > 1

    try:
        lk.kernel_dimension(6, 5)
    except lk.GuardError:
        pass
    else:
        raise AssertionError("size guard did not fire")

    try:
        lk.count_allowed(2, 2, "bogus")
    except ValueError:
        pass
    else:
        raise AssertionError("bad strategy accepted")

    scaling = lk.entropy_scaling(12, fit_from=6)
    assert len(scaling["rows"]) == 12

    a = lk.potts_sample(4, 4, 4, sweeps=320, burn_in=10, seed=3)
    b = lk.potts_sample(4, 4, 4, sweeps=320, burn_in=10, seed=3)
    assert a == b

    results = lk.selftest([1, 2])
    assert [r[0] for r in results] == [1, 2] and all(r[2] for r in results)
    print("loopkit_py smoke test passed")


if __name__ == "__main__":
    main()
