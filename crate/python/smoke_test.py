"""Smoke test for the pykarcher extension module.

Build and install it first, e.g. `pip install ./crates/py` (maturin backend) or
copy target/release/libpykarcher.so next to this script as pykarcher.so.
"""

import math

import numpy as np

import pykarcher as pk


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


def main():
    a = pk.SpdMatrix([[2.0, 0.5], [0.5, 1.0]])
    b = pk.SpdMatrix([[1.0, -0.3], [-0.3, 3.0]])
    assert a.dim == 2

    # d(a, b) is the largest |log| eigenvalue of a^{-1/2} b a^{-1/2}
    ai = np.linalg.inv(np.linalg.cholesky(np.array(a.to_list())))
    w = np.linalg.eigvalsh(ai @ np.array(b.to_list()) @ ai.T)
    d = pk.thompson_distance(a, b)
    assert math.isclose(d, np.max(np.abs(np.log(w))), rel_tol=1e-12), d

    # the two-atom mean is the geodesic point at the second weight
    mu = pk.FiniteMeasure([a, b], [0.25, 0.75])
    mean, residual, iterations = pk.karcher_mean(mu, tol=1e-12)
    assert residual <= 1e-12
    assert pk.thompson_distance(mean, pk.geodesic(a, b, 0.75)) <= 1e-9

    # commuting atoms: the weighted geometric mean
    diag = pk.FiniteMeasure([pk.SpdMatrix([[4.0, 0.0], [0.0, 1.0]]), pk.SpdMatrix([[1.0, 0.0], [0.0, 9.0]])])
    m, _, _ = pk.karcher_mean(diag)
    assert close(m.to_list(), [[2.0, 0.0], [0.0, 3.0]], 1e-9)

    assert pk.w1(mu, mu) == 0.0
    assert math.isclose(pk.w1(pk.FiniteMeasure([a]), pk.FiniteMeasure([b])), d, rel_tol=1e-12)

    # the mean is a fixed point of every resolvent and of the semigroup
    assert pk.thompson_distance(pk.resolvent(0.5, mu, mean), mean) <= 1e-9
    x = pk.SpdMatrix.identity(2)
    sx = pk.semigroup(1.0, mu, x, flow_tol=1e-5)
    assert pk.thompson_distance(sx, mean) <= math.exp(-1.0) * pk.thompson_distance(x, mean) + 1e-5

    uniform = pk.FiniteMeasure.random(3, 4, seed=1, uniform=True)
    lam, _, _ = pk.karcher_mean(uniform, tol=1e-12)
    _, errs = pk.nodice(uniform, 200, lam)
    assert len(errs) == 800 and errs[-1] < errs[3]
    _, errs = pk.stochastic(uniform, 500, lam, seed=3)
    assert len(errs) == 500

    try:
        pk.FiniteMeasure([a, b], [-0.5, 1.5])
    except ValueError:
        pass
    else:
        raise AssertionError("bad weights accepted")

    print("pykarcher smoke test passed")


if __name__ == "__main__":
    main()
