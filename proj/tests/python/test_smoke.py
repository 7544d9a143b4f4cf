import math
from fractions import Fraction

import numpy as np
import pytest

import freedyson as fd


def test_polynomial_calculus():
    p = fd.NCPoly("X1 X2 X1")
    assert p.letters == 2
    assert p.degree == 3
    assert fd.cyclic_gradient(p, 1) == fd.NCPoly("X2 X1 + X1 X2")
    assert fd.involution(fd.NCPoly("X1 X2"), True) == fd.NCPoly("X2 X1")
    assert "1" in fd.nc_derivative(fd.NCPoly("X1^2"), 1)
    x = [np.diag([1.0, 2.0]).astype(complex)]
    assert fd.normalized_trace(fd.NCPoly("X1^2"), x) == pytest.approx(2.5)


def test_errors_map_to_python_exceptions():
    with pytest.raises(fd.ValidationError):
        fd.Potential("x^4")
    with pytest.raises(fd.Error):
        fd.NCPoly("X1 + +")
    with pytest.raises(fd.InfeasibleError):
        fd.count_maps("x4:5")
    with pytest.raises(fd.NumericError):
        fd.solve_one_cut(-0.05)


def test_fixed_point_matches_one_cut():
    v = fd.Potential("0.5 x^2 + 0.01 x^4")
    opts = fd.FixedPointOptions()
    opts.degree = 8
    r = fd.solve_fixed_point(v, opts)
    m = fd.solve_one_cut(0.01).moments(8)
    for k in range(1, 9):
        assert abs(r.tau("X1^%d" % k).real - m[k]) < 1e-8
    assert abs(r.tau("X1X1X1X1").real - m[4]) < 1e-8
    assert r.max_residual < opts.tol


def test_series_and_map_counts():
    s = fd.solve_series(["X1^4"], 1, 1.0, 4, 2)
    assert s.map_certificate([1], "X1^2") == pytest.approx(fd.count_maps("x4:1", observable="x2"))
    value, tail = s.evaluate([0.001], "X1^2")
    assert value.real == pytest.approx(fd.solve_one_cut(0.001).moments(2)[2], abs=1e-7)
    assert fd.count_maps("x4:1") == 2
    assert fd.count_maps("x4:1", genus=1) == 1
    assert fd.gaussian_genus_expansion("x4:1", 3) == Fraction(19, 9)
    assert len(fd.necklaces(2, 6)) == 14


def test_one_cut_density():
    sol = fd.solve_one_cut(0.0)
    assert sol.edge == pytest.approx(2.0)
    assert sol.density(0.0) == pytest.approx(1.0 / math.pi)
    assert sol.cdf(0.0) == pytest.approx(0.5)


def test_entropy_gaussian():
    r = fd.free_entropy(fd.Potential("0.5 x^2"))
    assert r["chi"] == pytest.approx(0.5 * math.log(2.0 * math.pi) + 0.5)


def test_short_simulation():
    cfg = fd.SimConfig()
    cfg.n = 10
    cfg.dt = 0.01
    cfg.t_max = 1.0
    cfg.burn_in = 0.2
    r = fd.simulate(fd.Potential("0.5 x^2 + 0.01 x^4"), cfg, ["x2"], spectrum_every=1)
    assert r["samples"] > 0
    assert r["observables"][0]["mean"] > 0.0
    assert len(r["pooled_spectrum"]) == 10 * r["samples"]
    x = r["final_state"][0]
    assert np.allclose(x, x.conj().T)
    ks = fd.ks_distance(sorted(r["pooled_spectrum"]), lambda t: fd.solve_one_cut(0.01).cdf(t))
    assert 0.0 <= ks <= 1.0
    assert fd.gap_statistic(list(np.linspace(-1, 1, 50)))["connected"]


def test_coupling_and_convexity():
    cfg = fd.SimConfig()
    cfg.n = 4
    cfg.dt = 0.01
    z = [np.eye(4, dtype=complex)]
    slope = fd.coupling_slope(fd.Potential("0.5 x^2"), cfg, z, 1.0)
    assert slope == pytest.approx(math.log(1 - 0.005) / 0.01)
    ok, _ = fd.convexity_probe(fd.Potential("0.5 x^2"), 1.0, 2.0)
    assert ok
