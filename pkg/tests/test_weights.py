import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqfn.errors import ParameterError, SingularWeightError
from sqfn.grid import Grid, GridFunction, Weight
from sqfn.weights import (ap_constant, empirical_maximal_norm,
                          local_sharp_maximal, maximal, rubio_de_francia,
                          weighted_centered_maximal, weighted_rearrangement)


def _brute_maximal_1d(vals, n):
    """Reference: all periodic dyadic windows, all positions, O(N^2 log N)."""
    mags = np.abs(vals)
    best = np.array(mags)
    m = 2
    while m <= n:
        for start in range(n):
            window = mags[np.arange(start, start + m) % n]
            mean = window.mean()
            for x in range(start, start + m):
                best[x % n] = max(best[x % n], mean)
        m *= 2
    return best


def test_maximal_matches_brute_force_1d():
    n = 32
    rng = np.random.default_rng(0)
    g = Grid(1, n, 1.0)
    vals = rng.standard_normal(n)
    fast = maximal(GridFunction(g, vals)).values.real
    np.testing.assert_allclose(fast, _brute_maximal_1d(vals, n), atol=1e-12)


def test_maximal_matches_brute_force_2d():
    n = 8
    rng = np.random.default_rng(1)
    g = Grid(2, n, 1.0)
    vals = rng.standard_normal((n, n))
    fast = maximal(GridFunction(g, vals)).values.real
    mags = np.abs(vals)
    best = np.array(mags)
    m = 2
    while m <= n:
        for si, sj in itertools.product(range(n), repeat=2):
            ii = np.arange(si, si + m) % n
            jj = np.arange(sj, sj + m) % n
            mean = mags[np.ix_(ii, jj)].mean()
            for x, y in itertools.product(ii, jj):
                best[x, y] = max(best[x, y], mean)
        m *= 2
    np.testing.assert_allclose(fast, best, atol=1e-12)


def test_maximal_dominates_function_and_mean():
    g = Grid(1, 64, 1.0)
    rng = np.random.default_rng(2)
    vals = rng.standard_normal(64)
    mf = maximal(GridFunction(g, vals)).values.real
    assert np.all(mf >= np.abs(vals) - 1e-15)
    assert np.all(mf >= np.mean(np.abs(vals)) - 1e-15)


def test_ap_constant_flat_weight_is_one():
    g = Grid(1, 64, 1.0)
    for p in (1.0, 2.0, 3.0):
        rep = ap_constant(Weight.ones(g), p)
        assert rep.constant == pytest.approx(1.0, abs=1e-12)


def test_ap_constant_monotone_in_power():
    g = Grid(1, 128, 1.0)
    x = np.abs(g.axis_coords()) + g.spacing / 16.0
    last = 0.0
    for a in (0.2, 0.5, 0.8):
        c = ap_constant(Weight(GridFunction(g, x**a)), 2.0).constant
        assert c > last
        last = c


def test_ap_constant_brute_force_small():
    n = 16
    g = Grid(1, n, 1.0)
    rng = np.random.default_rng(3)
    w = np.exp(rng.standard_normal(n))
    p = 2.0
    best = 0.0
    m = 1
    while m <= n:
        for start in range(n):
            idx = np.arange(start, start + m) % n
            best = max(best, w[idx].mean() * (1.0 / w[idx]).mean())
        m *= 2
    rep = ap_constant(Weight(GridFunction(g, w)), p)
    assert rep.constant == pytest.approx(best, rel=1e-12)


def test_ap_rejects_zero_weight():
    g = Grid(1, 64, 1.0)
    vals = np.ones(64)
    vals[0] = 0.0
    with pytest.raises(SingularWeightError):
        ap_constant(Weight(GridFunction(g, vals)), 2.0)


def test_a1_constant_controls_mw():
    """Mw <= ||w||_A1 * w pointwise (characterization of A_1)."""
    g = Grid(1, 64, 1.0)
    rng = np.random.default_rng(4)
    w = Weight(GridFunction(g, 1.0 + np.abs(rng.standard_normal(64))))
    c = ap_constant(w, 1.0).constant
    mw = maximal(w.base).values.real
    assert np.all(mw <= c * w.values + 1e-10)


def test_weighted_centered_maximal_flat_weight():
    g = Grid(1, 64, 1.0)
    rng = np.random.default_rng(5)
    f = GridFunction(g, rng.standard_normal(64))
    out = weighted_centered_maximal(f, Weight.ones(g)).values.real
    # dominated by the (uncentered dyadic) maximal function within a
    # fixed geometric factor, and dominates the global mean
    assert np.all(out >= np.mean(np.abs(f.values)) - 1e-12)
    assert np.all(out <= 3.0 * maximal(f).values.real + 1e-12)


def test_rearrangement_two_level_example():
    g = Grid(1, 8, 1.0)
    vals = np.array([3.0, 3.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    f = GridFunction(g, vals)
    w = Weight.ones(g)
    h = g.spacing
    # w{|f| > 1} = 2h, w{|f| > 0} = 5h
    assert weighted_rearrangement(f, w, 1.9 * h) == 3.0
    assert weighted_rearrangement(f, w, 2.1 * h) == 1.0
    assert weighted_rearrangement(f, w, 5.1 * h) == 0.0
    with pytest.raises(ParameterError):
        weighted_rearrangement(f, w, -1.0)


def test_local_sharp_maximal_brute_force():
    n = 16
    lam = 0.3
    g = Grid(1, n, 1.0)
    rng = np.random.default_rng(6)
    vals = rng.standard_normal(n)
    fast = local_sharp_maximal(GridFunction(g, vals), lam).values.real
    best = np.zeros(n)
    m = 1
    while m <= n:
        r = int(np.floor(lam * m))
        if r < m - 1:
            for start in range(n):
                window = np.sort(vals[np.arange(start, start + m) % n])
                q = m - r
                spreads = window[q - 1:] - window[: m - q + 1]
                osc = 0.5 * spreads.min()
                for x in range(start, start + m):
                    best[x % n] = max(best[x % n], osc)
        m *= 2
    np.testing.assert_allclose(fast, best, atol=1e-12)


def test_local_sharp_kills_constants():
    g = Grid(1, 32, 1.0)
    f = GridFunction(g, np.full(32, 7.0))
    out = local_sharp_maximal(f, 0.25).values.real
    np.testing.assert_allclose(out, 0.0, atol=1e-14)


def test_rubio_de_francia_certificate():
    g = Grid(1, 64, 1.0)
    rng = np.random.default_rng(7)
    phi = GridFunction(g, np.abs(rng.standard_normal(64)))
    cert = rubio_de_francia(phi, 2.0)
    assert np.all(cert.weight.values >= np.abs(phi.values) - 1e-12)
    assert cert.norm_ratio <= 2.0
    assert cert.a1_ratio <= 2.0 * cert.maximal_norm
    assert cert.tail <= 1e-8 * 10


def test_empirical_maximal_norm_exceeds_one():
    g = Grid(1, 64, 1.0)
    assert empirical_maximal_norm(g, 2.0, trials=8) > 1.0


@given(st.integers(0, 20))
@settings(max_examples=15, deadline=None)
def test_maximal_sublinear(seed):
    g = Grid(1, 32, 1.0)
    rng = np.random.default_rng(seed)
    f = GridFunction(g, rng.standard_normal(32))
    h = GridFunction(g, rng.standard_normal(32))
    mf = maximal(f).values.real
    mh = maximal(h).values.real
    msum = maximal(f + h).values.real
    assert np.all(msum <= mf + mh + 1e-12)


@given(st.integers(0, 20), st.floats(1.1, 4.0))
@settings(max_examples=15, deadline=None)
def test_ap_constant_at_least_one(seed, p):
    g = Grid(1, 32, 1.0)
    rng = np.random.default_rng(seed)
    w = Weight(GridFunction(g, np.exp(rng.standard_normal(32))))
    assert ap_constant(w, p).constant >= 1.0 - 1e-12
