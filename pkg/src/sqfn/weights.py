"""Dyadic cubes, maximal operators, Muckenhoupt constants.

Cubes are periodic dyadic windows: every power-of-two side from one
cell up to the full domain, at every grid-aligned position.  Window
sums use wrapped cumulative sums; the sup over cubes containing a point
is a trailing running maximum, so the Hardy-Littlewood maximal operator
costs O(N log N) rather than O(N^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from . import constants
from .errors import ConvergenceError, ParameterError, SingularWeightError
from .grid import Grid, GridFunction, Weight, lp_norm, require_same_grid


@dataclass(frozen=True)
class CubeFamily:
    """All periodic dyadic cubes of a grid: sides h*2^k, every position."""

    grid: Grid

    @property
    def sides_in_cells(self) -> np.ndarray:
        return 2 ** np.arange(int(np.log2(self.grid.points_per_axis)) + 1)


def _wrapped_window_sums(a: np.ndarray, m: int, axis: int) -> np.ndarray:
    """out[..., i, ...] = sum of m consecutive entries starting at i, wrapping."""
    n = a.shape[axis]
    if m == n:
        return np.repeat(np.sum(a, axis=axis, keepdims=True), n, axis=axis)
    ext = np.concatenate([a, np.take(a, range(m - 1), axis=axis)], axis=axis)
    cs = np.cumsum(ext, axis=axis)
    pad = np.zeros_like(np.take(cs, [0], axis=axis))
    cs = np.concatenate([pad, cs], axis=axis)
    hi = np.take(cs, range(m, n + m), axis=axis)
    lo = np.take(cs, range(0, n), axis=axis)
    return hi - lo


def _window_sums(a: np.ndarray, m: int) -> np.ndarray:
    """Sums over m^dim periodic windows indexed by their lowest corner."""
    out = a
    for axis in range(a.ndim):
        out = _wrapped_window_sums(out, m, axis)
    return out


def _trailing_max(a: np.ndarray, m: int) -> np.ndarray:
    """out[x] = max over starts in (x-m, x] per axis, i.e. over cubes containing x."""
    out = a
    origin = m - 1 - m // 2
    for axis in range(a.ndim):
        out = maximum_filter1d(out, size=m, axis=axis, mode="wrap", origin=origin)
    return out


def _leading_min(a: np.ndarray, m: int) -> np.ndarray:
    """out[i] = min over the window [i, i+m-1] per axis (wrapping)."""
    out = a
    for axis in range(a.ndim):
        centered = minimum_filter1d(out, size=m, axis=axis, mode="wrap")
        out = np.roll(centered, -(m // 2), axis=axis)
    return out


def maximal(f: GridFunction, family: CubeFamily | None = None) -> GridFunction:
    """Hardy-Littlewood maximal function: sup of |f|-averages over dyadic cubes."""
    family = family or CubeFamily(f.grid)
    require_same_grid(f, family)
    mags = np.abs(f.values)
    best = np.array(mags)  # the one-cell cube is |f| itself
    for m in family.sides_in_cells[1:]:
        means = _window_sums(mags, int(m)) / float(m) ** f.grid.dim
        best = np.maximum(best, _trailing_max(means, int(m)))
    return GridFunction(f.grid, best)


def weighted_centered_maximal(f: GridFunction, w: Weight) -> GridFunction:
    """Centered weighted maximal: sup_t (int_{B(x,t)} |f| w) / (int_{B(x,t)} w).

    Balls are centered odd windows with dyadically growing radii; a ball
    with zero w-mass is skipped.  The largest ball covers the domain, so
    the sup is defined everywhere.
    """
    require_same_grid(f, w.base)
    g = f.grid
    num_f = np.abs(f.values) * w.values
    best = np.zeros(g.shape)
    radius = 1
    n = g.points_per_axis
    while True:
        width = min(2 * radius - 1, n)
        num = _centered_window_sums(num_f, width)
        den = _centered_window_sums(w.values, width)
        ok = den > 0
        np.maximum(best, np.where(ok, num / np.where(ok, den, 1.0), 0.0), out=best)
        if width >= n:
            break
        radius *= 2
    return GridFunction(g, best)


def _centered_window_sums(a: np.ndarray, width: int) -> np.ndarray:
    half = (width - 1) // 2
    sums = _window_sums(a, width)
    return np.roll(sums, half, axis=tuple(range(a.ndim)))


@dataclass(frozen=True)
class ApReport:
    """A_p constant together with the extremizing cube."""

    p: float
    constant: float
    witness_side: float
    witness_start: tuple


def ap_constant(w: Weight, p: float, family: CubeFamily | None = None) -> ApReport:
    """Muckenhoupt constant sup_Q (avg_Q w)(avg_Q w^{-1/(p-1)})^{p-1}.

    For p = 1 the dual factor degenerates to 1/(inf_Q w).  Weights with
    zeros are rejected for p >= 1 since the dual average diverges.
    """
    if not (p >= 1):
        raise ParameterError(f"p must be >= 1, got {p}")
    family = family or CubeFamily(w.grid)
    require_same_grid(w.base, family)
    vals = w.values
    if np.min(vals) <= 0.0:
        raise SingularWeightError("A_p constants need a strictly positive weight")
    dim = w.grid.dim
    dual = vals ** (-1.0 / (p - 1.0)) if p > 1 else None
    if dual is not None and not np.all(np.isfinite(dual)):
        raise SingularWeightError(
            f"the dual weight w^(-1/(p-1)) overflows for p = {p}"
        )
    best = -np.inf
    witness = (1, (0,) * dim)
    for m in family.sides_in_cells:
        m = int(m)
        mean_w = _window_sums(vals, m) / float(m) ** dim
        if p > 1:
            field = mean_w * (_window_sums(dual, m) / float(m) ** dim) ** (p - 1.0)
        else:
            field = mean_w / _leading_min(vals, m)
        idx = int(np.argmax(field))
        if field.reshape(-1)[idx] > best:
            best = float(field.reshape(-1)[idx])
            witness = (m, np.unravel_index(idx, field.shape))
    side_cells, start = witness
    return ApReport(p, best, side_cells * w.grid.spacing, tuple(int(i) for i in start))


def empirical_maximal_norm(grid: Grid, q: float, trials: int = 32,
                           seed: int = 7) -> float:
    """Estimated ||M||_{L^q -> L^q} over random trials plus a spike, with margin.

    The margin (x1.25) makes the estimate safe to use as the norm bound
    inside the Rubio de Francia series.
    """
    if not (q > 1):
        raise ParameterError(f"q must exceed 1, got {q}")
    rng = np.random.default_rng(seed)
    family = CubeFamily(grid)
    best = 0.0
    candidates = [np.abs(rng.standard_normal(grid.shape)) for _ in range(trials)]
    spike = np.zeros(grid.shape)
    spike[(0,) * grid.dim] = 1.0
    candidates.append(spike)
    for v in candidates:
        f = GridFunction(grid, v)
        ratio = lp_norm(maximal(f, family), q) / max(lp_norm(f, q), 1e-300)
        best = max(best, ratio)
    return best * constants.MAXIMAL_NORM_MARGIN


@dataclass(frozen=True)
class RdFCertificate:
    """Verifiable facts about a Rubio de Francia majorant."""

    weight: Weight
    q: float
    norm_ratio: float        # ||v||_q / ||phi||_q, must be <= 2
    a1_ratio: float          # sup M v / v, must be <= 2 ||M||
    maximal_norm: float
    tail: float


def rubio_de_francia(phi: GridFunction, q: float, maximal_norm: float | None = None,
                     terms: int = 30) -> RdFCertificate:
    """v = sum_k M^k phi / (2||M||_q)^k, an A_1 majorant of |phi|."""
    if not (q > 1):
        raise ParameterError(f"q must exceed 1, got {q}")
    if maximal_norm is None:
        maximal_norm = empirical_maximal_norm(phi.grid, q)
    if not (maximal_norm > 0):
        raise ParameterError("maximal_norm must be positive")
    family = CubeFamily(phi.grid)
    term = np.abs(phi.values)
    total = np.array(term)
    for _ in range(terms - 1):
        term = maximal(GridFunction(phi.grid, term), family).values.real / (2.0 * maximal_norm)
        total += term
    tail = lp_norm(GridFunction(phi.grid, term), q)
    size = lp_norm(GridFunction(phi.grid, total), q)
    if tail > 1e-8 * max(size, 1e-300):
        raise ConvergenceError(
            f"majorant series tail {tail:.2e} has not converged within {terms} terms"
        )
    v = Weight(GridFunction(phi.grid, total))
    mv = maximal(v.base, family).values.real
    positive = total > 0
    a1 = float(np.max(mv[positive] / total[positive])) if positive.any() else np.inf
    ratio = size / max(lp_norm(phi, q), 1e-300)
    return RdFCertificate(v, q, ratio, a1, maximal_norm, tail)


def weighted_rearrangement(f: GridFunction, w: Weight, t: float) -> float:
    """Decreasing w-rearrangement f*_w(t) = inf{a >= 0 : w{|f| > a} <= t}."""
    require_same_grid(f, w.base)
    total = float(np.sum(w.values)) * f.grid.cell_volume
    if not (0 < t < total):
        raise ParameterError(f"t must lie in (0, {total:g}), got {t}")
    mags = np.abs(f.values).reshape(-1)
    mass = w.values.reshape(-1) * f.grid.cell_volume
    if float(np.sum(mass[mags > 0])) <= t:
        return 0.0
    levels = np.unique(mags)[::-1]
    # mass strictly above each level, in decreasing level order
    group_mass = np.array([float(np.sum(mass[mags == u])) for u in levels])
    strict_above = np.concatenate([[0.0], np.cumsum(group_mass)[:-1]])
    feasible = strict_above <= t
    return float(levels[feasible][-1])


def local_sharp_maximal(f: GridFunction, lam: float,
                        family: CubeFamily | None = None) -> GridFunction:
    """Local sharp maximal M#_lam f: sup over cubes containing x of
    inf_c ((f - c) chi_Q)*(lam |Q|).

    The inner inf over the recentering constant c is exact: with
    r = floor(lam * m^dim) samples allowed above the level, the optimum
    is half the smallest spread of m^dim - r consecutive sorted values.
    """
    if not (0 < lam < 1):
        raise ParameterError(f"lambda must lie in (0, 1), got {lam}")
    family = family or CubeFamily(f.grid)
    require_same_grid(f, family)
    if np.max(np.abs(f.values.imag)) != 0.0:
        raise ParameterError("the local sharp maximal function is defined for real inputs")
    vals = f.values.real
    g = f.grid
    dim = g.dim
    best = np.zeros(g.shape)
    for m in family.sides_in_cells:
        m = int(m)
        count = m**dim
        r = int(np.floor(lam * count))
        if r >= count - 1:
            continue  # every cube oscillation at this scale is zero
        per_start = np.empty(g.shape)
        it = np.ndindex(*((g.points_per_axis,) * dim))
        n = g.points_per_axis
        for start in it:
            if dim == 1:
                window = vals[np.arange(start[0], start[0] + m) % n]
            else:
                ii = np.arange(start[0], start[0] + m) % n
                jj = np.arange(start[1], start[1] + m) % n
                window = vals[np.ix_(ii, jj)].reshape(-1)
            window = np.sort(window)
            q = count - r
            spreads = window[q - 1 :] - window[: count - q + 1]
            per_start[start] = 0.5 * float(np.min(spreads))
        best = np.maximum(best, _trailing_max(per_start, m))
    return GridFunction(g, best)
