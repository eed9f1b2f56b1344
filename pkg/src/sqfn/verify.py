"""The inequality harness: measured ratios, fitted exponents, reports.

Every check turns one inequality into either a RatioReport (a supremum
of measured ratios over a test family, with the witness recorded) or a
GrowthFit (a log-log slope compared against a declared exponent bound).
Empirical suprema over finite families are lower bounds on true
operator norms, so every pass criterion is one-sided.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants
from .errors import BandError, ParameterError, SingularWeightError
from .grid import (Grid, GridFunction, Weight, lp_norm, weighted_lp_norm,
                   weighted_superlevel_measure)
from .multipliers import MultiplierProfile, kappa
from .spectral import HermiteOscillator1D, LaplacianTorus, SpectralOperator
from .squarefuncs import (AREA_KINDS, ConeQuadrature, GStarParams, TimeGrid,
                          area_integral, g_function, g_star)
from .weights import CubeFamily, local_sharp_maximal, maximal


# ---------------------------------------------------------------------------
# Report containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioReport:
    inequality_tag: str
    ratios: tuple
    witness: int
    config_hash: str = "adhoc"
    skipped: int = 0
    excluded_fraction: float = 0.0

    @property
    def sup_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def __post_init__(self):
        vals = np.asarray(self.ratios, dtype=float)
        if vals.size and (not np.all(np.isfinite(vals)) or np.min(vals) < 0):
            raise ParameterError("ratios must be finite and non-negative")


@dataclass(frozen=True)
class GrowthFit:
    tag: str
    x_values: tuple
    y_values: tuple
    exponent_bound: float
    slack: float
    config_hash: str = "adhoc"
    fitted_exponent: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        x = np.asarray(self.x_values, dtype=float)
        y = np.asarray(self.y_values, dtype=float)
        if x.size < 4:
            raise ParameterError("growth fits need at least 4 points")
        if np.max(x) / np.min(x) < 2.0:
            raise ParameterError("growth fits need the x-values to span a real range")
        slope, _ = np.polyfit(np.log(x), np.log(y), 1)
        object.__setattr__(self, "fitted_exponent", float(slope))
        object.__setattr__(self, "passed",
                           bool(slope <= self.exponent_bound + self.slack))


# ---------------------------------------------------------------------------
# Test families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFamily:
    seed: int
    members: tuple
    description: str

    def __post_init__(self):
        for f in self.members:
            if float(np.max(np.abs(f.values))) == 0.0:
                raise ParameterError("test families must not contain the zero function")


def _laplacian_band(grid: Grid, max_mode: int) -> np.ndarray:
    """Axis mode numbers 1..max_mode (positive side only)."""
    n = grid.points_per_axis
    if not (1 <= max_mode <= n // 2 - 1):
        raise ParameterError("band edge outside the resolved spectrum")
    return np.arange(1, max_mode + 1)


def mixed_family(grid: Grid, seed: int, count: int = 20,
                 support_fraction: float = 1.0,
                 shapes: tuple = ("band", "bump", "spike", "packet")) -> TestFamily:
    """Band-limited noise, bumps, spikes and wave packets, round-robin.

    Mode numbers are capped independently of the resolution, so the
    band, bump and packet members describe the same continuum functions
    on every grid (only the lattice spikes are resolution-bound).
    support_fraction < 1 confines every member to the middle part of the
    domain (needed by the non-periodic decomposition machinery).
    """
    rng = np.random.default_rng(seed)
    coords = grid.coords()
    r2 = sum(c**2 for c in coords)
    members = []
    n = grid.points_per_axis
    for i in range(count):
        shape = shapes[i % len(shapes)]
        if shape == "band":
            spec = np.zeros(grid.shape, dtype=np.complex128)
            band = min(n // 8, 16)
            for _ in range(6):
                k = rng.integers(1, band, size=grid.dim)
                amp = rng.standard_normal() + 1j * rng.standard_normal()
                idx = tuple(k)
                spec[idx] += amp
                spec[tuple((-ki) % n for ki in k)] += np.conj(amp)
            vals = np.fft.ifftn(spec).real
        elif shape == "bump":
            width = grid.half_width * (0.04 + 0.2 * rng.random())
            center = [grid.half_width * (rng.random() - 0.5) for _ in range(grid.dim)]
            shifted = sum(grid.periodic_delta(c - m) ** 2 for c, m in zip(coords, center))
            vals = np.exp(-shifted / (2 * width**2))
        elif shape == "spike":
            vals = np.zeros(grid.shape)
            idx = tuple(rng.integers(n // 4, 3 * n // 4, size=grid.dim))
            vals[idx] = 1.0
        else:  # packet
            width = grid.half_width * (0.1 + 0.2 * rng.random())
            freq = np.pi * rng.integers(2, min(n // 8, 16)) / grid.half_width
            vals = np.exp(-r2 / (2 * width**2)) * np.cos(freq * coords[0])
        if support_fraction < 1.0:
            cut = support_fraction * grid.half_width
            window = np.ones(grid.shape)
            for c in coords:
                window = window * (np.abs(c) <= cut)
            vals = vals * window
            if float(np.max(np.abs(vals))) == 0.0:
                vals = np.zeros(grid.shape)
                vals[(n // 2,) * grid.dim] = 1.0
        members.append(GridFunction(grid, vals))
    return TestFamily(seed, tuple(members), f"mixed-{count}")


def resolved_family(op: SpectralOperator, seed: int, count: int = 20,
                    shapes: tuple = ("band", "bump", "spike", "packet")) -> TestFamily:
    """A mixed family restricted to the operator's resolved band.

    For the torus Laplacian the grid itself is the band, so the mixed
    family passes through unchanged; oscillator members are projected
    onto the eigenbasis so the functional calculus accepts them.
    """
    fam = mixed_family(op.grid, seed, count, shapes=shapes)
    if not isinstance(op, HermiteOscillator1D):
        return fam
    members = []
    for f in fam.members:
        proj = op.project(f)
        if float(np.max(np.abs(proj.values))) == 0.0:
            proj = op.synthesize(np.eye(op.truncation)[0])
        members.append(proj)
    return TestFamily(seed, tuple(members), fam.description + "-projected")


def band_limited_family(op: SpectralOperator, psi: MultiplierProfile,
                        times: TimeGrid, seed: int, count: int = 20,
                        capture: float = 0.999) -> TestFamily:
    """Random combinations of modes whose dt/t mass the time grid captures.

    For each spectral node s the grid captures
    sum_j |psi(t_j s)|^2 log-weight; nodes below the capture threshold of
    the exact kappa^2 are excluded, guaranteeing identity checks are not
    polluted by unresolved scales.
    """
    kap2 = kappa(psi) ** 2
    nodes = op.spectral_nodes()
    t = times.nodes[:, None]
    captured = np.sum(np.abs(psi(t * nodes[None, :])) ** 2, axis=0) * times.log_weight
    good = (captured >= capture * kap2) & (nodes > 0)
    if not good.any():
        raise BandError("no spectral node is captured by this time grid")
    rng = np.random.default_rng(seed)
    members = []
    if isinstance(op, HermiteOscillator1D):
        allowed = np.where(good)[0]
        for _ in range(count):
            c = np.zeros(op.truncation)
            pick = rng.choice(allowed, size=min(8, allowed.size), replace=False)
            c[pick] = rng.standard_normal(pick.size)
            members.append(op.synthesize(c))
    else:
        grid = op.grid
        n = grid.points_per_axis
        xi_unit = np.pi / grid.half_width
        max_mode = 0
        for m in range(1, n // 2):
            s = xi_unit * m * np.sqrt(grid.dim)  # worst case diagonal mode
            if np.sum(np.abs(psi(times.nodes * s)) ** 2) * times.log_weight \
                    >= capture * kap2:
                max_mode = m
        lo_mode = 0
        for m in range(1, n // 2):
            s = xi_unit * m
            if np.sum(np.abs(psi(times.nodes * s)) ** 2) * times.log_weight \
                    >= capture * kap2:
                lo_mode = m
                break
        if max_mode < lo_mode or lo_mode == 0:
            raise BandError("time grid captures no torus mode to the required level")
        for _ in range(count):
            spec = np.zeros(grid.shape, dtype=np.complex128)
            for _ in range(8):
                k = rng.integers(lo_mode, max_mode + 1, size=grid.dim)
                amp = rng.standard_normal() + 1j * rng.standard_normal()
                spec[tuple(k)] += amp
                spec[tuple((-ki) % n for ki in k)] += np.conj(amp)
            members.append(GridFunction(grid, np.fft.ifftn(spec).real))
    return TestFamily(seed, tuple(members), f"band-limited-{count}")


def weight_suite(grid: Grid, seed: int, count: int = 5) -> list:
    """Five qualitatively different weights: flat, two powers, rough, smooth."""
    rng = np.random.default_rng(seed)
    coords = grid.coords()
    r = np.sqrt(sum(c**2 for c in coords)) + grid.spacing / 4.0
    suite = [Weight.ones(grid)]
    suite.append(Weight(GridFunction(grid, r**0.5)))
    suite.append(Weight(GridFunction(grid, r**-0.5)))
    rough = np.exp(rng.standard_normal(grid.shape))
    suite.append(Weight(GridFunction(grid, rough)))
    smooth = 1.0 + np.cos(np.pi * coords[0] / grid.half_width) ** 2
    suite.append(Weight(GridFunction(grid, smooth)))
    return suite[:count]


def power_weight_family(grid: Grid, p: float, count: int = 6) -> list:
    """Power weights |x|^a with A_p constants spanning at least a decade.

    The admissible exponent range is -1 < a < p - 1 (a <= 0 for the A_1
    endpoint); the family walks toward the singular ends, where the A_p
    constant blows up, while staying strictly inside.
    """
    if grid.dim != 1:
        raise ParameterError("power-weight families are one-dimensional")
    x = np.abs(grid.coords()[0]) + grid.spacing / 64.0
    if p == 1:
        exps = np.linspace(-0.95, 0.0, count)
    else:
        exps = np.linspace(-0.95, 0.95 * (p - 1.0), count)
    return [Weight(GridFunction(grid, x**a)) for a in exps]


# ---------------------------------------------------------------------------
# Square-function factories
# ---------------------------------------------------------------------------


def square_function_operator(kind: str, op: SpectralOperator, times: TimeGrid,
                             mu: float = 3.5,
                             psi: MultiplierProfile | None = None):
    """A callable GridFunction -> GridFunction for a named square function."""
    if kind in AREA_KINDS or kind in ("sh", "sp", "SH", "SP"):
        cone = ConeQuadrature(op.grid, times)
        return lambda f: area_integral(kind, f, op, cone)
    if kind in ("g_h", "g_p", "G_H", "G_P", "gh", "gp", "GH", "GP"):
        return lambda f: g_function(kind, f, op, times)
    if kind == "g_star":
        if psi is None:
            from .multipliers import psi_vanishing

            psi = psi_vanishing(op.dim)
        params = GStarParams(mu, psi)
        return lambda f: g_star(f, op, params, times)
    raise ParameterError(f"unknown square-function kind {kind!r}")


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def check_spectral_identity(op: SpectralOperator, psi: MultiplierProfile,
                            family: TestFamily, times: TimeGrid,
                            config_hash: str = "adhoc") -> RatioReport:
    """Discretized (int ||psi(t sqrt(L)) f||_2^2 dt/t)^(1/2) versus kappa ||f||_2."""
    kap = kappa(psi)
    dt = times.log_weight
    ratios, skipped = [], 0
    for f in family.members:
        denom = lp_norm(f, 2)
        if denom == 0.0:
            skipped += 1
            continue
        acc = 0.0
        for t in times.nodes:
            u = op.apply_function(psi.scaled(float(t)), f)
            acc += lp_norm(u, 2) ** 2 * dt
        ratios.append(np.sqrt(acc) / (kap * denom))
    witness = int(np.argmax(ratios)) if ratios else -1
    return RatioReport("spectral_identity", tuple(ratios), witness,
                       config_hash, skipped)


def _weighted_power_ratios(T, family: TestFamily, weights: list, p: float):
    """Shared ratio loop: int |Tf|^p w over the p-dependent majorant of |f|^p.

    For 1 < p <= 2 the majorant is int |f|^p Mw; for p > 2 it is
    int |f|^p (Mw)^{p/2} w^{-(p/2 - 1)}.  check_weighted_l2_mw and
    check_lp_range at p = 2 both call this, so they agree bit for bit.
    """
    ratios, skipped = [], 0
    for w in weights:
        mw = maximal(w.base).values.real
        if p > 2:
            if np.min(w.values) <= 0.0:
                raise SingularWeightError(
                    "the p > 2 majorant needs a strictly positive weight"
                )
            majorant = mw ** (p / 2.0) * w.values ** (-(p / 2.0 - 1.0))
        else:
            majorant = mw
        vol = w.grid.cell_volume
        for f in family.members:
            denom = float(np.sum(np.abs(f.values) ** p * majorant)) * vol
            if denom == 0.0:
                skipped += 1
                continue
            num = float(np.sum(np.abs(T(f).values) ** p * w.values)) * vol
            ratios.append(num / denom)
    return ratios, skipped


def check_weighted_l2_mw(T, family: TestFamily, weights: list,
                         tag: str = "weighted_l2_mw",
                         config_hash: str = "adhoc") -> RatioReport:
    """Ratios of int (Tf)^2 w against int |f|^2 Mw over all (f, w) pairs."""
    ratios, skipped = _weighted_power_ratios(T, family, weights, 2.0)
    witness = int(np.argmax(ratios)) if ratios else -1
    return RatioReport(tag, tuple(ratios), witness, config_hash, skipped)


def check_weak_1_1(T, family: TestFamily, weights: list, levels: int = 6,
                   config_hash: str = "adhoc") -> RatioReport:
    """lambda * w{Tf > lambda} versus int |f| Mw, over a level scan."""
    ratios, skipped = [], 0
    for w in weights:
        mw = Weight(maximal(w.base))
        for f in family.members:
            denom = weighted_lp_norm(f, mw, 1)
            if denom == 0.0:
                skipped += 1
                continue
            tf = T(f)
            top = float(np.max(np.abs(tf.values)))
            if top == 0.0:
                skipped += 1
                continue
            for lam in np.geomspace(top / 100.0, top * 0.999, levels):
                measure = weighted_superlevel_measure(tf, w, float(lam))
                ratios.append(float(lam) * measure / denom)
    witness = int(np.argmax(ratios)) if ratios else -1
    return RatioReport("weak_1_1", tuple(ratios), witness, config_hash, skipped)


def check_lp_range(T, family: TestFamily, weights: list, p: float,
                   config_hash: str = "adhoc") -> RatioReport:
    """int (Tf)^p w versus the p-dependent majorant of |f|^p.

    For 1 < p <= 2 the majorant is int |f|^p Mw; for p > 2 it is
    int |f|^p (Mw)^{p/2} w^{-(p/2 - 1)} (which needs w > 0).
    """
    if not (p > 1):
        raise ParameterError(f"p must exceed 1, got {p}")
    ratios, skipped = _weighted_power_ratios(T, family, weights, p)
    witness = int(np.argmax(ratios)) if ratios else -1
    return RatioReport(f"lp_range_p{p:g}", tuple(ratios), witness,
                       config_hash, skipped)


def check_pointwise_domination(T, gstar, family: TestFamily,
                               config_hash: str = "adhoc") -> RatioReport:
    """max_x Tf(x) / g*f(x), excluding points where g* is at the noise floor."""
    ratios, skipped = [], 0
    excluded_total, points_total = 0, 0
    for f in family.members:
        gv = gstar(f).values.real
        tv = np.abs(T(f).values)
        top = float(np.max(gv))
        if top == 0.0:
            skipped += 1
            continue
        ok = gv > 1e-14 * top
        excluded_total += int(np.sum(~ok))
        points_total += gv.size
        ratios.append(float(np.max(tv[ok] / gv[ok])))
    witness = int(np.argmax(ratios)) if ratios else -1
    fraction = excluded_total / points_total if points_total else 0.0
    return RatioReport("pointwise_domination", tuple(ratios), witness,
                       config_hash, skipped, excluded_fraction=fraction)


def check_growth_in_p(T, family: TestFamily, p_list,
                      config_hash: str = "adhoc") -> GrowthFit:
    """Empirical ||T||_{p->p} lower bounds fitted against p^(1/2) growth."""
    p_list = list(p_list)
    if len(p_list) < 4 or min(p_list) < 2 or max(p_list) > 64:
        raise ParameterError("p_list must hold >= 4 values inside [2, 64]")
    if len(family.members) < 8:
        raise ParameterError("family too small for a growth fit (need >= 8)")
    norms = []
    cache = [(f, T(f)) for f in family.members]
    for p in p_list:
        best = 0.0
        for f, tf in cache:
            denom = lp_norm(f, p)
            if denom > 0:
                best = max(best, lp_norm(tf, p) / denom)
        norms.append(best)
    return GrowthFit("growth_in_p", tuple(p_list), tuple(norms), 0.5,
                     constants.P_GROWTH_SLACK, config_hash)


def check_growth_in_ap(T, family: TestFamily, weights: list, p: float,
                       config_hash: str = "adhoc") -> GrowthFit:
    """Empirical weighted norms fitted against the A_p-constant exponent.

    For p > 1 the y-values are L^p_w operator-norm lower bounds and the
    exponent bound is beta_p + 1/(p-1), beta_p = max{1/2, 1/(p-1)}.  The
    endpoint p = 1 certifies the A_1 statement: L^2_w norms against the
    A_1 constant with exponent bound 1/2.
    """
    from .weights import ap_constant

    if not (p >= 1):
        raise ParameterError(f"p must be >= 1, got {p}")
    norm_p = 2.0 if p == 1 else p
    xs, ys = [], []
    for w in weights:
        ap = ap_constant(w, p).constant
        best = 0.0
        for f in family.members:
            denom = weighted_lp_norm(f, w, norm_p)
            if denom > 0:
                best = max(best, weighted_lp_norm(T(f), w, norm_p) / denom)
        xs.append(ap)
        ys.append(best)
    xs, ys = np.array(xs), np.array(ys)
    if np.max(xs) / np.min(xs) < 10.0:
        raise ParameterError("weight family must span at least a decade of A_p constant")
    if p == 1:
        bound = 0.5
    else:
        beta = max(0.5, 1.0 / (p - 1.0))
        bound = beta + 1.0 / (p - 1.0)
    return GrowthFit(f"growth_in_ap_p{p:g}", tuple(xs), tuple(ys), bound,
                     constants.AP_GROWTH_SLACK, config_hash)


def check_sharp_maximal_domination(gstar, family: TestFamily, lam: float,
                                   config_hash: str = "adhoc") -> RatioReport:
    """max_x of M#_lam((g* f)^2) / (Mf)^2 over the family."""
    ratios, skipped = [], 0
    for f in family.members:
        g2 = gstar(f)
        sharp = local_sharp_maximal(
            GridFunction(f.grid, g2.values.real**2), lam).values.real
        mf = maximal(f).values.real
        if float(np.max(mf)) == 0.0:
            skipped += 1
            continue
        ok = mf > 1e-14 * float(np.max(mf))
        ratios.append(float(np.max(sharp[ok] / mf[ok] ** 2)))
    witness = int(np.argmax(ratios)) if ratios else -1
    return RatioReport("sharp_maximal_domination", tuple(ratios), witness,
                       config_hash, skipped)


def check_sharp_composite(family: TestFamily, weights: list, p: float,
                          lam: float = 0.25,
                          config_hash: str = "adhoc") -> RatioReport:
    """||Mf||_{L^p_w} against ||M# |f|^2||^{1/2}_{L^{p/2}_w} ||w||^gamma_{A_p},
    gamma = max{1/2, 1/(p-1)}."""
    from .weights import ap_constant

    if not (p > 2):
        raise ParameterError("the composite bound needs p > 2 (q = 2 scale)")
    gamma = max(0.5, 1.0 / (p - 1.0))
    ratios, skipped = [], 0
    for w in weights:
        apc = ap_constant(w, p).constant
        for f in family.members:
            sharp = local_sharp_maximal(
                GridFunction(f.grid, np.abs(f.values) ** 2), lam)
            denom = weighted_lp_norm(sharp, w, p / 2.0) ** 0.5 * apc**gamma
            if denom == 0.0:
                skipped += 1
                continue
            num = weighted_lp_norm(maximal(f), w, p)
            ratios.append(num / denom)
    witness = int(np.argmax(ratios)) if ratios else -1
    return RatioReport(f"sharp_composite_p{p:g}", tuple(ratios), witness,
                       config_hash, skipped)


def default_operator(name: str, grid: Grid, truncation: int = 128) -> SpectralOperator:
    if name == "laplacian":
        return LaplacianTorus(grid)
    if name == "hermite":
        return HermiteOscillator1D(grid, truncation)
    raise ParameterError(f"unknown operator {name!r}")
