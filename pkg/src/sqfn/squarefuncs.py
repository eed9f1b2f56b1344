"""Square functions: cone area integrals, g-functions and g*.

All time integrals dt/t are geometric Riemann sums on a TimeGrid; all
space integrals over cones/weights are circular convolutions evaluated
with the FFT, slice by slice in t.  Four area integrals are provided
(heat/Poisson, horizontal/vertical), their pointwise g-function
analogues, and the dominating g*-function with weight
(t/(t+|x-y|))^(n*mu).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ParameterError, ResolutionError
from .grid import Grid, GridFunction, require_same_grid
from .multipliers import MultiplierProfile
from .spectral import SpectralOperator

AREA_KINDS = ("s_h", "s_p", "S_H", "S_P")
G_KINDS = ("g_h", "g_p", "G_H", "G_P")

_ALIASES = {"sh": "s_h", "sp": "s_p", "SH": "S_H", "SP": "S_P",
            "gh": "g_h", "gp": "g_p", "GH": "G_H", "GP": "G_P"}


def _canon(kind: str, allowed) -> str:
    kind = _ALIASES.get(kind, kind)
    if kind not in allowed:
        raise ParameterError(f"unknown square-function kind {kind!r}; choose from {allowed}")
    return kind


@dataclass(frozen=True)
class TimeGrid:
    """Geometric time grid t_j = t_min * ratio^j, j = 0..count-1."""

    t_min: float
    ratio: float
    count: int

    def __post_init__(self):
        if not (self.t_min > 0):
            raise ParameterError(f"t_min must be positive, got {self.t_min}")
        if not (self.ratio > 1):
            raise ParameterError(f"ratio must exceed 1, got {self.ratio}")
        if self.count < 1:
            raise ParameterError(f"count must be >= 1, got {self.count}")

    @classmethod
    def geometric(cls, t_min: float, t_max: float, per_octave: int = 8) -> "TimeGrid":
        if not (0 < t_min < t_max):
            raise ParameterError("need 0 < t_min < t_max")
        ratio = 2.0 ** (1.0 / per_octave)
        count = int(np.ceil(np.log2(t_max / t_min) * per_octave)) + 1
        return cls(t_min, ratio, count)

    @classmethod
    def default_for(cls, grid: Grid, per_octave: int = 8) -> "TimeGrid":
        """The standard grid from 2h up to the operator budget R^2/4."""
        return cls.geometric(2.0 * grid.spacing, grid.half_width**2 / 4.0, per_octave)

    @property
    def nodes(self) -> np.ndarray:
        return self.t_min * self.ratio ** np.arange(self.count)

    @property
    def log_weight(self) -> float:
        """The dt/t weight of each node, log(ratio)."""
        return float(np.log(self.ratio))

    def check_budget(self, grid: Grid):
        budget = grid.half_width**2 / 4.0
        top = float(self.nodes[-1])
        if top > budget * (1.0 + 1e-9):
            raise ParameterError(
                f"largest time {top:g} exceeds the trust budget R^2/4 = {budget:g}"
            )


class ConeQuadrature:
    """Cached FFT masks of the balls {|y| < t} for cone integrals."""

    def __init__(self, grid: Grid, times: TimeGrid, aperture: float = 1.0):
        if aperture != 1.0:
            raise ParameterError("only unit aperture is supported")
        times.check_budget(grid)
        if times.t_min < grid.spacing:
            raise ResolutionError(
                f"smallest time {times.t_min:g} is below the grid spacing "
                f"{grid.spacing:g}; the cone cross-section would be empty"
            )
        self.grid = grid
        self.times = times
        self.aperture = aperture
        self._mask_ffts = {}

    def mask_fft(self, j: int) -> np.ndarray:
        if j not in self._mask_ffts:
            t = float(self.times.nodes[j])
            mask = (self.grid.distance_from_origin() < t).astype(float)
            self._mask_ffts[j] = np.fft.fftn(mask)
        return self._mask_ffts[j]


def _ball_average_field(op: SpectralOperator, f: GridFunction, kind: str,
                        cone: ConeQuadrature):
    """Accumulate the cone integral for one of the four area kinds."""
    g = op.grid
    n = g.dim
    dt = cone.times.log_weight
    acc = np.zeros(g.shape)
    for j, t in enumerate(cone.times.nodes):
        t = float(t)
        if kind == "s_h":
            u = op.apply_function(lambda s: (t * s) ** 2 * np.exp(-((t * s) ** 2)), f)
            dens = np.abs(u.values) ** 2
        elif kind == "s_p":
            u = op.apply_function(lambda s: (t * s) * np.exp(-(t * s)), f)
            dens = np.abs(u.values) ** 2
        elif kind == "S_H":
            comps = op.grad_semigroup(t, f, "heat")
            dens = t**2 * sum(np.abs(c.values) ** 2 for c in comps)
        else:  # S_P
            comps = op.grad_semigroup(t, f, "poisson")
            dens = t**2 * sum(np.abs(c.values) ** 2 for c in comps)
        conv = np.fft.ifftn(np.fft.fftn(dens) * cone.mask_fft(j)).real
        acc += conv * (g.cell_volume * dt / t**n)
    return np.sqrt(np.maximum(acc, 0.0))


def area_integral(kind: str, f: GridFunction, op: SpectralOperator,
                  cone: ConeQuadrature) -> GridFunction:
    """Lusin area integral over the unit-aperture cone.

    Kinds: s_h (horizontal heat, symbol z^2 e^{-z^2}), s_p (horizontal
    Poisson, z e^{-z}), S_H / S_P (vertical: t * gradient of the heat or
    Poisson flow).
    """
    kind = _canon(kind, AREA_KINDS)
    require_same_grid(op, f)
    require_same_grid(op, cone)
    if kind in ("S_H", "S_P") and not op.gradient_bound_available:
        raise CapabilityError(f"{kind} needs spatial gradients, which this operator lacks")
    return GridFunction(op.grid, _ball_average_field(op, f, kind, cone))


@dataclass(frozen=True)
class GStarParams:
    """Parameters of the dominating square function g*_{mu, psi}."""

    mu: float
    psi: MultiplierProfile

    def __post_init__(self):
        if not (self.mu > 1):
            raise ParameterError(f"mu must exceed 1, got {self.mu}")


def g_star(f: GridFunction, op: SpectralOperator, params: GStarParams,
           times: TimeGrid) -> GridFunction:
    """g*_{mu,psi}: the cone replaced by the weight (t/(t+|x-y|))^(n*mu)."""
    require_same_grid(op, f)
    times.check_budget(op.grid)
    g = op.grid
    n = g.dim
    dist = g.distance_from_origin()
    dt = times.log_weight
    acc = np.zeros(g.shape)
    for t in times.nodes:
        t = float(t)
        u = op.apply_function(params.psi.scaled(t), f)
        dens = np.abs(u.values) ** 2
        w_kernel = (t / (t + dist)) ** (n * params.mu)
        conv = np.fft.ifftn(np.fft.fftn(dens) * np.fft.fftn(w_kernel)).real
        acc += conv * (g.cell_volume * dt / t**n)
    return GridFunction(g, np.sqrt(np.maximum(acc, 0.0)))


def g_function(kind: str, f: GridFunction, op: SpectralOperator,
               times: TimeGrid) -> GridFunction:
    """Pointwise (no space average) g-function of the given kind.

    g_h, g_p are the horizontal heat/Poisson versions; G_H, G_P the
    vertical ones with the factor t|grad|.
    """
    kind = _canon(kind, G_KINDS)
    require_same_grid(op, f)
    times.check_budget(op.grid)
    if kind in ("G_H", "G_P") and not op.gradient_bound_available:
        raise CapabilityError(f"{kind} needs spatial gradients, which this operator lacks")
    dt = times.log_weight
    acc = np.zeros(op.grid.shape)
    for t in times.nodes:
        t = float(t)
        if kind == "g_h":
            u = op.apply_function(lambda s: (t * s) ** 2 * np.exp(-((t * s) ** 2)), f)
            acc += np.abs(u.values) ** 2 * dt
        elif kind == "g_p":
            u = op.apply_function(lambda s: (t * s) * np.exp(-(t * s)), f)
            acc += np.abs(u.values) ** 2 * dt
        elif kind == "G_H":
            comps = op.grad_semigroup(t, f, "heat")
            acc += t**2 * sum(np.abs(c.values) ** 2 for c in comps) * dt
        else:  # G_P
            comps = op.grad_semigroup(t, f, "poisson")
            acc += t**2 * sum(np.abs(c.values) ** 2 for c in comps) * dt
    return GridFunction(op.grid, np.sqrt(acc))


def generic_square_function(psi: MultiplierProfile, f: GridFunction,
                            op: SpectralOperator, times: TimeGrid) -> GridFunction:
    """g-function with an arbitrary profile: (sum_j |psi(t_j sqrt(L))f|^2 dt)^(1/2)."""
    require_same_grid(op, f)
    times.check_budget(op.grid)
    dt = times.log_weight
    acc = np.zeros(op.grid.shape)
    for t in times.nodes:
        u = op.apply_function(psi.scaled(float(t)), f)
        acc += np.abs(u.values) ** 2 * dt
    return GridFunction(op.grid, np.sqrt(acc))
