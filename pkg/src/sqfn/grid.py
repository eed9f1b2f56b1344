"""Periodic computational domain, sampled functions and Lebesgue norms.

The domain is the torus [-R, R)^dim sampled on a uniform grid of N
points per axis (N a power of two).  All spatial integrals are midpoint
Riemann sums with cell volume h^dim, h = 2R/N, so weighted sums and
superlevel counts are mutually consistent by construction.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, NonFiniteError, ParameterError

_MAGIC = b"SQFN"
_VERSION = 1


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus [-R, R)^dim.

    Attributes:
        dim: spatial dimension, 1 or 2.
        points_per_axis: N, a power of two, at least 8.
        half_width: R > 0; the fundamental domain is [-R, R)^dim.
    """

    dim: int
    points_per_axis: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ParameterError(f"dim must be 1 or 2, got {self.dim}")
        if self.points_per_axis < 8 or not _is_power_of_two(self.points_per_axis):
            raise ParameterError(
                f"points_per_axis must be a power of two >= 8, got {self.points_per_axis}"
            )
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise ParameterError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        """Grid spacing h = 2R/N (exact in binary arithmetic for power-of-two N)."""
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis_coords(self) -> np.ndarray:
        """Coordinates of one axis: -R, -R + h, ..., R - h."""
        n = self.points_per_axis
        return -self.half_width + self.spacing * np.arange(n)

    def coords(self):
        """Coordinate arrays, one per axis, broadcast to the grid shape."""
        x = self.axis_coords()
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))

    def periodic_delta(self, offsets: np.ndarray) -> np.ndarray:
        """Reduce coordinate differences to the torus metric per axis."""
        two_r = 2.0 * self.half_width
        d = np.abs(offsets)
        return np.minimum(d, two_r - d)

    def distance_from_origin(self) -> np.ndarray:
        """Torus distance of every grid point from the point 0 (grid-shaped)."""
        d = self.periodic_delta(self.axis_coords())
        if self.dim == 1:
            return d
        dx, dy = np.meshgrid(d, d, indexing="ij")
        return np.hypot(dx, dy)


@dataclass(frozen=True)
class GridFunction:
    """A sampled complex function on a Grid, stored lexicographically."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128).reshape(self.grid.shape)
        if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
            raise NonFiniteError("GridFunction samples must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, fn(*grid.coords()))

    def real_values(self) -> np.ndarray:
        return self.values.real

    def __add__(self, other: "GridFunction") -> "GridFunction":
        require_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        require_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Weight:
    """A non-negative, not identically zero weight function."""

    base: GridFunction

    def __post_init__(self):
        v = self.base.values
        if np.max(np.abs(v.imag)) != 0.0:
            raise ParameterError("weights must be real-valued")
        if np.min(v.real) < 0.0:
            raise ParameterError("weights must be non-negative")
        if np.max(v.real) <= 0.0:
            raise ParameterError("weights must be positive somewhere")

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values.real

    @classmethod
    def ones(cls, grid: Grid) -> "Weight":
        return cls(GridFunction(grid, np.ones(grid.shape)))


def require_same_grid(a, b):
    ga = a.grid if hasattr(a, "grid") else a
    gb = b.grid if hasattr(b, "grid") else b
    if ga != gb:
        raise GridMismatchError(f"grids differ: {ga} vs {gb}")


def lp_norm(f: GridFunction, p: float) -> float:
    """Riemann-sum L^p norm (sum |f|^p h^dim)^(1/p)."""
    if not (np.isfinite(p) and p >= 1):
        raise ParameterError(f"p must be a finite real >= 1, got {p}")
    mags = np.abs(f.values)
    return float((np.sum(mags**p) * f.grid.cell_volume) ** (1.0 / p))


def weighted_lp_norm(f: GridFunction, w: Weight, p: float) -> float:
    """(sum |f|^p w h^dim)^(1/p) on a shared grid."""
    require_same_grid(f, w.base)
    if not (np.isfinite(p) and p >= 1):
        raise ParameterError(f"p must be a finite real >= 1, got {p}")
    mags = np.abs(f.values)
    return float((np.sum(mags**p * w.values) * f.grid.cell_volume) ** (1.0 / p))


def weighted_superlevel_measure(f: GridFunction, w: Weight, level: float) -> float:
    """w-measure of the superlevel set {|f| > level}."""
    require_same_grid(f, w.base)
    if not (level > 0):
        raise ParameterError(f"level must be positive, got {level}")
    mask = np.abs(f.values) > level
    return float(np.sum(w.values[mask]) * f.grid.cell_volume)


# ---------------------------------------------------------------------------
# Serialization: column-oriented CSV and a compact binary dump.
#
# CSV layout: one comment line "# dim=<d> N=<n> R=<r>", then a header row
# with the index coordinate columns followed by re, im.
#
# Binary layout (all little-endian): magic b"SQFN", version byte,
# dim byte, uint32 N, float64 R, then the N^dim samples as interleaved
# (re, im) float64 pairs in lexicographic order.
# ---------------------------------------------------------------------------


def to_csv(f: GridFunction) -> str:
    g = f.grid
    buf = io.StringIO()
    buf.write(f"# dim={g.dim} N={g.points_per_axis} R={g.half_width!r}\n")
    writer = csv.writer(buf)
    idx_cols = ["i"] if g.dim == 1 else ["i", "j"]
    writer.writerow(idx_cols + ["re", "im"])
    flat = f.values.reshape(-1)
    for k, v in enumerate(flat):
        if g.dim == 1:
            idx = [k]
        else:
            idx = [k // g.points_per_axis, k % g.points_per_axis]
        writer.writerow(idx + [repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def from_csv(text: str) -> GridFunction:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParameterError("missing CSV metadata line")
    meta = dict(item.split("=") for item in lines[0][1:].split())
    grid = Grid(int(meta["dim"]), int(meta["N"]), float(meta["R"]))
    rows = list(csv.reader(lines[1:]))
    header, rows = rows[0], rows[1:]
    if header[-2:] != ["re", "im"]:
        raise ParameterError("CSV header must end with re, im columns")
    values = np.zeros(grid.size, dtype=np.complex128)
    n = grid.points_per_axis
    for row in rows:
        if grid.dim == 1:
            k = int(row[0])
        else:
            k = int(row[0]) * n + int(row[1])
        values[k] = float(row[-2]) + 1j * float(row[-1])
    return GridFunction(grid, values.reshape(grid.shape))


def to_binary(f: GridFunction) -> bytes:
    g = f.grid
    head = _MAGIC + struct.pack("<BBId", _VERSION, g.dim, g.points_per_axis, g.half_width)
    flat = np.empty(2 * g.size, dtype="<f8")
    flat[0::2] = f.values.reshape(-1).real
    flat[1::2] = f.values.reshape(-1).imag
    return head + flat.tobytes()


def from_binary(data: bytes) -> GridFunction:
    if data[:4] != _MAGIC:
        raise ParameterError("bad magic bytes in binary dump")
    version, dim, n, r = struct.unpack("<BBId", data[4 : 4 + 14])
    if version != _VERSION:
        raise ParameterError(f"unsupported dump version {version}")
    grid = Grid(dim, n, r)
    flat = np.frombuffer(data[4 + 14 :], dtype="<f8")
    if flat.size != 2 * grid.size:
        raise ParameterError("binary dump size does not match grid")
    values = flat[0::2] + 1j * flat[1::2]
    return GridFunction(grid, values.reshape(grid.shape))
