"""Rectangular grids over a truncation of the plane and fields sampled on them."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError

__all__ = ["GridSpec", "PotentialGrid", "GridDensity", "discrete_laplacian", "KAPPA"]

# dd^c normalization in the flat chart: density = KAPPA * Laplacian, chosen so
# that 2 log+|z| (the envelope of the unit circle) carries unit mass.
KAPPA = 1.0 / (4.0 * np.pi)


@dataclass(frozen=True)
class GridSpec:
    """Box ``[x_min, x_max] x [y_min, y_max]`` sampled with ``nx * ny`` points."""

    x_min: float = -2.5
    x_max: float = 2.5
    y_min: float = -2.5
    y_max: float = 2.5
    nx: int = 401
    ny: int = 401

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise ConfigurationError("grid needs at least 5 points per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ConfigurationError("grid box must have positive extent")

    @classmethod
    def square(cls, half_width=2.5, n=401):
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def y(self):
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def hx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def spacing(self):
        return max(self.hx, self.hy)

    @property
    def cell_area(self):
        return self.hx * self.hy

    @property
    def shape(self):
        return (self.ny, self.nx)

    def points(self):
        """Complex grid points, shape ``(ny, nx)``."""
        X, Y = np.meshgrid(self.x, self.y)
        return X + 1j * Y

    def interior_mask(self, band=1):
        m = np.zeros(self.shape, dtype=bool)
        m[band:-band, band:-band] = True
        return m

    def coarsened(self):
        """The grid with every other point, or None if that is not exact."""
        if (self.nx - 1) % 2 or (self.ny - 1) % 2:
            return None
        return GridSpec(self.x_min, self.x_max, self.y_min, self.y_max,
                        (self.nx - 1) // 2 + 1, (self.ny - 1) // 2 + 1)

    def as_dict(self):
        return {"box": [self.x_min, self.x_max, self.y_min, self.y_max],
                "nx": self.nx, "ny": self.ny}


def discrete_laplacian(values, grid):
    """Five-point Laplacian; boundary rows and columns are set to zero."""
    v = np.asarray(values, dtype=float)
    out = np.zeros_like(v)
    out[1:-1, 1:-1] = (
        (v[1:-1, 2:] - 2.0 * v[1:-1, 1:-1] + v[1:-1, :-2]) / grid.hx**2
        + (v[2:, 1:-1] - 2.0 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / grid.hy**2
    )
    return out


def _write_grid_csv(path, grid, values, kind, fmt=repr):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["# kind", kind])
        w.writerow(["# box", *[repr(float(b)) for b in
                              (grid.x_min, grid.x_max, grid.y_min, grid.y_max)]])
        w.writerow(["# resolution", grid.nx, grid.ny])
        for row in values:
            w.writerow([fmt(v) for v in row])


@dataclass
class PotentialGrid:
    """A scalar field sampled on a grid, ``values[iy, ix]``.

    ``kind`` is one of ``weight``, ``envelope``, ``log_bergman`` or ``u_N``.
    """

    grid: GridSpec
    values: np.ndarray
    kind: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ConfigurationError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    def points(self):
        return self.grid.points()

    def to_csv(self, path):
        _write_grid_csv(path, self.grid, self.values, self.kind,
                        fmt=lambda v: repr(float(v)))


@dataclass
class GridDensity:
    """A measure with a density against Lebesgue area on a grid."""

    grid: GridSpec
    density: np.ndarray
    total_mass: float
    kind: str = "density"

    def pair(self, f):
        """``int f dmu`` by the grid rule; ``f`` is a callable or grid array."""
        vals = f(self.grid.points()) if callable(f) else np.asarray(f)
        return float(np.sum(self.density * vals) * self.grid.cell_area)

    @property
    def mass(self):
        return float(np.sum(self.density) * self.grid.cell_area)

    def to_csv(self, path):
        _write_grid_csv(path, self.grid, self.density, self.kind,
                        fmt=lambda v: repr(float(v)))
