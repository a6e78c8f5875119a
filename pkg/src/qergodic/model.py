"""Weights, compactly supported measures and their quadrature rules.

A weight ``phi`` defines the Hermitian metric ``h = exp(-phi)`` on the
frame of O(1) over the affine chart of the Riemann sphere, so that a
degree-N polynomial ``f`` has pointwise norm ``|f(z)|^2 exp(-N phi(z))``.
Measures are finite quadrature rules normalized to probability measures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RectBivariateSpline

from ._validation import as_points, check_degree, check_positive
from .exceptions import ConfigurationError

__all__ = [
    "Weight",
    "SupportMeasure",
    "build_weight",
    "build_measure",
    "bernstein_markov_ratio",
    "bernstein_markov_sequence",
    "WEIGHT_KINDS",
    "MEASURE_KINDS",
]

WEIGHT_KINDS = ("zero", "abs_squared", "radial_power", "custom_table")
MEASURE_KINDS = ("circle", "disk", "annulus", "truncated_plane")


@dataclass(frozen=True)
class Weight:
    """A weight ``phi`` together with its flat Laplacian.

    ``laplacian`` is ``d^2/dx^2 + d^2/dy^2`` of ``phi``.  ``radial`` marks
    rotation-invariant weights, for which the monomials are orthogonal
    under any rotation-invariant measure.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]
    label: str
    smoothness_class: str = "smooth"
    radial: bool = False
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.eval(as_points(z))

    def finite_difference_laplacian(self, z, step=1e-4):
        """Five-point central difference of ``phi`` at ``z``."""
        z = as_points(z)
        f = self.eval
        return (
            f(z + step) + f(z - step) + f(z + 1j * step) + f(z - 1j * step) - 4.0 * f(z)
        ) / step**2


def _zero_weight():
    return Weight(
        eval=lambda z: np.zeros(np.shape(z)),
        laplacian=lambda z: np.zeros(np.shape(z)),
        label="zero",
        radial=True,
    )


def _abs_squared(c):
    c = check_positive(c, "abs_squared coefficient")
    return Weight(
        eval=lambda z: c * np.abs(z) ** 2,
        laplacian=lambda z: np.full(np.shape(z), 4.0 * c),
        label=f"abs_squared({c:g})",
        radial=True,
        params={"c": c},
    )


def _radial_power(p):
    p = check_positive(p, "radial_power exponent")
    if p < 2:
        raise ConfigurationError("radial_power needs p >= 2 for a C^2 weight")
    return Weight(
        eval=lambda z: np.abs(z) ** p,
        laplacian=lambda z: p * p * np.abs(z) ** (p - 2),
        label=f"radial_power({p:g})",
        smoothness_class="smooth" if float(p).is_integer() and p % 2 == 0 else "c2",
        radial=True,
        params={"p": p},
    )


def _custom_table(x, y, values, label="custom_table"):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (y.size, x.size):
        raise ConfigurationError(
            f"custom_table values must have shape (len(y), len(x)) = "
            f"({y.size}, {x.size}), got {values.shape}"
        )
    if x.size < 4 or y.size < 4:
        raise ConfigurationError("custom_table needs at least 4 samples per axis")
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("custom_table values must be finite")
    # bicubic spline: C^2 with an exact Laplacian of the interpolant
    spline = RectBivariateSpline(y, x, values, kx=3, ky=3, s=0)

    def ev(z):
        z = np.asarray(z)
        return spline.ev(z.imag, z.real)

    def lap(z):
        z = np.asarray(z)
        return spline.ev(z.imag, z.real, dx=2) + spline.ev(z.imag, z.real, dy=2)

    return Weight(eval=ev, laplacian=lap, label=label, smoothness_class="c2")


def build_weight(kind, **params):
    """Construct a built-in weight.

    Parameters
    ----------
    kind : {"zero", "abs_squared", "radial_power", "custom_table"}
    **params
        ``c`` for ``abs_squared`` (default 1), ``p`` for ``radial_power``,
        ``x``, ``y``, ``values`` for ``custom_table``.

    Examples
    --------
    >>> w = build_weight("abs_squared", c=1.0)
    >>> float(w(2.0)[0]), float(w.laplacian(np.array([0.3]))[0])
    (4.0, 4.0)
    """
    if kind == "zero":
        return _zero_weight()
    if kind == "abs_squared":
        return _abs_squared(params.get("c", 1.0))
    if kind == "radial_power":
        if "p" not in params:
            raise ConfigurationError("radial_power requires parameter p")
        return _radial_power(params["p"])
    if kind == "custom_table":
        try:
            return _custom_table(params["x"], params["y"], params["values"],
                                 params.get("label", "custom_table"))
        except KeyError as exc:
            raise ConfigurationError(f"custom_table missing parameter {exc}") from None
    raise ConfigurationError(f"unknown weight kind {kind!r}; expected one of {WEIGHT_KINDS}")


@dataclass(frozen=True)
class SupportMeasure:
    """A probability measure given by quadrature nodes and positive weights.

    ``support_kind`` is one of ``circle``, ``disk``, ``annulus`` or
    ``truncated_plane``; ``inner_radius`` is only meaningful for annuli.
    ``exactness_degree`` is the largest total degree ``j + k`` for which
    ``int z^j conj(z)^k`` is integrated exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray
    support_kind: str
    radius: float
    inner_radius: float = 0.0
    exactness_degree: int = 0
    resolution: int = 0

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    @property
    def total_mass(self):
        return float(self.weights.sum())

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def rotation_invariant(self):
        return True

    @property
    def label(self):
        if self.support_kind == "annulus":
            return f"annulus({self.inner_radius:g},{self.radius:g})"
        return f"{self.support_kind}({self.radius:g})"

    def contains(self, z, tol=1e-12):
        """Boolean mask of points of ``z`` lying in the support (within ``tol``)."""
        r = np.abs(as_points(z))
        if self.support_kind == "circle":
            return np.abs(r - self.radius) <= tol
        if self.support_kind == "annulus":
            return (r >= self.inner_radius - tol) & (r <= self.radius + tol)
        return r <= self.radius + tol

    def grid_mask(self, z, spacing):
        """Grid points that represent the support on a grid of given spacing.

        Curves are thickened to a band of half-width ``spacing / sqrt(2)`` so
        that the discrete set is connected; area supports use their closure.
        """
        if self.support_kind == "circle":
            return self.contains(z, tol=spacing / np.sqrt(2.0))
        return self.contains(z, tol=1e-12)

    def integrate(self, values):
        return np.sum(self.weights * values)

    def moment(self, j, k):
        """Quadrature value of ``int z^j conj(z)^k dnu``."""
        return np.sum(self.weights * self.nodes**j * np.conj(self.nodes) ** k)

    def exact_moment(self, j, k):
        """Closed-form moment of the continuous measure being discretized."""
        if j != k:
            return 0.0
        R, r = self.radius, self.inner_radius
        if self.support_kind == "circle":
            return R ** (2 * j)
        if self.support_kind == "annulus":
            return (R ** (2 * j + 2) - r ** (2 * j + 2)) / ((j + 1) * (R**2 - r**2))
        return R ** (2 * j) / (j + 1)

    def rotated(self, theta):
        """The same rule with every node rotated by ``exp(i theta)``."""
        return SupportMeasure(
            nodes=self.nodes * np.exp(1j * theta),
            weights=self.weights.copy(),
            support_kind=self.support_kind,
            radius=self.radius,
            inner_radius=self.inner_radius,
            exactness_degree=self.exactness_degree,
            resolution=self.resolution,
        )

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["re(z)", "im(z)", "weight"])
            for z, w in zip(self.nodes, self.weights):
                writer.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(w))])


def _radial_area_rule(r_in, r_out, n_radial, n_angular):
    x, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * (r_out - r_in) * x + 0.5 * (r_out + r_in)
    wr = 0.5 * (r_out - r_in) * w * r
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (wr[:, None] * np.full(n_angular, 1.0 / n_angular)[None, :]).ravel()
    return nodes, weights / weights.sum()


def build_measure(kind, resolution, *, radius=1.0, inner_radius=None, n_angular=None):
    """Quadrature discretization of a rotation-invariant probability measure.

    ``circle`` uses ``resolution`` equispaced nodes with equal weights.
    ``disk`` and ``annulus`` use a Gauss-Legendre rule in the radius (with the
    area factor ``r``) times ``n_angular`` equispaced angles, default
    ``2 * resolution``.  ``truncated_plane`` is a disk of radius ``radius``
    meant for weights that decay fast enough that the truncation is invisible.
    """
    if isinstance(resolution, bool) or not isinstance(resolution, (int, np.integer)):
        raise ConfigurationError("resolution must be an integer")
    if resolution < 4:
        raise ConfigurationError(f"resolution must be >= 4, got {resolution}")
    radius = check_positive(radius, "radius")
    if kind == "circle":
        theta = 2.0 * np.pi * np.arange(resolution) / resolution
        nodes = radius * np.exp(1j * theta)
        weights = np.full(resolution, 1.0 / resolution)
        return SupportMeasure(nodes, weights, "circle", radius,
                              exactness_degree=resolution - 1, resolution=resolution)
    if kind not in ("disk", "annulus", "truncated_plane"):
        raise ConfigurationError(
            f"unknown measure kind {kind!r}; expected one of {MEASURE_KINDS}")
    n_ang = 2 * resolution if n_angular is None else int(n_angular)
    if n_ang < 4:
        raise ConfigurationError("n_angular must be >= 4")
    if kind == "annulus":
        if inner_radius is None:
            raise ConfigurationError("annulus requires inner_radius")
        inner_radius = check_positive(inner_radius, "inner_radius")
        if inner_radius >= radius:
            raise ConfigurationError(
                f"annulus needs inner_radius < radius, got {inner_radius} >= {radius}")
        r_in = inner_radius
    else:
        r_in = 0.0
    nodes, weights = _radial_area_rule(r_in, radius, resolution, n_ang)
    # radial rule integrates r^(j+k+1) exactly for j + k <= 2n - 2
    exact = min(2 * resolution - 2, n_ang - 1)
    return SupportMeasure(nodes, weights, kind, radius, inner_radius=r_in,
                          exactness_degree=exact, resolution=resolution)


def bernstein_markov_ratio(space, measure=None, degree=None):
    """Largest ratio of the node-wise sup norm to the L2 norm over the space.

    By the extremal property of the density of states this is
    ``max_nodes sqrt(Pi_N)``.  ``space`` is a fitted
    :class:`qergodic.hilb.BergmanSpace`; ``measure`` defaults to the nodes it
    was fitted on.
    """
    if degree is not None and check_degree(degree) != space.degree:
        raise ConfigurationError(
            f"degree mismatch: space has N={space.degree}, requested N={degree}")
    nodes = space.nodes_ if measure is None else measure.nodes
    return float(np.sqrt(np.max(space.density(nodes))))


def bernstein_markov_sequence(weight, measure, degrees):
    """``bernstein_markov_ratio`` for each degree in ``degrees``."""
    from .hilb import BergmanSpace

    out = []
    for N in degrees:
        space = BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        out.append(bernstein_markov_ratio(space))
    return np.array(out)
