"""Zeros of random sections and their empirical measures."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvals, matrix_balance

from .dictionary import default_dictionary
from .ensembles import make_rng, sample_gaussian, sample_spherical
from .exceptions import RootFindingError
from .grid import KAPPA, GridDensity, discrete_laplacian
from .hilb import BergmanSpace

__all__ = [
    "RootSet",
    "EmpiricalMeasure",
    "polynomial_roots",
    "section_roots",
    "empirical_zero_measure",
    "expected_zero_current",
    "zero_convergence_experiment",
    "poincare_lelong_check",
    "radial_histogram_mode",
]

LEADING_TRIM = 1e-13
RESIDUAL_TOL = 1e-6


@dataclass
class RootSet:
    roots: np.ndarray
    degree: int
    degree_drop: int
    backward_errors: np.ndarray


@dataclass
class EmpiricalMeasure:
    """Atoms with masses; ``outside`` flags atoms beyond the working box."""

    points: np.ndarray
    masses: np.ndarray
    outside: np.ndarray
    degree_drop: int = 0

    @property
    def total_mass(self):
        return float(np.sum(self.masses))

    def pair(self, f):
        return float(np.sum(self.masses * f(self.points)))


def _horner(a, z):
    """Value of ``sum a_k z^k`` and of ``sum |a_k| |z|^k``."""
    p = np.zeros_like(z, dtype=np.complex128)
    s = np.zeros(z.shape)
    az = np.abs(z)
    for coef in a[::-1]:
        p = p * z + coef
        s = s * az + abs(coef)
    return p, s


def _newton(a, z, steps=3):
    da = a[1:] * np.arange(1, a.shape[0])
    for _ in range(steps):
        p, _ = _horner(a, z)
        dp, _ = _horner(da, z)
        ok = dp != 0
        z = np.where(ok, z - np.where(ok, p / np.where(ok, dp, 1), 0), z)
    return z


def polynomial_roots(coeffs, degree=None):
    """Roots of ``sum_k a_k z^k`` (coefficients from low to high degree).

    Leading coefficients below ``1e-13 * max|a|`` are dropped and reported
    as roots at infinity (``degree_drop``); exact low-order zeros give roots
    at the origin.  The remaining roots are the eigenvalues of the balanced
    companion matrix, each certified by its backward error
    ``|p(r)| / sum |a_k| |r|^k <= 1e-6`` (three Newton steps are tried on
    failures).
    """
    a = np.asarray(coeffs, dtype=np.complex128).ravel()
    degree = a.shape[0] - 1 if degree is None else int(degree)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0 or not np.isfinite(scale):
        raise RootFindingError("cannot find roots of the zero polynomial")
    top = a.shape[0] - 1
    while abs(a[top]) < LEADING_TRIM * scale:
        top -= 1
    drop = degree - top
    a = a[: top + 1]
    n_zero = int(np.argmax(a != 0))
    b = a[n_zero:]
    m = b.shape[0] - 1
    if m == 0:
        roots = np.zeros(n_zero, dtype=np.complex128)
        return RootSet(roots, degree, drop, np.zeros(n_zero))
    comp = np.zeros((m, m), dtype=np.complex128)
    comp[0, :] = -b[-2::-1] / b[-1]
    comp[1:, :-1] = np.eye(m - 1)
    balanced, _ = matrix_balance(comp)
    r = eigvals(balanced, overwrite_a=True, check_finite=False)
    p, s = _horner(b, r)
    err = np.abs(p) / s
    bad = ~(err <= RESIDUAL_TOL)
    if bad.any():
        r[bad] = _newton(b, r[bad])
        p, s = _horner(b, r)
        err = np.abs(p) / s
        if not np.all(err <= RESIDUAL_TOL):
            raise RootFindingError(
                f"root residuals up to {np.max(err):.2e} exceed {RESIDUAL_TOL:g}")
    roots = np.concatenate([np.zeros(n_zero, dtype=np.complex128), r])
    return RootSet(roots, degree, drop, np.concatenate([np.zeros(n_zero), err]))


def section_roots(space, coeffs):
    """Roots of the section with ONB coefficients ``coeffs``."""
    return polynomial_roots(space.monomial_coeffs(coeffs), degree=space.degree)


def empirical_zero_measure(space, coeffs, grid=None):
    """``(1/N) sum_roots delta`` for the section with ONB coefficients ``coeffs``."""
    rs = section_roots(space, coeffs)
    N = space.degree
    pts = rs.roots
    if grid is None:
        outside = np.zeros(pts.shape, dtype=bool)
    else:
        outside = ((pts.real < grid.x_min) | (pts.real > grid.x_max)
                   | (pts.imag < grid.y_min) | (pts.imag > grid.y_max))
    return EmpiricalMeasure(pts, np.full(pts.shape, 1.0 / N), outside, rs.degree_drop)


def expected_zero_current(space, grid, band=2):
    """Density ``KAPPA * Lap_h((1/N) log B_N)`` of the expected zero measure.

    A boundary band of ``band`` cells is excluded from the Laplacian.  The
    returned ``total_mass`` is not renormalized; it falls short of one by the
    expected fraction of zeros outside the box.
    """
    u = space.log_bergman_potential(grid).values
    dens = KAPPA * discrete_laplacian(u, grid)
    dens[~grid.interior_mask(band)] = 0.0
    mass = float(np.sum(dens) * grid.cell_area)
    return GridDensity(grid=grid, density=dens, total_mass=mass, kind="expected_zero_current")


def _sample_pairings(space, dictionary, master_seed, N, indices, ensemble, grid):
    draw = sample_gaussian if ensemble == "gaussian" else sample_spherical
    out = []
    for i in indices:
        rng = make_rng(master_seed, N, i)
        sec = draw(space, rng)
        em = empirical_zero_measure(space, sec.coeffs, grid)
        out.append((dictionary.pair_atoms(em.points, em.masses), em.degree_drop))
    return out


def zero_convergence_experiment(weight, measure, degrees, n_samples, master_seed,
                                eq_measure, dictionary=None, ensemble="gaussian",
                                workers=1, spaces=None):
    """Dictionary defects between averaged zero measures and ``eq_measure``.

    For each degree, ``n_samples`` sections are drawn (sample ``i`` at
    degree ``N`` uses the stream ``(master_seed, N, i)``), their empirical
    zero measures are paired with every dictionary element, and the pairings
    are averaged over samples.  Returns one record per degree.
    """
    dictionary = default_dictionary() if dictionary is None else dictionary
    target = dictionary.pair_density(eq_measure)
    rows = []
    for N in degrees:
        space = (spaces or {}).get(N) or BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        chunks = np.array_split(np.arange(n_samples), max(1, workers))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                parts = list(ex.map(lambda idx: _sample_pairings(
                    space, dictionary, master_seed, N, idx, ensemble, eq_measure.grid), chunks))
        else:
            parts = [_sample_pairings(space, dictionary, master_seed, N, idx, ensemble,
                                      eq_measure.grid) for idx in chunks]
        results = [r for part in parts for r in part]
        P = np.array([r[0] for r in results])
        mean = P.mean(axis=0)
        per_sample = np.abs(P - target[None, :]).max(axis=1)
        defects = np.abs(mean - target)
        rows.append({
            "N": int(N), "n_samples": int(n_samples), "ensemble": ensemble,
            "mean_defect": float(defects.mean()), "max_defect": float(defects.max()),
            "single_sample_max_defect": [float(x) for x in per_sample[:min(5, len(per_sample))]],
            "degree_drops": int(sum(r[1] for r in results)),
            "defects": dict(zip(dictionary.names, map(float, defects))),
        })
    return rows


def poincare_lelong_check(space, coeffs, grid, dictionary=None, band=2):
    """Compare the grid Laplacian of ``(1/N) log|f|^2`` with the zero atoms.

    For each dictionary element returns the grid pairing, the pairing with
    the empirical zero measure restricted to the inner box, and an error
    bound ``5 * h * Lip`` plus a boundary-leakage term.
    """
    dictionary = default_dictionary() if dictionary is None else dictionary
    N = space.degree
    Z = grid.points()
    u = space.section_log_abs2(coeffs, Z.ravel()).reshape(grid.shape) / N
    if not np.all(np.isfinite(u)):
        u = np.where(np.isfinite(u), u, np.nanmin(np.where(np.isfinite(u), u, np.nan)))
    dens = KAPPA * discrete_laplacian(u, grid)
    inner = grid.interior_mask(band)
    dens[~inner] = 0.0
    em = empirical_zero_measure(space, coeffs)
    x0, x1 = grid.x[band], grid.x[-band - 1]
    y0, y1 = grid.y[band], grid.y[-band - 1]
    inside = ((em.points.real > x0) & (em.points.real < x1)
              & (em.points.imag > y0) & (em.points.imag < y1))
    rows = []
    for f in dictionary:
        g = float(np.sum(dens * f(Z)) * grid.cell_area)
        a = float(np.sum(em.masses[inside] * f(em.points[inside])))
        rows.append({"name": f.name, "grid": g, "atoms": a, "diff": abs(g - a),
                     "bound": 5.0 * grid.spacing * f.lipschitz + 1e-6})
    return rows


def radial_histogram_mode(points, r_max=3.0, bins=60):
    """Center of the most populated radial bin of ``|points|``."""
    counts, edges = np.histogram(np.abs(points), bins=bins, range=(0.0, r_max))
    k = int(np.argmax(counts))
    return 0.5 * (edges[k] + edges[k + 1])
