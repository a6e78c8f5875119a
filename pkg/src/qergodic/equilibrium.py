"""Equilibrium potentials by a grid obstacle problem, and equilibrium measures.

The envelope ``phi_eq`` is the largest subharmonic function on the plane
that lies below ``phi`` on the support ``K`` and grows like ``2 log|z|``
at infinity (a bounded omega_0-psh function on the Riemann sphere, written
in the affine chart).  On a grid this is a linear complementarity problem:

    Lap_h u >= 0,   u <= phi on K,   (Lap_h u) (phi - u) = 0 on K,
    Lap_h u = 0 off K,

with Dirichlet data ``2 log|z| + c`` on the box boundary.  The constant
``c`` is an unknown fixed by requiring unit total mass of
``KAPPA * Lap_h u``, which is the discrete form of the growth condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import brentq

from ._validation import as_points
from .exceptions import ConfigurationError, SolverError
from .grid import KAPPA, GridDensity, GridSpec, PotentialGrid, discrete_laplacian
from .hilb import BergmanSpace

__all__ = [
    "Envelope",
    "EquilibriumMeasure",
    "ExtremalResult",
    "envelope_oracle",
    "equilibrium_measure",
    "phi_extremal_sup",
    "compare_routes",
    "calibrate_kappa",
    "decreasing_up_to_jitter",
    "density_of_states_defects",
]


@dataclass
class Envelope(PotentialGrid):
    """Grid equilibrium potential with solver diagnostics."""

    k_mask: np.ndarray = None
    contact_mask: np.ndarray = None
    boundary_constant: float = 0.0
    iterations: int = 0
    residual: float = 0.0
    method: str = "pdas"


@dataclass
class EquilibriumMeasure(GridDensity):
    coincidence_mask: np.ndarray = None
    positivity_mask: np.ndarray = None
    raw_mass: float = 1.0
    kappa: float = KAPPA


@dataclass
class ExtremalResult:
    """``Phi_N^K(z)`` bracketed by a feasible section and its dual bound."""

    value: np.ndarray
    upper: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray = field(default=None)


# -- sparse operators -------------------------------------------------------

def _interior_laplacian(grid):
    mx, my = grid.nx - 2, grid.ny - 2
    ex, ey = np.ones(mx), np.ones(my)
    Tx = sp.diags([ex[:-1], -2.0 * ex, ex[:-1]], [-1, 0, 1]) / grid.hx**2
    Ty = sp.diags([ey[:-1], -2.0 * ey, ey[:-1]], [-1, 0, 1]) / grid.hy**2
    return (sp.kron(sp.identity(my), Tx) + sp.kron(Ty, sp.identity(mx))).tocsr()


def _boundary_rhs(grid, full):
    r = np.zeros((grid.ny - 2, grid.nx - 2))
    r[0, :] += full[0, 1:-1] / grid.hy**2
    r[-1, :] += full[-1, 1:-1] / grid.hy**2
    r[:, 0] += full[1:-1, 0] / grid.hx**2
    r[:, -1] += full[1:-1, -1] / grid.hx**2
    return r.ravel()


def _growth(grid):
    Z = grid.points()
    with np.errstate(divide="ignore"):
        g = 2.0 * np.log(np.abs(Z))
    bmask = ~grid.interior_mask()
    if not np.all(np.isfinite(g[bmask])):
        raise ConfigurationError("the grid boundary must not pass through z = 0")
    return np.where(bmask, g, 0.0)


def _problem(weight, support, grid):
    Z = grid.points()
    Zi = Z[1:-1, 1:-1].ravel()
    K = support.grid_mask(Zi, grid.spacing)
    if not K.any():
        raise ConfigurationError(f"support {support.label} has no interior grid points")
    psi = np.full(Zi.shape, np.inf)
    psi[K] = weight.eval(Zi[K])
    if not np.all(np.isfinite(psi[K])):
        raise ConfigurationError("weight is not finite on the support grid points")
    return Zi, K, psi


# -- active-set (semismooth Newton) solver ----------------------------------

def _pdas(grid, psi, K, active, max_iter, tol):
    A = _interior_laplacian(grid)
    g = _growth(grid)
    b0 = _boundary_rhs(grid, g)
    b1 = _boundary_rhs(grid, np.where(~grid.interior_mask(), 1.0, 0.0))
    area = grid.cell_area
    rho = 1.0 / grid.spacing**2
    n = psi.shape[0]
    active = active & K
    for it in range(1, max_iter + 1):
        inactive = ~active
        AII = A[inactive][:, inactive].tocsc()
        AIA = A[inactive][:, active]
        u0 = np.empty(n)
        u1 = np.empty(n)
        u0[active] = psi[active]
        u1[active] = 0.0
        if inactive.any():
            lu = spla.splu(AII)
            u0[inactive] = lu.solve(-(AIA @ psi[active]) - b0[inactive])
            u1[inactive] = lu.solve(-b1[inactive])
        lam0 = A @ u0 + b0
        lam1 = A @ u1 + b1
        m1 = KAPPA * lam1.sum() * area
        if m1 <= 0:
            raise SolverError("boundary constant does not control the mass", iterations=it)
        c = (1.0 - KAPPA * lam0.sum() * area) / m1
        u = u0 + c * u1
        lam = lam0 + c * lam1
        new = K & ((lam + rho * (u - psi)) > 0)
        if np.array_equal(new, active):
            gap = np.where(K, u - psi, -np.inf)
            residual = max(float(np.max(gap)), float(np.max(-lam[active], initial=0.0)) * area, 0.0)
            if residual > tol:
                raise SolverError(f"active-set solution violates complementarity by {residual:.2e}",
                                  residual=residual, iterations=it)
            return u, c, active, it, residual
        active = new
    raise SolverError(f"active-set iteration did not settle in {max_iter} steps",
                      residual=float(np.sum(new != active)), iterations=max_iter)


def _prolong_mask(coarse, fine, mask):
    xc, yc = coarse.x[1:-1], coarse.y[1:-1]
    f = RegularGridInterpolator((yc, xc), mask.reshape(coarse.ny - 2, coarse.nx - 2).astype(float),
                                method="nearest", bounds_error=False, fill_value=0.0)
    Zf = fine.points()[1:-1, 1:-1].ravel()
    return f(np.column_stack([Zf.imag, Zf.real])) > 0.5


# -- projected Gauss-Seidel (red-black) for small grids ------------------------

def _projected_gs(grid, psi2d, K2d, boundary, tol, max_iter):
    hx2, hy2 = grid.hx**2, grid.hy**2
    wx = hy2 / (2.0 * (hx2 + hy2))
    wy = hx2 / (2.0 * (hx2 + hy2))
    u = np.full(grid.shape, max(np.max(psi2d[K2d]), np.max(boundary)) + 1.0)
    bmask = ~grid.interior_mask()
    u[bmask] = boundary[bmask]
    iy, ix = np.indices(grid.shape)
    colors = [((iy + ix) % 2 == k) & ~bmask for k in (0, 1)]
    for sweep in range(1, max_iter + 1):
        change = 0.0
        for col in colors:
            avg = np.zeros_like(u)
            avg[1:-1, 1:-1] = (wx * (u[1:-1, 2:] + u[1:-1, :-2])
                               + wy * (u[2:, 1:-1] + u[:-2, 1:-1]))
            new = np.where(K2d, np.minimum(avg, psi2d), avg)
            change = max(change, float(np.max(np.abs(new[col] - u[col]))))
            u[col] = new[col]
        if change < tol:
            return u, sweep
    raise SolverError(f"projected Gauss-Seidel did not converge in {max_iter} sweeps",
                      residual=change, iterations=max_iter)


def _gs_envelope(grid, Zi, K, psi, tol, max_iter):
    K2d = np.zeros(grid.shape, dtype=bool)
    K2d[1:-1, 1:-1] = K.reshape(grid.ny - 2, grid.nx - 2)
    psi2d = np.full(grid.shape, np.inf)
    psi2d[1:-1, 1:-1] = psi.reshape(grid.ny - 2, grid.nx - 2)
    g = _growth(grid)
    total = [0]

    def mass(c):
        u, sweeps = _projected_gs(grid, psi2d, K2d, g + c, tol, max_iter)
        total[0] += sweeps
        return KAPPA * discrete_laplacian(u, grid).sum() * grid.cell_area - 1.0

    lo, hi = -1.0, 1.0
    while mass(lo) > 0:
        lo *= 2.0
    while mass(hi) < 0:
        hi *= 2.0
    c = brentq(mass, lo, hi, xtol=tol)
    u, sweeps = _projected_gs(grid, psi2d, K2d, g + c, tol, max_iter)
    return u, c, total[0] + sweeps


def envelope_oracle(weight, support, grid=None, tol=1e-8, max_iter=200, method="pdas",
                    coarse_to_fine=True):
    """Grid equilibrium potential ``phi_eq`` of ``(weight, support)``.

    Parameters
    ----------
    weight : Weight
    support : SupportMeasure
        Only its geometric support ``K`` is used.
    grid : GridSpec, optional
        Defaults to 401 x 401 points on ``[-2.5, 2.5]^2``.
    tol : float
        Complementarity tolerance (``pdas``) or sweep-update tolerance
        (``gauss_seidel``).
    method : {"pdas", "gauss_seidel"}
        ``pdas`` is the primal-dual active-set method with the boundary
        constant solved jointly; ``gauss_seidel`` is projected red-black
        Gauss-Seidel with the boundary constant found by root bracketing,
        practical only on small grids.
    coarse_to_fine : bool
        Warm-start ``pdas`` from successively coarsened grids.
    """
    grid = GridSpec() if grid is None else grid
    Zi, K, psi = _problem(weight, support, grid)
    if method == "gauss_seidel":
        u2d, c, iters = _gs_envelope(grid, Zi, K, psi, tol, max_iter)
        u_int = u2d[1:-1, 1:-1].ravel()
        gap = np.where(K, np.abs(u_int - psi), np.inf)
        active = K & (gap <= 10 * tol)
        residual = float(np.max(np.where(K, u_int - psi, -np.inf)))
    elif method == "pdas":
        levels = [grid]
        if coarse_to_fine:
            while True:
                coarse = levels[-1].coarsened()
                if coarse is None or min(coarse.nx, coarse.ny) < 25:
                    break
                levels.append(coarse)
        active = None
        prev = None
        iters = 0
        for lvl in reversed(levels):
            Zl, Kl, psil = _problem(weight, support, lvl)
            start = Kl.copy() if active is None else _prolong_mask(prev, lvl, active)
            u_int, c, active, it, residual = _pdas(lvl, psil, Kl, start, max_iter, tol)
            iters += it
            prev = lvl
        u2d = _growth(grid) + c * (~grid.interior_mask())
        u2d[1:-1, 1:-1] = u_int.reshape(grid.ny - 2, grid.nx - 2)
    else:
        raise ConfigurationError(f"unknown envelope method {method!r}")
    k_mask = np.zeros(grid.shape, dtype=bool)
    k_mask[1:-1, 1:-1] = K.reshape(grid.ny - 2, grid.nx - 2)
    contact = np.zeros(grid.shape, dtype=bool)
    contact[1:-1, 1:-1] = active.reshape(grid.ny - 2, grid.nx - 2)
    return Envelope(grid=grid, values=u2d, kind="envelope", k_mask=k_mask,
                    contact_mask=contact, boundary_constant=float(c), iterations=int(iters),
                    residual=float(residual), method=method)


def equilibrium_measure(envelope, weight, coincidence_tol=None):
    """``KAPPA * Lap_h(phi_eq)`` restricted to the coincidence set, unit mass.

    The coincidence set is ``{z in K : |phi - phi_eq| < coincidence_tol}``;
    ``coincidence_tol`` defaults to ``1e-3 * osc(phi on K)`` (at least 1e-8).
    The positivity set ``{Lap phi > 0}`` is reported as ``positivity_mask``
    but not imposed: for supports with empty interior the measure lives where
    the weight has no curvature at all.
    """
    grid = envelope.grid
    Z = grid.points()
    phi = np.full(grid.shape, np.nan)
    km = envelope.k_mask
    phi[km] = weight.eval(Z[km])
    if coincidence_tol is None:
        osc = float(np.ptp(phi[km])) if km.any() else 0.0
        coincidence_tol = max(1e-3 * osc, 1e-8)
    coincidence = km & (np.abs(np.where(km, phi, 0.0) - envelope.values) < coincidence_tol)
    positivity = weight.laplacian(Z) > 0
    lap = discrete_laplacian(envelope.values, grid)
    dens = KAPPA * lap
    peak = float(np.max(dens))
    if float(np.min(dens)) < -1e-3 * peak:
        raise SolverError(f"equilibrium density has negative values down to {np.min(dens):.3e}",
                          residual=float(np.min(dens)))
    raw_mass = float(np.sum(dens) * grid.cell_area)
    dens = np.where(coincidence, np.maximum(dens, 0.0), 0.0)
    mass = float(np.sum(dens) * grid.cell_area)
    if mass <= 0:
        raise SolverError("equilibrium measure has no mass on the coincidence set")
    dens = dens / mass
    return EquilibriumMeasure(grid=grid, density=dens, total_mass=1.0, kind="equilibrium",
                              coincidence_mask=coincidence, positivity_mask=positivity,
                              raw_mass=raw_mass, kappa=KAPPA)


def calibrate_kappa(grid=None):
    """Normalization making the flat unit-circle envelope a unit-mass measure.

    Uses the closed-form envelope ``2 log+|z|`` sampled on ``grid``; the
    result converges to ``1/(4 pi)`` under refinement.
    """
    grid = GridSpec() if grid is None else grid
    u = 2.0 * np.log(np.maximum(np.abs(grid.points()), 1.0))
    return 1.0 / (np.sum(discrete_laplacian(u, grid)) * grid.cell_area)


# -- sup-norm extremal function ------------------------------------------------

def phi_extremal_sup(space, z, nodes=None, rtol=1e-6, max_iter=2000):
    """Extremal function ``Phi_N^K(z)`` with the sup norm taken over nodes.

    ``Phi(z) = exp(-N phi(z)) / m(z)`` where ``m(z)`` is the smallest
    possible node-wise sup of ``|s|^2_{h^N}`` over sections with
    ``s(z) = 1``.  This complex Chebyshev problem is solved by Lawson's
    iteratively reweighted least squares; each weighted least-squares step
    gives a feasible section (lower bound on ``Phi``) and, by duality, an
    upper bound.  Iteration stops when the two agree to ``rtol``; points
    that hit ``max_iter`` (Lawson's tail can be slow when the extremal
    section touches its bound at few nodes) still carry the certified
    bracket ``value <= Phi <= upper``.
    """
    z = as_points(z)
    F = space.node_basis_ if nodes is None else space.weighted_basis(nodes)
    n = F.shape[0]
    V = space.transform(z)
    phi_z = space.weight_.eval(z)
    N = space.degree
    value = np.empty(z.shape[0])
    upper = np.empty(z.shape[0])
    iters = np.zeros(z.shape[0], dtype=int)
    conv = np.zeros(z.shape[0], dtype=bool)
    for t in range(z.shape[0]):
        v = V[t]
        lam = np.full(n, 1.0 / n) if nodes is not None else space.node_weights_.copy()
        best_primal, best_dual = np.inf, 0.0
        for it in range(1, max_iter + 1):
            H = (F.conj().T * lam) @ F
            H += 1e-14 * np.trace(H).real / H.shape[0] * np.eye(H.shape[0])
            y = np.linalg.solve(H, v.conj())
            q = float(np.real(v @ y))
            a = y / q
            r = np.abs(F @ a)
            primal = float(np.max(r) ** 2)
            dual = 1.0 / q
            best_primal = min(best_primal, primal)
            best_dual = max(best_dual, dual)
            if best_primal - best_dual <= rtol * best_primal:
                conv[t] = True
                break
            lam = lam * r
            lam /= lam.sum()
        iters[t] = it
        value[t] = np.exp(-N * phi_z[t]) / best_primal
        upper[t] = np.exp(-N * phi_z[t]) / best_dual
    return ExtremalResult(value=value, upper=upper, iterations=iters, converged=conv)


# -- route comparison -------------------------------------------------------------

def decreasing_up_to_jitter(seq, jitter=0.1, floor=0.0):
    """True if each term is at most ``(1 + jitter)`` times its predecessor.

    Terms that are both below ``floor`` are considered equal.
    """
    seq = list(seq)
    return all(b <= (1.0 + jitter) * a or max(a, b) <= floor for a, b in zip(seq, seq[1:]))


def compare_routes(weight, measure, degrees, grid=None, region=None, envelope=None):
    """Sup distance between ``(1/N) log B_N`` and the grid envelope.

    ``region`` is a callable returning a boolean mask over complex points;
    by default the grid interior.  Returns one dict per degree.
    """
    if envelope is None:
        envelope = envelope_oracle(weight, measure, grid)
    grid = envelope.grid
    Z = grid.points()
    mask = grid.interior_mask() if region is None else (region(Z) & grid.interior_mask())
    rows = []
    for N in degrees:
        space = BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        u = space.log_kernel_diag(Z[mask]) / N
        err = np.abs(u - envelope.values[mask])
        rows.append({"N": int(N), "sup_error": float(np.max(err)),
                     "mean_error": float(np.mean(err)), "n_points": int(mask.sum())})
    return rows


def density_of_states_defects(weight, measure, degrees, eq_measure, dictionary=None, spaces=None):
    """Dictionary defects between ``Pi_N dnu / d_N`` and the equilibrium measure."""
    from .dictionary import default_dictionary

    dictionary = default_dictionary() if dictionary is None else dictionary
    target = dictionary.pair_density(eq_measure)
    rows = []
    for N in degrees:
        space = (spaces or {}).get(N) or BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        dos = np.sum(np.abs(space.node_basis_) ** 2, axis=1) / space.dim
        lhs = dictionary.evaluate(space.nodes_) @ (space.node_weights_ * dos)
        diff = np.abs(lhs - target)
        rows.append({"N": int(N), "max_defect": float(diff.max()), "mean_defect": float(diff.mean()),
                     "worst": dictionary.names[int(np.argmax(diff))]})
    return rows
