"""Toeplitz operators, Szegő trace limits and random orthonormal bases.

For a bounded symbol ``g`` the Toeplitz matrix in the orthonormal basis
``S_j`` of a fitted :class:`~qergodic.hilb.BergmanSpace` is

    T_jk = sum_i w_i g(z_i) conj(S_j(z_i)) S_k(z_i) exp(-N phi(z_i)),

i.e. ``<g S_k, S_j>`` in ``L^2(nu)``.  Its normalized traces approach the
equilibrium-measure moments ``tau(g)`` and ``tau(g^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import haar_unitaries

__all__ = [
    "ToeplitzMatrix",
    "toeplitz",
    "szego_traces",
    "szego_experiment",
    "y_statistic",
    "diagonal_variance",
    "orbit_integral_closed_form",
    "orbit_integral_check",
    "ergodic_property_experiment",
]


@dataclass
class ToeplitzMatrix:
    degree: int
    label: str
    matrix: np.ndarray

    @property
    def d(self):
        return self.matrix.shape[0]

    def normalized_traces(self):
        T = self.matrix
        d = self.d
        return float(np.real(np.trace(T))) / d, float(np.sum(np.abs(T) ** 2)) / d

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def _label(g):
    return getattr(g, "name", getattr(g, "__name__", "g"))


def toeplitz(space, g, label=None):
    """Toeplitz matrix of the symbol ``g`` (callable or node values)."""
    values = g(space.nodes_) if callable(g) else np.asarray(g, dtype=float)
    F = space.node_basis_
    T = (F.conj().T * (space.node_weights_ * values)) @ F
    T = 0.5 * (T + T.conj().T)
    return ToeplitzMatrix(int(space.degree), label or _label(g), T)


def _tau(eq_measure, g):
    Z = eq_measure.grid.points()
    v = g(Z)
    return eq_measure.pair(v), eq_measure.pair(v * v)


def szego_traces(space, g, eq_measure):
    """Normalized traces of ``T`` and ``T^2`` against ``tau(g)`` and ``tau(g^2)``."""
    T = toeplitz(space, g)
    t1, t2 = T.normalized_traces()
    tau1, tau2 = _tau(eq_measure, g)
    return {
        "N": T.degree, "g": T.label,
        "trace": t1, "trace_sq": t2, "tau": tau1, "tau_sq": tau2,
        "error": abs(t1 - tau1), "error_sq": abs(t2 - tau2),
        "rel_error": abs(t1 - tau1) / abs(tau1) if tau1 else np.inf,
        "rel_error_sq": abs(t2 - tau2) / abs(tau2) if tau2 else np.inf,
    }


def szego_experiment(weight, measure, degrees, g, eq_measure, spaces=None):
    from .hilb import BergmanSpace

    rows = []
    for N in degrees:
        space = (spaces or {}).get(N) or BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        rows.append(szego_traces(space, g, eq_measure))
    return rows


def diagonal_variance(D):
    """``sum_j |D_j - mean(D)|^2`` along the last axis."""
    D = np.asarray(D)
    return np.sum(np.abs(D - D.mean(axis=-1, keepdims=True)) ** 2, axis=-1)


def y_statistic(U, T):
    """``sum_j |(U^* T U)_jj - Tr(T)/d|^2``.

    ``U`` is a unitary (or a :class:`~qergodic.ensembles.HaarFrame`, or a
    stack of unitaries) and ``T`` a matrix or :class:`ToeplitzMatrix`.
    """
    U = getattr(U, "U", U)
    T = getattr(T, "matrix", T)
    if U.shape[-1] != T.shape[0] or U.shape[-2] != T.shape[0]:
        raise ValueError(f"dimension mismatch: U is {U.shape[-2:]}, T is {T.shape}")
    diag = np.real(np.einsum("...ij,ik,...kj->...j", U.conj(), T, U))
    centre = float(np.real(np.trace(T))) / T.shape[0]
    return np.sum((diag - centre) ** 2, axis=-1)


def orbit_integral_closed_form(lam):
    lam = np.asarray(lam, dtype=float)
    d = lam.size
    s1, s2 = lam.sum(), np.sum(lam**2)
    return float(s2 / (d + 1) - s1**2 / (d * (d + 1)))


def orbit_integral_check(lambda_vec, n_samples, rng, batch=20000):
    """Haar average of the diagonal variance of ``U^* diag(lambda) U``."""
    lam = np.asarray(lambda_vec, dtype=float)
    d = lam.size
    if d < 1:
        raise ValueError("lambda_vec must be non-empty")
    vals = []
    left = n_samples
    while left > 0:
        m = min(batch, left)
        U = haar_unitaries(d, m, rng)
        diag = np.einsum("i,sij->sj", lam, np.abs(U) ** 2)
        vals.append(diagonal_variance(diag))
        left -= m
    v = np.concatenate(vals)
    exact = orbit_integral_closed_form(lam)
    mean = float(v.mean())
    stderr = float(v.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return {"d": d, "lambda": lam.tolist(), "n_samples": int(n_samples), "mc_mean": mean,
            "stderr": stderr, "closed_form": exact,
            "rel_error": abs(mean - exact) / abs(exact) if exact else abs(mean)}


def ergodic_property_experiment(weight, measure, degrees, g, eq_measure, n_draws, master_seed,
                                eps=0.01, spaces=None):
    """Y statistic of Haar-random orthonormal bases across degrees.

    For each ``N`` the draws use the stream ``(master_seed, N)``.  Rows
    report the Monte Carlo mean of ``Y`` against ``tau(g^2) - tau(g)^2``,
    the finite-``N`` expectation ``d/(d+1) [Tr T^2/d - (Tr T/d)^2]``, the
    mean of ``Y/d_N`` with its running Cesàro average, and the fraction of
    basis elements with ``A_Nj = |(U^* T U)_jj - tau(g)|^2 < eps``.
    """
    from .ensembles import make_rng
    from .hilb import BergmanSpace

    tau1, tau2 = _tau(eq_measure, g)
    limit = tau2 - tau1**2
    rows, ratios, a_means = [], [], []
    for N in degrees:
        space = (spaces or {}).get(N) or BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        T = toeplitz(space, g)
        d = T.d
        rng = make_rng(master_seed, N)
        U = haar_unitaries(d, n_draws, rng)
        diag = np.real(np.einsum("sij,ik,skj->sj", U.conj(), T.matrix, U))
        t1, t2 = T.normalized_traces()
        Y = np.sum((diag - t1) ** 2, axis=1)
        A = (diag - tau1) ** 2
        ratios.append(float(np.mean(Y)) / d)
        a_means.append(float(A.mean()))
        rows.append({
            "N": int(N), "g": T.label, "n_draws": int(n_draws),
            "y_mean": float(Y.mean()), "y_stderr": float(Y.std(ddof=1) / np.sqrt(n_draws)),
            "y_expected": d / (d + 1.0) * (t2 - t1**2),
            "y_limit": float(limit),
            "y_over_d": ratios[-1],
            "cesaro": float(np.mean(ratios)),
            "a_mean": a_means[-1],
            "a_double_average": float(np.mean(a_means)),
            "fraction_A_below_eps": float(np.mean(A < eps)),
            "eps": eps,
        })
    return rows
