"""Quantum-ergodicity diagnostics for sequences of sections.

A sequence of sections is quantum ergodic for ``(phi, nu)`` when the
normalized mass measures ``|s_N|^2_{h^N} dnu / ||s_N||^2`` converge weakly
to the equilibrium measure.  This module measures that convergence on a
test dictionary, the L1 convergence of the normalized logarithms
``u_N = (1/N) log |f_N|^2`` to ``phi_eq``, and the first two moments of
the mass statistic ``X_N^a = int a |s|^2_{h^N} dnu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dictionary import default_dictionary
from .ensembles import complex_gaussian, make_rng, sample_gaussian, sample_spherical

__all__ = [
    "QEReport",
    "ALPHA",
    "BETA",
    "g_moment",
    "g_moment_mc",
    "mass_pairings",
    "qe_defect",
    "section_potential",
    "l1_potential_error",
    "toeplitz_of",
    "variance_xn_experiment",
    "second_moment_double_sum",
    "offdiag_second_moment",
    "qe_experiment",
    "cesaro_means",
]

# E|Y1|^2|Y2|^2 = BETA + (ALPHA - BETA) cos^2(theta) for unit complex Gaussians;
# ALPHA = A/6 and BETA = A (1/4 - 1/6) with A = 2 * 3!.
_A = 2.0 * 6.0
ALPHA = _A / 6.0
BETA = _A * (1.0 / 4.0 - 1.0 / 6.0)

DOUBLE_SUM_BUDGET = 4e8


@dataclass
class QEReport:
    N: int
    section_id: str
    qe_defect: float
    l1_error: float
    excluded_points: int = 0
    mass_stats: dict = field(default_factory=dict)
    convention: str = "dV = normalized flat area on the box"

    def as_dict(self):
        return {"N": self.N, "section_id": self.section_id, "qe_defect": self.qe_defect,
                "l1_error": self.l1_error, "excluded_points": self.excluded_points,
                "mass_stats": self.mass_stats, "convention": self.convention}


def g_moment(cos_theta):
    """``E |Y1|^2 |Y2|^2`` for unit complex Gaussians with correlation ``cos_theta``."""
    return BETA + (ALPHA - BETA) * np.asarray(cos_theta) ** 2


def g_moment_mc(cos_theta, n_samples, rng):
    """Monte Carlo estimate of ``E |Y1|^2 |Y2|^2`` with its standard error.

    ``Y1 = X1``, ``Y2 = cos(theta) X1 + sin(theta) X2`` for independent
    standard complex Gaussians ``X1, X2``.
    """
    if not 0.0 <= cos_theta <= 1.0:
        raise ValueError("cos_theta must lie in [0, 1]")
    sin_theta = np.sqrt(1.0 - cos_theta**2)
    x1 = complex_gaussian(rng, n_samples)
    x2 = complex_gaussian(rng, n_samples)
    y2 = cos_theta * x1 + sin_theta * x2
    v = np.abs(x1) ** 2 * np.abs(y2) ** 2
    mean = float(v.mean())
    stderr = float(v.std(ddof=1) / np.sqrt(n_samples))
    target = float(g_moment(cos_theta))
    return {"cos_theta": float(cos_theta), "mean": mean, "stderr": stderr,
            "target": target, "zscore": (mean - target) / stderr}


def mass_pairings(space, C, values):
    """``int a |s|^2_{h^N} dnu / ||s||^2`` for rows of ``C`` and columns of ``values``.

    ``C`` has shape ``(S, d_N)`` (ONB coefficients), ``values`` has shape
    ``(n_nodes, K)`` (test functions at the nodes).  Returns ``(S, K)``.
    """
    C = np.atleast_2d(C)
    M = np.abs(C @ space.node_basis_.T) ** 2
    M /= np.sum(np.abs(C) ** 2, axis=1, keepdims=True)
    return (M * space.node_weights_) @ values


def qe_defect(space, coeffs, eq_measure, dictionary=None, details=False):
    """Largest dictionary discrepancy between the section's mass measure and mu_eq."""
    dictionary = default_dictionary() if dictionary is None else dictionary
    vals = dictionary.evaluate(space.nodes_).T
    lhs = mass_pairings(space, coeffs, vals)[0]
    rhs = dictionary.pair_density(eq_measure)
    diff = np.abs(lhs - rhs)
    if details:
        return float(diff.max()), dict(zip(dictionary.names, map(float, lhs)))
    return float(diff.max())


def section_potential(space, coeffs, grid):
    """``u_N = (1/N) log(|f(z)|^2 / ||s||^2)`` on a grid (unweighted frame)."""
    from .grid import PotentialGrid

    c = np.asarray(coeffs, dtype=np.complex128)
    c = c / np.linalg.norm(c)
    vals = space.section_log_abs2(c, grid.points().ravel()) / space.degree
    return PotentialGrid(grid, vals.reshape(grid.shape), "u_N")


def l1_potential_error(space, coeffs, envelope):
    """Mean of ``|u_N - phi_eq|`` over the grid box (normalized flat area).

    Grid points where the section vanishes exactly are excluded.  Returns
    ``(error, n_excluded)``.
    """
    u = section_potential(space, coeffs, envelope.grid).values
    ok = np.isfinite(u)
    err = float(np.mean(np.abs(u[ok] - envelope.values[ok])))
    return err, int((~ok).sum())


def toeplitz_of(space, values):
    """``T_jk = sum_i w_i a(z_i) conj(S_j(z_i)) S_k(z_i) exp(-N phi(z_i))``."""
    F = space.node_basis_
    T = (F.conj().T * (space.node_weights_ * values)) @ F
    return 0.5 * (T + T.conj().T)


def second_moment_double_sum(space, values, budget=DOUBLE_SUM_BUDGET):
    """``(int a Pi dnu)^2 * BETA + (ALPHA - BETA) * sum |K_ij|^2 q_i q_j``.

    Here ``K`` is the Bergman kernel in the weighted frame at the nodes and
    ``q_i = w_i a(z_i)``; ``|K_ij|^2 = Pi(z_i) Pi(z_j) P_N(z_i, z_j)^2``.
    This is the Gaussian-ensemble value of ``E (X_N^a)^2``, computed by
    explicit double quadrature in row blocks.
    """
    F = space.node_basis_
    n = F.shape[0]
    if float(n) * n > budget:
        raise MemoryError(f"double quadrature over {n} nodes exceeds the budget {budget:g}")
    q = space.node_weights_ * values
    pi = np.sum(np.abs(F) ** 2, axis=1)
    first = float(np.sum(q * pi))
    block = max(1, int(4e6 // max(n, 1)))
    offd = 0.0
    for s in range(0, n, block):
        K = F[s:s + block] @ F.conj().T
        offd += float(np.sum(q[s:s + block, None] * np.abs(K) ** 2 * q[None, :]))
    return BETA * first**2 + (ALPHA - BETA) * offd


def variance_xn_experiment(space, a, n_samples, rng, ensemble="spherical", eq_measure=None,
                           method="auto"):
    """Moments of ``X_N^a`` by Monte Carlo against their quadrature predictions.

    Predictions (Gaussian coefficients): ``E X = int a Pi dnu`` and
    ``E X^2 = BETA (int a Pi dnu)^2 + (ALPHA - BETA) int int a a |Pi(z,w)|^2``.
    For the spherical ensemble the norm factors out, so the predictions are
    divided by ``d_N`` and ``d_N (d_N + 1)`` respectively.

    ``method`` selects the double integral: ``double_sum`` (explicit node
    pairs), ``trace`` (``Tr T_a^2``, exact and cheap) or ``auto`` (double
    sum when within the budget).
    """
    values = a(space.nodes_) if callable(a) else np.asarray(a)
    d = space.degree + 1
    draw = sample_spherical if ensemble == "spherical" else sample_gaussian
    C = draw(space, rng, size=n_samples)
    raw = np.abs(C @ space.node_basis_.T) ** 2
    X = (raw * space.node_weights_) @ values
    T = toeplitz_of(space, values)
    mean_pred = float(np.real(np.trace(T)))
    if method == "auto":
        n = space.node_basis_.shape[0]
        method = "double_sum" if float(n) * n <= DOUBLE_SUM_BUDGET else "trace"
    if method == "double_sum":
        second_pred = second_moment_double_sum(space, values)
    else:
        second_pred = BETA * mean_pred**2 + (ALPHA - BETA) * float(np.real(np.sum(np.abs(T) ** 2)))
    if ensemble == "spherical":
        mean_pred /= d
        second_pred /= d * (d + 1)
    X2 = X**2
    report = {
        "N": int(space.degree), "ensemble": ensemble, "n_samples": int(n_samples),
        "mean": float(X.mean()), "mean_stderr": float(X.std(ddof=1) / np.sqrt(n_samples)),
        "mean_predicted": mean_pred,
        "second_moment": float(X2.mean()),
        "second_moment_stderr": float(X2.std(ddof=1) / np.sqrt(n_samples)),
        "second_moment_predicted": float(second_pred),
        "variance": float(X.var(ddof=1)),
        "variance_predicted": float(second_pred - mean_pred**2),
        "method": method,
        "convention": f"{ensemble} coefficients",
    }
    if eq_measure is not None:
        Z = eq_measure.grid.points()
        report["mean_limit"] = eq_measure.pair(a(Z) if callable(a) else None)
    return report


def offdiag_second_moment(space, a, method="trace"):
    """``N^{-1} sum_ij w_i w_j a_i a_j |B_N(z_i, z_j)|^2 e^{-N(phi_i + phi_j)}``.

    Equal to ``Tr(T_a^2) / N``; ``method="double_sum"`` evaluates the
    double sum over node pairs explicitly.
    """
    values = a(space.nodes_) if callable(a) else np.asarray(a)
    N = space.degree
    if method == "double_sum":
        F = space.node_basis_
        q = space.node_weights_ * values
        total = 0.0
        block = max(1, int(4e6 // F.shape[0]))
        for s in range(0, F.shape[0], block):
            K = F[s:s + block] @ F.conj().T
            total += float(np.sum(q[s:s + block, None] * np.abs(K) ** 2 * q[None, :]))
        return total / N
    T = toeplitz_of(space, values)
    return float(np.real(np.sum(np.abs(T) ** 2))) / N


def cesaro_means(seq):
    seq = np.asarray(seq, dtype=float)
    return np.cumsum(seq) / np.arange(1, seq.size + 1)


def qe_experiment(weight, measure, degrees, n_samples, master_seed, eq_measure, envelope,
                  dictionary=None, ensemble="spherical", negative_control=True, spaces=None):
    """QE defect and L1 potential error for random sections across degrees.

    Sample ``i`` at degree ``N`` uses the stream ``(master_seed, N, i)``.
    With ``negative_control`` the top monomial section ``e_N`` is evaluated
    as well; it concentrates its mass instead of equidistributing.
    Returns ``(summary_rows, reports)``.
    """
    from .hilb import BergmanSpace

    dictionary = default_dictionary() if dictionary is None else dictionary
    rhs = dictionary.pair_density(eq_measure)
    summary, reports = [], []
    for N in degrees:
        space = (spaces or {}).get(N) or BergmanSpace(degree=N, weight=weight).fit_measure(measure)
        vals = dictionary.evaluate(space.nodes_).T
        draw = sample_spherical if ensemble == "spherical" else sample_gaussian
        C = np.array([draw(space, make_rng(master_seed, N, i)).coeffs for i in range(n_samples)])
        P = mass_pairings(space, C, vals)
        defects = np.abs(P - rhs[None, :]).max(axis=1)
        l1 = []
        for i in range(n_samples):
            err, excl = l1_potential_error(space, C[i], envelope)
            l1.append(err)
            reports.append(QEReport(int(N), f"{ensemble}:{master_seed}:{N}:{i}", float(defects[i]),
                                    err, excl, dict(zip(dictionary.names, map(float, P[i])))))
        row = {"N": int(N), "n_samples": int(n_samples), "ensemble": ensemble,
               "mean_qe_defect": float(defects.mean()), "max_qe_defect": float(defects.max()),
               "mean_l1_error": float(np.mean(l1)),
               "convention": "dV = normalized flat area on the box; spherical sections"}
        if negative_control:
            top = np.zeros(N + 1, dtype=np.complex128)
            top[-1] = 1.0
            Pt = mass_pairings(space, top, vals)[0]
            row["control_qe_defect"] = float(np.abs(Pt - rhs).max())
            row["control_l1_error"] = l1_potential_error(space, top, envelope)[0]
        summary.append(row)
    return summary, reports
