"""Weighted polynomial Hilbert spaces and their Bergman kernels.

The space of polynomials of degree at most N carries the inner product

    <p, q> = sum_i w_i conj(p(z_i)) q(z_i) exp(-N phi(z_i))

over the nodes of a quadrature rule.  :class:`BergmanSpace` follows the
scikit-learn estimator protocol: ``fit`` takes the nodes (and their weights)
and builds the Gram matrix and an orthonormal basis; ``transform`` evaluates
the orthonormal basis; ``score_samples`` returns the log-density of the
normalized Bergman measure ``Pi_N dnu / d_N``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_points, check_degree, check_positive_weights
from .exceptions import ConditioningError, ConfigurationError
from .grid import PotentialGrid
from .model import build_weight

__all__ = [
    "BergmanSpace",
    "gram_matrix",
    "orthonormalize",
    "bergman_density",
    "bergman_kernel",
    "log_bergman_potential",
]

_CHUNK = 16384


def _weighted_vandermonde(z, N, log_scale):
    """``z_i^j exp(log_scale_i)`` for j = 0..N, computed without overflow."""
    n = z.shape[0]
    out = np.zeros((n, N + 1), dtype=np.complex128)
    nz = z != 0
    j = np.arange(N + 1)
    logr = np.log(np.abs(z[nz]))
    theta = np.angle(z[nz])
    out[nz] = np.exp(j[None, :] * logr[:, None] + log_scale[nz, None]) * np.exp(
        1j * j[None, :] * theta[:, None])
    out[~nz, 0] = np.exp(log_scale[~nz])
    return out


def gram_matrix(N, weight, nodes, weights):
    """Gram matrix of the monomials ``1, z, ..., z^N``.

    ``G[j, k] = sum_i w_i conj(z_i^j) z_i^k exp(-N phi(z_i))`` (conjugate
    linear in the first slot), so that ``C^H G C = I`` for the coefficient
    matrix returned by :func:`orthonormalize`.
    """
    N = check_degree(N)
    z = as_points(nodes, "nodes")
    w = check_positive_weights(weights, z.shape[0], "weights")
    phi = weight.eval(z)
    if not np.all(np.isfinite(phi)):
        raise ConfigurationError("weight is not finite on every node")
    F = _weighted_vandermonde(z, N, 0.5 * (np.log(w) - N * phi))
    G = F.conj().T @ F
    return 0.5 * (G + G.conj().T)


def orthonormalize(G, degree=None, tol=1e-8):
    """Upper-triangular ``C`` with ``C^H G C = I``.

    ``C = L^{-H}`` for the lower Cholesky factor ``L`` of ``G``.  The
    factorization runs on the diagonally scaled Gram matrix, which is what
    determines the attainable accuracy; a radial weight can give a diagonal
    Gram matrix with a dynamic range of 1e30 that is still perfectly
    orthonormalizable.

    Returns
    -------
    C : ndarray
    info : dict
        ``cond`` (2-norm condition estimate of ``G``), ``scaled_cond`` and
        ``orthonormality_error`` (``max |C^H G C - I|``).
    """
    G = np.asarray(G, dtype=np.complex128)
    d = G.shape[0]
    N = d - 1 if degree is None else degree
    D = np.real(np.diag(G))
    if np.any(~np.isfinite(D)) or np.any(D <= 0):
        raise ConditioningError(N, np.inf)
    s = 1.0 / np.sqrt(D)
    S = G * s[:, None] * s[None, :]
    ev = np.linalg.eigvalsh(S)
    scaled_cond = ev[-1] / ev[0] if ev[0] > 0 else np.inf
    if ev[0] <= 1e3 * np.finfo(float).eps * ev[-1]:
        raise ConditioningError(N, scaled_cond)
    try:
        Ls = cholesky(S, lower=True)
    except np.linalg.LinAlgError:
        raise ConditioningError(N, scaled_cond) from None
    C = s[:, None] * solve_triangular(Ls.conj().T, np.eye(d), lower=False)
    err = np.max(np.abs(C.conj().T @ G @ C - np.eye(d)))
    if not err <= tol:
        raise ConditioningError(
            N, scaled_cond,
            f"orthonormality check failed for N={N}: max|C^H G C - I| = {err:.2e}")
    try:
        cond = float(np.linalg.cond(G))
    except np.linalg.LinAlgError:
        cond = np.inf
    return C, {"cond": cond, "scaled_cond": float(scaled_cond),
               "orthonormality_error": float(err)}


class BergmanSpace(TransformerMixin, BaseEstimator):
    """Degree-N polynomials with the L2 inner product of a weighted measure.

    Parameters
    ----------
    degree : int
        Polynomial degree N; the space has dimension ``d_N = N + 1``.
    weight : Weight, optional
        The weight phi.  Defaults to the zero weight.
    normalize : bool
        Rescale ``sample_weight`` to a probability measure in ``fit``.
    tol : float
        Tolerance of the post-construction check ``C^H G C = I``.

    Attributes
    ----------
    gram_ : ndarray of shape (d_N, d_N)
    onb_coeffs_ : ndarray of shape (d_N, d_N)
        Column j holds the monomial coefficients of the orthonormal
        polynomial ``f_j``.
    cond_, scaled_cond_, orthonormality_error_ : float
    node_basis_ : ndarray of shape (n_nodes, d_N)
        ``f_j(z_i) exp(-N phi(z_i) / 2)``, the orthonormal basis in the
        weighted frame at the nodes.
    """

    def __init__(self, degree=8, weight=None, normalize=True, tol=1e-8):
        self.degree = degree
        self.weight = weight
        self.normalize = normalize
        self.tol = tol

    # -- construction -------------------------------------------------
    def fit(self, X, y=None, sample_weight=None):
        N = check_degree(self.degree)
        z = as_points(X, "X")
        if z.shape[0] < N + 1:
            raise ConfigurationError(
                f"{z.shape[0]} nodes cannot support a space of dimension {N + 1}")
        w = check_positive_weights(sample_weight, z.shape[0])
        if self.normalize:
            w = w / w.sum()
        weight = self.weight_
        G = gram_matrix(N, weight, z, w)
        C, info = orthonormalize(G, degree=N, tol=self.tol)
        self.nodes_ = z
        self.node_weights_ = w
        self.gram_ = G
        self.onb_coeffs_ = C
        self.cond_ = info["cond"]
        self.scaled_cond_ = info["scaled_cond"]
        self.orthonormality_error_ = info["orthonormality_error"]
        self.n_features_in_ = 2
        self._col_scale = np.log(np.max(np.abs(C), axis=0))
        phi = weight.eval(z)
        self.node_phi_ = phi
        self.node_basis_ = self._weighted_basis(z, phi)
        return self

    def fit_measure(self, measure):
        """Fit on the nodes and weights of a :class:`SupportMeasure`."""
        self.measure_label_ = measure.label
        return self.fit(measure.nodes, sample_weight=measure.weights)

    @property
    def weight_(self):
        return build_weight("zero") if self.weight is None else self.weight

    @property
    def dim(self):
        return int(self.degree) + 1

    # -- evaluation helpers -------------------------------------------
    def _scaled_basis(self, z):
        """``f_j(z) / (rho^N * exp(col_scale_j))`` with ``rho = max(1, |z|)``.

        Returns the scaled values and ``N log rho``.
        """
        N = int(self.degree)
        rho = np.maximum(1.0, np.abs(z))
        logrho = np.log(rho)
        j = np.arange(N + 1)
        zr = z / rho
        mono = np.ones((z.shape[0], N + 1), dtype=np.complex128)
        if N:
            mono[:, 1:] = np.cumprod(np.repeat(zr[:, None], N, axis=1), axis=1)
        mono *= np.exp((j[None, :] - N) * logrho[:, None])
        Cs = self.onb_coeffs_ * np.exp(-self._col_scale)[None, :]
        return mono @ Cs, N * logrho

    def _weighted_basis(self, z, phi):
        vals, nlogrho = self._scaled_basis(z)
        return vals * np.exp(self._col_scale[None, :] + (nlogrho - 0.5 * self.degree * phi)[:, None])

    def _log_B(self, z):
        out = np.empty(z.shape[0])
        for start in range(0, z.shape[0], _CHUNK):
            sl = slice(start, start + _CHUNK)
            vals, nlogrho = self._scaled_basis(z[sl])
            with np.errstate(divide="ignore"):
                la = 2.0 * (np.log(np.abs(vals)) + self._col_scale[None, :])
            out[sl] = logsumexp(la, axis=1) + 2.0 * nlogrho
        return out

    # -- public API -----------------------------------------------------
    def transform(self, X):
        """Orthonormal basis values ``f_j(z)`` in the unweighted frame."""
        check_is_fitted(self, "onb_coeffs_")
        z = as_points(X, "X")
        vals, nlogrho = self._scaled_basis(z)
        return vals * np.exp(self._col_scale[None, :] + nlogrho[:, None])

    def weighted_basis(self, X):
        """``f_j(z) exp(-N phi(z)/2)``: the basis in the metric-weighted frame."""
        check_is_fitted(self, "onb_coeffs_")
        z = as_points(X, "X")
        return self._weighted_basis(z, self.weight_.eval(z))

    def log_kernel_diag(self, X):
        """``log B_N(z, z) = log sum_j |f_j(z)|^2`` by log-sum-exp."""
        check_is_fitted(self, "onb_coeffs_")
        return self._log_B(as_points(X, "X"))

    def log_density(self, X):
        """``log Pi_N(z) = log B_N(z, z) - N phi(z)``."""
        z = as_points(X, "X")
        return self.log_kernel_diag(z) - self.degree * self.weight_.eval(z)

    def density(self, X):
        """Density of states ``Pi_N(z) = sum_j |f_j(z)|^2 exp(-N phi(z))``."""
        return np.exp(self.log_density(X))

    def score_samples(self, X):
        """Log of ``Pi_N / d_N``, the Bergman measure's density w.r.t. nu."""
        return self.log_density(X) - np.log(self.dim)

    def kernel(self, Z, W):
        """Bergman kernel matrix ``B_N(z_a, w_b) = sum_j f_j(z_a) conj(f_j(w_b))``."""
        fz = self.transform(Z)
        fw = self.transform(W)
        return fz @ fw.conj().T

    def monomial_coeffs(self, coeffs):
        """Monomial coefficients (low to high degree) of ``sum_j c_j f_j``."""
        check_is_fitted(self, "onb_coeffs_")
        return self.onb_coeffs_ @ np.asarray(coeffs, dtype=np.complex128)

    def section_log_abs2(self, coeffs, X):
        """``log |f(z)|^2`` for ``f = sum_j c_j f_j`` in the unweighted frame.

        Exact zeros give ``-inf``.
        """
        check_is_fitted(self, "onb_coeffs_")
        z = as_points(X, "X")
        c = np.asarray(coeffs, dtype=np.complex128) * np.exp(self._col_scale)
        out = np.empty(z.shape[0])
        for start in range(0, z.shape[0], _CHUNK):
            sl = slice(start, start + _CHUNK)
            vals, nlogrho = self._scaled_basis(z[sl])
            with np.errstate(divide="ignore"):
                out[sl] = 2.0 * np.log(np.abs(vals @ c)) + 2.0 * nlogrho
        return out

    def section_norm2(self, coeffs, X):
        """Pointwise norm ``|s(z)|^2_{h^N}`` of the section with ONB coefficients."""
        z = as_points(X, "X")
        return np.exp(self.section_log_abs2(coeffs, z) - self.degree * self.weight_.eval(z))

    def log_bergman_potential(self, grid):
        """``(1/N) log B_N(z, z)`` on a grid, as a PotentialGrid."""
        if int(self.degree) == 0:
            raise ConfigurationError("the log-Bergman potential needs N >= 1")
        pts = grid.points().ravel()
        vals = self.log_kernel_diag(pts) / self.degree
        return PotentialGrid(grid, vals.reshape(grid.shape), "log_bergman")


def bergman_density(space, z):
    """``Pi_N(z)`` for a fitted :class:`BergmanSpace`."""
    return space.density(z)


def bergman_kernel(space, z, w):
    """``B_N(z, w)`` for scalars or arrays (outer product over the inputs)."""
    K = space.kernel(z, w)
    if np.ndim(z) == 0 and np.ndim(w) == 0:
        return complex(K[0, 0])
    return K


def log_bergman_potential(space, grid):
    return space.log_bergman_potential(grid)
