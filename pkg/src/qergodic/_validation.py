"""Input validation helpers shared by the estimators and functions.

scikit-learn's ``check_array`` rejects complex input, so points in the
plane are validated here instead.
"""

import numbers

import numpy as np

from .exceptions import ConfigurationError


def as_points(z, name="z"):
    """Return ``z`` as a 1-d complex array.

    Accepts scalars, sequences of complex numbers, or real arrays of shape
    ``(n, 2)`` holding ``(re, im)`` pairs.
    """
    arr = np.asarray(z)
    if arr.dtype == object:
        raise ValueError(f"{name} must be numeric")
    if np.iscomplexobj(arr):
        out = arr.astype(np.complex128).ravel()
    elif arr.ndim == 2 and arr.shape[1] == 2:
        out = (arr[:, 0] + 1j * arr[:, 1]).astype(np.complex128)
    else:
        out = arr.astype(np.float64).ravel().astype(np.complex128)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    return out


def check_positive_weights(w, n, name="sample_weight"):
    if w is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != n:
        raise ValueError(f"{name} has {w.shape[0]} entries, expected {n}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError(f"{name} must be finite and strictly positive")
    return w


def check_degree(N, name="degree"):
    if isinstance(N, bool) or not isinstance(N, numbers.Integral) or N < 0:
        raise ConfigurationError(f"{name} must be a non-negative integer, got {N!r}")
    return int(N)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be a positive real, got {value!r}")
    return float(value)
