"""Gaussian and spherical random sections, and Haar-random orthonormal bases.

Coefficients are taken with respect to the orthonormal basis of a fitted
:class:`~qergodic.hilb.BergmanSpace`.  All randomness flows through
:func:`make_rng`, which derives independent PCG64 streams from a master
seed and a stream index, so results never depend on how work is split
between workers.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ._validation import as_points

__all__ = [
    "SeedRecord",
    "RandomSection",
    "HaarFrame",
    "make_rng",
    "complex_gaussian",
    "sample_gaussian",
    "sample_spherical",
    "sample_haar",
    "haar_unitaries",
    "expected_mass_check",
]

GENERATOR = "PCG64"


@dataclass(frozen=True)
class SeedRecord:
    generator: str
    master_seed: int
    stream_index: object

    def as_dict(self):
        d = asdict(self)
        if isinstance(d["stream_index"], tuple):
            d["stream_index"] = list(d["stream_index"])
        return d


class SeededGenerator(np.random.Generator):
    """A numpy Generator that remembers where its seed came from."""

    def __init__(self, master_seed, stream):
        key = tuple(int(s) for s in stream)
        ss = np.random.SeedSequence(int(master_seed), spawn_key=key)
        super().__init__(np.random.PCG64(ss))
        index = key[0] if len(key) == 1 else key
        self.seed_record = SeedRecord(GENERATOR, int(master_seed), index)


def make_rng(master_seed, *stream):
    """Independent generator for ``master_seed`` and a task index.

    The index may have several components, e.g. ``make_rng(seed, N, i)``
    for sample ``i`` at degree ``N``; distinct indices give independent
    streams.
    """
    return SeededGenerator(master_seed, stream or (0,))


def _record(rng):
    return getattr(rng, "seed_record", SeedRecord(type(rng.bit_generator).__name__, -1, -1))


@dataclass(frozen=True)
class RandomSection:
    degree: int
    coeffs: np.ndarray
    ensemble: str
    provenance: SeedRecord

    @property
    def norm2(self):
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True)
class HaarFrame:
    U: np.ndarray

    @property
    def d(self):
        return self.U.shape[0]


def complex_gaussian(rng, size):
    """Standard complex Gaussians: real and imaginary parts of variance 1/2."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def sample_gaussian(space, rng, size=None):
    """Gaussian section(s): i.i.d. standard complex ONB coefficients.

    With ``size`` given, returns an array of shape ``(size, d_N)`` instead of
    a :class:`RandomSection`.
    """
    d = space.degree + 1
    if size is not None:
        return complex_gaussian(rng, (size, d))
    return RandomSection(space.degree, complex_gaussian(rng, d), "gaussian", _record(rng))


def sample_spherical(space, rng, size=None):
    """Section(s) uniform on the unit sphere of the space (normalized Gaussians)."""
    d = space.degree + 1
    c = complex_gaussian(rng, (1 if size is None else size, d))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    if size is not None:
        return c
    return RandomSection(space.degree, c[0], "spherical", _record(rng))


def haar_unitaries(d, size, rng):
    """Stack of ``size`` Haar-distributed ``d x d`` unitaries.

    QR of a complex Ginibre matrix; each column of Q is multiplied by the
    phase ``R_jj / |R_jj|`` so that the triangular factor has a positive
    diagonal, which makes the factorization unique and Q Haar distributed.
    """
    G = complex_gaussian(rng, (size, d, d))
    Q, R = np.linalg.qr(G)
    diag = np.diagonal(R, axis1=1, axis2=2)
    phase = diag / np.abs(diag)
    return Q * phase[:, None, :]


def sample_haar(d, rng):
    if d < 1:
        raise ValueError("d must be >= 1")
    return HaarFrame(haar_unitaries(d, 1, rng)[0])


def expected_mass_check(space, z, n_samples, rng, ensemble="spherical", threshold=4.0):
    """Monte Carlo check of the expected pointwise mass of random sections.

    The target is ``Pi_N(z) / d_N`` for the spherical ensemble and
    ``Pi_N(z)`` for the Gaussian one.  Returns one dict per point with the
    empirical mean, its standard error, the target and a flag set when the
    discrepancy exceeds ``threshold`` standard errors.
    """
    z = as_points(z)
    d = space.degree + 1
    draw = sample_spherical if ensemble == "spherical" else sample_gaussian
    C = draw(space, rng, size=n_samples)
    B = space.weighted_basis(z)
    vals = np.abs(C @ B.T) ** 2
    mean = vals.mean(axis=0)
    stderr = vals.std(axis=0, ddof=1) / np.sqrt(n_samples)
    target = space.density(z) / (d if ensemble == "spherical" else 1.0)
    rows = []
    for k in range(z.shape[0]):
        zscore = (mean[k] - target[k]) / stderr[k] if stderr[k] > 0 else 0.0
        rows.append({"z_re": float(z[k].real), "z_im": float(z[k].imag),
                     "empirical": float(mean[k]), "stderr": float(stderr[k]),
                     "target": float(target[k]), "zscore": float(zscore),
                     "flagged": bool(abs(zscore) > threshold),
                     "convention": ensemble})
    return rows
