"""Finite dictionaries of bounded test functions for weak-* comparisons.

Weak convergence is probed by pairing measures with a fixed family of test
functions and reporting the largest discrepancy.  Each function is scaled
to sup norm at most one and carries a Lipschitz constant, so a user can
turn the dictionary defect into a bound for other functions on compact sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["TestFunction", "TestDictionary", "default_dictionary", "gaussian_bump",
           "radial_hat", "cutoff_power",
           "abs2_cutoff", "constant_one"]


@dataclass(frozen=True)
class TestFunction:
    name: str
    func: Callable[[np.ndarray], np.ndarray]
    lipschitz: float

    def __call__(self, z):
        return self.func(np.asarray(z))


def constant_one():
    return TestFunction("one", lambda z: np.ones(np.shape(z)), 0.0)


def gaussian_bump(center, width):
    c = complex(center)

    def f(z):
        return np.exp(-np.abs(z - c) ** 2 / (2.0 * width**2))

    return TestFunction(f"bump({c.real:g}{c.imag:+g}i,w={width:g})", f, np.exp(-0.5) / width)


def radial_hat(r0, width):
    def f(z):
        return np.maximum(0.0, 1.0 - np.abs(np.abs(z) - r0) / width)

    return TestFunction(f"hat(r0={r0:g},w={width:g})", f, 1.0 / width)


def cutoff_power(k, part="re"):
    """``Re(z^k)`` or ``Im(z^k)`` damped by ``exp(-|z|^2/2)``, sup norm one."""
    peak = k ** (k / 2.0) * np.exp(-k / 2.0)  # max of r^k exp(-r^2/2), at r = sqrt(k)
    take = np.real if part == "re" else np.imag

    def f(z):
        return take(z**k) * np.exp(-np.abs(z) ** 2 / 2.0) / peak

    # |grad| <= max_r |(k r^(k-1) + r^(k+1)) exp(-r^2/2)| / peak, evaluated numerically
    r = np.linspace(0.0, 10.0, 20001)
    lip = float(np.max((k * r ** (k - 1) + r ** (k + 1)) * np.exp(-r**2 / 2.0)) / peak)
    return TestFunction(f"{part}(z^{k})*cutoff", f, lip)


def abs2_cutoff():
    """``|z|^2 exp(-|z|^2/2)`` scaled to sup norm one (peak at ``|z|^2 = 2``)."""
    peak = 2.0 * np.exp(-1.0)

    def f(z):
        r2 = np.abs(z) ** 2
        return r2 * np.exp(-r2 / 2.0) / peak

    r = np.linspace(0.0, 10.0, 20001)
    lip = float(np.max(np.abs(2 * r - r**3) * np.exp(-r**2 / 2.0)) / peak)
    return TestFunction("abs2*cutoff", f, lip)


class TestDictionary:
    """An ordered collection of :class:`TestFunction` objects."""

    __test__ = False  # not a pytest class

    def __init__(self, functions):
        self.functions = list(functions)

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, i):
        return self.functions[i]

    @property
    def names(self):
        return [f.name for f in self.functions]

    def evaluate(self, z):
        """Matrix of values, shape ``(len(self), *z.shape)``."""
        z = np.asarray(z)
        return np.stack([f(z) for f in self.functions])

    def pair_atoms(self, points, masses):
        V = self.evaluate(np.asarray(points))
        return V @ np.asarray(masses)

    def pair_density(self, density):
        """Pairings with a :class:`~qergodic.grid.GridDensity`."""
        Z = density.grid.points()
        return np.array([density.pair(f(Z)) for f in self.functions])

    def describe(self):
        return [{"name": f.name, "lipschitz": f.lipschitz} for f in self.functions]


def default_dictionary(centers=(-1.0, 0.0, 1.0), widths=(0.25, 0.5), max_power=4,
                       hat_radii=(0.5, 1.0, 1.5), hat_width=0.5):
    """Constant, Gaussian bumps on a grid of centers, cut-off powers, radial hats."""
    funcs = [constant_one()]
    for w in widths:
        for y in centers:
            for x in centers:
                funcs.append(gaussian_bump(complex(x, y), w))
    for k in range(1, max_power + 1):
        funcs.append(cutoff_power(k, "re"))
        funcs.append(cutoff_power(k, "im"))
    for r0 in hat_radii:
        funcs.append(radial_hat(r0, hat_width))
    return TestDictionary(funcs)
