import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qergodic import BergmanSpace, make_rng
from qergodic.dictionary import cutoff_power, default_dictionary, gaussian_bump, radial_hat
from qergodic.ensembles import haar_unitaries, sample_haar
from qergodic.onbstats import (
    diagonal_variance,
    ergodic_property_experiment,
    orbit_integral_check,
    orbit_integral_closed_form,
    szego_experiment,
    szego_traces,
    toeplitz,
    y_statistic,
)

DICT = list(default_dictionary())


@pytest.fixture(scope="module")
def spaces(circle_model, disk_model):
    out = {}
    for name, (w, m) in {"circle": circle_model, "disk": disk_model}.items():
        out[name] = BergmanSpace(degree=12, weight=w).fit_measure(m)
    return out


@pytest.mark.parametrize("name", ["circle", "disk"])
def test_constant_symbol(spaces, name):
    sp = spaces[name]
    assert np.allclose(toeplitz(sp, lambda z: np.ones(z.shape)).matrix, np.eye(13), atol=1e-10)
    assert np.allclose(toeplitz(sp, lambda z: np.full(z.shape, 2.5)).matrix, 2.5 * np.eye(13),
                       atol=1e-10)


def test_cosine_on_circle_is_tridiagonal(spaces):
    T = toeplitz(spaces["circle"], cutoff_power(1)).matrix
    ref = 0.5 * (np.eye(13, k=1) + np.eye(13, k=-1))
    assert np.allclose(T, ref, atol=1e-12)


def test_hat_on_circle_is_identity(spaces):
    assert np.allclose(toeplitz(spaces["circle"], radial_hat(1.0, 0.5)).matrix, np.eye(13))


@given(k=st.integers(0, len(DICT) - 1), name=st.sampled_from(["circle", "disk"]))
def test_toeplitz_hermitian_with_spectrum_in_range(spaces, k, name):
    sp, g = spaces[name], DICT[k]
    T = toeplitz(sp, g)
    assert np.allclose(T.matrix, T.matrix.conj().T)
    vals = g(sp.nodes_)
    ev = T.eigenvalues()
    tol = 1e-10
    assert ev.min() >= vals.min() - tol and ev.max() <= vals.max() + tol
    if vals.min() >= 0:
        assert ev.min() >= -tol


@given(seed=st.integers(0, 2**32))
def test_traces_unitarily_invariant(spaces, seed):
    T = toeplitz(spaces["disk"], gaussian_bump(0.5, 0.5)).matrix
    U = sample_haar(13, make_rng(seed)).U
    S = U.conj().T @ T @ U
    assert np.trace(S) == pytest.approx(np.trace(T))
    assert np.sum(np.abs(S) ** 2) == pytest.approx(np.sum(np.abs(T) ** 2))


def test_y_identity_frame():
    lam = np.array([1.0, -1.0, 3.0])
    assert y_statistic(np.eye(3), np.diag(lam)) == pytest.approx(diagonal_variance(lam))


@given(seed=st.integers(0, 2**32), c=st.floats(-5, 5))
def test_y_scalar_is_zero(seed, c):
    U = sample_haar(4, make_rng(seed))
    assert y_statistic(U, c * np.eye(4)) == pytest.approx(0.0, abs=1e-20)


def test_y_dimension_mismatch():
    with pytest.raises(ValueError):
        y_statistic(np.eye(3), np.eye(4))


@given(seed=st.integers(0, 2**32))
def test_diagonal_projection_bound(seed):
    # the diagonal is a contraction of the centred matrix in Hilbert-Schmidt norm
    r = np.random.default_rng(seed)
    A = r.normal(size=(5, 5)) + 1j * r.normal(size=(5, 5))
    T = A + A.conj().T
    U = haar_unitaries(5, 20, make_rng(seed))
    C = T - np.trace(T).real / 5 * np.eye(5)
    assert np.all(y_statistic(U, T) <= np.sum(np.abs(C) ** 2) * (1 + 1e-10))


@pytest.mark.parametrize("lam,val", [([3.0], 0.0), ([2.0, 2.0, 2.0], 0.0),
                                     ([2.0, 0.0, -1.0], 7 / 6), ([1.0, -1.0], 2 / 3)])
def test_orbit_closed_form(lam, val):
    assert orbit_integral_closed_form(lam) == pytest.approx(val, abs=1e-15)


@pytest.mark.parametrize("lam", [[1.0, -1.0], [2.0, 0.0, -1.0]])
def test_orbit_monte_carlo(lam):
    r = orbit_integral_check(lam, 100_000, make_rng(31))
    assert r["rel_error"] <= 0.01
    assert abs(r["mc_mean"] - r["closed_form"]) <= 4 * r["stderr"]


def test_orbit_d1_is_zero():
    assert orbit_integral_check([2.0], 100, make_rng(32))["mc_mean"] == 0.0


def test_y_mean_on_diagonal_matrix():
    lam = np.array([1.5, 0.2, -0.7, 0.0])
    U = haar_unitaries(4, 50_000, make_rng(33))
    Y = y_statistic(U, np.diag(lam))
    assert abs(Y.mean() - orbit_integral_closed_form(lam)) <= 4 * Y.std() / np.sqrt(Y.size)


def test_szego_constant_exact(disk_model, small_envelopes):
    w, m = disk_model
    _, eq = small_envelopes["disk"]
    sp = BergmanSpace(degree=10, weight=w).fit_measure(m)
    r = szego_traces(sp, lambda z: np.ones(z.shape), eq)
    assert r["error"] < 1e-10 and r["error_sq"] < 1e-10


def test_szego_disk_bump_converges(disk_model, small_envelopes):
    w, m = disk_model
    _, eq = small_envelopes["disk"]
    rows = szego_experiment(w, m, [8, 16, 32], gaussian_bump(0.5, 0.5), eq)
    rel = [r["rel_error"] for r in rows]
    assert rel[0] > rel[1] > rel[2] and rel[2] <= 0.05


def test_ergodic_constant_symbol(disk_model, small_envelopes):
    w, m = disk_model
    _, eq = small_envelopes["disk"]
    rows = ergodic_property_experiment(w, m, [4, 8], lambda z: np.ones(z.shape), eq, 50, 34)
    for r in rows:
        assert r["y_mean"] == pytest.approx(0.0, abs=1e-18)
        assert r["fraction_A_below_eps"] == 1.0


def test_ergodic_expected_y(circle_model, small_envelopes):
    w, m = circle_model
    _, eq = small_envelopes["circle"]
    rows = ergodic_property_experiment(w, m, [8, 16], cutoff_power(1), eq, 4000, 35)
    for r in rows:
        assert abs(r["y_mean"] - r["y_expected"]) <= 4 * r["y_stderr"]
        assert r["y_limit"] == pytest.approx(0.5, abs=0.01)
    assert rows[1]["y_over_d"] < rows[0]["y_over_d"]
