import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qergodic import BergmanSpace, build_measure, expected_mass_check, make_rng
from qergodic.ensembles import haar_unitaries, sample_gaussian, sample_haar, sample_spherical


@pytest.fixture(scope="module")
def space20():
    return BergmanSpace(degree=20).fit_measure(build_measure("circle", 64))


def test_gaussian_covariance(space20):
    C = sample_gaussian(space20, make_rng(1), size=100_000)
    second = (C.conj().T @ C) / C.shape[0]
    pseudo = (C.T @ C) / C.shape[0]
    se = 1 / np.sqrt(C.shape[0])
    assert np.max(np.abs(second - np.eye(21))) < 5 * se
    assert np.max(np.abs(pseudo)) < 5 * se


def test_spherical_norm_and_variance(space20):
    C = sample_spherical(space20, make_rng(2), size=100_000)
    assert np.allclose(np.linalg.norm(C, axis=1), 1, atol=1e-12)
    m = np.mean(np.abs(C) ** 2, axis=0)
    se = np.std(np.abs(C) ** 2, axis=0) / np.sqrt(C.shape[0])
    assert np.all(np.abs(m - 1 / 21) < 3.5 * se)


def test_spherical_dimension_one():
    sp = BergmanSpace(degree=0).fit_measure(build_measure("circle", 8))
    sec = sample_spherical(sp, make_rng(3))
    assert abs(abs(sec.coeffs[0]) - 1) < 1e-12


@given(seed=st.integers(0, 2**63), i=st.integers(0, 1000))
def test_seed_determinism(seed, i):
    sp = BergmanSpace(degree=4).fit_measure(build_measure("circle", 8))
    a = sample_gaussian(sp, make_rng(seed, 7, i))
    b = sample_gaussian(sp, make_rng(seed, 7, i))
    assert np.array_equal(a.coeffs, b.coeffs)
    assert a.provenance.master_seed == seed and a.provenance.stream_index == (7, i)
    c = sample_gaussian(sp, make_rng(seed, 7, i + 1))
    assert not np.array_equal(a.coeffs, c.coeffs)


def test_haar_unitary_and_d1():
    U = haar_unitaries(6, 200, make_rng(4))
    eye = np.einsum("sji,sjk->sik", U.conj(), U)
    assert np.max(np.abs(eye - np.eye(6))) < 1e-10
    u1 = haar_unitaries(1, 10_000, make_rng(5))[:, 0, 0]
    assert np.allclose(np.abs(u1), 1)
    assert abs(u1.mean()) < 3 * np.sqrt(1 / 10_000) * 1.5
    assert sample_haar(3, make_rng(6)).d == 3


def test_haar_left_invariance():
    from scipy.stats import ks_2samp

    rng = make_rng(7)
    V = sample_haar(4, rng).U
    U = haar_unitaries(4, 10_000, rng)
    a = np.abs(U[:, 0, 0])
    b = np.abs((V @ haar_unitaries(4, 10_000, rng))[:, 0, 0])
    assert ks_2samp(a, b).pvalue > 1e-3
    # |U_11|^2 is Beta(1, d-1): mean 1/d
    assert abs(np.mean(a**2) - 0.25) < 0.01


@pytest.mark.parametrize("ensemble", ["spherical", "gaussian"])
def test_expected_mass_circle(space20, ensemble):
    z = np.array([1.0, np.exp(0.7j), 0.0])
    rows = expected_mass_check(space20, z, 20_000, make_rng(8), ensemble=ensemble)
    scale = 1 / 21 if ensemble == "spherical" else 1.0
    assert [r["target"] for r in rows] == pytest.approx([21 * scale, 21 * scale, scale])
    assert not any(r["flagged"] for r in rows)


def test_expected_mass_total(disk_model):
    w, m = disk_model
    sp = BergmanSpace(degree=10, weight=w).fit_measure(m)
    C = sample_spherical(sp, make_rng(9), size=2000)
    mass = (np.abs(C @ sp.node_basis_.T) ** 2) @ sp.node_weights_
    assert np.allclose(mass, 1, atol=1e-10)
