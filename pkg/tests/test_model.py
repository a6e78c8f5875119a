import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qergodic import BergmanSpace, ConfigurationError, build_measure, build_weight
from qergodic.model import bernstein_markov_ratio, bernstein_markov_sequence


def test_zero_weight():
    w = build_weight("zero")
    z = np.array([0.3 + 0.1j, -2.0])
    assert np.all(w(z) == 0) and np.all(w.laplacian(z) == 0)


def test_abs_squared_weight():
    w = build_weight("abs_squared", c=1.0)
    assert w(np.array([1 + 1j]))[0] == pytest.approx(2.0)
    assert np.all(w.laplacian(np.array([0.0, 2.0j])) == 4.0)


def test_radial_power_at_one():
    w = build_weight("radial_power", p=4)
    assert w(np.array([1.0]))[0] == pytest.approx(1.0)
    assert w.laplacian(np.array([1.0]))[0] == pytest.approx(16.0)


@pytest.mark.parametrize("kind,params", [("abs_squared", {"c": 0.7}), ("radial_power", {"p": 4}),
                                         ("radial_power", {"p": 3})])
def test_finite_difference_laplacian(kind, params, rng):
    w = build_weight(kind, **params)
    z = rng.uniform(-2.5, 2.5, 100) + 1j * rng.uniform(-2.5, 2.5, 100)
    z = z[np.abs(z) > 0.05]
    exact = w.laplacian(z)
    assert np.allclose(w.finite_difference_laplacian(z), exact, rtol=1e-4)


def test_custom_table_matches_source():
    x = y = np.linspace(-3, 3, 61)
    X, Y = np.meshgrid(x, y, indexing="ij")
    w = build_weight("custom_table", x=x, y=y, values=X**2 + Y**2)
    z = np.array([0.35 - 0.8j, 1.1 + 0.2j])
    assert np.allclose(w(z), np.abs(z) ** 2, atol=1e-10)
    assert np.allclose(w.laplacian(z), 4.0, atol=1e-6)


def test_unknown_weight():
    with pytest.raises(ConfigurationError):
        build_weight("banana")


def test_circle_rule():
    m = build_measure("circle", 64)
    assert np.allclose(m.nodes, np.exp(2j * np.pi * np.arange(64) / 64))
    assert np.allclose(m.weights, 1 / 64)


def test_disk_second_moment():
    m = build_measure("disk", 32)
    assert abs(m.moment(1, 1) - 0.5) < 1e-10


def test_annulus_mass():
    m = build_measure("annulus", 32, radius=2.0, inner_radius=1.0)
    assert abs(m.total_mass - 1.0) < 1e-10
    assert np.all(m.contains(m.nodes))


@pytest.mark.parametrize("kind,kw", [("resolution", 3), ("annulus", None)])
def test_measure_errors(kind, kw):
    with pytest.raises(ConfigurationError):
        if kind == "resolution":
            build_measure("disk", kw)
        else:
            build_measure("annulus", 8, radius=1.0, inner_radius=1.5)


@given(kind=st.sampled_from(["disk", "annulus", "truncated_plane", "circle"]),
       n=st.integers(4, 24), j=st.integers(0, 12), k=st.integers(0, 12))
def test_quadrature_moments(kind, n, j, k):
    kw = {"radius": 1.5}
    if kind == "annulus":
        kw["inner_radius"] = 0.5
    m = build_measure(kind, n, **kw)
    assert np.all(m.weights > 0) and abs(m.total_mass - 1) < 1e-10
    assert np.all(m.contains(m.nodes))
    if kind == "circle":
        if abs(j - k) < n:
            assert abs(m.moment(j, k) - m.exact_moment(j, k)) < 1e-10 * max(1, 1.5 ** (j + k))
    elif j + k <= m.exactness_degree:
        assert abs(m.moment(j, k) - m.exact_moment(j, k)) < 1e-10 * max(1, 1.5 ** (j + k))


def test_bernstein_markov_circle():
    m = build_measure("circle", 64)
    for N in (0, 5, 20):
        sp = BergmanSpace(degree=N).fit_measure(m)
        assert bernstein_markov_ratio(sp) == pytest.approx(np.sqrt(N + 1))


def test_bernstein_markov_subexponential(disk_model):
    w, m = disk_model
    r = bernstein_markov_sequence(w, m, [8, 16, 32, 64])
    rate = np.log(r) / np.array([8, 16, 32, 64])
    assert np.all(np.diff(rate) < 0) and rate[-1] < 0.1


def test_rotation_leaves_scalars(builtin_model):
    w, m = builtin_model
    theta = 0.731
    a = BergmanSpace(degree=12, weight=w).fit_measure(m)
    b = BergmanSpace(degree=12, weight=w).fit_measure(m.rotated(theta))
    z = np.array([0.3 + 0.4j, 1.2 - 0.1j])
    assert bernstein_markov_ratio(a) == pytest.approx(bernstein_markov_ratio(b), rel=1e-12)
    assert np.allclose(a.density(z), b.density(z * np.exp(1j * theta)), rtol=1e-10)


def test_measure_csv(tmp_path):
    m = build_measure("circle", 8)
    m.to_csv(tmp_path / "m.csv")
    data = np.loadtxt(tmp_path / "m.csv", delimiter=",", skiprows=1)
    assert data.shape == (8, 3) and np.allclose(data[:, 2], 1 / 8)
