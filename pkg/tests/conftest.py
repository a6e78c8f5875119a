import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qergodic import GridSpec, build_measure, build_weight, envelope_oracle, equilibrium_measure

settings.register_profile(
    "qergodic", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("qergodic")

SMALL_GRID = GridSpec.square(2.5, 101)


@pytest.fixture(scope="session")
def circle_model():
    return build_weight("zero"), build_measure("circle", 256)


@pytest.fixture(scope="session")
def disk_model():
    return build_weight("abs_squared"), build_measure("disk", 96, radius=3.0)


@pytest.fixture(scope="session", params=["circle", "disk"])
def builtin_model(request, circle_model, disk_model):
    return circle_model if request.param == "circle" else disk_model


@pytest.fixture(scope="session")
def small_envelopes(circle_model, disk_model):
    out = {}
    for name, (w, m) in {"circle": circle_model, "disk": disk_model}.items():
        env = envelope_oracle(w, m, SMALL_GRID)
        out[name] = (env, equilibrium_measure(env, w))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


CRITERIA = {}


@pytest.fixture(scope="session")
def record_criterion():
    def record(k, ok, detail):
        CRITERIA[k] = (bool(ok), detail)
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, 12):
        ok, detail = CRITERIA.get(k, (False, "(not run)"))
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
