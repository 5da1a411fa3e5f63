import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qhatm.engine import QhatmParams, default_grid
from qhatm.models import get_model

settings.register_profile(
    "qhatm",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qhatm")


def reference_params(model, order=3, alpha=1.0, hbar=-1.0, n=1, **grid_kw):
    return QhatmParams(alpha, hbar, n, order, default_grid(model, order, **grid_kw))


@pytest.fixture(scope="session")
def mb():
    return get_model("mb")


@pytest.fixture(scope="session")
def alw():
    return get_model("alw")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Acceptance outcomes, keyed by criterion number; printed after the run.
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion, title, ok, detail):
    ACCEPTANCE.setdefault(criterion, []).append((title, bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[criterion]
        ok = all(p[1] for p in parts)
        title = parts[0][0]
        detail = "; ".join(p[2] for p in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} [{criterion}] {title}: {detail}")
