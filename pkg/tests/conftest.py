import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def orthonormal_design(rng, n, p):
    """Columns with En[x_j^2] = 1 and En[x_j x_k] = 0."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return np.sqrt(n) * Q


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and report.nodeid.startswith("tests/test_acceptance.py"):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome, detail in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}")
