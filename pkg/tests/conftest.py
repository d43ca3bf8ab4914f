import numpy as np
import pytest

from infoplane.gaussian import GaussianModel
from infoplane.regression import RegressionPlane


def random_regression_plane(rng: np.random.Generator, noisy: bool = False) -> RegressionPlane:
    """Random plane with moderate scales so identity checks stay well above
    float noise."""
    var_y = float(rng.uniform(0.05, 5.0))
    var_a = float(rng.uniform(0.05, 5.0))
    rho = float(rng.uniform(-0.999, 0.999))
    return RegressionPlane(var_y=var_y, var_a=var_a, cov_ya=rho * np.sqrt(var_y * var_a), noisy=noisy)


def random_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = rng.uniform(0.2, 4.0, size=dim)
    return (q * eigs) @ q.T


def random_gaussian_model(rng: np.random.Generator, dim: int) -> GaussianModel:
    sigma = random_spd(rng, dim)
    a = rng.standard_normal(dim)
    y = rng.standard_normal(dim)
    while np.linalg.norm(a) < 1e-3:
        a = rng.standard_normal(dim)
    while np.linalg.norm(y) < 1e-3:
        y = rng.standard_normal(dim)
    return GaussianModel(dim=dim, mean=rng.standard_normal(dim), sigma=sigma, a=a, y=y)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    entries = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid and rep.when == "call":
                name = nodeid.split("::")[-1]
                number = int(name.split("_")[2])
                entries.append((number, name, "PASS" if status == "passed" else "FAIL"))
    if not entries:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, name, outcome in sorted(entries):
        terminalreporter.write_line(f"criterion {number:2d}: {outcome}  ({name})")
