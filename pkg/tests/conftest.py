import numpy as np
import pytest

from prony_lowrank import kernels
from prony_lowrank.signal import random_regular_signal

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def regular_signals(rng, n, d_range, eta, gamma):
    out = []
    for _ in range(n):
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        eta_d = min(eta, 2.0 / (d - 1)) if d > 1 else eta
        out.append(random_regular_signal(rng, d, eta_d, gamma))
    return out


def ulp(x):
    return np.spacing(np.abs(np.asarray(x, dtype=float)))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
