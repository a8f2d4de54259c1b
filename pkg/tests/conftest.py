import math

import numpy as np
import pytest

from seqkernel import ModelConfig, NoiseSpec, constant_function, demo_function, simulate_path

Z0 = 1.0 / math.sqrt(2.0)

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def gaussian_path():
    def make(n=2000, seed=0, coefficient=None, y0=0.0):
        coefficient = coefficient or demo_function(0.3)
        return simulate_path(ModelConfig(n, coefficient, NoiseSpec("gaussian_unit"), seed, y0))
    return make


@pytest.fixture
def constant_noiseless_path():
    """y_k = c^k y0: the noiseless constant-coefficient path, kept away from underflow."""
    def make(c, n=400, y0=1.0):
        from seqkernel import Path
        y = y0 * np.power(c, np.arange(n + 1, dtype=float)) if c != 0 else np.r_[y0, np.zeros(n)]
        return Path(y, ModelConfig(n, constant_function(c), NoiseSpec("gaussian_unit")), np.zeros(n))
    return make
