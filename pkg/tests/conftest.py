import numpy as np
import pytest

from resonant_kg.catalog import gaussian, hermite_gaussian
from resonant_kg.grid import make_grid
from resonant_kg.state import PhaseState


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid32():
    return make_grid(32, 16.0)


@pytest.fixture
def grid64():
    return make_grid(64, 32.0)


def plus_state(grid, mass, f1, f2):
    """Phase state whose plus components sample the given profiles."""
    return PhaseState.from_plus(grid, mass, None if f1 is None else f1.sample(grid),
                                None if f2 is None else f2.sample(grid))


@pytest.fixture
def small_state(grid64):
    return plus_state(grid64, 1.0, gaussian(0.3, 0.8, k0=(0.4, 0.0)),
                      hermite_gaussian(0.2, 0.8, (1, 0), x0=(0.5, -0.5)))


def convolution_oracle(grid, a, b):
    """Direct O(N^4) band-limited convolution, (fg)^(k) = (dk^2 / 2 pi) sum_p a(p) b(k - p)."""
    m = grid.dealias_mask
    mi = grid.mode_index
    pos = {int(v): i for i, v in enumerate(mi)}
    out = np.zeros(grid.shape, complex)
    idx = np.argwhere(m)
    for i1, j1 in idx:
        for i2, j2 in idx:
            kx = int(mi[i1] + mi[i2])
            ky = int(mi[j1] + mi[j2])
            if kx in pos and ky in pos and m[pos[kx], pos[ky]]:
                out[pos[kx], pos[ky]] += a[i1, j1] * b[i2, j2]
    return out * grid.dk ** 2 / (2 * np.pi)


# criterion number -> one summary line, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
