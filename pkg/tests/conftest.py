import numpy as np
import pytest

from fuchsmono.elliptic import lattice_from_tau

TAUS = [0.2 + 1.1j, 1.3j]


@pytest.fixture(params=TAUS, ids=["tau_skew", "tau_rect"])
def lattice(request):
    return lattice_from_tau(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cell_points(L, rng, n, lo=0.1, hi=0.9):
    uv = rng.uniform(lo, hi, size=(n, 2))
    return [complex(2 * (a * L.omega1 + b * L.omega3)) for a, b in uv]
