import numpy as np
import pytest

import twcalc as tw


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def wong_cache():
    """Memoized Hermite-Wong grid functions; large grids are expensive."""
    cache = {}

    def get(pair, L=8.0, n=256):
        key = (pair, L, n)
        if key not in cache:
            cache[key] = tw.hermite_wong_eval(pair, L, n)
        return cache[key]

    return get


def l2_gap(f, g) -> float:
    """Grid L2 distance between two GridFunctions on the same grid."""
    return float(np.sqrt(np.sum(np.abs(f.values - g.values) ** 2) * f.cell))
