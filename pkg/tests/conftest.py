import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twoweight.domain import CubeId

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_cubes(D):
    """Every (cube, cells) pair, built without the heap layout."""
    out = []
    for s, off in enumerate(D.offsets):
        for l in range(D.depth + 1):
            w = D.n >> l
            for i in range(1 << l):
                cells = [(off + i * w + j) % D.n for j in range(w)]
                out.append((CubeId(s, l, i), cells))
    return out


def brute_maximal(D, f, norm):
    """Per-cell sup of ``norm(cells)`` over all cubes containing the cell."""
    best = np.full(D.n, -np.inf)
    for _, cells in brute_cubes(D):
        v = norm(cells)
        for c in cells:
            best[c] = max(best[c], v)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
