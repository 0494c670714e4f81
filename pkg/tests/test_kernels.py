import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twoweight import kernels
from twoweight.youngfn import YoungFunction

pytestmark = pytest.mark.skipif(kernels.compiled is None, reason="compiled kernels not built")

YOUNG = [YoungFunction.power(2.0), YoungFunction.power(1.3), YoungFunction.log_bump(2.0, 1.0),
         YoungFunction.loglog_bump(3.0, 0.5, normalized=True), YoungFunction.table([(1, 1), (2, 4), (3, 9)])]


@given(st.integers(1, 9), st.integers(0, 2**32 - 1), st.integers(0, len(YOUNG) - 1))
def test_luxemburg_backends_agree(L, seed, k):
    rng = np.random.default_rng(seed)
    n = 1 << L
    g = rng.lognormal(0, 1.5, n) * (rng.random(n) < 0.8)
    m = rng.uniform(0.1, 2, n)
    code, params, tt, ta = YOUNG[k].kernel_spec()
    for level in range(L + 1):
        a = kernels.python.luxemburg_blocks(g, m, n >> level, code, params, tt, ta, 1e-10)
        b = kernels.compiled.luxemburg_blocks(g, m, n >> level, code, params, tt, ta, 1e-10)
        assert np.allclose(a, b, rtol=1e-9, atol=0)


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_tree_kernels_agree(L, seed):
    rng = np.random.default_rng(seed)
    n = 1 << L
    f, m = rng.random(n), rng.uniform(0.1, 1, n)
    assert np.allclose(kernels.python.heap_sums(f)[1:], kernels.compiled.heap_sums(f)[1:], rtol=1e-12)
    heap = rng.random(2 * n)
    off = int(rng.integers(n))
    a = kernels.python.heap_to_cells_max(heap, off, np.zeros(n))
    b = kernels.compiled.heap_to_cells_max(heap, off, np.zeros(n))
    assert np.array_equal(a, b)
    offsets = np.array([0, round(n / 3) % n], dtype=np.int64)
    assert np.allclose(kernels.python.hl_maximal(f, m, offsets), kernels.compiled.hl_maximal(f, m, offsets),
                       rtol=1e-12)


def test_env_forces_fallback():
    code = "import twoweight; print(twoweight.BACKEND)"
    env = dict(os.environ, TWOWEIGHT_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    env.pop("TWOWEIGHT_BACKEND")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "compiled"


def test_get():
    assert kernels.get("python") is kernels.python
    assert kernels.get() is kernels.active
    with pytest.raises(ValueError):
        kernels.get("gpu")
