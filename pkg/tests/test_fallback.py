"""Numba kernels against the pure-numpy fallback."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from lqgnest import _accel, excursion, levy
from lqgnest.params import ModelParams

pytestmark = pytest.mark.skipif(not _accel.USE_NUMBA, reason="numba backend disabled")


def _close(a, b, k=4.0):
    return abs(a.estimate - b.estimate) <= k * math.hypot(a.stderr, b.stderr)


def test_jump_sum_parity():
    p = ModelParams(6.0, 0.0)
    a = levy.jump_sum_moments(p, 1.4, n=8000, rng=np.random.default_rng(1), backend="numba").ratio
    b = levy.jump_sum_moments(p, 1.4, n=8000, rng=np.random.default_rng(2), backend="numpy").ratio
    assert _close(a, b)


def test_excursion_parity():
    a = excursion.excursion_product_functional(1.5, 1.0, 1.0, n=10000, seed=1, backend="numba")
    b = excursion.excursion_product_functional(1.5, 1.0, 1.0, n=10000, seed=2, backend="numpy")
    assert _close(a, b)


def test_env_switch_selects_numpy():
    env = dict(os.environ, LQGNEST_NO_NUMBA="1")
    code = "import lqgnest, lqgnest._accel as a; print(lqgnest.backend(), a.kernels().__name__)"
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    assert r.stdout.split() == ["numpy", "lqgnest._fallback"]
    with pytest.raises(ValueError):
        _accel.kernels("cuda")
