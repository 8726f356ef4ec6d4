import os
import subprocess
import sys

import numpy as np
import pytest

from noma_ee import kernels
from noma_ee._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def gains():
    return np.random.default_rng(0).exponential(0.05, size=(20_001, 4))


@needs_numba
def test_moments_paths_agree(gains):
    gamma = np.array([0.4, 0.3, 0.2, 0.1])
    residual = np.array([0.6, 0.3, 0.1, 0.0])
    a = kernels._mc_sum_rate_moments_numpy(gains, 31.6, gamma, residual)
    b = kernels._mc_sum_rate_moments_numba(gains, 31.6, gamma, residual)
    assert a[0] == pytest.approx(b[0], rel=1e-13)
    assert a[1] == pytest.approx(b[1], rel=1e-10)
    np.testing.assert_allclose(a[2], b[2], rtol=1e-13)


@needs_numba
def test_mixture_paths_agree():
    x = np.linspace(0, 3, 100_002).reshape(7, -1)[:, ::3]
    w = np.random.default_rng(1).random(50)
    r = 1 + 100 * np.random.default_rng(2).random(50)
    np.testing.assert_allclose(kernels._exp_mixture_numpy(x, w, r),
                               kernels._exp_mixture_numba(x, w, r), rtol=1e-13)


def test_dispatch_follows_flag(backend, gains):
    gamma = np.array([0.4, 0.3, 0.2, 0.1])
    residual = np.array([0.6, 0.3, 0.1, 0.0])
    mean, m2, per_user = kernels.mc_sum_rate_moments(gains, 10.0, gamma, residual)
    assert mean == pytest.approx(per_user.sum(), rel=1e-12)
    assert m2 > 0


def test_env_flag_selects_numpy():
    env = dict(os.environ, NOMA_EE_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "import noma_ee; print(noma_ee.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
