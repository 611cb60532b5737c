import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import signal

from specfact import _kernels_py, kernels

try:
    from specfact import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

IMPLS = [pytest.param(_kernels_py, id="python"),
         pytest.param(_ckernels, id="cython",
                      marks=pytest.mark.skipif(_ckernels is None, reason="not compiled"))]


def stable_system(rng, n, m, q):
    A = rng.standard_normal((n, n))
    A *= 0.9 / max(np.abs(np.linalg.eigvals(A)).max(), 1e-12)
    return (np.ascontiguousarray(A), rng.standard_normal((n, m)), rng.standard_normal((q, n)),
            rng.standard_normal((q, m)))


@pytest.mark.parametrize("impl", IMPLS)
def test_iir_matches_lfilter(impl):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(500)
    b, a = np.array([1.0, 0.528, -0.1]), np.array([2.0, -0.51, 0.05])
    np.testing.assert_allclose(impl.iir_filter(b, a, x), signal.lfilter(b, a, x), atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
def test_ss_simulate_matches_dlsim(impl):
    rng = np.random.default_rng(1)
    A, B, C, D = stable_system(rng, 4, 2, 3)
    E = rng.standard_normal((200, 2))
    x0 = rng.standard_normal(4)
    Y, x = impl.ss_simulate(A, B, C, D, E, x0)
    _, Yr, Xr = signal.dlsim((A, B, C, D, 1), E, x0=x0)
    np.testing.assert_allclose(Y, Yr, atol=1e-10)
    np.testing.assert_allclose(x, A @ Xr[-1] + B @ E[-1], atol=1e-10)


def test_dispatch_normalizes_shapes():
    Y, x = kernels.ss_simulate([[0.5]], [1.0], [1.0], [0.0], np.ones(3))
    np.testing.assert_allclose(Y[:, 0], [0.0, 1.0, 1.5])
    assert x.shape == (1,)
    with pytest.raises(ValueError):
        kernels.iir_filter([1.0], [0.0, 1.0], [1.0])


def test_backend_selection_and_override():
    assert kernels.BACKEND in ("cython", "python")
    env = dict(os.environ, SPECFACT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from specfact import kernels; "
                          "print(kernels.BACKEND)"], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif(_ckernels is None, reason="not compiled")
@given(st.integers(0, 10_000), st.integers(0, 5), st.integers(1, 3))
def test_backends_agree(seed, n, m):
    rng = np.random.default_rng(seed)
    if n:
        A, B, C, D = stable_system(rng, n, m, 2)
    else:
        A, B, C = np.zeros((0, 0)), np.zeros((0, m)), np.zeros((2, 0))
        D = rng.standard_normal((2, m))
    E = rng.standard_normal((50, m))
    x0 = np.zeros(n)
    Yp, xp = _kernels_py.ss_simulate(A, B, C, D, E, x0)
    Yc, xc = _ckernels.ss_simulate(A, B, C, D, E, x0)
    np.testing.assert_allclose(Yc, Yp, atol=1e-12)
    np.testing.assert_allclose(xc, xp, atol=1e-12)
    b, a = rng.standard_normal(3), np.array([1.0, -0.3, 0.1])
    x = rng.standard_normal(60)
    np.testing.assert_allclose(_ckernels.iir_filter(b, a, x), _kernels_py.iir_filter(b, a, x),
                               atol=1e-12)
