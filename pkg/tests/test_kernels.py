import os
import subprocess
import sys

import numpy as np
import pytest

from saddlescar import kernels
from saddlescar.classical import _merged_schedule

compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="compiled extension not built")


def _inputs(n=400, k=3, seed=0):
    rng = np.random.default_rng(seed)
    kw, dw = _merged_schedule(4, n)
    A = rng.normal(size=(kw.size, k, k))
    H = np.ascontiguousarray(A + A.transpose(0, 2, 1))
    inv_m = np.ascontiguousarray(rng.uniform(0.5, 2.0, k))
    return H, kw, dw, inv_m


@compiled
def test_tangent_flow_backends_agree():
    H, kw, dw, inv_m = _inputs()
    a = kernels.python_backend.tangent_flow(H, kw, dw, inv_m, 1e-3)
    b = kernels.compiled_backend.tangent_flow(H, kw, dw, inv_m, 1e-3)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@compiled
def test_kdk_linear_backends_agree():
    H, kw, dw, inv_m = _inputs(k=2)
    q0, p0 = np.array([1.0, 0.2]), np.array([0.0, -0.1])
    a = kernels.python_backend.kdk_linear(H[0], q0, p0, kw, dw, inv_m, 1e-2, 50)
    b = kernels.compiled_backend.kdk_linear(H[0], q0, p0, kw, dw, inv_m, 1e-2, 50)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-14)


def test_tangent_flow_is_symplectic():
    H, kw, dw, inv_m = _inputs(n=200, k=2, seed=3)
    M = kernels.tangent_flow(H * 0.1, kw, dw, inv_m, 1e-2)
    J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    np.testing.assert_allclose(M.T @ J @ M, J, atol=1e-12)


def test_fallback_selected_by_environment():
    env = dict(os.environ, SADDLESCAR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from saddlescar import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
