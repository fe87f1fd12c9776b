import os
import subprocess
import sys

import numpy as np
import pytest

from kerrkitten import kernels
from kerrkitten.fock_state import ModelParams, build_state, density, evolve
from kerrkitten.kernels import get_backend

try:
    COMPILED = get_backend("compiled")
except ImportError:  # extension not built
    COMPILED = None

needs_compiled = pytest.mark.skipif(COMPILED is None, reason="compiled extension not built")
PY = get_backend("python")


@pytest.fixture(scope="module")
def case():
    rng = np.random.default_rng(11)
    beta = np.ascontiguousarray(rng.uniform(-4, 4, 300) + 1j * rng.uniform(-4, 4, 300))
    p = ModelParams(alpha=2.0, r=0.5, c=1.0, kappa=1)
    psi = evolve(build_state(p), p, 0.4)
    return beta, psi


@needs_compiled
@pytest.mark.parametrize("sigma", [0.5, 0.7, 1.0])
def test_quasi_grid_backends_agree(case, sigma):
    beta, psi = case
    rho = np.ascontiguousarray(density(psi).elements)
    a = COMPILED.quasi_grid(rho, beta, sigma)
    b = PY.quasi_grid(rho, beta, sigma)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("sigma", [0.5, 0.8, 1.0])
def test_diag_backends_agree(case, sigma):
    beta, psi = case
    pops = np.ascontiguousarray(np.abs(psi.coeffs) ** 2)
    np.testing.assert_allclose(COMPILED.quasi_diag_grid(pops, beta, sigma), PY.quasi_diag_grid(pops, beta, sigma),
                               rtol=1e-11, atol=1e-14)


@needs_compiled
def test_husimi_backends_agree(case):
    beta, psi = case
    c = np.ascontiguousarray(psi.coeffs)
    np.testing.assert_allclose(COMPILED.husimi_pure_grid(c, beta), PY.husimi_pure_grid(c, beta), rtol=1e-11, atol=1e-15)


@needs_compiled
def test_pairwise_sum_bit_identical():
    x = np.random.default_rng(5).standard_normal(100_003)
    assert COMPILED.pairwise_sum(x) == PY.pairwise_sum(x)


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_backend("gpu")


def test_environment_forces_python_backend():
    env = dict(os.environ, KERRKITTEN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import kerrkitten; print(kerrkitten.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in ("compiled", "python")
