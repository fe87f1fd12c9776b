"""Shared strategies and brute-force oracles.

The oracles build states and operators as dense matrices with
``scipy.linalg.expm`` in a truncated number basis, so they share no code
with the library's recurrences and closed forms.
"""

import math
import os

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kerrkitten.fock_state import DensityMatrix, ModelParams, normalization
from kerrkitten.errors import DegenerateState

settings.register_profile(
    "default",
    max_examples=20,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.filter_too_much],
)
settings.register_profile("thorough", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile(os.environ.get("KERRKITTEN_HYPOTHESIS", "default"))


# --------------------------------------------------------------------------
# strategies


def complex_in_disc(radius):
    return st.builds(lambda m, a: m * complex(math.cos(a), math.sin(a)),
                     st.floats(0.0, radius), st.floats(0.0, 2 * math.pi))


def _valid(p):
    try:
        normalization(p)
    except DegenerateState:
        return False
    return True


def model_params(max_alpha=2.5, max_r=0.8, max_kappa=3, cs=(1.0, -1.0, 0.0, 0.5 + 0.3j, 1j, -0.4)):
    return st.builds(
        ModelParams,
        alpha=complex_in_disc(max_alpha),
        r=st.floats(0.0, max_r),
        theta_sq=st.floats(0.0, 2 * math.pi),
        c=st.sampled_from(cs),
        kappa=st.integers(0, max_kappa),
        omega=st.sampled_from((1.0, 0.7, 2.0)),
    ).filter(_valid)


# --------------------------------------------------------------------------
# dense oracles


def ladder(N):
    return np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)


def displacement(beta, N):
    a = ladder(N)
    return sl.expm(beta * a.T - np.conj(beta) * a)


def oracle_state(p: ModelParams, N=200):
    """Normalized ``a†^κ S(ξ)D(α)|0> + c a†^κ S(ξ)D(-α)|0>`` by matrix exponentials."""
    a = ladder(N)
    ad = a.T
    S = sl.expm(0.5 * (p.xi * ad @ ad - np.conj(p.xi) * a @ a))
    v0 = np.zeros(N, complex)
    v0[0] = 1.0
    add = np.linalg.matrix_power(ad, p.kappa)
    v = add @ S @ displacement(p.alpha, N) @ v0 + p.c * (add @ S @ displacement(-p.alpha, N) @ v0)
    return v / np.linalg.norm(v)


def displaced_diagonal(rho: np.ndarray, beta, pad=100):
    """``<β, n|ρ|β, n>`` for all ``n`` from the displaced matrix ``D(β)† ρ D(β)``."""
    M = rho.shape[0] + pad
    big = np.zeros((M, M), complex)
    big[: rho.shape[0], : rho.shape[0]] = rho
    D = displacement(beta, M)
    return np.real(np.diag(D.conj().T @ big @ D))[: rho.shape[0] + pad // 2]


def oracle_r(rho: np.ndarray, beta, sigma):
    """``R(β; σ) = (πσ)⁻¹ sum_n ((σ-1)/σ)^n <β,n|ρ|β,n>`` (needs ``σ >= 1/2``)."""
    d = displaced_diagonal(rho, beta)
    x = (sigma - 1.0) / sigma
    return float(np.sum(x ** np.arange(d.size) * d) / (math.pi * sigma))


def oracle_wigner(rho, beta):
    return oracle_r(rho, beta, 0.5)


def fock_rho(n, dim=None):
    dim = dim or n + 1
    e = np.zeros((dim, dim), complex)
    e[n, n] = 1.0
    return DensityMatrix(e)


@pytest.fixture
def vacuum():
    return fock_rho(0)


def rel_err(a, b, floor=0.0):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


# --------------------------------------------------------------------------
# acceptance summary

SUITE_BUDGET_S = 900.0
_ACCEPTANCE: list = []
_START: list = []


def pytest_sessionstart(session):
    import time

    _START.append(time.perf_counter())


@pytest.fixture(scope="session")
def acceptance():
    """Callable ``record(criterion, passed, detail)`` collected for the summary."""

    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    import time

    if not _ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _START[0] if _START else float("nan")
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        if criterion.startswith("8 "):
            ok = passed and elapsed < SUITE_BUDGET_S
            detail = f"{detail}; session runtime {elapsed:.0f} s (budget {SUITE_BUDGET_S:.0f} s)"
            passed = ok
        tr.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}")
