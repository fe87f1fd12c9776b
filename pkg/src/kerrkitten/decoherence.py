"""Kerr evolution under zero-temperature amplitude damping or pure dephasing.

The master equation is

    dρ/dt = -i[H, ρ] + γ (2 X ρ X† - X†X ρ - ρ X†X),   H = ω a†a + λ a†²a²,

with ``X = a`` (amplitude damping) or ``X = a†a`` (phase damping).  Both
channels have closed solutions in the number basis; the long-time limits
of the phase-damped Husimi, Wigner and tomogram follow from the preserved
diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from . import kernels
from .fock_state import DensityMatrix, ModelParams, _log_E, build_state, normalization
from .phase_space import evaluate_field, negativity_w, supported_field, wehrl_entropy
from .quad_engine import PhaseSpaceGrid
from .tomography import quadrature_wavefunctions

__all__ = [
    "DampingParams",
    "amp_damped_rho",
    "phase_damped_rho",
    "damped_rho",
    "asymptotic_populations",
    "asymptotic_rho_phase",
    "asymptotic_q_phase",
    "asymptotic_w_phase",
    "asymptotic_tomogram_phase",
    "DampedDiagnostics",
    "damped_diagnostics",
    "lindblad_rhs",
    "lindblad_rk4",
    "superoperators",
    "write_timeseries_csv",
    "AMP_ASYMPTOTIC_GT",
]

AMP_ASYMPTOTIC_GT = 12.0
_SMALL_ZT = 1e-8


@dataclass(frozen=True)
class DampingParams:
    """Damping rate ``gamma >= 0`` and channel ``kind`` (``"amplitude"`` or ``"phase"``)."""

    gamma: float
    kind: str = "amplitude"

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        if not (self.gamma >= 0.0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be finite and >= 0")
        if self.kind not in ("amplitude", "phase"):
            raise ValueError("kind must be 'amplitude' or 'phase'")


def _kerr_factor(n, m, params: ModelParams, t: float):
    """``exp(-iω(n-m)t - iλ(n-m)(n+m-1)t)``."""
    d = n - m
    return np.exp(-1j * (params.omega * d + params.lambda_kerr * d * (n + m - 1)) * t)


# --------------------------------------------------------------------------
# analytic channels


def _decay_factor(gamma: float, z: complex, t: float) -> complex:
    """``γ (1 - e^{-2zt}) / z``; its ``t``-linear expansion when ``|z| t`` is tiny."""
    if abs(z) * t < _SMALL_ZT:
        return 2.0 * gamma * t * (1.0 - z * t)
    return complex(-gamma * np.expm1(-2.0 * z * t) / z)


def amp_damped_rho(rho0: DensityMatrix, params: ModelParams, damp: DampingParams, t: float) -> DensityMatrix:
    """Amplitude-damped Kerr evolution of ``rho0`` over time ``t``.

    Along each diagonal ``d = n - m`` the solution reads

        ρ_nm(t) = K_nm e^{-γ(n+m)t} sum_ℓ sqrt((n+ℓ)!(m+ℓ)!/(n!m!))/ℓ! f_d^ℓ ρ_{n+ℓ,m+ℓ}(0),

    with the Kerr phase ``K_nm`` of :func:`_kerr_factor` and
    ``f_d = γ(1 - e^{-2(γ+iλd)t})/(γ+iλd)``.  The ℓ sum is finite because
    ``rho0`` is truncated.  All weights are formed in log space, so the
    binomial-like growth never overflows.
    """
    if damp.kind != "amplitude":
        raise ValueError("amp_damped_rho needs an amplitude DampingParams")
    if t < 0:
        raise ValueError("t must be >= 0")
    e = rho0.elements
    N = rho0.dim
    g = damp.gamma
    if t == 0:
        return DensityMatrix(e.astype(complex), dict(rho0.meta, channel="amplitude", gamma=g, t=t))
    lf = sp.gammaln(np.arange(N) + 1.0)
    out = np.zeros_like(e, dtype=complex)
    for d in range(-(N - 1), N):
        m = np.arange(max(0, -d), N - max(0, d))
        n = m + d
        s = e[n, m]
        L = s.size
        if g == 0.0 or not np.any(s):
            acc = s.astype(complex)
        else:
            f = _decay_factor(g, g + 1j * params.lambda_kerr * d, t)
            i, j = np.triu_indices(L)
            ell = j - i
            logw = (0.5 * (lf[n[j]] - lf[n[i]] + lf[m[j]] - lf[m[i]]) - sp.gammaln(ell + 1.0)
                    - g * (n[i] + m[i]) * t + ell * np.log(f))
            W = np.zeros((L, L), dtype=complex)
            with np.errstate(under="ignore"):
                W[i, j] = np.exp(logw)
            acc = W @ s
        out[n, m] = _kerr_factor(n, m, params, t) * acc
    meta = dict(rho0.meta, channel="amplitude", gamma=g, t=t)
    return DensityMatrix(out, meta)


def phase_damped_rho(rho0: DensityMatrix, params: ModelParams, damp: DampingParams, t: float) -> DensityMatrix:
    """Phase-damped Kerr evolution: ``ρ_nm`` times ``K_nm e^{-γ(n-m)²t}``."""
    if damp.kind != "phase":
        raise ValueError("phase_damped_rho needs a phase DampingParams")
    if t < 0:
        raise ValueError("t must be >= 0")
    n = np.arange(rho0.dim)[:, None]
    m = n.T
    fac = _kerr_factor(n, m, params, t) * np.exp(-damp.gamma * (n - m) ** 2 * t)
    meta = dict(rho0.meta, channel="phase", gamma=damp.gamma, t=t)
    return DensityMatrix(rho0.elements * fac, meta)


def damped_rho(rho0: DensityMatrix, params: ModelParams, damp: DampingParams, t: float) -> DensityMatrix:
    """Dispatch to the channel named by ``damp.kind``."""
    if damp.kind == "amplitude":
        return amp_damped_rho(rho0, params, damp, t)
    return phase_damped_rho(rho0, params, damp, t)


# --------------------------------------------------------------------------
# phase-damping asymptotics


def asymptotic_populations(params: ModelParams, eps_trunc: float = 1e-16) -> np.ndarray:
    """Photon-number populations of the initial state; dephasing preserves them."""
    c = build_state(params, eps_trunc).coeffs
    return np.abs(c) ** 2


def asymptotic_rho_phase(params: ModelParams, eps_trunc: float = 1e-16) -> DensityMatrix:
    """The diagonal long-time limit of the phase-damped density matrix."""
    return DensityMatrix(np.diag(asymptotic_populations(params, eps_trunc)).astype(complex), {"channel": "phase", "t": "inf"})


def _q_series(params: ModelParams, beta: np.ndarray, eps_trunc: float) -> np.ndarray:
    """``e^{-|β|²}/π sum_n p_n |β|^{2n}/n!`` with log-space terms."""
    pops = asymptotic_populations(params, eps_trunc)
    n = np.arange(pops.size)
    b2 = np.abs(beta).ravel() ** 2
    ok = pops > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        lb = np.log(b2)
        lt = (np.log(pops[ok])[:, None] + n[ok, None] * lb[None, :] - sp.gammaln(n[ok] + 1.0)[:, None] - b2[None, :])
    if n[ok][0] == 0:
        lt[0] = math.log(pops[0]) - b2
    with np.errstate(under="ignore"):
        return (np.exp(lt).sum(axis=0) / math.pi).reshape(np.shape(beta))


def _q_bessel(params: ModelParams, beta: np.ndarray) -> np.ndarray:
    """Bessel resummation of the asymptotic Husimi function.

    With ``x = -iα/sqrt(2μν)``, ``τ = |ν||β|²/(2μ)`` and
    ``S(τ) = sum_j τ^j H_j(x) H_j(x*) / j!²``,

        Q = N²|E|²/(πμ) e^{-|β|²} |β|^{2κ} ((1+|c|²) S(τ) + 2 Re(c) S(-τ)),

    and ``S(±τ)`` is the Neumann-type series
    ``sum_ℓ ε_ℓ (-1)^ℓ I_ℓ(2τ) 2cos(2ℓ arg x) Z_2ℓ(4|x| sqrt τ)`` with
    ``Z = I`` for ``+τ`` and ``Z = J`` for ``-τ`` (``ε_0 = 1/2``).
    Exponentially scaled Bessel functions keep every factor finite.
    """
    p = params
    if p.r == 0.0:
        raise ValueError("the Bessel route needs r > 0")
    mu, nu = p.mu, p.nu
    N = normalization(p)
    x = -1j * p.alpha / np.sqrt(2.0 * mu * nu)
    ax, phx = abs(x), np.angle(x)
    b = np.asarray(beta, dtype=complex).ravel()
    b2 = np.abs(b) ** 2
    tau = abs(nu) * b2 / (2.0 * mu)
    z = 4.0 * ax * np.sqrt(tau)
    lmax = int(2.0 * tau.max() + 10.0 * math.sqrt(2.0 * tau.max() + 1.0) + 40)
    s_plus = np.zeros_like(tau)
    s_minus = np.zeros_like(tau)
    for ell in range(lmax + 1):
        eps = 0.5 if ell == 0 else 1.0
        w = eps * (-1.0) ** ell * 2.0 * math.cos(2.0 * ell * phx) * sp.ive(ell, 2.0 * tau)
        s_plus += w * sp.ive(2 * ell, z)
        s_minus += w * sp.jv(2 * ell, z)
    # restore the exponential scales: I_ℓ(2τ) = ive e^{2τ}, I_2ℓ(z) = ive e^{z}
    log_pref = 2.0 * math.log(N) + 2.0 * _log_E(p).real - math.log(math.pi * mu) - b2 + 2.0 * tau
    with np.errstate(divide="ignore", under="ignore"):
        lk = p.kappa * np.log(b2) if p.kappa else 0.0
        q = ((1.0 + abs(p.c) ** 2) * s_plus * np.exp(log_pref + lk + z)
             + 2.0 * p.c.real * s_minus * np.exp(log_pref + lk))
    if p.kappa:
        q = np.where(b2 == 0, 0.0, q)
    return q.reshape(np.shape(beta))


def asymptotic_q_phase(params: ModelParams, beta, route: str = "series", eps_trunc: float = 1e-16):
    """Long-time Husimi function of the phase-damped state.

    Parameters
    ----------
    route : {"series", "bessel"}
        ``"series"`` sums the preserved populations directly;
        ``"bessel"`` uses the Bessel resummation (needs ``r > 0`` and loses
        relative accuracy far out where the alternating terms cancel).
    """
    b = np.asarray(beta, dtype=complex)
    if route == "series":
        out = _q_series(params, np.atleast_1d(b), eps_trunc)
    elif route == "bessel":
        out = _q_bessel(params, np.atleast_1d(b))
    else:
        raise ValueError("route must be 'series' or 'bessel'")
    return float(out.ravel()[0]) if b.ndim == 0 else out.reshape(b.shape)


def asymptotic_w_phase(params: ModelParams, beta, eps_trunc: float = 1e-16):
    """Long-time Wigner function ``(2/π) e^{-2|β|²} sum_n p_n (-1)^n L_n(4|β|²)``.

    The Laguerre form is the terminating hypergeometric sum and is regular
    at ``β = 0``.
    """
    pops = np.ascontiguousarray(asymptotic_populations(params, eps_trunc))
    b = np.asarray(beta, dtype=complex)
    out = kernels.quasi_diag_grid(pops, np.ascontiguousarray(np.atleast_1d(b).ravel()), 0.5)
    return float(out[0]) if b.ndim == 0 else out.reshape(b.shape)


def asymptotic_tomogram_phase(params: ModelParams, X, eps_trunc: float = 1e-16):
    """Long-time tomogram ``sum_n p_n ψ_n(X)²``; independent of ``φ``."""
    pops = asymptotic_populations(params, eps_trunc)
    X = np.asarray(X, dtype=float)
    psi = quadrature_wavefunctions(pops.size - 1, X)
    out = np.tensordot(pops, psi * psi, axes=1)
    return float(out) if X.ndim == 0 else out


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DampedDiagnostics:
    """Wehrl entropy and Wigner negativity of one density matrix with the grids used."""

    S_Q: float
    delta_W: float
    q_grid: dict
    w_grid: dict


def damped_diagnostics(rho_t: DensityMatrix, grid: PhaseSpaceGrid, workers: int = 1, adapt: bool = True) -> DampedDiagnostics:
    """``S_Q`` and ``δ_W`` of ``rho_t``.

    With ``adapt`` the grid is widened at fixed cell size until each field
    passes the support check (:func:`phase_space.supported_field`);
    otherwise ``grid`` is used as given and must pass it.
    """
    make = supported_field if adapt else evaluate_field
    q = make(rho_t, "Q", grid, workers=workers)
    w = make(rho_t, "W", grid, workers=workers)
    return DampedDiagnostics(wehrl_entropy(q), negativity_w(w), q.grid.meta(), w.grid.meta())


def write_timeseries_csv(path, rows, meta: dict | None = None) -> None:
    """CSV ``lambda_t, s_q, delta_w`` from ``(λt, S_Q, δ_W)`` rows."""
    with open(path, "w") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={v!r}\n")
        fh.write("lambda_t, s_q, delta_w\n")
        for lt, s, d in rows:
            fh.write(f"{lt!r}, {s!r}, {d!r}\n")


# --------------------------------------------------------------------------
# reference integrator and superoperators


def lindblad_rhs(rho: np.ndarray, params: ModelParams, damp: DampingParams) -> np.ndarray:
    """Right-hand side of the master equation in the number basis."""
    N = rho.shape[0]
    n = np.arange(N, dtype=float)
    E = params.omega * n + params.lambda_kerr * n * (n - 1.0)
    out = -1j * (E[:, None] - E[None, :]) * rho
    g = damp.gamma
    if damp.kind == "amplitude":
        s = np.sqrt(n[1:])
        jump = np.zeros_like(rho)
        jump[:-1, :-1] = s[:, None] * s[None, :] * rho[1:, 1:]
        out += g * (2.0 * jump - (n[:, None] + n[None, :]) * rho)
    else:
        out -= g * (n[:, None] - n[None, :]) ** 2 * rho
    return out


def lindblad_rk4(rho0: DensityMatrix, params: ModelParams, damp: DampingParams, t: float, dt: float = 1e-4) -> DensityMatrix:
    """Classical fourth-order Runge-Kutta integration of the master equation.

    ``dt`` is in units of ``1/λ``; the step is shrunk so that it divides ``t``.
    """
    steps = max(1, math.ceil(t * params.lambda_kerr / dt - 1e-9))
    h = t / steps
    y = rho0.elements.astype(complex)
    for _ in range(steps):
        k1 = lindblad_rhs(y, params, damp)
        k2 = lindblad_rhs(y + 0.5 * h * k1, params, damp)
        k3 = lindblad_rhs(y + 0.5 * h * k2, params, damp)
        k4 = lindblad_rhs(y + h * k3, params, damp)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return DensityMatrix(y, {"oracle": "rk4", "dt": h})


def superoperators(N: int, params: ModelParams, gamma: float) -> dict:
    """Matrices of ``S, J, L, R`` acting on row-major vectorized ``N x N`` matrices.

    ``S ρ = -i[H, ρ]``, ``J ρ = 2γ a ρ a†``, ``L ρ = -γ(a†a ρ + ρ a†a)``,
    ``R ρ = a†a ρ - ρ a†a``.
    """
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1)
    num = np.diag(np.arange(N, dtype=float))
    H = params.omega * num + params.lambda_kerr * num @ (num - np.eye(N))
    eye = np.eye(N)

    def left(A):
        return np.kron(A, eye)

    def right(B):
        return np.kron(eye, B.T)

    return {
        "S": -1j * (left(H) - right(H)),
        "J": 2.0 * gamma * left(a) @ right(a.conj().T),
        "L": -gamma * (left(num) + right(num)),
        "R": left(num) - right(num),
    }
