"""Fiducial kitten superpositions and their distance to the evolving state.

A kitten state is ``C sum_j f_j a†^κ |ξ_j, α_j>`` with the components rotated
by ``ϑ̃ + 2πj/p``.  For ``c = 1`` the Kerr-evolved cat state passes through
such superpositions at ``λt = π/(2p)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DegenerateState, UnsupportedSelection, WrongKappa
from .fock_state import (
    DEFAULT_EPS_TRUNC,
    DensityMatrix,
    FockState,
    ModelParams,
    _tail_bound,
    build_state,
    coeff_vector,
    evolve,
    overlap_closed,
)
from .phase_space import evaluate_field
from .quad_engine import PhaseSpaceGrid, grid_sum

__all__ = [
    "KittenSpec",
    "kitten_selection",
    "component_params",
    "fiducial_norm",
    "fiducial_norm_k1",
    "fiducial_state",
    "wigner_kitten_k1",
    "hs_distance",
    "hs_distance_phase_space",
    "kitten_time",
    "scan_times",
    "hs_scan",
    "collapse_width",
    "write_scan_csv",
]


@dataclass(frozen=True)
class KittenSpec:
    """Lobe count ``p``, weights ``f`` and supplementary angle ``theta_rot`` over ``params``."""

    p: int
    f: tuple
    theta_rot: float
    params: ModelParams

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("p must be a positive integer")
        object.__setattr__(self, "f", tuple(complex(v) for v in self.f))
        if len(self.f) != self.p:
            raise ValueError("need one weight per lobe")

    def angles(self) -> np.ndarray:
        return self.theta_rot + 2.0 * math.pi * np.arange(self.p) / self.p


def kitten_selection(p: int, params: ModelParams) -> KittenSpec:
    """Weights and rotation matching the ``c = 1`` state at ``λt = π/(2p)``.

    ``f_j = exp(iπj²(p+2)/p)`` and ``ϑ̃ = π(p - 2κ + 1 - δ)/(2p)``.

    Raises
    ------
    UnsupportedSelection
        For ``c != 1`` or odd ``p``.
    """
    if params.c != 1:
        raise UnsupportedSelection("automatic kitten selection is only available for c = 1")
    if int(p) != p or p < 2 or p % 2:
        raise UnsupportedSelection("automatic kitten selection needs an even p >= 2")
    j = np.arange(p)
    f = np.exp(1j * math.pi * (j * j % (2 * p)) * (p + 2) / p)
    theta = math.pi / (2 * p) * (p - 2 * params.kappa + 1 - params.delta)
    return KittenSpec(int(p), tuple(f), theta, params)


def component_params(spec: KittenSpec) -> list[ModelParams]:
    """Rotated coordinates ``ξ_j = ξ e^{2iθ_j}``, ``α_j = α e^{iθ_j}`` as parameter sets."""
    base = spec.params
    return [base.replace(alpha=base.alpha * cmath.exp(1j * th), theta_sq=base.theta_sq + 2.0 * th)
            for th in spec.angles()]


# --------------------------------------------------------------------------
# state and normalization


def fiducial_norm(spec: KittenSpec) -> float:
    """Normalization ``C`` from the closed bilinear overlaps of the components."""
    cps = component_params(spec)
    total = 0j
    scale = 0.0
    for fj, pj in zip(spec.f, cps):
        for fl, pl in zip(spec.f, cps):
            ov = fj * fl.conjugate() * overlap_closed(pj, pl)
            total += ov
            scale += abs(ov)
    if not total.real > 1e-13 * scale:
        raise DegenerateState("fiducial superposition vanishes")
    return 1.0 / math.sqrt(total.real)


def _u_jl(nu_j, nu_l, mu):
    return mu * mu - nu_j * nu_l.conjugate()


def fiducial_norm_k1(spec: KittenSpec) -> float:
    """Normalization of a ``κ = 1`` kitten from its Gaussian-moment closed form.

    Each pair contributes ``U^{-5/2} exp(-N/U) (U² + α_jα_ℓ*(μ²+ν_jν_ℓ*)
    + μ(α_j²ν_ℓ* + α_ℓ*²ν_j) + ν_jν_ℓ* U)`` with ``U = μ² - ν_jν_ℓ*``.
    ``Re U > 0``, so the principal branch of ``U^{5/2}`` is continuous.
    """
    if spec.params.kappa != 1:
        raise WrongKappa("closed kitten normalization is implemented for kappa = 1")
    mu = spec.params.mu
    cps = component_params(spec)
    a2 = abs(spec.params.alpha) ** 2
    total = 0j
    for fj, pj in zip(spec.f, cps):
        for fl, pl in zip(spec.f, cps):
            aj, al = pj.alpha, pl.alpha.conjugate()
            nj, nl = pj.nu, pl.nu.conjugate()
            U = _u_jl(pj.nu, pl.nu, mu)
            Nj = a2 * U - aj * al + (U * (aj * aj * pj.nu.conjugate() + al * al * pl.nu) - aj * aj * nl - al * al * nj) / (2.0 * mu)
            amp = U * U + aj * al * (mu * mu + nj * nl) + mu * (aj * aj * nl + al * al * nj) + nj * nl * U
            total += fj * fl.conjugate() * U ** -2.5 * cmath.exp(-Nj / U) * amp
    if not total.real > 0:
        raise DegenerateState("fiducial superposition vanishes")
    return 1.0 / math.sqrt(total.real)


def fiducial_state(spec: KittenSpec, eps_trunc: float = DEFAULT_EPS_TRUNC) -> FockState:
    """Fock coefficients ``C sum_j f_j A_{n,κ}(ξ_j, α_j)``, truncated like :func:`build_state`."""
    if not 1e-300 < eps_trunc <= 1e-6:
        raise ValueError("eps_trunc must lie in (0, 1e-6]")
    C = fiducial_norm(spec)
    cps = component_params(spec)
    N = max(64, spec.params.kappa + 32)
    while True:
        coeffs = C * sum(fj * coeff_vector(pj, N) for fj, pj in zip(spec.f, cps))
        w = np.abs(coeffs) ** 2
        if _tail_bound(w, 1.0) < eps_trunc:
            break
        if N > 20000:
            raise DegenerateState("fiducial state does not fit in 20000 Fock levels")
        N *= 2
    lo, hi = spec.params.kappa, N
    while lo < hi:
        mid = (lo + hi) // 2
        if _tail_bound(w[: mid + 1], 1.0) < eps_trunc:
            hi = mid
        else:
            lo = mid + 1
    return FockState(coeffs[: lo + 1].copy(), _tail_bound(w[: lo + 1], 1.0), spec.params)


def wigner_kitten_k1(spec: KittenSpec, beta):
    """Closed-form Wigner function of a ``κ = 1`` kitten state.

    Sums ``(2/π) f_j f_ℓ* H_jℓ U^{-5/2} exp(-2|β|² - F_jℓ)`` over component
    pairs, with ``𝓕_j = α_j + 2β*ν_j`` and ``𝖥_j = α_j + β*ν_j``.  The
    imaginary part must cancel (checked at 1e-9 of the magnitude sum).

    Raises
    ------
    WrongKappa
        For ``κ != 1``.
    """
    if spec.params.kappa != 1:
        raise WrongKappa("closed kitten Wigner function is implemented for kappa = 1")
    b = np.asarray(beta, dtype=complex)
    bc = b.conjugate()
    mu = spec.params.mu
    a2 = abs(spec.params.alpha) ** 2
    C = fiducial_norm(spec)
    cps = component_params(spec)
    acc = np.zeros(b.shape, dtype=complex)
    mag = np.zeros(b.shape)
    for fj, pj in zip(spec.f, cps):
        for fl, pl in zip(spec.f, cps):
            aj, alc = pj.alpha, pl.alpha.conjugate()
            nj, nlc = pj.nu, pl.nu.conjugate()
            U = _u_jl(pj.nu, pl.nu, mu)
            Fj = aj + 2.0 * bc * nj
            Flc = alc + 2.0 * b * nlc
            Gj = aj + bc * nj
            Glc = alc + b * nlc
            F = (a2 + (aj * aj * pj.nu.conjugate() + alc * alc * pl.nu) / (2.0 * mu)
                 - 2.0 * bc * Gj / mu - 2.0 * b * Glc / mu
                 + (Fj * Flc - nlc * Fj * Fj / (2.0 * mu) - nj * Flc * Flc / (2.0 * mu)) / U)
            H = ((mu * mu + nj * nlc) * Fj * Flc - mu * nlc * Fj * Fj - mu * nj * Flc * Flc
                 - U * (aj * alc - mu * mu * (4.0 * np.abs(b) ** 2 - 1.0) - Fj * Flc + 2.0 * mu * bc * Fj + 2.0 * mu * b * Flc))
            with np.errstate(under="ignore"):
                term = fj * fl.conjugate() * H * U ** -2.5 * np.exp(-2.0 * np.abs(b) ** 2 - F)
            acc += term
            mag += np.abs(term)
    if np.any(np.abs(acc.imag) > 1e-9 * np.maximum(mag, 1e-300)):
        raise ArithmeticError("kitten Wigner function has a non-vanishing imaginary part")
    out = 2.0 / math.pi * C * C * acc.real
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# distances


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, FockState):
        return np.outer(x.coeffs, x.coeffs.conj())
    if isinstance(x, DensityMatrix):
        return x.elements
    raise TypeError("expected a FockState or DensityMatrix")


def hs_distance(rho1, rho2) -> float:
    """``sqrt(Tr (ρ₁ - ρ₂)²)``; the smaller matrix is zero-padded."""
    a, b = _as_matrix(rho1), _as_matrix(rho2)
    n = max(a.shape[0], b.shape[0])
    d = np.zeros((n, n), dtype=complex)
    d[: a.shape[0], : a.shape[0]] += a
    d[: b.shape[0], : b.shape[0]] -= b
    return math.sqrt(max(float(np.sum(np.abs(d) ** 2)), 0.0))


def hs_distance_phase_space(rho1, rho2, grid: PhaseSpaceGrid, workers: int = 1) -> float:
    """``sqrt(π int (W₁ - W₂)² d²β)`` on ``grid``."""
    w1 = evaluate_field(rho1, "W", grid, workers=workers, use_parity=False).values
    w2 = evaluate_field(rho2, "W", grid, workers=workers, use_parity=False).values
    return math.sqrt(math.pi * grid_sum((w1 - w2) ** 2, grid.cell_area))


def kitten_time(p: int, lambda_kerr: float = 1.0) -> float:
    """Time ``π/(2pλ)`` at which the ``c = 1`` state forms ``p`` kittens."""
    return math.pi / (2 * p * lambda_kerr)


def scan_times(t_start: float = 0.0, t_end: float = math.pi / 4, points_per_period: int = 600,
               period: float = math.pi / 4) -> np.ndarray:
    """Uniform ``λt`` samples with ``points_per_period`` intervals per ``period``, endpoints included."""
    n = max(1, int(round((t_end - t_start) / period * points_per_period)))
    return np.linspace(t_start, t_end, n + 1)


def _pure_hs(state: FockState, params: ModelParams, fid: np.ndarray, t: float) -> float:
    c = evolve(state, params, t / params.lambda_kerr).coeffs
    n = min(c.size, fid.size)
    ov = np.vdot(fid[:n], c[:n])
    # both states are unit vectors up to truncation; use their actual norms
    a2 = float(np.vdot(c, c).real)
    b2 = float(np.vdot(fid, fid).real)
    return math.sqrt(max(a2 * a2 + b2 * b2 - 2.0 * abs(ov) ** 2, 0.0))


def hs_scan(params: ModelParams, spec: KittenSpec, times, eps_trunc: float = 1e-16) -> np.ndarray:
    """``d_HS(ρ(t), ρ̃)`` for every ``λt`` in ``times`` (pure-state overlap form)."""
    state = build_state(params, eps_trunc)
    fid = fiducial_state(spec, eps_trunc).coeffs
    return np.array([_pure_hs(state, params, fid, float(t)) for t in np.asarray(times, dtype=float)])


def collapse_width(params: ModelParams, spec: KittenSpec, t_center: float, threshold: float = 0.1,
                   eps_trunc: float = 1e-16, search: float = math.pi / 8) -> float:
    """Width of the interval around ``t_center`` where ``d_HS < threshold``.

    The edges are bracketed on a fine scan and refined with Brent's method.
    """
    state = build_state(params, eps_trunc)
    fid = fiducial_state(spec, eps_trunc).coeffs
    g = lambda t: _pure_hs(state, params, fid, t) - threshold  # noqa: E731
    if g(t_center) >= 0:
        return 0.0
    edges = []
    for sgn in (-1.0, 1.0):
        ts = t_center + sgn * np.linspace(0.0, search, 1201)
        vals = np.array([g(t) for t in ts])
        k = np.nonzero(vals >= 0)[0]
        if k.size == 0:
            raise ValueError("distance stays below the threshold over the search window")
        i = k[0]
        edges.append(optimize.brentq(g, min(ts[i - 1], ts[i]), max(ts[i - 1], ts[i]), xtol=1e-14))
    return edges[1] - edges[0]


def write_scan_csv(path, times, dist, meta: dict | None = None) -> None:
    """CSV ``lambda_t, d_hs``."""
    with open(path, "w") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={v!r}\n")
        fh.write("lambda_t, d_hs\n")
        for t, d in zip(times, dist):
            fh.write(f"{float(t)!r}, {float(d)!r}\n")
