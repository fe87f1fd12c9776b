"""Optical tomograms ``Ω(X, φ)``: rotated-quadrature probability densities.

The quadrature is ``X_φ = (a e^{-iφ} + a† e^{iφ}) / sqrt 2``.  Tomograms of
arbitrary density matrices use the Fock series; pure evolving states at
``λt ∈ {0, π/4, π/8}`` also have closed forms built from the finite
superposition of rotated components returned by
:func:`fock_state.kerr_components`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock_state import DensityMatrix, FockState, ModelParams, _log_E, kerr_components, normalization
from .quad_engine import integrate_1d, simpson_weights

__all__ = [
    "Tomogram",
    "quadrature_wavefunctions",
    "tomogram_series",
    "tomogram_closed",
    "tomogram_t0",
    "tomogram_quarter",
    "tomogram_eighth",
    "default_x_grid",
    "tomogram_surface",
    "phi_normalization",
    "write_tomogram_csv",
]

_PI_M14 = math.pi ** -0.25


@dataclass(frozen=True)
class Tomogram:
    """Tomogram samples ``values[i, k] = Ω(x_grid[i], phi_grid[k])``."""

    x_grid: np.ndarray
    phi_grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def normalization(self) -> np.ndarray:
        """Simpson integral over ``X`` for every ``φ`` (needs an odd uniform ``x_grid``)."""
        x = self.x_grid
        w = simpson_weights(x.size, float(x[1] - x[0]))
        return w @ self.values


def default_x_grid(params: ModelParams, points: int = 801) -> np.ndarray:
    """Uniform grid on ``[-X_max, X_max]``.

    ``X_max = sqrt 2 |α| e^r + (7 + sqrt(2κ)) max(1, e^r/sqrt 2)``: the
    largest marginal centre plus a margin in units of the widest marginal
    spread, enough for per-φ normalization to 1e-12 at moderate squeezing.
    """
    er = math.exp(params.r)
    spread = max(1.0, er / math.sqrt(2.0))
    xm = math.sqrt(2.0) * abs(params.alpha) * er + (7.0 + math.sqrt(2.0 * params.kappa)) * spread
    return np.linspace(-xm, xm, points)


# --------------------------------------------------------------------------
# Fock series


def quadrature_wavefunctions(n_max: int, X) -> np.ndarray:
    """``ψ_n(X) = π^{-1/4} e^{-X²/2} H_n(X) / sqrt(2^n n!)``, shape ``(n_max + 1,) + X.shape``.

    The Gaussian is folded into the starting value so the normalized
    recurrence stays in range for large orders.
    """
    X = np.asarray(X, dtype=float)
    out = np.empty((n_max + 1,) + X.shape)
    with np.errstate(under="ignore"):
        out[0] = _PI_M14 * np.exp(-0.5 * X * X)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * X * out[0]
    for n in range(1, n_max):
        out[n + 1] = (math.sqrt(2.0) * X * out[n] - math.sqrt(n) * out[n - 1]) / math.sqrt(n + 1)
    return out


def tomogram_series(source, X, phi) -> np.ndarray | float:
    """``Ω(X, φ) = sum_nm e^{-iφ(n-m)} ψ_n(X) ψ_m(X) ρ_nm`` for a state or density matrix.

    ``X`` and ``phi`` broadcast against each other.  Values below ``-1e-10``
    raise; smaller negative roundoff is clipped to zero.
    """
    X = np.asarray(X, dtype=float)
    phi = np.asarray(phi, dtype=float)
    Xb, Pb = np.broadcast_arrays(X, phi)
    if isinstance(source, FockState):
        c = source.coeffs
        psi = quadrature_wavefunctions(c.size - 1, Xb)
        n = np.arange(c.size).reshape((-1,) + (1,) * Xb.ndim)
        amp = np.sum(c.reshape(n.shape) * np.exp(-1j * n * Pb) * psi, axis=0)
        val = np.abs(amp) ** 2
    elif isinstance(source, DensityMatrix):
        e = source.elements
        psi = quadrature_wavefunctions(source.n_max, Xb.ravel())
        n = np.arange(source.dim)[:, None]
        v = np.exp(-1j * n * Pb.ravel()[None, :]) * psi
        val = np.real(np.einsum("np,nm,mp->p", v, e, v.conj())).reshape(Xb.shape)
    else:
        raise TypeError("expected a FockState or DensityMatrix")
    if np.any(val < -1e-10):
        raise ArithmeticError("tomogram series produced a negative density")
    val = np.clip(val, 0.0, None)
    return float(val) if val.ndim == 0 else val


# --------------------------------------------------------------------------
# closed forms


def _component_amplitude(p: ModelParams, X: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """``<X, φ| a†^κ |ξ, α>`` times ``π^{1/4} e^{X²/2}``.

    With ``s² = 1 + (ν/μ) e^{-2iφ}``, ``x₀ = α e^{-iφ} / (sqrt 2 μ)`` and
    ``g² = -(ν/μ) e^{-2iφ}`` the quadrature amplitude of the squeezed
    coherent state is ``E/sqrt(μ s²) exp(-(g²X² - 2x₀X + x₀²)/s²)``;
    photon addition contributes ``e^{-iκφ} H_κ((X - x₀)/s) / (2^{κ/2} s^κ)``.
    The root of ``s²`` is principal, which is continuous because
    ``Re s² > 0``.
    """
    mu, nu, al, k = p.mu, p.nu, p.alpha, p.kappa
    rot = np.exp(-1j * phi)
    s2 = 1.0 + (nu / mu) * rot * rot
    s = np.sqrt(s2)
    x0 = al * rot / (math.sqrt(2.0) * mu)
    g2 = -(nu / mu) * rot * rot
    expo = _log_E(p) - (g2 * X * X - 2.0 * x0 * X + x0 * x0) / s2
    u = (X - x0) / s
    hk = _hermite_k(u, k)
    return np.exp(expo - 1j * k * phi) * hk / (math.sqrt(mu) * 2.0 ** (0.5 * k) * s ** (k + 1))


def _hermite_k(u: np.ndarray, k: int) -> np.ndarray:
    h0 = np.ones_like(u)
    if k == 0:
        return h0
    h1 = 2.0 * u
    for j in range(1, k):
        h0, h1 = h1, 2.0 * u * h1 - 2.0 * j * h0
    return h1


def tomogram_closed(params: ModelParams, X, phi, q: int | None = None) -> np.ndarray | float:
    """Closed-form tomogram of the pure state at ``λt = π/q`` (``q=None``: ``t = 0``).

    The state is ``N sum_k w_k a†^κ |ξ_k, α_k>`` (see
    :func:`fock_state.kerr_components`), hence

        Ω = N² e^{-X²}/sqrt(π) |sum_k w_k F_k(X, φ)|²,

    with the component amplitudes of :func:`_component_amplitude`.
    """
    X = np.asarray(X, dtype=float)
    phi = np.asarray(phi, dtype=float)
    Xb, Pb = np.broadcast_arrays(X, phi)
    N = normalization(params)
    amp = np.zeros(Xb.shape, dtype=complex)
    for comp in kerr_components(params, q):
        amp = amp + comp.weight * _component_amplitude(comp.params(params), Xb, Pb)
    with np.errstate(under="ignore"):
        val = N * N * np.exp(-Xb * Xb) / math.sqrt(math.pi) * np.abs(amp) ** 2
    return float(val) if val.ndim == 0 else val


def tomogram_t0(params: ModelParams, X, phi):
    """Closed-form tomogram of the initial state."""
    return tomogram_closed(params, X, phi, None)


def tomogram_quarter(params: ModelParams, X, phi):
    """Closed-form tomogram at ``λt = π/4``."""
    return tomogram_closed(params, X, phi, 4)


def tomogram_eighth(params: ModelParams, X, phi):
    """Closed-form tomogram at ``λt = π/8``."""
    return tomogram_closed(params, X, phi, 8)


# --------------------------------------------------------------------------
# surfaces and export


def tomogram_surface(source, x_grid=None, phi_grid=None, params: ModelParams | None = None) -> Tomogram:
    """Tomogram of ``source`` on an ``(X, φ)`` lattice.

    ``source`` is a state, a density matrix, or a callable ``(X, φ) -> Ω``.
    The default ``φ`` lattice has 64 points on ``[0, 2π)``; the default
    ``X`` grid needs ``params``.
    """
    if x_grid is None:
        if params is None:
            raise ValueError("default X grid needs params")
        x_grid = default_x_grid(params)
    if phi_grid is None:
        phi_grid = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    x_grid = np.asarray(x_grid, dtype=float)
    phi_grid = np.asarray(phi_grid, dtype=float)
    Xg, Pg = np.meshgrid(x_grid, phi_grid, indexing="ij")
    if callable(source):
        vals = np.asarray(source(Xg, Pg), dtype=float)
    else:
        vals = np.asarray(tomogram_series(source, Xg, Pg), dtype=float)
    return Tomogram(x_grid, phi_grid, vals)


def phi_normalization(evaluator, phi: float, x_max: float, n: int = 801) -> float:
    """``int Ω(X, φ) dX`` over ``[-x_max, x_max]`` by refined Simpson quadrature."""
    return integrate_1d(lambda x: evaluator(x, phi), -x_max, x_max, n).value


def write_tomogram_csv(path, tomo: Tomogram, meta: dict | None = None) -> None:
    """CSV with ``#`` metadata lines and columns ``x, phi, omega``."""
    with open(path, "w") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={v!r}\n")
        fh.write("x, phi, omega\n")
        for i, x in enumerate(tomo.x_grid):
            for k, ph in enumerate(tomo.phi_grid):
                fh.write(f"{x!r}, {ph!r}, {tomo.values[i, k]!r}\n")
