"""Phase-space distributions (W, Q, R) and their integrals.

All three distributions are members of the σ-smoothed family ``R(β; σ)``
(``σ = 1/2`` gives the Wigner function, ``σ = 1`` the Husimi function) and
are evaluated on grids by the kernels in ``kernels``.  Integrals use the
midpoint rule of ``quad_engine``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special as sp

from . import kernels
from .errors import DivergentSeries, SigmaOutOfRange, UnderResolvedGrid
from .fock_state import DensityMatrix, FockState, ModelParams, _log_E, kerr_components, normalization
from .quad_engine import PhaseSpaceGrid, grid_sum, map_points

__all__ = [
    "PhaseSpaceField",
    "default_grid",
    "wigner_point",
    "husimi_point",
    "r_point",
    "r_closed",
    "polar_q",
    "evaluate_field",
    "supported_field",
    "wehrl_entropy",
    "negativity_w",
    "negativity_r",
    "write_field_csv",
    "append_manifest",
    "BOUNDARY_RATIO",
]

BOUNDARY_RATIO = 1e-8
_TIMEPOINTS = {"t0": None, "quarter": 4, "eighth": 8}


@dataclass(frozen=True)
class PhaseSpaceField:
    """Real samples of a distribution on a :class:`PhaseSpaceGrid`.

    ``values[i, k]`` belongs to the point ``grid.points()[i, k]``.
    """

    grid: PhaseSpaceGrid
    values: np.ndarray
    kind: str
    sigma: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def integral(self) -> float:
        return grid_sum(self.values, self.grid.cell_area)

    def abs_integral(self) -> float:
        return grid_sum(np.abs(self.values), self.grid.cell_area)

    def boundary_ratio(self) -> float:
        v = np.abs(self.values)
        peak = v.max()
        return float(v[self.grid.boundary_mask()].max() / peak) if peak > 0 else 0.0

    def check_support(self, ratio: float = BOUNDARY_RATIO) -> None:
        """Raise :class:`UnderResolvedGrid` if the field has not decayed at the edge."""
        b = self.boundary_ratio()
        if b >= ratio:
            raise UnderResolvedGrid(f"{self.kind} field on the boundary ring is {b:.2e} of its peak")


def default_grid(params: ModelParams, points_per_axis: int = 401) -> PhaseSpaceGrid:
    """Grid centred at the origin with ``hw = |α| e^r + 5 max(1, e^r / sqrt 2)``."""
    er = math.exp(params.r)
    hw = abs(params.alpha) * er + 5.0 * max(1.0, er / math.sqrt(2.0))
    return PhaseSpaceGrid(hw, points_per_axis)


# --------------------------------------------------------------------------
# sources


def _rho(source) -> DensityMatrix:
    if isinstance(source, FockState):
        c = source.coeffs
        return DensityMatrix(np.outer(c, c.conj()))
    if isinstance(source, DensityMatrix):
        return source
    raise TypeError("expected a FockState or DensityMatrix")


def _parity_symmetric(source) -> bool:
    """True when only even or only odd number states are coupled."""
    if isinstance(source, FockState):
        nz = np.nonzero(source.coeffs)[0]
        return nz.size == 0 or bool(np.all(nz % 2 == nz[0] % 2))
    e = source.elements
    n = np.arange(e.shape[0])
    odd = (n[:, None] - n[None, :]) % 2 == 1
    return not np.any(e[odd])


def _point_fn(source, sigma: float):
    """Vectorized evaluator ``beta -> R(beta; sigma)`` choosing the fastest kernel."""
    if not 0.0 < sigma <= 1.0:
        raise SigmaOutOfRange(f"sigma must lie in (0, 1], got {sigma}")
    if isinstance(source, FockState) and sigma == 1.0:
        c = np.ascontiguousarray(source.coeffs, dtype=complex)
        return lambda b: kernels.husimi_pure_grid(c, np.ascontiguousarray(b, dtype=complex))
    rho = _rho(source)
    if rho.is_diagonal():
        pops = np.ascontiguousarray(np.diag(rho.elements).real)
        return lambda b: kernels.quasi_diag_grid(pops, np.ascontiguousarray(b, dtype=complex), sigma)
    e = np.ascontiguousarray(rho.elements, dtype=complex)
    return lambda b: kernels.quasi_grid(e, np.ascontiguousarray(b, dtype=complex), sigma)


def _pointwise(source, beta, sigma):
    b = np.asarray(beta, dtype=complex)
    out = _point_fn(source, sigma)(np.atleast_1d(b).ravel())
    return float(out[0]) if b.ndim == 0 else out.reshape(b.shape)


def wigner_point(source, beta):
    """Wigner function ``W(β)`` of a state or density matrix (scalar or array ``beta``)."""
    return _pointwise(source, beta, 0.5)


def husimi_point(source, beta):
    """Husimi function ``Q(β) = <β|rho|β>/π``."""
    return _pointwise(source, beta, 1.0)


def r_point(source, beta, sigma: float):
    """σ-smoothed distribution ``R(β; σ)`` for ``0 < σ <= 1``.

    The number-basis double sum carries ``σ^{-(n+m)}``.  Below ``σ = 1/2``
    the truncation tail of a state is therefore amplified roughly by
    ``((1-σ)/σ)^N_max``, and roundoff cancels in the same way; build the
    state with a much smaller ``eps_trunc`` there, or use :func:`r_closed`.

    Raises
    ------
    SigmaOutOfRange
        For ``σ <= 0`` or ``σ > 1``.
    """
    return _pointwise(source, beta, sigma)


# --------------------------------------------------------------------------
# closed forms on the finite superposition


def _mode_terms(comp_params: ModelParams, weight: complex, beta: complex, sigma: float, L: int) -> np.ndarray:
    """Scaled mode contributions of one component for ``ℓ = 0..L``.

    Returns ``weight * G_ℓ / ((β*/σ)^ℓ sqrt(ℓ!))`` including the factor
    ``exp(-|β|²/(2σ))``.  With ``b = β*/σ`` and ``m = ℓ - κ + p``,

        G_ℓ / b^ℓ = E/sqrt(μ) exp(ν b²/(2μ) + α b/μ)
                    sum_p b^p C(κ, p) ℓ!/m! K_m,

    where ``K_m = g^m H_m(a/g)`` with ``g² = -ν/(2μ)``, ``a = (α + ν b)/(2μ)``
    obeys ``K_(m+1) = 2a K_m + m (ν/μ) K_(m-1)``; it is carried as
    ``K_m / sqrt(m!)``.
    """
    p = comp_params
    k = p.kappa
    mu, nu, al = p.mu, p.nu, p.alpha
    b = beta.conjugate() / sigma
    a = (al + nu * b) / (2.0 * mu)
    ratio = nu / mu
    K = np.empty(L + 1, dtype=complex)
    K[0] = 1.0
    if L >= 1:
        K[1] = 2.0 * a
    for m in range(1, L):
        K[m + 1] = (2.0 * a * K[m] + math.sqrt(m) * ratio * K[m - 1]) / math.sqrt(m + 1)
    expo = _log_E(p) + nu * b * b / (2.0 * mu) + al * b / mu - abs(beta) ** 2 / (2.0 * sigma)
    pref = weight * np.exp(expo) / math.sqrt(mu)
    ell = np.arange(L + 1)
    out = np.zeros(L + 1, dtype=complex)
    lg = sp.gammaln(ell + 1)
    for pp in range(k + 1):
        m = ell - k + pp
        ok = m >= 0
        mm = m[ok]
        fac = np.exp(0.5 * (lg[ok] - sp.gammaln(mm + 1)))
        out[ok] += b**pp * math.comb(k, pp) * fac * K[mm]
    return pref * out


def _mode_terms_mp(comp_params: ModelParams, weight: complex, beta, sigma, L: int) -> list:
    """:func:`_mode_terms` in ``mpmath`` arithmetic at the current precision."""
    p = comp_params
    k = p.kappa
    r, th = mpmath.mpf(p.r), mpmath.mpf(p.theta_sq)
    mu = mpmath.cosh(r)
    nu = mpmath.expjpi(th / mpmath.pi) * mpmath.sinh(r)
    al = mpmath.mpc(p.alpha)
    b = mpmath.conj(beta) / sigma
    a = (al + nu * b) / (2 * mu)
    ratio = nu / mu
    K = [mpmath.mpc(1)] + [mpmath.mpc(0)] * L
    if L >= 1:
        K[1] = 2 * a
    for m in range(1, L):
        K[m + 1] = (2 * a * K[m] + mpmath.sqrt(m) * ratio * K[m - 1]) / mpmath.sqrt(m + 1)
    log_e = -abs(al) ** 2 / 2 - al * al * mpmath.conj(nu) / (2 * mu)
    expo = log_e + nu * b * b / (2 * mu) + al * b / mu - abs(beta) ** 2 / (2 * sigma)
    pref = mpmath.mpc(weight) * mpmath.exp(expo) / mpmath.sqrt(mu)
    coef = [b**pp * math.comb(k, pp) for pp in range(k + 1)]
    out = []
    for ell in range(L + 1):
        acc = mpmath.mpc(0)
        for pp in range(k + 1):
            m = ell - k + pp
            if m >= 0:
                # sqrt(ℓ!/m!) from an exact integer product (ℓ - m <= κ)
                acc += coef[pp] * mpmath.sqrt(math.prod(range(m + 1, ell + 1))) * K[m]
        out.append(pref * acc)
    return out


def r_closed(params: ModelParams, beta: complex, sigma: float, timepoint: str = "t0", max_modes: int = 20000,
             max_dps: int = 400) -> float:
    """``R(β; σ)`` of the pure evolving state at ``λt ∈ {0, π/4, π/8}`` as a single mode sum.

    The state at these times is a finite superposition of rotated
    photon-added squeezed coherent components (:func:`kerr_components`), so

        R = N²/(πσ) sum_ℓ ((σ-1)/σ)^ℓ |sum_k Ĝ_ℓ^(k)|²,

    with the scaled mode contributions of :func:`_mode_terms`.  The sum is
    extended until three consecutive term magnitudes fall below 1e-17 of
    the running magnitude sum (capped at one, so a large magnitude sum does
    not stop it early).

    Away from the bulk of the state, and below ``σ = 1/2``, the alternating
    sum cancels heavily, as do the components of a nearly vanishing
    superposition.  When the normalized magnitude sum ``M = N² sum |terms|``
    exceeds 100 (the largest results are of order one), the mode sum is recomputed in ``mpmath`` with
    ``20 + log10 M`` significant digits.

    Parameters
    ----------
    timepoint : {"t0", "quarter", "eighth"}
    max_dps : int
        Precision cap; beyond it :class:`DivergentSeries` is raised.
    """
    if not 0.0 < sigma <= 1.0:
        raise SigmaOutOfRange(f"sigma must lie in (0, 1], got {sigma}")
    try:
        q = _TIMEPOINTS[timepoint]
    except KeyError:
        raise ValueError(f"unknown timepoint {timepoint!r}") from None
    beta = complex(beta)
    N = normalization(params)
    comps = [(c.params(params), c.weight) for c in kerr_components(params, q)]
    x = (sigma - 1.0) / sigma
    lx = math.log(abs(x)) if x != 0 else -math.inf
    L = 64
    while True:
        parts = [_mode_terms(cp, w, beta, sigma, L) for cp, w in comps]
        G = sum(parts)
        bound = sum(np.abs(g) for g in parts)
        ell = np.arange(L + 1)
        with np.errstate(under="ignore", divide="ignore", over="ignore", invalid="ignore"):
            if x == 0:
                mag = np.where(ell == 0, bound**2, 0.0)
            else:
                mag = np.exp(ell * lx + 2.0 * np.log(bound))
        if not np.all(np.isfinite(mag)):
            raise DivergentSeries("mode sum overflows; sigma is below the existence threshold")
        scale = np.cumsum(mag)
        small = mag <= 1e-17 * np.minimum(scale, 1.0)
        run = np.convolve(small.astype(int), np.ones(3, dtype=int), "valid") == 3
        hits = np.nonzero(run[8:])[0]
        if hits.size:
            stop = hits[0] + 8 + 3
            break
        if L >= max_modes:
            raise DivergentSeries("mode sum did not converge")
        L *= 2
    # magnitude of the largest partial contributions relative to the result scale
    M = N * N * float(scale[stop - 1])
    if M <= 100.0:
        with np.errstate(under="ignore"):
            if x == 0:
                terms = np.where(ell == 0, np.abs(G) ** 2, 0.0)
            else:
                terms = np.sign(x) ** ell * np.exp(ell * lx) * np.abs(G) ** 2
        total = math.fsum(terms[:stop])
        return N * N * total / (math.pi * sigma)
    dps = 20 + int(math.ceil(math.log10(M))) if math.isfinite(M) else max_dps + 1
    if dps > max_dps:
        raise DivergentSeries(f"mode sum cancels beyond {max_dps} digits")
    with mpmath.workdps(dps):
        Gm = [mpmath.mpc(0)] * stop
        for cp, w in comps:
            for i, g in enumerate(_mode_terms_mp(cp, w, mpmath.mpc(beta), mpmath.mpf(sigma), stop - 1)):
                Gm[i] += g
        xm = (mpmath.mpf(sigma) - 1) / sigma
        total = mpmath.fsum(xm**i * abs(g) ** 2 for i, g in enumerate(Gm))
        return N * N * float(total) / (math.pi * sigma)


# --------------------------------------------------------------------------
# polar density


def polar_q(source, theta_tilde):
    """Angular density ``int_0^inf Q(r e^{iθ}) r dr`` from the density matrix."""
    rho = _rho(source)
    e = rho.elements
    N = e.shape[0]
    th = np.asarray(theta_tilde, dtype=float)
    lg = sp.gammaln(np.arange(N) + 1)
    acc = np.zeros(th.shape, dtype=complex)
    for d in range(N):
        n = np.arange(d, N)
        m = n - d
        w = np.exp(sp.gammaln((n + m) / 2.0 + 1.0) - 0.5 * (lg[n] + lg[m]))
        cd = np.sum(w * e[n, m])
        if cd == 0:
            continue
        f = 1.0 if d == 0 else 2.0
        acc = acc + f * cd * np.exp(-1j * d * th)
    out = acc.real / (2.0 * math.pi)
    return float(out) if th.ndim == 0 else out


# --------------------------------------------------------------------------
# grids


def evaluate_field(source, kind: str, grid: PhaseSpaceGrid, sigma: float | None = None, workers: int = 1,
                   use_parity: bool = True) -> PhaseSpaceField:
    """Sample ``W``, ``Q`` or ``R(σ)`` of ``source`` on ``grid``.

    When only even or only odd number states are coupled the distribution
    is symmetric under ``β -> -β``; on a grid centred at the origin only
    half of the points are then evaluated and the rest mirrored.
    """
    kind = kind.upper()
    if kind == "W":
        sigma = 0.5
    elif kind == "Q":
        sigma = 1.0
    elif kind == "R":
        if sigma is None:
            raise ValueError("kind 'R' needs sigma")
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    fn = _point_fn(source, sigma)
    pts = grid.points()
    P2 = pts.size
    if use_parity and grid.center == 0 and _parity_symmetric(source):
        flat = pts.ravel()
        half = (P2 + 1) // 2
        v = map_points(fn, flat[:half], workers)
        vals = np.empty(P2)
        vals[:half] = v
        vals[half:] = v[: P2 - half][::-1]
        vals = vals.reshape(pts.shape)
    else:
        vals = map_points(fn, pts, workers)
    if kind == "Q":
        top = vals.max() if vals.size else 0.0
        if top > 1.0 / math.pi + 1e-10 or vals.min() < -1e-12:
            raise ArithmeticError("Husimi function outside [0, 1/pi]")
    return PhaseSpaceField(grid, vals, kind, sigma)


def supported_field(source, kind: str, grid: PhaseSpaceGrid, sigma: float | None = None, workers: int = 1,
                    max_grow: int = 10) -> PhaseSpaceField:
    """:func:`evaluate_field` on ``grid``, widened until the support check passes.

    Each retry adds one unit to the half-width and scales the point count so
    the cell size stays (to rounding) the same.

    Raises
    ------
    UnderResolvedGrid
        If the field is still non-negligible on the boundary after
        ``max_grow`` widenings.
    """
    for _ in range(max_grow + 1):
        f = evaluate_field(source, kind, grid, sigma=sigma, workers=workers)
        if f.boundary_ratio() < BOUNDARY_RATIO:
            return f
        hw = grid.half_width + 1.0
        pts = int(round(grid.points_per_axis * hw / grid.half_width))
        grid = PhaseSpaceGrid(hw, pts, grid.center)
    raise UnderResolvedGrid(f"{kind} field still not contained at half-width {grid.half_width:g}")


def wehrl_entropy(field: PhaseSpaceField, check: bool = True) -> float:
    """``-int Q log Q`` over the grid (``0 log 0 = 0``)."""
    if field.kind != "Q":
        raise ValueError("Wehrl entropy needs a Q field")
    if check:
        field.check_support()
    q = np.clip(field.values, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(q > 0, -q * np.log(q), 0.0)
    return grid_sum(ent, field.grid.cell_area)


def negativity_w(field: PhaseSpaceField, check: bool = True) -> float:
    """Negative volume ``int |W| - 1``."""
    if field.kind != "W":
        raise ValueError("negativity_w needs a W field")
    if check:
        field.check_support()
    return field.abs_integral() - 1.0


def negativity_r(source, sigma: float, grid: PhaseSpaceGrid, workers: int = 1, check: bool = True) -> float:
    """Negative volume ``int |R(σ)| - 1`` on ``grid``."""
    f = evaluate_field(source, "R", grid, sigma=sigma, workers=workers)
    if check:
        f.check_support()
    return f.abs_integral() - 1.0


# --------------------------------------------------------------------------
# export


def write_field_csv(path, field: PhaseSpaceField, meta: dict | None = None) -> None:
    """CSV with ``#`` metadata lines and columns ``re_beta, im_beta, value``."""
    pts = field.grid.points().ravel()
    with open(path, "w") as fh:
        fh.write(f"# kind={field.kind}\n")
        if field.sigma is not None:
            fh.write(f"# sigma={field.sigma!r}\n")
        for k, v in {**field.grid.meta(), **(meta or {})}.items():
            fh.write(f"# {k}={v!r}\n")
        fh.write("re_beta, im_beta, value\n")
        for z, v in zip(pts, field.values.ravel()):
            fh.write(f"{z.real!r}, {z.imag!r}, {v!r}\n")


def append_manifest(path, entries: dict) -> None:
    """Append ``key=value`` lines to a run manifest."""
    with open(path, "a") as fh:
        for k, v in entries.items():
            fh.write(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n")
        fh.flush()
        os.fsync(fh.fileno())
