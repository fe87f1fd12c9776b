"""Photon-added squeezed coherent cat states in a truncated Fock basis.

The initial state is ``N a†^κ (|ξ,α> + c|ξ,-α>)`` with ``|ξ,α> = S(ξ)D(α)|0>``.
Its amplitudes are built from a branch-free scaled Hermite recurrence,
normalized with closed bilinear sums, and evolved under the Kerr
Hamiltonian ``ω a†a + λ a†²a²``.
"""

from __future__ import annotations

import cmath
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from .errors import DegenerateState
from .special_fn import hermite_seq

__all__ = [
    "ModelParams",
    "FockState",
    "DensityMatrix",
    "coeff_A",
    "coeff_vector",
    "closed_sums",
    "normalization",
    "overlap_closed",
    "build_state",
    "evolve",
    "density",
    "p_rep_coeffs",
    "Component",
    "kerr_components",
    "save_density",
    "load_density",
    "DEFAULT_EPS_TRUNC",
]

DEFAULT_EPS_TRUNC = 1e-12
_R_COHERENT = 1e-16
_LOG_BIG = math.log(1e150)
CACHE_VERSION = 1


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the Kerr cat-state model.

    Attributes
    ----------
    alpha : complex
        Coherent displacement.
    r, theta_sq : float
        Squeezing ``ξ = r exp(i theta_sq)``, ``r >= 0``.
    c : complex
        Weight of the ``-α`` component.
    kappa : int
        Number of added photons.
    omega, lambda_kerr : float
        Oscillator frequency and Kerr coupling, both positive.
    """

    alpha: complex = 0j
    r: float = 0.0
    theta_sq: float = 0.0
    c: complex = 1.0 + 0j
    kappa: int = 0
    omega: float = 1.0
    lambda_kerr: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta_sq", float(self.theta_sq))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "lambda_kerr", float(self.lambda_kerr))
        if int(self.kappa) != self.kappa or self.kappa < 0:
            raise ValueError("kappa must be a non-negative integer")
        object.__setattr__(self, "kappa", int(self.kappa))
        if not self.r >= 0.0:
            raise ValueError("squeezing magnitude r must be >= 0")
        if not (self.omega > 0.0 and self.lambda_kerr > 0.0):
            raise ValueError("omega and lambda_kerr must be positive")
        for v in (self.alpha, self.c, self.r, self.theta_sq, self.omega, self.lambda_kerr):
            if not cmath.isfinite(v):
                raise ValueError("parameters must be finite")

    @property
    def delta(self) -> float:
        return self.omega / self.lambda_kerr

    @property
    def mu(self) -> float:
        return math.cosh(self.r)

    @property
    def nu(self) -> complex:
        return cmath.exp(1j * self.theta_sq) * math.sinh(self.r)

    @property
    def xi(self) -> complex:
        return self.r * cmath.exp(1j * self.theta_sq)

    def replace(self, **changes) -> "ModelParams":
        d = self.as_dict()
        d.update(changes)
        return ModelParams(**d)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "r": self.r,
            "theta_sq": self.theta_sq,
            "c": self.c,
            "kappa": self.kappa,
            "omega": self.omega,
            "lambda_kerr": self.lambda_kerr,
        }


@dataclass(frozen=True)
class FockState:
    """Truncated pure state ``sum_n coeffs[n] |n>``, ``n = 0..n_max``."""

    coeffs: np.ndarray
    tail_mass_bound: float = 0.0
    params: ModelParams | None = None

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


@dataclass(frozen=True)
class DensityMatrix:
    """Truncated density matrix ``elements[n, m] = <n|rho|m>``."""

    elements: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_max(self) -> int:
        return self.elements.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def purity(self) -> float:
        return float(np.sum(np.abs(self.elements) ** 2))

    def hermiticity_error(self) -> float:
        e = self.elements
        return float(np.max(np.abs(e - e.conj().T))) if e.size else 0.0

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.elements + self.elements.conj().T))[0])

    def is_diagonal(self) -> bool:
        e = self.elements
        return not np.any(e[~np.eye(e.shape[0], dtype=bool)])

    def padded(self, dim: int) -> "DensityMatrix":
        """Copy zero-padded (never truncated) to ``dim`` levels."""
        if dim < self.dim:
            raise ValueError("padding cannot shrink the matrix")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self.elements
        return DensityMatrix(out, dict(self.meta))


# --------------------------------------------------------------------------
# coefficients


def _log_E(p: ModelParams) -> complex:
    """Log of the Gaussian prefactor ``exp(-|α|²/2 - α² ν*/(2μ))``."""
    a = p.alpha
    return -0.5 * abs(a) ** 2 - a * a * p.nu.conjugate() / (2.0 * p.mu)


def coeff_vector(params: ModelParams, n_max: int) -> np.ndarray:
    """Amplitudes ``A_{n,κ}`` of ``a†^κ |ξ,α>`` for ``n = 0..n_max``.

    With ``j = n - κ`` the Hermite factor is carried as
    ``y_j = (ν/2μ)^(j/2) H_j(-iα/sqrt(2μν)) / sqrt(j!)``, which obeys

        y_(j+1) = (-iα/μ · y_j - (ν/μ) sqrt(j) · y_(j-1)) / sqrt(j+1)

    and contains no square root of ``ν``.  It therefore needs no branch
    choice and reduces to the coherent amplitudes at ``r = 0``.  A running
    log-scale keeps the recurrence finite at any order.
    """
    p = params
    k = p.kappa
    out = np.zeros(n_max + 1, dtype=complex)
    if n_max < k:
        return out
    J = n_max - k
    a = -1j * p.alpha / p.mu
    b = p.nu / p.mu
    y = np.empty(J + 1, dtype=complex)
    logs = np.zeros(J + 1)
    y0, y1, scale = 1.0 + 0j, a, 0.0
    y[0] = y0
    if J >= 1:
        y[1] = y1
    for j in range(1, J):
        y0, y1 = y1, (a * y1 - b * math.sqrt(j) * y0) / math.sqrt(j + 1)
        if abs(y1) > 1e150:
            y0 /= 1e150
            y1 /= 1e150
            scale += _LOG_BIG
        y[j + 1] = y1
        logs[j + 1] = scale
    j = np.arange(J + 1)
    n = j + k
    logE = _log_E(p)
    logmag = logE.real - 0.5 * math.log(p.mu) + 0.5 * (sp.gammaln(n + 1) - sp.gammaln(j + 1)) + logs
    phase = (1j) ** (j % 4) * cmath.exp(1j * logE.imag)
    with np.errstate(under="ignore"):
        out[k:] = y * phase * np.exp(logmag)
    return out


def coeff_A(n: int, params: ModelParams, branch: int | None = None) -> complex:
    """Single amplitude ``A_{n,κ}(ξ, α)``; zero for ``n < κ``.

    Parameters
    ----------
    n : int
        Fock index.
    params : ModelParams
    branch : {None, +1, -1}
        ``None`` uses the branch-free recurrence of :func:`coeff_vector`.
        ``+1`` / ``-1`` evaluate the literal Hermite form with the principal
        or the opposite square root of ``ν`` (log-scaled); both must agree.
        For ``r`` below 1e-16 the literal form is replaced by the coherent
        limit since its Hermite argument diverges.
    """
    p = params
    if n < p.kappa:
        return 0j
    if branch is None:
        return complex(coeff_vector(p, n)[n])
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    j = n - p.kappa
    logE = _log_E(p)
    if p.r < _R_COHERENT:
        if p.alpha == 0:
            return complex(math.exp(0.5 * math.lgamma(n + 1)) * math.exp(logE.real)) if j == 0 else 0j
        # coherent limit: α^j sqrt(n!) / j! e^{-|α|²/2}
        logm = j * math.log(abs(p.alpha)) + 0.5 * math.lgamma(n + 1) - math.lgamma(j + 1) - 0.5 * abs(p.alpha) ** 2
        return cmath.exp(1j * j * cmath.phase(p.alpha)) * math.exp(logm)
    sq = branch * cmath.sqrt(p.nu)
    x = -1j * p.alpha / (math.sqrt(2.0 * p.mu) * sq)
    h = hermite_seq(x, j)
    hm = h.mantissa[j]
    if hm == 0:
        return 0j
    # (ν/2μ)^(j/2) taken as (sqrt(ν)/sqrt(2μ))^j with the chosen root
    lpow = j * cmath.log(sq / math.sqrt(2.0 * p.mu))
    lm = (logE + lpow + cmath.log(hm)) + h.log_scale[j]
    lm += 0.5 * math.lgamma(n + 1) - math.lgamma(j + 1) - 0.5 * math.log(p.mu)
    return (1j) ** (j % 4) * cmath.exp(lm)


# --------------------------------------------------------------------------
# normalization


def _bilinear_closed(t: complex, x: complex, y: complex, k: int) -> complex:
    """``sum_n (n+k)! t^n H_n(x) H_n(y) / (2^n n!^2)`` in closed form, |t| < 1.

    ``t`` may be complex; ``sqrt(1 - t²)`` is the principal root, which is
    continuous on the unit disc because ``Re(1 - t²) > 0`` there.
    """
    s = cmath.sqrt(1.0 - t * t)
    hx = hermite_seq(x, k).values
    hz = hermite_seq((t * x - y) / s, 2 * k).values
    acc = 0j
    for pp in range(k + 1):
        for ell in range(pp + 1):
            acc += ((-1) ** pp * math.comb(k, pp) / (2**pp * math.factorial(ell) * math.factorial(pp - ell))
                    * (t / s) ** (2 * pp - ell) * hx[ell] * hz[2 * pp - ell])
    expo = -((t * x) ** 2 - 2 * t * x * y + (t * y) ** 2) / (1.0 - t * t)
    return math.factorial(k) / s * cmath.exp(expo) * acc


def overlap_closed(p1: ModelParams, p2: ModelParams) -> complex:
    """``sum_n A_{n,κ}(ξ₁, α₁) A*_{n,κ}(ξ₂, α₂)`` in closed form.

    With ``t = sqrt(ν₁) sqrt(ν₂)* / μ`` and ``x_i = -iα_i / sqrt(2μν_i)``
    (same roots throughout) the sum is ``E₁E₂*/μ`` times the bilinear
    Hermite sum at ``(t, x₁, x₂*)``; flipping either root flips both the
    matching ``x`` and ``t``, which leaves it unchanged.  Both parameter
    sets must share ``r`` and ``κ`` (rotated copies of one state).  At
    ``r`` below 1e-16 the coherent limit ``κ! L_κ(-α₂*α₁) <α₂|α₁>`` is used.
    """
    if p1.kappa != p2.kappa or abs(p1.r - p2.r) > 1e-14 * max(1.0, p1.r):
        raise ValueError("overlap_closed needs equal kappa and squeezing magnitude")
    k = p1.kappa
    if p1.r < _R_COHERENT:
        z = p2.alpha.conjugate() * p1.alpha
        lag = complex(sp.eval_genlaguerre(k, 0, -z)) if z.imag == 0 else _laguerre_complex(k, -z)
        ov = cmath.exp(-0.5 * abs(p1.alpha) ** 2 - 0.5 * abs(p2.alpha) ** 2 + z)
        return math.factorial(k) * lag * ov
    mu = p1.mu
    r1, r2 = cmath.sqrt(p1.nu), cmath.sqrt(p2.nu)
    t = r1 * r2.conjugate() / mu
    x1 = -1j * p1.alpha / (math.sqrt(2.0 * mu) * r1)
    x2 = -1j * p2.alpha / (math.sqrt(2.0 * mu) * r2)
    pref = cmath.exp(_log_E(p1) + _log_E(p2).conjugate()) / mu
    return pref * _bilinear_closed(t, x1, x2.conjugate(), k)


def _laguerre_complex(k: int, z: complex) -> complex:
    """Laguerre polynomial ``L_k(z)`` for complex ``z`` by its three-term recurrence."""
    l0, l1 = 1.0 + 0j, 1.0 - z
    if k == 0:
        return l0
    for j in range(1, k):
        l0, l1 = l1, ((2 * j + 1 - z) * l1 - j * l0) / (j + 1)
    return l1


def closed_sums(params: ModelParams) -> tuple[float, float]:
    """``(sum_n |A_{n,κ}|², sum_n (-1)^(n-κ) |A_{n,κ}|²)`` in closed form.

    Both are finite double sums over Hermite products at the point
    ``x = -iα/sqrt(2μν)`` and its conjugate; the result is insensitive to the
    root of ``ν`` because only products ``H_n(x) H_n(x*)`` enter.  Below
    ``r = 1e-16`` the coherent limits ``κ! L_κ(-|α|²)`` and
    ``e^{-2|α|²} κ! L_κ(|α|²)`` are used.
    """
    p = params
    k = p.kappa
    a2 = abs(p.alpha) ** 2
    if p.r < _R_COHERENT:
        f = math.factorial(k)
        return (f * float(sp.eval_laguerre(k, -a2)), math.exp(-2.0 * a2) * f * float(sp.eval_laguerre(k, a2)))
    mu, nu = p.mu, p.nu
    x = -1j * p.alpha / cmath.sqrt(2.0 * mu * nu)
    y = x.conjugate()
    t = abs(nu) / mu
    pref = math.exp(2.0 * _log_E(p).real) / mu
    s_plus = pref * _bilinear_closed(complex(t), x, y, k)
    s_minus = pref * _bilinear_closed(complex(-t), x, y, k)
    for v in (s_plus, s_minus):
        if abs(v.imag) > 1e-10 * max(1.0, abs(v.real)):
            raise ArithmeticError("closed sum is not real: %r" % v)
    return float(s_plus.real), float(s_minus.real)


def normalization(params: ModelParams) -> float:
    """Normalization constant of the superposed photon-added state.

    Raises
    ------
    DegenerateState
        If the superposition is numerically the null vector.
    """
    s_plus, s_minus = closed_sums(params)
    c = params.c
    scale = (1.0 + abs(c) ** 2) * s_plus
    total = scale + 2.0 * c.real * s_minus
    if not total > 1e-3 * scale:
        # the closed sums cancel to worse than ~1e-13; sum the surviving parity directly
        total = _direct_total(params)
        if not total > 0.0:
            raise DegenerateState("superposition vanishes; normalization diverges")
    return 1.0 / math.sqrt(total)


def _direct_total(params: ModelParams) -> float:
    """``sum_n |1 + (-1)^(n-κ) c|² |A_{n,κ}|²`` by direct summation."""
    k = params.kappa
    N = max(64, k + 32)
    while True:
        A = coeff_vector(params, N)
        n = np.arange(N + 1)
        w = np.where(n >= k, np.abs(1.0 + (-1.0) ** ((n - k) % 2) * params.c) ** 2, 0.0) * np.abs(A) ** 2
        total = math.fsum(w)
        if total == 0.0 or _tail_bound(w, total) < 1e-17 * total:
            return total
        if N > 20000:
            raise DegenerateState("superposition does not fit in 20000 Fock levels")
        N *= 2


def _tail_bound(w: np.ndarray, total: float) -> float:
    """Bound on the discarded mass beyond the last entry of ``w = |c_n|²``.

    A geometric envelope is fitted to the last ten pair sums
    ``w[n-1] + w[n]`` (pairing absorbs the even/odd alternation of cat
    superpositions).  The mass deficit ``total - sum(w)`` overrides it when
    it is larger and above the 1e-13 roundoff floor of the closed
    normalization.
    """
    deficit = max(total - math.fsum(w), 0.0)
    if deficit < 1e-13:
        deficit = 0.0
    if w.size < 20:
        return max(deficit, total) if np.any(w[-2:] > 0) else deficit
    tail = w[-20:]
    pairs = tail[0::2] + tail[1::2]
    if pairs[-1] == 0:
        return deficit
    nz = pairs[pairs > 0]
    if nz.size < 3:
        return max(deficit, float(pairs[-1]))
    q = float((nz[1:] / nz[:-1]).max())
    if q >= 1.0:
        return max(deficit, total)
    return max(deficit, float(nz[-1]) * q / (1.0 - q))


def build_state(params: ModelParams, eps_trunc: float = DEFAULT_EPS_TRUNC, n_max: int | None = None) -> FockState:
    """Normalized initial state truncated so the discarded mass is below ``eps_trunc``.

    ``n_max`` forces a fixed truncation instead of the adaptive rule.
    """
    if not 1e-300 < eps_trunc <= 1e-6:
        raise ValueError("eps_trunc must lie in (0, 1e-6]")
    norm = normalization(params)
    k = params.kappa
    sel = lambda n: 1.0 + (-1.0) ** ((n - k) % 2) * params.c  # noqa: E731
    if n_max is not None:
        A = coeff_vector(params, n_max)
        n = np.arange(n_max + 1)
        coeffs = norm * np.where(n >= k, sel(n), 0.0) * A
        return FockState(coeffs, _tail_bound(np.abs(coeffs) ** 2, 1.0), params)
    N = max(64, k + 32)
    while True:
        A = coeff_vector(params, N)
        n = np.arange(N + 1)
        coeffs = norm * np.where(n >= k, sel(n), 0.0) * A
        w = np.abs(coeffs) ** 2
        if _tail_bound(w, 1.0) < eps_trunc:
            break
        if N > 20000:
            raise DegenerateState("state does not fit in 20000 Fock levels")
        N *= 2
    # smallest admissible cut-off
    lo, hi = k, N
    while lo < hi:
        mid = (lo + hi) // 2
        if _tail_bound(w[: mid + 1], 1.0) < eps_trunc:
            hi = mid
        else:
            lo = mid + 1
    return FockState(coeffs[: lo + 1].copy(), _tail_bound(w[: lo + 1], 1.0), params)


# --------------------------------------------------------------------------
# dynamics


def kerr_phases(n_max: int, params: ModelParams, t: float) -> np.ndarray:
    """``exp(-i((ω-λ)n + λn²)t)`` for ``n = 0..n_max``."""
    n = np.arange(n_max + 1, dtype=float)
    return np.exp(-1j * ((params.omega - params.lambda_kerr) * n + params.lambda_kerr * n * n) * t)


def evolve(state: FockState, params: ModelParams, t: float) -> FockState:
    """Kerr evolution of ``state`` over time ``t``."""
    return FockState(state.coeffs * kerr_phases(state.n_max, params, t), state.tail_mass_bound, state.params)


def density(state: FockState) -> DensityMatrix:
    """Projector ``|psi><psi|`` as a density matrix."""
    c = state.coeffs
    return DensityMatrix(np.outer(c, c.conj()), {"tail_mass_bound": state.tail_mass_bound})


def p_rep_coeffs(rho: DensityMatrix) -> np.ndarray:
    """Coefficients ``(-1)^(n+m) rho_nm / sqrt(n! m!)`` of the delta-derivative expansion."""
    n = np.arange(rho.dim)
    lf = 0.5 * sp.gammaln(n + 1)
    sign = np.where((n[:, None] + n[None, :]) % 2, -1.0, 1.0)
    with np.errstate(under="ignore"):
        return sign * rho.elements * np.exp(-(lf[:, None] + lf[None, :]))


# --------------------------------------------------------------------------
# finite superpositions at rational times


@dataclass(frozen=True)
class Component:
    """Term ``weight * a†^κ |xi, alpha>`` of a finite superposition."""

    weight: complex
    xi: complex
    alpha: complex

    def params(self, base: ModelParams) -> ModelParams:
        return base.replace(alpha=self.alpha, r=abs(self.xi), theta_sq=cmath.phase(self.xi) if self.xi else 0.0)


def kerr_components(params: ModelParams, q: int | None) -> list[Component]:
    """Unnormalized state at ``λt = π/q`` as a finite sum of rotated components.

    The quadratic phase ``exp(-iπn²/q)`` is periodic in ``n`` with period
    ``P = q`` (``q`` even) or ``2q`` (``q`` odd); its discrete Fourier
    coefficients ``b_k`` turn it into a sum of rotations ``exp(-inθ_k)``.  A
    rotation acts on the photon-added squeezed coherent amplitudes as

        A_n(ξ, α) exp(-inθ) = exp(-iκθ) A_n(ξ e^{-2iθ}, α e^{-iθ}),

    and the linear phase ``(δ-1)nλt`` is one more rotation.  The result,
    multiplied by the normalization constant, reproduces the evolved Fock
    amplitudes.  ``q=None`` returns the ``t = 0`` state.
    """
    p = params
    comps = [(1.0 + 0j, 0.0)]
    if q is not None:
        if int(q) != q or q < 1:
            raise ValueError("q must be a positive integer")
        q = int(q)
        P = q if q % 2 == 0 else 2 * q
        n = np.arange(P)
        # exact reduction of n² mod 2q keeps the phases clean
        quad = np.exp(-1j * np.pi * ((n * n) % (2 * q)) / q)
        tau = math.pi / q
        comps = []
        for k in range(P):
            b = complex(np.sum(quad * np.exp(2j * np.pi * k * n / P)) / P)
            if abs(b) > 1e-13:
                comps.append((b, 2.0 * math.pi * k / P + (p.delta - 1.0) * tau))
    out = []
    xi = p.xi
    for b, th in comps:
        rot = cmath.exp(-1j * th)
        w = b * cmath.exp(-1j * p.kappa * th)
        out.append(Component(w, xi * rot * rot, p.alpha * rot))
        if p.c != 0:
            out.append(Component(w * p.c, xi * rot * rot, -p.alpha * rot))
    return out


# --------------------------------------------------------------------------
# cache file


def _fmt(v) -> str:
    if isinstance(v, complex):
        return f"{v.real.hex()},{v.imag.hex()}"
    if isinstance(v, float):
        return v.hex()
    return str(v)


def save_density(path, rho: DensityMatrix, header: dict | None = None) -> None:
    """Write ``rho`` to a versioned text cache, atomically.

    Layout: ``# kerrkitten-density`` magic, ``# key=value`` header lines
    (floats in hex), then one ``n m re im`` row per non-zero element with
    hexadecimal floats so that reading back is bit-exact.
    """
    path = os.fspath(path)
    lines = [f"# kerrkitten-density version={CACHE_VERSION}", f"# dim={rho.dim}"]
    for key, val in (header or {}).items():
        lines.append(f"# {key}={_fmt(val)}")
    e = rho.elements
    for n, m in zip(*np.nonzero(e)):
        z = complex(e[n, m])
        lines.append(f"{n} {m} {z.real.hex()} {z.imag.hex()}")
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".rho")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_density(path) -> tuple[DensityMatrix, dict]:
    """Read a cache written by :func:`save_density`; returns ``(rho, header)``."""
    header: dict = {}
    rows = []
    with open(path) as fh:
        first = fh.readline().split()
        if first[:2] != ["#", "kerrkitten-density"] or first[2] != f"version={CACHE_VERSION}":
            raise ValueError("not a kerrkitten density cache (or wrong version)")
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key] = val
            elif line.strip():
                rows.append(line.split())
    dim = int(header.pop("dim"))
    e = np.zeros((dim, dim), dtype=complex)
    for n, m, re, im in rows:
        e[int(n), int(m)] = complex(float.fromhex(re), float.fromhex(im))
    return DensityMatrix(e), header
