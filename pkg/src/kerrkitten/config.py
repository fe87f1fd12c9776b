"""Plain-text run configuration.

One ``key = value`` pair per line; ``#`` starts a comment.  Unknown keys,
repeated keys and malformed values raise :class:`ConfigError`.  Times are
dimensionless ``λt`` and may be written with ``pi`` (``pi/8``, ``3*pi/16``).

Recognised keys::

    alpha          complex displacement, e.g. 2 or 1+0.5j
    r, theta_sq    squeezing magnitude and phase
    c              weight of the -alpha component (complex)
    kappa          added photons
    delta          omega / lambda (lambda is fixed to 1)
    damping        none | amplitude | phase
    gamma          damping rate
    times          comma-separated λt values; "inf" means the long-time limit
    scan_start, scan_end, scan_points_per_period   hs_scan sampling
    kitten_p       lobe count of the fiducial kitten state
    points_per_axis, half_width                    phase-space grid
    sigma          comma-separated smoothing parameters for R
    x_points, phi_points                           tomogram lattice
    eps_trunc      Fock truncation tolerance
    workers        evaluation threads
    output_dir     where CSV files, caches and the manifest go
    cache          use | refresh | off
"""

from __future__ import annotations

import ast
import hashlib
import math
import operator
import os
from dataclasses import dataclass, field

from .decoherence import DampingParams
from .errors import ConfigError
from .fock_state import DEFAULT_EPS_TRUNC, ModelParams

__all__ = ["RunConfig", "parse_config", "load_config", "parse_time", "KNOWN_KEYS"]

KNOWN_KEYS = (
    "alpha", "r", "theta_sq", "c", "kappa", "delta", "damping", "gamma", "times",
    "scan_start", "scan_end", "scan_points_per_period", "kitten_p",
    "points_per_axis", "half_width", "sigma", "x_points", "phi_points",
    "eps_trunc", "workers", "output_dir", "cache",
)

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_real(text: str) -> float:
    """Arithmetic on numbers and ``pi`` only."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(text)

    try:
        v = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(f"not a real number: {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"not a finite number: {text!r}")
    return v


def parse_time(text: str) -> float:
    """``λt`` value; ``inf`` selects the long-time limit."""
    t = text.strip()
    if t.lower() in ("inf", "infinity"):
        return math.inf
    v = _eval_real(t)
    if v < 0:
        raise ConfigError(f"times must be >= 0, got {text!r}")
    return v


def _complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError:
        raise ConfigError(f"not a complex number: {text!r}") from None


def _int(text: str, lo: int = 0) -> int:
    try:
        v = int(text.strip())
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None
    if v < lo:
        raise ConfigError(f"integer must be >= {lo}, got {v}")
    return v


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings; see the module docstring for the grammar."""

    params: ModelParams
    damping: DampingParams | None = None
    times: tuple = (0.0,)
    scan: tuple = (0.0, math.pi / 4, 600)
    kitten_p: int = 4
    points_per_axis: int = 401
    half_width: float | None = None
    sigmas: tuple = (0.5,)
    x_points: int = 801
    phi_points: int = 64
    eps_trunc: float = DEFAULT_EPS_TRUNC
    workers: int = 1
    output_dir: str = "kerrkitten-out"
    cache: str = "use"
    source: dict = field(default_factory=dict, compare=False)

    def digest(self) -> str:
        """SHA-256 of the canonical ``key=value`` listing of the parsed settings."""
        text = "\n".join(f"{k}={v}" for k, v in sorted(self.canonical().items()))
        return hashlib.sha256(text.encode()).hexdigest()

    def canonical(self) -> dict:
        p = self.params
        d = {
            "alpha": repr(p.alpha), "r": repr(p.r), "theta_sq": repr(p.theta_sq), "c": repr(p.c),
            "kappa": p.kappa, "delta": repr(p.delta),
            "damping": self.damping.kind if self.damping else "none",
            "gamma": repr(self.damping.gamma) if self.damping else "0.0",
            "times": ",".join(repr(t) for t in self.times),
            "scan": ",".join(repr(v) for v in self.scan), "kitten_p": self.kitten_p,
            "points_per_axis": self.points_per_axis, "half_width": repr(self.half_width),
            "sigma": ",".join(repr(s) for s in self.sigmas), "x_points": self.x_points,
            "phi_points": self.phi_points, "eps_trunc": repr(self.eps_trunc),
        }
        return d


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a :class:`RunConfig`."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, val = body.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: repeated key {key!r}")
        raw[key] = val.strip()

    g = raw.get
    try:
        params = ModelParams(
            alpha=_complex(g("alpha", "0")),
            r=_eval_real(g("r", "0")),
            theta_sq=_eval_real(g("theta_sq", "0")),
            c=_complex(g("c", "1")),
            kappa=_int(g("kappa", "0")),
            omega=_eval_real(g("delta", "1")),
            lambda_kerr=1.0,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None

    kind = g("damping", "none").lower()
    if kind not in ("none", "amplitude", "phase"):
        raise ConfigError(f"damping must be none, amplitude or phase, got {kind!r}")
    damping = None
    if kind != "none":
        gamma = _eval_real(g("gamma", "0"))
        if gamma < 0:
            raise ConfigError("gamma must be >= 0")
        damping = DampingParams(gamma, kind)
    elif "gamma" in raw:
        raise ConfigError("gamma given without damping")

    times = tuple(parse_time(t) for t in g("times", "0").split(",") if t.strip())
    if not times:
        raise ConfigError("times is empty")
    if any(math.isinf(t) for t in times) and damping is None:
        raise ConfigError("time 'inf' needs a damping channel")

    scan = (_eval_real(g("scan_start", "0")), _eval_real(g("scan_end", "pi/4")),
            _int(g("scan_points_per_period", "600"), 1))
    if not scan[0] < scan[1]:
        raise ConfigError("scan_start must be below scan_end")

    hw = g("half_width")
    half_width = None if hw is None else _eval_real(hw)
    if half_width is not None and half_width <= 0:
        raise ConfigError("half_width must be positive")

    sigmas = tuple(_eval_real(s) for s in g("sigma", "0.5").split(",") if s.strip())
    if not sigmas or any(not 0 < s <= 1 for s in sigmas):
        raise ConfigError("sigma values must lie in (0, 1]")

    eps = _eval_real(g("eps_trunc", repr(DEFAULT_EPS_TRUNC)))
    if not 1e-300 < eps <= 1e-6:
        raise ConfigError("eps_trunc must lie in (0, 1e-6]")

    cache = g("cache", "use")
    if cache not in ("use", "refresh", "off"):
        raise ConfigError("cache must be use, refresh or off")

    return RunConfig(
        params=params,
        damping=damping,
        times=times,
        scan=scan,
        kitten_p=_int(g("kitten_p", "4"), 1),
        points_per_axis=_int(g("points_per_axis", "401"), 2),
        half_width=half_width,
        sigmas=sigmas,
        x_points=_int(g("x_points", "801"), 3),
        phi_points=_int(g("phi_points", "64"), 1),
        eps_trunc=eps,
        workers=_int(g("workers", "1"), 1),
        output_dir=g("output_dir", "kerrkitten-out"),
        cache=cache,
        source=raw,
    )


def load_config(path) -> RunConfig:
    """Read and parse a configuration file."""
    try:
        with open(os.fspath(path)) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
