"""Model parameters, hypothesis validation, and derived constants.

The model couples a cell density u, an instantaneous signal potential v, and
an intermediate producer w on a ball of radius R in dimension n:

    u_t = Lap(u) - div(u grad v),
    0   = Lap(v) - mean(w) + w,
    w_t = Lap(w) - w + f(u),

with homogeneous Neumann boundaries.  The production law f is either the pure
power k*u^sigma or a user closure that must stay above that power.  Blow-up
construction mode requires n in {3, 4} and sigma > 4/n; simulation mode admits
n in {1, 2, 3, 4} and any sigma > 0.

All derived constants are evaluated at runtime from closed forms; nothing is
hard-coded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConfigError,
    DimensionOutOfRange,
    LowerBoundViolated,
    MassBoundsInverted,
    NegativeDensity,
    NonpositiveParameter,
    SubcriticalExponent,
)

BLOWUP_DIMENSIONS = (3, 4)
SIMULATE_DIMENSIONS = (1, 2, 3, 4)

#: relative tolerance for the lower-bound guard on user production closures
F_LOWER_BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical/model constants.  Immutable; safe to share across threads.

    f_kind selects the production law: "power" means f(u) = k u^sigma; "custom"
    supplies a closure whose declared lower-bound witness is (k, sigma).
    """

    n: int
    R: float
    k: float
    sigma: float
    M_lo: float
    M_hi: float
    f_kind: str = "power"
    f_custom: Optional[Callable] = None

    def __post_init__(self):
        if self.f_kind not in ("power", "custom"):
            raise ConfigError(f"unknown f_kind {self.f_kind!r}")
        if self.f_kind == "custom" and self.f_custom is None:
            raise ConfigError("f_kind='custom' requires f_custom")


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants derived from ModelParams.

    omega_vol: |Omega|, volume of the ball B_R.
    mu_lo:     M_lo / (2 |Omega|), lower mean-density bound.
    mu_hi:     2 M_hi / |Omega|, upper mean-density bound.
    a:         subsolution amplitude mu_lo R^n / (n e^(1/e) (R^n + 1)).
    K_big:     k n^(sigma-1).
    L_big:     K_big (a/e)^(sigma-1).
    """

    omega_vol: float
    mu_lo: float
    mu_hi: float
    a: float
    K_big: float
    L_big: float


def ball_volume(n: int, R: float) -> float:
    """Volume of B_R in R^n: pi^(n/2) R^n / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) * R ** n / math.gamma(n / 2 + 1)


def sphere_area(n: int, R: float) -> float:
    """Surface measure of the sphere of radius R in R^n: n |B_R| / R."""
    return n * ball_volume(n, R) / R


def validate_params(p: ModelParams, mode: str) -> ModelParams:
    """Check invariants for the given mode ("blowup" or "simulate").

    Returns p unchanged when valid; raises otherwise.
    """
    if mode not in ("blowup", "simulate"):
        raise ConfigError(f"unknown mode {mode!r}")
    for name in ("R", "k", "sigma", "M_lo", "M_hi"):
        if not getattr(p, name) > 0:
            raise NonpositiveParameter(f"{name} must be > 0, got {getattr(p, name)}")
    if p.M_lo >= p.M_hi:
        raise MassBoundsInverted(f"need M_lo < M_hi, got {p.M_lo} >= {p.M_hi}")
    dims = BLOWUP_DIMENSIONS if mode == "blowup" else SIMULATE_DIMENSIONS
    if int(p.n) != p.n or int(p.n) not in dims:
        raise DimensionOutOfRange(f"n = {p.n} not in {dims} for mode {mode!r}")
    if mode == "blowup" and not p.sigma > 4.0 / p.n:
        raise SubcriticalExponent(
            f"blow-up mode needs sigma > 4/n = {4.0 / p.n}, got sigma = {p.sigma}"
        )
    return p


def derived_constants(p: ModelParams) -> DerivedConstants:
    """Evaluate every derived constant from its closed form.  Deterministic."""
    omega = ball_volume(p.n, p.R)
    mu_lo = p.M_lo / (2.0 * omega)
    mu_hi = 2.0 * p.M_hi / omega
    rn = p.R ** p.n
    a = mu_lo * rn / (p.n * math.exp(1.0 / math.e) * (rn + 1.0))
    K_big = p.k * p.n ** (p.sigma - 1.0)
    L_big = K_big * (a / math.e) ** (p.sigma - 1.0)
    return DerivedConstants(
        omega_vol=omega, mu_lo=mu_lo, mu_hi=mu_hi, a=a, K_big=K_big, L_big=L_big
    )


def production_rate(p: ModelParams, u):
    """Production f(u) for scalar or array u >= 0.

    For user closures the declared lower bound f >= k u^sigma is asserted at
    every evaluation (relative tolerance 1e-12).
    """
    arr = np.asarray(u)
    if np.any(arr < 0):
        raise NegativeDensity(f"density must be >= 0, got min {arr.min()}")
    floor = p.k * arr ** p.sigma
    if p.f_kind == "power":
        val = floor
    else:
        val = np.asarray(p.f_custom(arr))
        if np.any(val < floor - F_LOWER_BOUND_RTOL * np.maximum(floor, 1.0)):
            worst = np.argmin(val - floor)
            raise LowerBoundViolated(
                f"f(u) = {val.flat[worst]} below k*u^sigma = {floor.flat[worst]} "
                f"at u = {arr.flat[worst]}"
            )
    return val if isinstance(u, np.ndarray) else float(val)


def production_derivative_estimate(p: ModelParams, u: float) -> float:
    """Finite-difference estimate of f'(u), used for reaction time-step control."""
    h = 1e-6 * max(1.0, abs(u))
    lo = max(u - h, 0.0)
    hi = u + h
    return float(production_rate(p, hi) - production_rate(p, lo)) / (hi - lo)


# -- plain-text config ingestion ------------------------------------------------

MODEL_KEYS = ("n", "R", "k", "sigma", "M_lo", "M_hi", "mode")


def parse_kv_text(text: str) -> dict:
    """Parse 'key = value' lines; blank lines and #-comments ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def params_from_mapping(mapping: dict) -> tuple[ModelParams, str]:
    """Build (ModelParams, mode) from a key=value mapping.  Unknown keys are errors."""
    unknown = sorted(set(mapping) - set(MODEL_KEYS))
    if unknown:
        raise ConfigError(f"unknown parameter keys: {', '.join(unknown)}")
    missing = sorted(set(MODEL_KEYS) - set(mapping))
    if missing:
        raise ConfigError(f"missing parameter keys: {', '.join(missing)}")
    try:
        p = ModelParams(
            n=int(mapping["n"]),
            R=float(mapping["R"]),
            k=float(mapping["k"]),
            sigma=float(mapping["sigma"]),
            M_lo=float(mapping["M_lo"]),
            M_hi=float(mapping["M_hi"]),
        )
    except ValueError as exc:
        raise ConfigError(f"bad numeric value: {exc}") from exc
    mode = mapping["mode"]
    return validate_params(p, mode), mode


def params_from_config(text: str) -> tuple[ModelParams, str]:
    """Parse and validate model parameters from plain config text."""
    return params_from_mapping(parse_kv_text(text))
