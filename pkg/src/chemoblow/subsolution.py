"""Explicit blow-up subsolution family and its parameter selection.

The candidate pair on the mass variable s in [0, R^n] is

    uU(s,t) = e^(-theta t) Uhat(s,t),   uW(s,t) = e^(-theta t) What(s,t),

where Uhat is linear with slope a y^(1-alpha)(t) inside the moving kink
s <= 1/y(t) and a shifted power alpha^(-alpha) a (s - (1-alpha)/y(t))^alpha
outside (What likewise with beta).  The kink scale grows as the explosive ODE

    y' = gamma y^(1+delta),   y(0) = y0,

whose closed form y(t) = y0 (1 - t/T)^(-1/delta) with T = 1/(gamma delta
y0^delta) diverges at the horizon T.  select_parameters assembles every
constant (damping theta, rate gamma, exponent delta, thresholds s*, s**, s0,
floor y*) so that the residual operators are nonpositive on all five regions,
and re-verifies each inequality on the result, failing loudly otherwise.

All arithmetic here runs in numpy longdouble: for admissible parameter sets
the assembled theta and y0 reach ~1e180 and ~1e525, beyond float64 range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import (
    ConfigError,
    HorizonExceeded,
    InfeasibleInitialData,
    SelectionInfeasible,
    SubcriticalExponent,
)
from .params import DerivedConstants, ModelParams, ball_volume
from .radial import RadialGrid, RadialState, make_state

LD = np.longdouble
#: additive slack used to realize strict inequalities in floating point
EPS_STRICT = 1e-6


@dataclass(frozen=True)
class Exponents:
    """Profile exponents alpha, beta in (0,1); the admissible window depends on (n, sigma)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0 and 0.0 < self.beta < 1.0):
            raise ValueError(f"exponents must lie in (0,1): {self}")


def exponent_window(n: int, sigma: float, alpha: float) -> tuple[float, float]:
    """Admissible beta interval (lower, upper) for given alpha."""
    return 1.0 + 2.0 / n - sigma + alpha * sigma, 1.0 - 2.0 / n


def select_exponents(n: int, sigma: float) -> Exponents:
    """Deterministic admissible exponent choice.

    alpha = (sigma - 4/n) / (2 sigma), beta the midpoint of the admissible
    interval clipped below at 0.  Raises SubcriticalExponent when the interval
    is empty (sigma <= 4/n).
    """
    gap = sigma - 4.0 / n
    if gap <= 0.0:
        raise SubcriticalExponent(f"sigma = {sigma} <= 4/n = {4.0 / n}")
    alpha = gap / (2.0 * sigma)
    lo, hi = exponent_window(n, sigma, alpha)
    lo = max(0.0, lo)
    if not lo < hi:
        raise SubcriticalExponent(
            f"empty exponent window for n = {n}, sigma = {sigma}: ({lo}, {hi})"
        )
    return Exponents(alpha=alpha, beta=0.5 * (lo + hi))


_LD_FIELDS = (
    "R", "sigma", "k", "K_big", "mu_lo", "mu_hi", "omega_vol", "a",
    "alpha", "beta", "theta", "gamma", "delta", "y0", "T", "s0",
    "delta_star", "delta_2star", "gamma_star", "y_star", "L_big",
    "s_star", "s_2star", "theta_star", "theta_2star", "T_star",
)


@dataclass(frozen=True)
class SubsolutionSpec:
    """Complete parameter bundle of one certified-candidate subsolution.

    Scalars are numpy longdouble.  Echoes the model constants it was built
    from so that evaluation and certification need no other inputs.
    """

    n: int
    R: LD
    sigma: LD
    k: LD
    K_big: LD
    mu_lo: LD
    mu_hi: LD
    omega_vol: LD
    a: LD
    alpha: LD
    beta: LD
    theta: LD
    gamma: LD
    delta: LD
    y0: LD
    T: LD
    s0: LD
    delta_star: LD
    delta_2star: LD
    gamma_star: LD
    y_star: LD
    L_big: LD
    s_star: LD
    s_2star: LD
    theta_star: LD
    theta_2star: LD
    T_star: LD

    @property
    def exponents(self) -> Exponents:
        return Exponents(alpha=float(self.alpha), beta=float(self.beta))

    @property
    def s_max(self) -> LD:
        return self.R ** self.n


def _candidate_caps(n, sigma, a, K, mu_hi, alpha, beta, delta_2star):
    """The four s-threshold caps, each clipped to <= 1.

    Shrunk by a relative 1e-9 so the re-verified inequalities hold strictly
    even when a cap binds (exact arithmetic would sit at equality there).
    """
    e = np.exp(LD(1))
    one = LD(1)
    shrink = one - LD(1e-9)
    cap_outer_mean = (n * a / (2 * e * mu_hi)) ** (one / (one - beta))
    cap_curvature = (a * alpha / (4 * n * (one - alpha) * e)) ** (
        one / (one - LD(2) / n - beta)
    )
    cap_growth = (n * a / (4 * (one - alpha) * e)) ** (one / (one - beta - delta_2star))
    s_star = min(one, shrink * cap_outer_mean, shrink * cap_curvature,
                 shrink * cap_growth)
    exponent = beta - LD(2) / n - one + sigma - alpha * sigma
    cap_production = (
        K * a**sigma * np.exp(-(sigma - one)) / (a * (one + n**2 / beta))
    ) ** (one / exponent)
    s_2star = min(one, shrink * cap_production)
    return s_star, s_2star


def select_parameters(p: ModelParams, dc: DerivedConstants, ex: Exponents,
                      T_star: float) -> SubsolutionSpec:
    """Assemble every subsolution constant and re-verify the full inequality set.

    Order: damping-region exponents delta*, delta**; rate gamma*; kink floor
    y*; growth cap L; thresholds s*, s**, s0; damping floors theta*, theta**;
    assembled delta, theta, gamma; finally y0 by power-of-two doubling of
    max(y*, 1, 1/R^n) + 1 until the horizon T = 1/(gamma delta y0^delta)
    drops below min(1/theta, T_star).  Raises SelectionInfeasible when the
    re-verification fails (an implementation or input inconsistency, since
    feasibility is guaranteed for admissible inputs).
    """
    n = int(p.n)
    e = np.exp(LD(1))
    one = LD(1)
    R = LD(p.R)
    sigma = LD(p.sigma)
    alpha = LD(ex.alpha)
    beta = LD(ex.beta)
    mu_lo = LD(p.M_lo) / (2 * LD(dc.omega_vol))
    mu_hi = 2 * LD(p.M_hi) / LD(dc.omega_vol)
    rn = R**n
    a = mu_lo * rn / (n * np.exp(one / e) * (rn + one))
    K = LD(p.k) * LD(n) ** (sigma - one)

    lo, hi = exponent_window(n, float(sigma), float(alpha))
    if not (max(lo, 0.0) < float(beta) < hi):
        raise SelectionInfeasible(
            f"exponents outside admissible window: beta = {float(beta)} "
            f"not in ({max(lo, 0.0)}, {hi})"
        )

    delta_star = one - beta
    delta_2star = (one - beta) / 2
    gamma_star = n * a / e / (2 * (one - alpha))
    y_star = max(one, (2 * e * mu_hi / (n * a)) ** (one / (one - beta)),
                 one / rn + LD(EPS_STRICT))
    L = K * (a / e) ** (sigma - one)
    s_star, s_2star = _candidate_caps(n, sigma, a, K, mu_hi, alpha, beta, delta_2star)
    s0 = min(s_star, s_2star)

    theta_star = ((one + mu_hi * rn) / s0 ** (one + alpha)
                  + n**2 * R ** (2 * n - 2) / (alpha * s0 ** (2 + alpha)))
    theta_star = theta_star * (one + LD(EPS_STRICT))
    # damping floor for the outer production region: the source states the
    # exponent -n/2 while the final estimate uses -2/n with an extra factor a;
    # take the max over all four readings so every sufficient condition holds
    c_outer = 2 * (one - beta) * (one + n**2 / beta)
    theta_2star = max(
        LD(2),
        c_outer * s0 ** (-LD(n) / 2),
        c_outer * s0 ** (-LD(2) / n),
        c_outer * a * s0 ** (-LD(n) / 2),
        c_outer * a * s0 ** (-LD(2) / n),
    )

    delta = min(delta_star, delta_2star, LD(2) / n)
    theta = max(theta_star, theta_2star, LD(2))
    gamma = min(gamma_star, L, one)

    base = max(y_star, one, one / rn) + one
    cap = min(one / theta, LD(T_star))
    y0 = base
    T = one / (gamma * delta * y0**delta)
    for _ in range(20000):
        if T < cap * (one - LD(1e-9)):
            break
        y0 = y0 * 2
        T = one / (gamma * delta * y0**delta)
    else:
        raise SelectionInfeasible("kink-scale doubling failed to shrink the horizon")

    spec = SubsolutionSpec(
        n=n, R=R, sigma=sigma, k=LD(p.k), K_big=K, mu_lo=mu_lo, mu_hi=mu_hi,
        omega_vol=LD(dc.omega_vol), a=a, alpha=alpha, beta=beta, theta=theta,
        gamma=gamma, delta=delta, y0=y0, T=T, s0=s0, delta_star=delta_star,
        delta_2star=delta_2star, gamma_star=gamma_star, y_star=y_star, L_big=L,
        s_star=s_star, s_2star=s_2star, theta_star=theta_star,
        theta_2star=theta_2star, T_star=LD(T_star),
    )
    failures = [name for name, ok, _ in verify_spec(spec) if not ok]
    if failures:
        raise SelectionInfeasible(f"re-verification failed: {', '.join(failures)}")
    return spec


def verify_spec(spec: SubsolutionSpec) -> list[tuple[str, bool, str]]:
    """Re-evaluate every selection inequality on a spec.

    Returns (name, holds, detail) triples; select_parameters fails loudly if
    any is False.  Exposed so tampered specs can be diagnosed directly.
    """
    e = np.exp(LD(1))
    one = LD(1)
    n, R = spec.n, spec.R
    a, K, sigma = spec.a, spec.K_big, spec.sigma
    alpha, beta = spec.alpha, spec.beta
    rn = R**n
    checks = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    lo, hi = exponent_window(n, float(sigma), float(alpha))
    add("exponent-window-lower", lo < float(beta), f"{lo} < {float(beta)}")
    add("exponent-window-upper", float(beta) < hi, f"{float(beta)} < {hi}")
    add("exponent-consequence-growth",
        beta + (one - alpha) * sigma > one + LD(2) / n)
    add("exponent-consequence-curvature", one - LD(2) / n - beta > 0)

    add("kink-floor-unit", spec.y_star >= one)
    add("kink-floor-mean",
        spec.y_star >= (2 * e * spec.mu_hi / (n * a)) ** (one / (one - beta)))
    add("kink-floor-radius", spec.y_star > one / rn)

    add("threshold-outer-mean",
        spec.s_star <= (n * a / (2 * e * spec.mu_hi)) ** (one / (one - beta)))
    lhs = (2 * n * (one - alpha) * e / (a * alpha)) * spec.s_star ** (
        one - LD(2) / n - beta)
    add("threshold-curvature", lhs <= 0.5, f"{float(lhs)} <= 0.5")
    lhs = (2 * (one - alpha) * e / (n * a)) * spec.s_star ** (
        one - beta - spec.delta_2star)
    add("threshold-growth", lhs <= 0.5, f"{float(lhs)} <= 0.5")
    lhs = a * (one + n**2 / beta) * spec.s_2star ** (
        beta - LD(2) / n - one + sigma - alpha * sigma)
    rhs = K * a**sigma * np.exp(-(sigma - one))
    add("threshold-production", lhs <= rhs, f"{float(lhs)} <= {float(rhs)}")

    floor = ((one + spec.mu_hi * rn) / spec.s0 ** (one + alpha)
             + n**2 * R ** (2 * n - 2) / (alpha * spec.s0 ** (2 + alpha)))
    add("damping-outer-advective", spec.theta > floor)
    c_outer = 2 * (one - beta) * (one + n**2 / beta)
    add("damping-outer-production-floor", spec.theta_2star >= 2)
    add("damping-outer-production",
        spec.theta >= max(c_outer, c_outer * a) * spec.s0 ** (-LD(n) / 2))
    add("damping-outer-production-alt",
        spec.theta >= max(c_outer, c_outer * a) * spec.s0 ** (-LD(2) / n))

    add("assembled-delta", spec.delta == min(spec.delta_star, spec.delta_2star, LD(2) / n))
    add("assembled-s0", spec.s0 == min(spec.s_star, spec.s_2star))
    add("assembled-theta", spec.theta == max(spec.theta_star, spec.theta_2star, LD(2)))
    add("assembled-gamma", spec.gamma == min(spec.gamma_star, spec.L_big, one))

    add("kink-initial-unit", spec.y0 > max(one, one / rn))
    add("kink-initial-floor", spec.y0 >= spec.y_star)
    T = one / (spec.gamma * spec.delta * spec.y0**spec.delta)
    add("horizon-formula", abs(T - spec.T) <= LD(1e-18) * T)
    add("horizon-window", spec.T < min(one / spec.theta, spec.T_star))

    add("growth-rate-caps", spec.gamma <= min(spec.gamma_star, spec.L_big, one))
    add("growth-exponent-caps",
        spec.delta <= min(spec.delta_star, spec.delta_2star, LD(2) / n))
    return checks


# -- the growth function y(t) ------------------------------------------------------

def y_of_t(spec: SubsolutionSpec, t):
    """Closed form y(t) = y0 (1 - t/T)^(-1/delta) on [0, T); diverges at T.

    Evaluated via t/T, which is algebraically identical to the textbook form
    1 - gamma delta y0^delta t but avoids overflow in the product.
    """
    t = np.asarray(t, dtype=LD)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    if np.any(t >= spec.T):
        raise HorizonExceeded(f"t = {float(np.max(t))} >= horizon T = {float(spec.T)}")
    return spec.y0 * (1 - t / spec.T) ** (-1 / spec.delta)


def y_rate(spec: SubsolutionSpec, y):
    """y'(t) = gamma y^(1+delta) evaluated from y."""
    return spec.gamma * y ** (1 + spec.delta)


# -- profile evaluation --------------------------------------------------------------

Side = Literal["auto", "left", "right"]


@dataclass(frozen=True)
class ProfileEval:
    """Closed-form profile value and partial derivatives at (s, t).

    At the kink s = 1/y(t) the value and first derivatives are continuous;
    side records which branch each sample used ("inner"/"outer").  The second
    derivative jumps there: request side="left"/"right" for one-sided limits.
    """

    s: np.ndarray
    t: float
    value: np.ndarray
    d_t: np.ndarray
    d_s: np.ndarray
    d_ss: np.ndarray
    kink: float
    side: np.ndarray


def eval_hat(spec: SubsolutionSpec, which: str, s, t, side: Side = "auto") -> ProfileEval:
    """Undamped profile Uhat (which="U", exponent alpha) or What ("W", beta).

    side="auto" assigns s <= 1/y(t) to the inner branch; "left"/"right" force
    the inner/outer formulas (one-sided limits at the kink).
    """
    if which not in ("U", "W"):
        raise ValueError(f"which must be 'U' or 'W', got {which!r}")
    x = spec.alpha if which == "U" else spec.beta
    a = spec.a
    t_ld = LD(t)
    y = y_of_t(spec, t_ld)
    yp = y_rate(spec, y)
    kink = 1 / y
    s_arr = np.atleast_1d(np.asarray(s, dtype=LD))
    if np.any(s_arr < 0) or np.any(s_arr > spec.s_max):
        raise ValueError("s outside [0, R^n]")
    if side == "auto":
        inner = s_arr <= kink
    elif side == "left":
        inner = np.ones(s_arr.shape, dtype=bool)
    elif side == "right":
        inner = np.zeros(s_arr.shape, dtype=bool)
    else:
        raise ValueError(f"side must be auto/left/right, got {side!r}")

    value = np.empty_like(s_arr)
    d_t = np.empty_like(s_arr)
    d_s = np.empty_like(s_arr)
    d_ss = np.empty_like(s_arr)

    si = s_arr[inner]
    slope = a * y ** (1 - x)
    value[inner] = slope * si
    d_s[inner] = slope
    d_ss[inner] = 0.0
    d_t[inner] = (1 - x) * a * y ** (-x) * yp * si

    outer = ~inner
    z = s_arr[outer] - (1 - x) / y
    if np.any(z <= 0):
        raise ValueError("outer branch evaluated at s <= kink")
    xpow = x ** (1 - x)
    value[outer] = x ** (-x) * a * z**x
    d_s[outer] = xpow * a * z ** (x - 1)
    d_ss[outer] = -xpow * (1 - x) * a * z ** (x - 2)
    d_t[outer] = xpow * (1 - x) * a * z ** (x - 1) * yp / y**2

    sides = np.where(inner, "inner", "outer")
    squeeze = np.isscalar(s) or (isinstance(s, np.ndarray) and s.ndim == 0)
    if squeeze:
        return ProfileEval(s_arr[0], float(t), value[0], d_t[0], d_s[0], d_ss[0],
                           float(kink), sides[0])
    return ProfileEval(s_arr, float(t), value, d_t, d_s, d_ss, float(kink), sides)


def eval_sub(spec: SubsolutionSpec, which: str, s, t, side: Side = "auto") -> ProfileEval:
    """Damped subsolution profile e^(-theta t) * hat; d_t gains the -theta term."""
    hat = eval_hat(spec, which, s, t, side)
    damp = np.exp(-spec.theta * LD(t))
    return ProfileEval(
        s=hat.s,
        t=hat.t,
        value=damp * hat.value,
        d_t=damp * (hat.d_t - spec.theta * hat.value),
        d_s=damp * hat.d_s,
        d_ss=damp * hat.d_ss,
        kink=hat.kink,
        side=hat.side,
    )


def envelope(spec: SubsolutionSpec, t):
    """Center-density lower envelope e^(-theta t) a y^(1-alpha)(t) = n uU_s(0+, t)."""
    t_ld = np.asarray(t, dtype=LD)
    y = y_of_t(spec, t_ld)
    return np.exp(-spec.theta * t_ld) * spec.a * y ** (1 - spec.alpha)


def envelope_monotone_time(spec: SubsolutionSpec):
    """Time beyond which the envelope is strictly increasing (closed form).

    d/dt log envelope = -theta + (1-alpha) gamma y^delta, positive once
    y^delta >= theta / ((1-alpha) gamma).
    """
    ratio = spec.y0**spec.delta * (1 - spec.alpha) * spec.gamma / spec.theta
    if ratio >= 1:
        return LD(0)
    return spec.T * (1 - ratio)


# -- admissible initial data ----------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Continuum initial profiles u0(r) = c n Uhat_s(r^n, 0), w0 likewise.

    c is the smallest factor >= 1 putting both masses inside [M_lo, M_hi]
    (always > 1: the unscaled masses are at most M_lo/2).  w_sup_ok records
    whether sup w0 = c n a y0^(1-beta) respects the mean-density cap
    M_hi/|Omega|; for constants produced by select_parameters this is
    provably always False (violation factor >= 8e), so it is reported as a
    diagnostic rather than raised.
    """

    u0: Callable
    w0: Callable
    c: LD
    mass_u: float
    mass_w: float
    w_sup: LD
    w_sup_bound: float
    w_sup_ok: bool


def initial_data(spec: SubsolutionSpec, p: ModelParams) -> InitialData:
    """Generate admissible initial profiles dominating the subsolution at t = 0."""
    n = spec.n
    sn = spec.s_max
    u_end = eval_hat(spec, "U", sn, 0.0).value
    w_end = eval_hat(spec, "W", sn, 0.0).value
    sigma_sphere = n * LD(ball_volume(n, 1.0))  # unit-sphere area; masses = sigma * hat(R^n)
    c = max(LD(p.M_lo) / (sigma_sphere * u_end),
            LD(p.M_lo) / (sigma_sphere * w_end), LD(1))
    mass_u = float(c * sigma_sphere * u_end)
    mass_w = float(c * sigma_sphere * w_end)
    if mass_u > p.M_hi * (1 + 1e-12) or mass_w > p.M_hi * (1 + 1e-12):
        raise InfeasibleInitialData(
            f"masses ({mass_u}, {mass_w}) cannot both land in "
            f"[{p.M_lo}, {p.M_hi}]; enlarge M_hi"
        )

    def u0(r):
        s = np.asarray(r, dtype=LD) ** n
        return c * n * eval_hat(spec, "U", s, 0.0).d_s

    def w0(r):
        s = np.asarray(r, dtype=LD) ** n
        return c * n * eval_hat(spec, "W", s, 0.0).d_s

    w_sup = c * n * spec.a * spec.y0 ** (1 - spec.beta)
    bound = float(p.M_hi / ball_volume(n, p.R))
    return InitialData(
        u0=u0, w0=w0, c=c, mass_u=mass_u, mass_w=mass_w,
        w_sup=w_sup, w_sup_bound=bound, w_sup_ok=bool(w_sup <= bound),
    )


def initial_state(spec: SubsolutionSpec, p: ModelParams, grid: RadialGrid,
                  data: InitialData | None = None) -> RadialState:
    """Sample the generated data on a grid, preserving cell masses exactly.

    Node i carries the exact cell average c n (Uhat(s_hi) - Uhat(s_lo)) /
    (s_hi - s_lo) over its finite-volume cell, so the discrete quadrature
    reproduces the continuum masses to round-off (a pointwise sample of the
    near-axis spike would inflate the discrete mass by many orders).
    """
    if data is None:
        data = initial_data(spec, p)
    edges = np.concatenate(([0.0], grid.faces, [grid.R]))
    s_edges = np.asarray(edges, dtype=LD) ** spec.n
    ds = np.diff(s_edges)
    u_cells = data.c * spec.n * np.diff(eval_hat(spec, "U", s_edges, 0.0).value) / ds
    w_cells = data.c * spec.n * np.diff(eval_hat(spec, "W", s_edges, 0.0).value) / ds
    return make_state(grid, 0.0, u_cells.astype(float), w_cells.astype(float))


def write_profile_csv(path, spec: SubsolutionSpec, s_values, t: float) -> None:
    """Profile dump at one time: s, uU, uW, their derivatives, branch side."""
    uU = eval_sub(spec, "U", np.asarray(s_values, dtype=float), t)
    uW = eval_sub(spec, "W", np.asarray(s_values, dtype=float), t)
    with open(path, "w") as fh:
        fh.write("s,uU,uU_t,uU_s,uU_ss,uW,uW_t,uW_s,uW_ss,side\n")
        for j in range(uU.s.size):
            row = (uU.s[j], uU.value[j], uU.d_t[j], uU.d_s[j], uU.d_ss[j],
                   uW.value[j], uW.d_t[j], uW.d_s[j], uW.d_ss[j])
            fh.write(",".join(np.format_float_scientific(x) for x in row)
                     + f",{uU.side[j]}\n")


# -- key=value serialization -----------------------------------------------------------

def spec_to_config(spec: SubsolutionSpec) -> str:
    """Serialize to key = value text; round-trips exactly via spec_from_config."""
    lines = [f"n = {spec.n}"]
    for name in _LD_FIELDS:
        lines.append(f"{name} = {np.format_float_scientific(getattr(spec, name))}")
    return "\n".join(lines) + "\n"


def spec_from_config(text: str) -> SubsolutionSpec:
    """Parse the serialization produced by spec_to_config."""
    from .params import parse_kv_text

    mapping = parse_kv_text(text)
    expected = {"n", *_LD_FIELDS}
    unknown = sorted(set(mapping) - expected)
    if unknown:
        raise ConfigError(f"unknown spec keys: {', '.join(unknown)}")
    missing = sorted(expected - set(mapping))
    if missing:
        raise ConfigError(f"missing spec keys: {', '.join(missing)}")
    kwargs = {"n": int(mapping["n"])}
    for name in _LD_FIELDS:
        kwargs[name] = LD(mapping[name])
    return SubsolutionSpec(**kwargs)
