"""Radially symmetric solver for the primitive (u, v, w) system on B_R.

Space is discretized with M+1 uniform nodes r_0 = 0 < ... < r_M = R and
finite-volume cells around each node, so the quadrature weights reproduce
|Omega| exactly and the flux-form advection conserves the discrete mass of u
to round-off.  The elliptic equation for v is solved by one pass of radial
quadrature (exact under radial symmetry), not iteratively:

    v_r(r) = r^(1-n) int_0^r rho^(n-1) (mean(w) - w(rho)) drho,

with v shifted to zero weighted mean.  Time stepping is IMEX: diffusion
implicit via tridiagonal solves, upwinded advection and reaction explicit.
Near r = 0 the finite-volume stencil reduces to the regularized limit
2n (u_1 - u_0)/dr^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from . import quadrature
from .errors import (
    MeanMismatch,
    NegativeDensityProduced,
    StabilityViolated,
    TooFewNodes,
)
from .params import (
    ModelParams,
    ball_volume,
    derived_constants,
    production_derivative_estimate,
    production_rate,
)

MIN_NODES = 16
MEAN_RTOL = 1e-9
#: negative values within this relative tolerance are clipped, beyond it raised
NEGATIVITY_RTOL = 1e-12
#: reaction stability margin: dt <= 0.1 / max(1, f'(sup u))
REACTION_SAFETY = 0.1
DT_GROWTH = 1.2


@dataclass(frozen=True)
class RadialGrid:
    """Uniform node grid with finite-volume cells.

    shape_vols are sigma-free cell volumes int_cell rho^(n-1) drho; the public
    quadrature weights cell_volumes = sigma_{n-1} * shape_vols sum to |Omega|.
    """

    n: int
    R: float
    r: np.ndarray
    faces: np.ndarray
    shape_vols: np.ndarray
    cell_volumes: np.ndarray
    dr: float

    @property
    def node_count(self) -> int:
        return self.r.size

    def integrate(self, field_values: np.ndarray) -> float:
        """int_Omega field dx under radial symmetry."""
        return float(self.cell_volumes @ field_values)

    def mean(self, field_values: np.ndarray) -> float:
        return self.integrate(field_values) / float(self.cell_volumes.sum())


def build_grid(p: ModelParams, M: int) -> RadialGrid:
    """Grid with M intervals (nodes r_0 = 0, ..., r_M = R).  Requires M >= 16."""
    if M < MIN_NODES:
        raise TooFewNodes(f"need at least {MIN_NODES} intervals, got {M}")
    r = np.linspace(0.0, p.R, M + 1)
    faces = 0.5 * (r[:-1] + r[1:])
    edges = np.concatenate(([0.0], faces, [p.R]))
    shape_vols = np.diff(edges ** p.n) / p.n
    sigma = p.n * ball_volume(p.n, 1.0)
    return RadialGrid(
        n=p.n,
        R=p.R,
        r=r,
        faces=faces,
        shape_vols=shape_vols,
        cell_volumes=sigma * shape_vols,
        dr=float(r[1] - r[0]),
    )


@dataclass(frozen=True)
class RadialState:
    """Primitive fields at one time.  u, w >= 0; v has zero weighted mean."""

    grid: RadialGrid
    t: float
    u: np.ndarray
    w: np.ndarray
    v: np.ndarray
    v_r: np.ndarray

    @property
    def sup_u(self) -> float:
        return float(self.u.max())

    @property
    def sup_w(self) -> float:
        return float(self.w.max())

    @property
    def mass_u(self) -> float:
        return self.grid.integrate(self.u)

    @property
    def mu_w(self) -> float:
        return self.grid.mean(self.w)


def solve_v(grid: RadialGrid, w: np.ndarray, muw: float):
    """Signal potential from w by cumulative radial quadrature.

    Returns (v, v_r) at nodes with Lap(v) = muw - w, zero weighted mean, and
    v_r pinned to 0 at both ends (Neumann; the r = R value vanishes to
    quadrature tolerance and is pinned exactly).
    """
    mean_w = grid.mean(w)
    scale = max(abs(mean_w), abs(muw), 1e-300)
    if abs(mean_w - muw) > MEAN_RTOL * scale:
        raise MeanMismatch(f"muw = {muw} but quadrature mean is {mean_w}")
    source = muw - w
    g = quadrature.cumulative_moment(grid.r, source, grid.n)
    v_r = np.zeros_like(w)
    v_r[1:] = g[1:] / grid.r[1:] ** (grid.n - 1)
    v_r[-1] = 0.0
    v = np.concatenate(([0.0], np.cumsum(0.5 * (v_r[:-1] + v_r[1:]) * np.diff(grid.r))))
    v -= grid.mean(v)
    return v, v_r


def _face_velocities(grid: RadialGrid, w: np.ndarray, muw: float) -> np.ndarray:
    """v_r at interior faces from the cellwise cumulative source.

    Built from the same cell volumes the advection uses, so the outermost
    face velocity vanishes identically when muw is the weighted mean of w.
    """
    cum = np.cumsum(grid.shape_vols * (muw - w))
    return cum[:-1] / grid.faces ** (grid.n - 1)


def make_state(grid: RadialGrid, t: float, u: np.ndarray, w: np.ndarray) -> RadialState:
    """Assemble a consistent state: solves v from w."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    v, v_r = solve_v(grid, w, grid.mean(w))
    return RadialState(grid=grid, t=t, u=u, w=w, v=v, v_r=v_r)


def _diffusion_solve(grid: RadialGrid, rhs: np.ndarray, dt: float) -> np.ndarray:
    """Solve (I - dt*Lap_h) x = rhs with Neumann fluxes, tridiagonal."""
    g = grid.faces ** (grid.n - 1) / grid.dr
    sv = grid.shape_vols
    upper = np.zeros_like(rhs)
    lower = np.zeros_like(rhs)
    upper[:-1] = -dt * g / sv[:-1]
    lower[1:] = -dt * g / sv[1:]
    diag = 1.0 - upper - lower
    ab = np.zeros((3, rhs.size))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def _advective_divergence(grid: RadialGrid, u: np.ndarray, vr_face: np.ndarray) -> np.ndarray:
    """div(u v_r e_r) per cell, upwinded flux form; boundary fluxes are zero."""
    upwind = np.where(vr_face > 0.0, u[:-1], u[1:])
    flux = grid.faces ** (grid.n - 1) * vr_face * upwind
    div = np.zeros_like(u)
    div[:-1] += flux
    div[1:] -= flux
    return div / grid.shape_vols


def _enforce_nonnegative(x: np.ndarray, label: str) -> np.ndarray:
    m = float(x.min())
    if m >= 0.0:
        return x
    sup = float(np.abs(x).max())
    if m < -NEGATIVITY_RTOL * max(sup, 1e-300):
        raise NegativeDensityProduced(f"{label}: min {m} with sup {sup}")
    return np.maximum(x, 0.0)


def advective_dt_bound(state: RadialState, c_adv: float = 0.5) -> float:
    """Stability bound c_adv * dr / max|v_r| at faces (inf when v_r == 0)."""
    vr_face = _face_velocities(state.grid, state.w, state.grid.mean(state.w))
    vmax = float(np.abs(vr_face).max()) if vr_face.size else 0.0
    if vmax == 0.0:
        return np.inf
    return c_adv * state.grid.dr / vmax


def step(state: RadialState, p: ModelParams, dt: float, c_adv: float = 0.5) -> RadialState:
    """Advance one IMEX step of size dt.

    Explicit upwinded advection of u and explicit reaction for w at the old
    time, then implicit diffusion of both via tridiagonal solves; v re-solved
    from the new w.  Raises StabilityViolated when dt exceeds the advective
    bound and NegativeDensityProduced when clipping would exceed tolerance.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    grid = state.grid
    muw = grid.mean(state.w)
    vr_face = _face_velocities(grid, state.w, muw)
    vmax = float(np.abs(vr_face).max()) if vr_face.size else 0.0
    if vmax > 0.0 and dt > c_adv * grid.dr / vmax * (1.0 + 1e-12):
        raise StabilityViolated(
            f"dt = {dt} exceeds bound {c_adv * grid.dr / vmax} (max|v_r| = {vmax})"
        )
    u_star = state.u - dt * _advective_divergence(grid, state.u, vr_face)
    u_new = _enforce_nonnegative(_diffusion_solve(grid, u_star, dt), "u")
    w_star = state.w + dt * (production_rate(p, state.u) - state.w)
    w_new = _enforce_nonnegative(_diffusion_solve(grid, w_star, dt), "w")
    v, v_r = solve_v(grid, w_new, grid.mean(w_new))
    return RadialState(grid=grid, t=state.t + dt, u=u_new, w=w_new, v=v, v_r=v_r)


@dataclass(frozen=True)
class RunControls:
    """Integrator controls for run()."""

    t_end: float
    dt_init: float = 1e-3
    dt_min: float = 1e-10
    blowup_factor: float = 1e6
    c_adv: float = 0.5
    max_steps: int = 2_000_000
    keep_states: bool = False


@dataclass
class RunReport:
    """Recorded time series and verdict flags of one run.

    All histories share the time axis `times`; blowup_time_estimate is present
    iff blowup_flag.  T0_estimate is the first recorded time with
    sup w > 2 sup w_0 (empirical; None if never), muw_exit_time the first
    recorded time with mean(w) outside [mu_lo, mu_hi].
    """

    final_time: float
    step_count: int
    mass_drift: float
    times: np.ndarray
    sup_u_history: np.ndarray
    sup_w_history: np.ndarray
    mass_u_history: np.ndarray
    muw_history: np.ndarray
    dt_history: np.ndarray
    blowup_flag: bool
    blowup_time_estimate: Optional[float]
    blowup_reason: Optional[str]
    T0_estimate: Optional[float]
    muw_exit_time: Optional[float]
    states: list = field(default_factory=list)


def run(state0: RadialState, p: ModelParams, controls: RunControls) -> RunReport:
    """Integrate until t_end or a blow-up trigger.

    The step size is adapted each step to min(1.2*dt_prev, advective bound,
    reaction bound); blow-up is declared when sup u crosses
    blowup_factor * sup u_0 or the adaptive dt falls below dt_min.
    """
    dc = derived_constants(p)
    state = state0
    sup_u0 = state.sup_u
    recs = {k: [] for k in ("t", "sup_u", "sup_w", "mass", "muw", "dt")}
    states: list[RadialState] = []

    def record(s: RadialState, dt_used: float):
        recs["t"].append(s.t)
        recs["sup_u"].append(s.sup_u)
        recs["sup_w"].append(s.sup_w)
        recs["mass"].append(s.mass_u)
        recs["muw"].append(s.mu_w)
        recs["dt"].append(dt_used)
        if controls.keep_states:
            states.append(s)

    record(state, 0.0)
    blowup = False
    trigger_t: Optional[float] = None
    reason: Optional[str] = None
    steps = 0
    dt_prev = controls.dt_init
    while steps < controls.max_steps:
        if state.t >= controls.t_end * (1.0 - 1e-12):
            break
        if state.sup_u >= controls.blowup_factor * sup_u0:
            blowup, trigger_t, reason = True, state.t, "sup_u threshold"
            break
        dt_adv = advective_dt_bound(state, controls.c_adv)
        dt_react = REACTION_SAFETY / max(1.0, production_derivative_estimate(p, state.sup_u))
        dt = min(DT_GROWTH * dt_prev, dt_adv, dt_react)
        if dt < controls.dt_min:
            blowup, trigger_t, reason = True, state.t, "dt collapse"
            break
        dt_prev = dt
        state = step(state, p, min(dt, controls.t_end - state.t), controls.c_adv)
        steps += 1
        record(state, state.t - recs["t"][-1])

    mass = np.asarray(recs["mass"])
    drift = float(np.abs(mass - mass[0]).max() / abs(mass[0])) if mass[0] != 0 else 0.0
    sup_w = np.asarray(recs["sup_w"])
    times = np.asarray(recs["t"])
    above = np.nonzero(sup_w > 2.0 * sup_w[0])[0]
    muw = np.asarray(recs["muw"])
    outside = np.nonzero((muw < dc.mu_lo) | (muw > dc.mu_hi))[0]
    return RunReport(
        final_time=float(state.t),
        step_count=steps,
        mass_drift=drift,
        times=times,
        sup_u_history=np.asarray(recs["sup_u"]),
        sup_w_history=sup_w,
        mass_u_history=mass,
        muw_history=muw,
        dt_history=np.asarray(recs["dt"]),
        blowup_flag=blowup,
        blowup_time_estimate=trigger_t if blowup else None,
        blowup_reason=reason,
        T0_estimate=float(times[above[0]]) if above.size else None,
        muw_exit_time=float(times[outside[0]]) if outside.size else None,
        states=states,
    )


# -- CSV emission -----------------------------------------------------------------

def write_run_csv(path, report: RunReport) -> None:
    """Per-run series: t, sup_u, sup_w, mass_u, mu_w, dt."""
    with open(path, "w") as fh:
        fh.write("t,sup_u,sup_w,mass_u,mu_w,dt\n")
        for i in range(report.times.size):
            row = (
                report.times[i],
                report.sup_u_history[i],
                report.sup_w_history[i],
                report.mass_u_history[i],
                report.muw_history[i],
                report.dt_history[i],
            )
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_checkpoint_csv(path, state: RadialState) -> None:
    """Full field dump: r, u, v, w."""
    with open(path, "w") as fh:
        fh.write("r,u,v,w\n")
        for i in range(state.grid.r.size):
            row = (state.grid.r[i], state.u[i], state.v[i], state.w[i])
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
