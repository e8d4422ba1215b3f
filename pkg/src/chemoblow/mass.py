"""Cumulated-density transform and the associated degenerate parabolic system.

For a radial state (u, w) the cumulated densities on s = r^n in [0, R^n] are

    U(s,t) = int_0^(s^(1/n)) rho^(n-1) u(rho,t) drho,    W likewise,

with the exact chain-rule relations u = n U_s, w = n W_s.  They satisfy

    U_t = n^2 s^(2-2/n) U_ss + n U_s (W - muw(t) s / n),
    W_t = n^2 s^(2-2/n) W_ss - W + (1/n) int_0^s f(n U_xi) dxi,

which this module steps with the same IMEX splitting as the primitive solver
(degenerate diffusion implicit, transport and reaction explicit), boundary
values pinned from the mass identities.  The operators evaluated by
p_residual / q_residual are

    P[phi, psi] = phi_t - n^2 s^(2-2/n) phi_ss - n phi_s (psi - mu_hi s / n),
    Q[phi, psi] = psi_t - n^2 s^(2-2/n) psi_ss + psi - K s^(1-sigma) phi^sigma,

with K = k n^(sigma-1) and the convention s^(1-sigma) * 0^sigma = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from . import quadrature
from .errors import MonotonicityLost, NegativePhi, UndefinedDerivative
from .params import ModelParams, production_rate
from .radial import RadialGrid, RadialState

MONOTONICITY_RTOL = 1e-10


@dataclass(frozen=True)
class SGrid:
    """Image of the radial grid under s = r^n (node-for-node)."""

    n: int
    s: np.ndarray

    @property
    def s_max(self) -> float:
        return float(self.s[-1])


def sgrid_from_radial(grid: RadialGrid) -> SGrid:
    return SGrid(n=grid.n, s=grid.r ** grid.n)


@dataclass(frozen=True)
class MassState:
    """Cumulated densities and their s-derivatives at one time.

    U_s and W_s are exact (u/n, w/n) when produced by cumulate(); second
    derivatives come from finite differences (one-sided next to s = 0).
    """

    sgrid: SGrid
    t: float
    U: np.ndarray
    W: np.ndarray
    U_s: np.ndarray
    W_s: np.ndarray
    U_ss: np.ndarray
    W_ss: np.ndarray

    @property
    def mu_w(self) -> float:
        """Mean density of w recovered from the boundary identity W(R^n) = muw R^n / n."""
        return float(self.sgrid.n * self.W[-1] / self.sgrid.s_max)

    @property
    def mu_u(self) -> float:
        return float(self.sgrid.n * self.U[-1] / self.sgrid.s_max)

    @property
    def sup_w(self) -> float:
        return float(self.sgrid.n * self.W_s.max())


def _second_derivative_onesided(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Nonuniform second difference; first interior node one-sided (away from s=0)."""
    d2 = quadrature.second_derivative(s, y)
    if s.size >= 4:
        # stencil on nodes 1..3 instead of 0..2: benign since the degenerate
        # coefficient vanishes at s = 0, fixed for reproducibility
        h1 = s[2] - s[1]
        h2 = s[3] - s[2]
        d2[1] = 2.0 * (h1 * y[3] - (h1 + h2) * y[2] + h2 * y[1]) / (h1 * h2 * (h1 + h2))
        d2[0] = d2[1]
    return d2


def _slope_away_from_zero(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """dy/ds with the node next to s = 0 differenced one-sidedly to the right."""
    d = quadrature.derivative(s, y)
    if s.size >= 3:
        d[1] = (y[2] - y[1]) / (s[2] - s[1])
        d[0] = d[1]
    return d


def cumulate(state: RadialState, grid: RadialGrid) -> MassState:
    """Cumulated densities of a radial state by cumulative quadrature."""
    sg = sgrid_from_radial(grid)
    U = quadrature.cumulative_moment(grid.r, state.u, grid.n)
    W = quadrature.cumulative_moment(grid.r, state.w, grid.n)
    U_s = state.u / grid.n
    W_s = state.w / grid.n
    return MassState(
        sgrid=sg,
        t=state.t,
        U=U,
        W=W,
        U_s=U_s,
        W_s=W_s,
        U_ss=_slope_away_from_zero(sg.s, U_s),
        W_ss=_slope_away_from_zero(sg.s, W_s),
    )


@dataclass(frozen=True)
class ProfilePoint:
    """Value and partial derivatives of a profile at one (s, t); array-valued OK."""

    value: np.ndarray
    d_t: np.ndarray
    d_s: np.ndarray
    d_ss: np.ndarray


@dataclass(frozen=True)
class OperatorResidual:
    """Residual record at a sample point; side notes one-sided evaluation at kinks."""

    s: float
    t: float
    p_value: float
    q_value: float
    side: str


def _psi_value(psi):
    return psi.value if isinstance(psi, ProfilePoint) else psi


def p_residual(phi: ProfilePoint, psi, mu_hi: float, n: int, s):
    """P[phi, psi](s) = phi_t - n^2 s^(2-2/n) phi_ss - n phi_s (psi - mu_hi s / n)."""
    for part in (phi.d_t, phi.d_s, phi.d_ss):
        if not np.all(np.isfinite(part)):
            raise UndefinedDerivative("non-finite derivative passed to p_residual")
    s = np.asarray(s)
    return phi.d_t - n**2 * s ** (2.0 - 2.0 / n) * phi.d_ss - n * phi.d_s * (
        _psi_value(psi) - mu_hi * s / n
    )


def q_residual(psi: ProfilePoint, phi, K_big: float, sigma: float, n: int, s):
    """Q[phi, psi](s) = psi_t - n^2 s^(2-2/n) psi_ss + psi - K s^(1-sigma) phi^sigma.

    The production term is evaluated as K s (phi/s)^sigma, which is finite for
    every s > 0 and honors the 0^sigma convention when phi == 0.
    """
    for part in (psi.d_t, psi.d_s, psi.d_ss):
        if not np.all(np.isfinite(part)):
            raise UndefinedDerivative("non-finite derivative passed to q_residual")
    phi_val = np.asarray(_psi_value(phi))
    if np.any(phi_val < 0):
        raise NegativePhi(f"phi must be >= 0, got min {phi_val.min()}")
    s = np.asarray(s)
    production = np.where(phi_val == 0.0, 0.0 * s, K_big * s * (phi_val / s) ** sigma)
    return psi.d_t - n**2 * s ** (2.0 - 2.0 / n) * psi.d_ss + psi.value - production


def _degenerate_diffusion_solve(sg: SGrid, rhs: np.ndarray, dt: float,
                                bc_left: float, bc_right: float) -> np.ndarray:
    """Solve (I - dt n^2 s^(2-2/n) d_ss) x = rhs with Dirichlet ends."""
    s = sg.s
    n = sg.n
    N = s.size
    coef = dt * n**2 * s ** (2.0 - 2.0 / n)
    hl = s[1:-1] - s[:-2]
    hr = s[2:] - s[1:-1]
    denom = hl * hr * (hl + hr)
    lower = np.zeros(N)
    diag = np.ones(N)
    upper = np.zeros(N)
    lower[1:-1] = -coef[1:-1] * 2.0 * hr / denom
    upper[1:-1] = -coef[1:-1] * 2.0 * hl / denom
    diag[1:-1] = 1.0 + coef[1:-1] * 2.0 * (hl + hr) / denom
    b = rhs.copy()
    b[0] = bc_left
    b[-1] = bc_right
    ab = np.zeros((3, N))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, b)


def step_mass(ms: MassState, muw_fn: Callable[[float], float], p: ModelParams,
              dt: float) -> MassState:
    """One IMEX step of the transformed system on the s-grid.

    muw_fn supplies the mean of w as a function of time (from the primitive
    run or a constant bound); it is not recomputed here.  U(0) = W(0) = 0 are
    pinned, U(R^n) is carried (mass conservation) and W(R^n) is updated to
    muw(t+dt) R^n / n.  dt = 0 returns the state unchanged.
    """
    if dt == 0.0:
        return ms
    sg = ms.sgrid
    s = sg.s
    n = sg.n
    dU = quadrature.derivative(s, ms.U)
    transport = n * dU * (ms.W - muw_fn(ms.t) * s / n)
    U_star = ms.U + dt * transport
    U_new = _degenerate_diffusion_solve(sg, U_star, dt, 0.0, float(ms.U[-1]))

    f_of_u = production_rate(p, np.maximum(n * dU, 0.0))
    nonlocal_term = quadrature.cumulative_moment(s, f_of_u, 1) / n
    W_star = ms.W + dt * (-ms.W + nonlocal_term)
    t_new = ms.t + dt
    W_new = _degenerate_diffusion_solve(sg, W_star, dt, 0.0, muw_fn(t_new) * s[-1] / n)

    U_s_new = quadrature.derivative(s, U_new)
    floor = -MONOTONICITY_RTOL * max(float(U_s_new.max()), 1e-300)
    if float(U_s_new.min()) < floor:
        raise MonotonicityLost(
            f"min U_s = {U_s_new.min()} below tolerance {floor} at t = {t_new}"
        )
    return MassState(
        sgrid=sg,
        t=t_new,
        U=U_new,
        W=W_new,
        U_s=U_s_new,
        W_s=quadrature.derivative(s, W_new),
        U_ss=_second_derivative_onesided(s, U_new),
        W_ss=_second_derivative_onesided(s, W_new),
    )


def residual_sweep(states: Sequence[MassState], mu_hi: float, K_big: float,
                   sigma: float) -> list[OperatorResidual]:
    """P and Q residuals of a simulated sequence, U_t by central time differences.

    Only interior times and interior s-nodes are evaluated; intended for the
    sign checks P >= 0, Q >= 0 of the transformed true solution inside its
    hypothesis window (up to truncation error).
    """
    out: list[OperatorResidual] = []
    for kk in range(1, len(states) - 1):
        prev, cur, nxt = states[kk - 1], states[kk], states[kk + 1]
        span = nxt.t - prev.t
        n = cur.sgrid.n
        s = cur.sgrid.s[1:-1]
        U_t = (nxt.U - prev.U)[1:-1] / span
        W_t = (nxt.W - prev.W)[1:-1] / span
        U_ss = _second_derivative_onesided(cur.sgrid.s, cur.U)[1:-1]
        W_ss = _second_derivative_onesided(cur.sgrid.s, cur.W)[1:-1]
        phi = ProfilePoint(cur.U[1:-1], U_t, cur.U_s[1:-1], U_ss)
        psi = ProfilePoint(cur.W[1:-1], W_t, cur.W_s[1:-1], W_ss)
        pv = p_residual(phi, psi, mu_hi, n, s)
        qv = q_residual(psi, phi, K_big, sigma, n, s)
        for j in range(s.size):
            out.append(OperatorResidual(float(s[j]), float(cur.t),
                                        float(pv[j]), float(qv[j]), "interior"))
    return out


def sign_tolerance(scale: float, truncation: float) -> float:
    """Residual sign-check tolerance: max(1e-6 * scale, 10 * truncation)."""
    return max(1e-6 * scale, 10.0 * truncation)


# -- CSV emission ---------------------------------------------------------------

def write_mass_csv(path, ms: MassState) -> None:
    """Mass-state dump: s, U, W, U_s, W_s."""
    with open(path, "w") as fh:
        fh.write("s,U,W,U_s,W_s\n")
        for i in range(ms.sgrid.s.size):
            row = (ms.sgrid.s[i], ms.U[i], ms.W[i], ms.U_s[i], ms.W_s[i])
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_residual_csv(path, residuals: Sequence[OperatorResidual]) -> None:
    """Residual sweep dump: s, t, p_value, q_value, side."""
    with open(path, "w") as fh:
        fh.write("s,t,p_value,q_value,side\n")
        for r in residuals:
            fh.write(
                f"{r.s!r},{r.t!r},{r.p_value!r},{r.q_value!r},{r.side}\n"
            )
