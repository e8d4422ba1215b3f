"""Radial moment quadrature on node grids.

All integrals of the form int_0^r rho^(n-1) h(rho) drho are evaluated with h
replaced by its piecewise-linear interpolant between nodes, and the monomial
moments integrated exactly per interval.  Exact on constant h for every n.
"""

from __future__ import annotations

import numpy as np


def interval_moments(r: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-interval moments I0 = int rho^(n-1) drho and I1 = int rho^n drho."""
    rn = r ** n
    rn1 = r ** (n + 1)
    i0 = np.diff(rn) / n
    i1 = np.diff(rn1) / (n + 1)
    return i0, i1


def cumulative_moment(r: np.ndarray, h: np.ndarray, n: int) -> np.ndarray:
    """Cumulative G_i = int_0^{r_i} rho^(n-1) h(rho) drho, h piecewise linear.

    On [r_j, r_{j+1}] with slope m = (h_{j+1}-h_j)/dr:
        int rho^(n-1) (h_j + m (rho - r_j)) drho = h_j I0 + m (I1 - r_j I0).
    """
    i0, i1 = interval_moments(r, n)
    dr = np.diff(r)
    slope = np.diff(h) / dr
    pieces = h[:-1] * i0 + slope * (i1 - r[:-1] * i0)
    out = np.empty_like(np.asarray(h, dtype=pieces.dtype))
    out[0] = 0.0
    np.cumsum(pieces, out=out[1:])
    return out


def node_weights(r: np.ndarray, n: int) -> np.ndarray:
    """Node weights w_i with sum_i w_i h_i = int_0^R rho^(n-1) h drho (pw-linear h)."""
    i0, i1 = interval_moments(r, n)
    dr = np.diff(r)
    # contribution of h_j: I0 - (I1 - r_j I0)/dr; of h_{j+1}: (I1 - r_j I0)/dr
    right = (i1 - r[:-1] * i0) / dr
    left = i0 - right
    w = np.zeros_like(r)
    w[:-1] += left
    w[1:] += right
    return w


def derivative(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """First derivative dy/ds on a nonuniform grid.

    Three-point central stencil (exact for quadratics) in the interior,
    one-sided two-point differences at both ends.
    """
    d = np.empty_like(y)
    hl = s[1:-1] - s[:-2]
    hr = s[2:] - s[1:-1]
    d[1:-1] = (hl ** 2 * y[2:] - hr ** 2 * y[:-2] + (hr ** 2 - hl ** 2) * y[1:-1]) / (
        hl * hr * (hl + hr)
    )
    d[0] = (y[1] - y[0]) / (s[1] - s[0])
    d[-1] = (y[-1] - y[-2]) / (s[-1] - s[-2])
    return d


def second_derivative(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivative on a nonuniform grid, three-point stencil.

    Ends copy the adjacent interior value; the first interior node is already
    one-sided with respect to the left boundary in the sense that its stencil
    touches s_0.
    """
    d2 = np.empty_like(y)
    hl = s[1:-1] - s[:-2]
    hr = s[2:] - s[1:-1]
    d2[1:-1] = 2.0 * (hl * y[2:] - (hl + hr) * y[1:-1] + hr * y[:-2]) / (
        hl * hr * (hl + hr)
    )
    d2[0] = d2[1]
    d2[-1] = d2[-2]
    return d2
