"""Jointly Gaussian scalar pair: grid discretization and closed-form IB curve.

The discretized joint is exact up to quadrature: X cells are integrated in the
probability domain t = Phi(x), so tail mass beyond +-c folds into the edge
cells and every row of kappa_{y|x} sums to one by telescoping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import OutOfRange
from .probability import JointPMF, Kernel, PMF

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class GaussianPair:
    """Standard normal X, Y with correlation ``rho``; grid on [-c, c] per axis."""

    rho: float
    c: float = 6.0

    def __post_init__(self):
        if not (-1.0 < self.rho < 1.0):
            raise OutOfRange(f"|rho| must be < 1, got {self.rho}")
        if self.c <= 0:
            raise OutOfRange("grid half-width must be positive")

    @property
    def mutual_information(self) -> float:
        return -0.5 * math.log1p(-self.rho**2)


def grid_edges(c: float, cells: int) -> np.ndarray:
    """Cell boundaries on [-c, c] with the outer two replaced by -inf, +inf."""
    if cells < 2:
        raise OutOfRange("need at least 2 cells")
    e = np.linspace(-c, c, cells + 1)
    e[0], e[-1] = -np.inf, np.inf
    return e


def _interval_prob(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Phi(b) - Phi(a) without cancellation in the upper tail."""
    upper = a > 0
    return np.where(upper, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def x_weights(gp: GaussianPair, x_cells: int) -> np.ndarray:
    e = grid_edges(gp.c, x_cells)
    return _interval_prob(e[:-1], e[1:])


def y_channel(gp: GaussianPair, x_cells: int, y_cells: int) -> Kernel:
    """kappa_{y|x} per X cell: cell-averaged conditional law of the Y cell index."""
    ex = grid_edges(gp.c, x_cells)
    ey = grid_edges(gp.c, y_cells)
    lo, hi = ndtr(ex[:-1]), ndtr(ex[1:])
    s = math.sqrt(1.0 - gp.rho**2)
    rows = np.empty((x_cells, y_cells))
    half = 0.5 * (hi - lo)
    for i in range(x_cells):
        t = lo[i] + half[i] * (_GL_NODES + 1.0)
        xs = ndtri(t)
        a = (ey[None, :-1] - gp.rho * xs[:, None]) / s
        b = (ey[None, 1:] - gp.rho * xs[:, None]) / s
        probs = _interval_prob(a, b)
        rows[i] = 0.5 * (_GL_WEIGHTS @ probs)
    return Kernel.normalized(np.maximum(rows, 0.0))


def discretize(gp: GaussianPair, x_cells: int, y_cells: int) -> JointPMF:
    """Joint over (Y, X) cell indices."""
    w = x_weights(gp, x_cells)
    k = y_channel(gp, x_cells, y_cells)
    return JointPMF.normalized(("Y", "X"), (w[:, None] * k.rows).T)


def analytic_ib_curve(rho: float, R: float | np.ndarray) -> float | np.ndarray:
    """0.5 ln(1 / (1 - rho^2 (1 - exp(-2R)))) nats, for R >= 0."""
    r = np.asarray(R, dtype=np.float64)
    if np.any(r < 0):
        raise OutOfRange("rate must be nonnegative")
    out = -0.5 * np.log1p(-(rho**2) * -np.expm1(-2.0 * r))
    return float(out) if out.ndim == 0 else out


def grid_source(gp: GaussianPair, x_cells: int, y_cells: int, u_channel: Kernel):
    """GridSource over the X cells with the discretized Y channel."""
    from .quantizer import GridSource

    return GridSource(weights=PMF.normalized(x_weights(gp, x_cells)),
                      y_channel=y_channel(gp, x_cells, y_cells),
                      u_channel=u_channel)


def ib_grid_source(
    gp: GaussianPair,
    x_cells: int = 2000,
    y_cells: int = 2,
    beta: float = 5.0,
    coarse_cells: int = 40,
    u_size: int = 2,
):
    """Fine GridSource whose u_channel is an IB encoder from a coarse pre-solve.

    The coarse solution's p(u) and decoder p(y|u) are pushed through one more
    encoder update evaluated at every fine cell, so kappa_{u|x} varies smoothly
    over the fine grid instead of being piecewise constant.
    """
    from .ib_solver import decoder, encoder_update, ib_iterate

    coarse = discretize(gp, coarse_cells, y_cells)
    point = ib_iterate(coarse, beta, u_size)
    cx = coarse.marginal(["X"]).table
    cyx = coarse.conditional("Y", "X").rows
    pu, pyu = decoder(cx, cyx, point.encoder.rows)
    keep = pu > 0
    fine_y = y_channel(gp, x_cells, y_cells)
    enc = encoder_update(fine_y.rows, pu[keep], pyu[keep], beta)
    return grid_source(gp, x_cells, y_cells, Kernel.normalized(enc))
