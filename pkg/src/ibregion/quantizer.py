"""Reduction of a grid source to a finite one by quantizing kappa_{u|x}.

Each cell x of the grid is mapped to the simplex cell containing its channel
row kappa_{u|x}(.|x); the quantized letter x_hat is that simplex cell and the
surrogate u_tilde is drawn from a fixed representative nu_{x_hat}. The
triple (Y, X_hat, U_tilde) is then Markov by construction, and every
information quantity moves by an amount controlled by the cell diameter
delta.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BoundViolation, EpsilonTooSmall, OutOfRange, SizeExceeded
from .probability import (
    JointPMF,
    Kernel,
    PMF,
    linf_distance,
    markov_residual,
    mutual_information,
)

MAX_SIMPLEX_CELLS = 10**8
SLACK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GridSource:
    """Finite-cell stand-in for a general source: cell weights and two channels."""

    weights: PMF
    y_channel: Kernel
    u_channel: Kernel
    ids: tuple = ()

    def __post_init__(self):
        n = len(self.weights)
        if self.y_channel.input_size != n or self.u_channel.input_size != n:
            raise ValueError("both channels need one row per cell")
        if not self.ids:
            object.__setattr__(self, "ids", tuple(range(n)))
        elif len(self.ids) != n:
            raise ValueError("one id per cell required")

    @property
    def y_size(self) -> int:
        return self.y_channel.output_size

    @property
    def u_size(self) -> int:
        return self.u_channel.output_size

    def joint(self) -> JointPMF:
        """mu_{yxu}(y, x, u) = w(x) kappa_{y|x}(y|x) kappa_{u|x}(u|x)."""
        w = self.weights.weights
        t = w[None, :, None] * self.y_channel.rows.T[:, :, None] * self.u_channel.rows[None, :, :]
        return JointPMF.normalized(("Y", "X", "U"), t)

    def yx_joint(self) -> JointPMF:
        return JointPMF.normalized(("Y", "X"), (self.weights.weights[:, None] * self.y_channel.rows).T)

    def to_json(self) -> dict:
        return {
            "cells": [{"id": i, "weight": float(w)} for i, w in zip(self.ids, self.weights.weights)],
            "y_channel": self.y_channel.rows.tolist(),
            "u_channel": self.u_channel.rows.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "GridSource":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        cells = obj["cells"]
        return cls(
            weights=PMF([c["weight"] for c in cells]),
            y_channel=Kernel(obj["y_channel"]),
            u_channel=Kernel(obj["u_channel"]),
            ids=tuple(c["id"] for c in cells),
        )


@dataclass(frozen=True)
class SimplexPartition:
    """Hypercube grid of side ``delta`` on [0, 1]^u_size, cells addressed lazily.

    A cell is identified by its integer grid coordinate; the last cell on every
    axis is closed at 1. Two points of the same cell differ by less than delta
    in every coordinate, so every cell has L-inf diameter at most delta.
    """

    u_size: int
    delta: float

    @property
    def per_axis(self) -> int:
        return max(1, math.ceil(1.0 / self.delta - 1e-12))

    def cell_of(self, p: np.ndarray) -> np.ndarray:
        """Grid coordinates of each row of ``p`` (shape (..., u_size))."""
        k = np.floor(np.asarray(p, dtype=np.float64) / self.delta).astype(np.int64)
        return np.clip(k, 0, self.per_axis - 1)

    def bounds(self, idx) -> tuple[np.ndarray, np.ndarray]:
        idx = np.asarray(idx, dtype=np.float64)
        return idx * self.delta, np.minimum((idx + 1) * self.delta, 1.0)

    def center(self, idx) -> np.ndarray:
        """Cell center renormalized onto the simplex."""
        lo, hi = self.bounds(idx)
        c = 0.5 * (lo + hi)
        return c / c.sum()

    def representative(self, idx, fallback: np.ndarray) -> np.ndarray:
        """nu_i: the renormalized center if it stays in the cell, else ``fallback``."""
        c = self.center(idx)
        if tuple(self.cell_of(c)) == tuple(idx):
            return c
        return np.asarray(fallback, dtype=np.float64)


def partition_simplex(u_size: int, delta: float) -> SimplexPartition:
    if not (0 < delta <= 0.5):
        raise OutOfRange(f"delta must lie in (0, 1/2], got {delta}")
    if u_size < 1:
        raise OutOfRange("u_size must be positive")
    part = SimplexPartition(u_size, float(delta))
    if part.per_axis ** u_size > MAX_SIMPLEX_CELLS:
        raise SizeExceeded(f"{part.per_axis}^{u_size} simplex cells exceed {MAX_SIMPLEX_CELLS}")
    return part


@dataclass(frozen=True, eq=False)
class QuantizedSource:
    """(Y, X_hat, U_tilde) with kappa_{u_tilde|x_hat} = nu_{x_hat}."""

    source: GridSource
    partition: SimplexPartition
    x_hat_alphabet: tuple[tuple[int, ...], ...]
    representatives: np.ndarray
    g_map: np.ndarray
    joint: JointPMF

    @property
    def occupied(self) -> int:
        return len(self.x_hat_alphabet)

    def surrogate_rows(self) -> np.ndarray:
        """kappa_{u_tilde|x}(.|x) = nu_{g(x)} for every grid cell."""
        return self.representatives[self.g_map]

    def full_joint(self) -> JointPMF:
        """mu over (Y, X, U, U_tilde) on the original grid."""
        src = self.source
        base = src.joint().table
        t = base[:, :, :, None] * self.surrogate_rows()[None, :, None, :]
        return JointPMF.normalized(("Y", "X", "U", "Ut"), t)

    def finite_source(self) -> JointPMF:
        """The (Y, X_hat) source the finite solver sees, axes named Y, X."""
        return JointPMF(("Y", "X"), self.joint.marginal(["Y", "Xhat"]).table)


def quantize_source(src: GridSource, part: SimplexPartition) -> QuantizedSource:
    if part.u_size != src.u_size:
        raise ValueError(f"partition is for |U|={part.u_size}, source has |U|={src.u_size}")
    coords = part.cell_of(src.u_channel.rows)
    keys = [tuple(int(v) for v in row) for row in coords]
    alphabet = tuple(sorted(set(keys)))
    index = {k: i for i, k in enumerate(alphabet)}
    g = np.array([index[k] for k in keys], dtype=np.int64)

    first_member = {}
    for cell, k in enumerate(keys):
        first_member.setdefault(k, cell)
    reps = np.array([part.representative(k, src.u_channel.rows[first_member[k]]) for k in alphabet])

    w = src.weights.weights
    y_rows = src.y_channel.rows
    p_y_xhat = np.zeros((src.y_size, len(alphabet)))
    np.add.at(p_y_xhat.T, g, w[:, None] * y_rows)
    t = p_y_xhat[:, :, None] * reps[None, :, :]
    joint = JointPMF.normalized(("Y", "Xhat", "Ut"), t)
    return QuantizedSource(src, part, alphabet, reps, g, joint)


@dataclass
class QuantizationReport:
    delta: float
    occupied_cells: int
    y_size: int
    u_size: int
    mi_x_u: float
    mi_y_u: float
    mi_xhat_ut: float
    mi_y_ut: float
    mi_x_y: float
    mi_xhat_y: float
    d_u: float
    d_yu: float
    kernel_gap: float
    markov_y_xhat_ut: float
    markov_y_x_ut: float
    rate_slack: float
    score_slack: float
    d_u_slack: float
    d_yu_slack: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return asdict(self)


def verify_quantization_bounds(src: GridSource, q: QuantizedSource, delta: float | None = None,
                               strict: bool = True) -> QuantizationReport:
    """Evaluate the four distance/information inequalities of the reduction.

    rate:  I(x;u) >= I(x_hat;u_tilde) + 2 delta |U| ln delta
    score: I(y;u) <= I(y;u_tilde) - 2 delta |Y| |U| ln delta
    plus d(mu_u, mu_ut) <= delta and d(mu_yu, mu_yut) <= delta. Slacks are
    (right side) minus (left side) oriented so that >= 0 means the bound holds.
    """
    delta = q.partition.delta if delta is None else delta
    full = q.full_joint()
    ny, nu = src.y_size, src.u_size
    log_d = math.log(delta)

    mi_x_u = mutual_information(full, "X", "U")
    mi_y_u = mutual_information(full, "Y", "U")
    mi_xhat_ut = mutual_information(q.joint, "Xhat", "Ut")
    mi_y_ut = mutual_information(q.joint, "Y", "Ut")
    d_u = linf_distance(full.marginal(["U"]).table, full.marginal(["Ut"]).table)
    d_yu = linf_distance(full.marginal(["Y", "U"]).table.ravel(), full.marginal(["Y", "Ut"]).table.ravel())

    rate_slack = mi_x_u - (mi_xhat_ut + 2 * delta * nu * log_d)
    score_slack = (mi_y_ut - 2 * delta * ny * nu * log_d) - mi_y_u
    rep = QuantizationReport(
        delta=delta,
        occupied_cells=q.occupied,
        y_size=ny,
        u_size=nu,
        mi_x_u=mi_x_u,
        mi_y_u=mi_y_u,
        mi_xhat_ut=mi_xhat_ut,
        mi_y_ut=mi_y_ut,
        mi_x_y=mutual_information(full, "X", "Y"),
        mi_xhat_y=mutual_information(q.joint, "Xhat", "Y"),
        d_u=d_u,
        d_yu=d_yu,
        kernel_gap=float(np.max(np.abs(q.surrogate_rows() - src.u_channel.rows))),
        markov_y_xhat_ut=markov_residual(q.joint, "Y", "Xhat", "Ut"),
        markov_y_x_ut=markov_residual(full, "Y", "X", "Ut"),
        rate_slack=rate_slack,
        score_slack=score_slack,
        d_u_slack=delta - d_u,
        d_yu_slack=delta - d_yu,
    )
    for name in ("rate_slack", "score_slack", "d_u_slack", "d_yu_slack"):
        if getattr(rep, name) < -SLACK_TOL:
            rep.violations.append(name)
    if rep.kernel_gap > delta + SLACK_TOL:
        rep.violations.append("kernel_gap")
    if strict and rep.violations:
        raise BoundViolation(f"quantization bounds violated: {rep.violations}", report=rep)
    return rep


def _dyadic_search(ok, k_min: int, k_max: int) -> int | None:
    """Smallest k in [k_min, k_max] with ok(2^-k), assuming monotone ok."""
    if not ok(2.0**-k_max):
        return None
    lo, hi = k_min, k_max
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(2.0**-mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


# 2^-49 is the last dyadic at or above the 1e-15 floor
_K_MAX = 49


def delta_for_epsilon(eps: float, y_size: int, u_size: int) -> float:
    """Largest dyadic delta <= 1/2 with -2 delta |Y| |U| ln delta + delta <= eps."""
    if eps <= 0:
        raise OutOfRange("eps must be positive")

    def ok(d):
        return -2.0 * d * y_size * u_size * math.log(d) + d <= eps

    if ok(0.5):
        return 0.5
    # the left side increases on (0, 1/e), which contains every 2^-k with k >= 2
    k = _dyadic_search(ok, 2, _K_MAX)
    if k is None:
        raise EpsilonTooSmall(f"no dyadic delta >= 1e-15 satisfies eps={eps}")
    return 2.0**-k


@dataclass
class AchievabilityResult:
    eps: float
    delta: float
    target_rate: float
    target_score: float
    rate: float | None
    score: float | None
    beta: float | None
    report: QuantizationReport

    @property
    def ok(self) -> bool:
        return self.rate is not None


def achievability_check(src: GridSource, eps: float, **curve_kwargs) -> AchievabilityResult:
    """Quantize at delta_for_epsilon(eps), solve the finite source, look for a witness point.

    Succeeds when some solved point has rate <= I(x;u) + eps and score >= I(y;u) - eps.
    """
    from .ib_solver import ib_curve

    delta = delta_for_epsilon(eps, src.y_size, src.u_size)
    q = quantize_source(src, partition_simplex(src.u_size, delta))
    rep = verify_quantization_bounds(src, q, delta, strict=False)
    curve_kwargs.setdefault("u_size", src.u_size)
    curve = ib_curve(q.finite_source(), **curve_kwargs)
    target_rate, target_score = rep.mi_x_u + eps, rep.mi_y_u - eps
    hits = [p for p in curve.raw if p.rate <= target_rate and p.score >= target_score]
    best = max(hits, key=lambda p: (p.score, -p.rate), default=None)
    return AchievabilityResult(
        eps=eps, delta=delta, target_rate=target_rate, target_score=target_score,
        rate=None if best is None else best.rate,
        score=None if best is None else best.score,
        beta=None if best is None else best.beta,
        report=rep,
    )
