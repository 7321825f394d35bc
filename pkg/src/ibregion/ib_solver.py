"""Information Bottleneck curve for finite joints by alternating minimization.

For a fixed multiplier beta the self-consistent updates

    p(u)     = sum_x p(x) p(u|x)
    p(y|u)   = sum_x p(y|x) p(x|u)
    p(u|x)  ~= p(u) exp(-beta KL(p(y|x) || p(y|u)))

decrease the Lagrangian I(X;U) - beta I(Y;U) monotonically. Sweeping beta and
keeping the upper concave envelope of the resulting (rate, score) pairs gives
the boundary of the single-letter region.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, EmptyCurve, EmptySupportWarning, OutOfRange
from .probability import JointPMF, Kernel, mutual_information

PRUNE_MASS = 1e-300
# a rate jump between betas closer than this is a genuine jump of the solution
# path (a linear piece of the envelope); refining it further gains nothing
_MIN_BETA_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class IBCurvePoint:
    beta: float
    rate: float
    score: float
    encoder: Kernel
    converged: bool = True
    iters: int = 0
    lagrangian: float = float("nan")
    pruned: int = 0


@dataclass(frozen=True, eq=False)
class IBCurve:
    """Upper concave envelope of solved points; ``raw`` keeps one point per beta."""

    source: JointPMF
    points: list[IBCurvePoint]
    raw: list[IBCurvePoint] = field(default_factory=list)

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def scores(self) -> np.ndarray:
        return np.array([p.score for p in self.points])


def _source_arrays(j: JointPMF, y: str, x: str):
    pxy = j.marginal([x, y]).table
    px = pxy.sum(axis=1)
    safe = np.where(px > 0, px, 1.0)
    pyx = np.where(px[:, None] > 0, pxy / safe[:, None], 1.0 / pxy.shape[1])
    return px, pyx


def decoder(px: np.ndarray, pyx: np.ndarray, q: np.ndarray):
    """Marginal p(u) and decoder p(y|u) (as a |U| x |Y| matrix) for encoder ``q``."""
    pxu = px[:, None] * q
    pu = pxu.sum(axis=0)
    pyu = pxu.T @ pyx
    pyu = pyu / np.where(pu > 0, pu, 1.0)[:, None]
    return pu, pyu


def encoder_update(pyx: np.ndarray, pu: np.ndarray, pyu: np.ndarray, beta: float) -> np.ndarray:
    """p(u|x) proportional to p(u) exp(-beta KL(p(y|x) || p(y|u))), in log domain.

    The x-only entropy term of the KL cancels in the normalization.
    """
    log_pyu = np.log(np.maximum(pyu, 1e-300))
    with np.errstate(divide="ignore"):
        logits = np.log(pu)[None, :] + beta * (pyx @ log_pyu.T)
    logits -= logits.max(axis=1, keepdims=True)
    q = np.exp(logits)
    return q / q.sum(axis=1, keepdims=True)


def _info_terms(px, pyx, q):
    pxu = px[:, None] * q
    pu = pxu.sum(axis=0)
    pyu_joint = pyx.T @ pxu
    py = pyu_joint.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate_terms = np.where(pxu > 0, pxu * np.log(q / pu[None, :]), 0.0)
        denom = py[:, None] * pu[None, :]
        score_terms = np.where(pyu_joint > 0, pyu_joint * np.log(pyu_joint / denom), 0.0)
    return max(float(rate_terms.sum()), 0.0), max(float(score_terms.sum()), 0.0)


def near_identity_init(x_size: int, u_size: int, eta: float = 1e-3) -> Kernel:
    """Contiguous blocks of x mapped to one u each (the identity when u_size >= x_size)."""
    block = (np.arange(x_size) * u_size) // x_size if u_size < x_size else np.arange(x_size)
    rows = np.full((x_size, u_size), eta / u_size)
    rows[np.arange(x_size), block] += 1.0 - eta
    return Kernel.normalized(rows)


def random_init(x_size: int, u_size: int, rng: np.random.Generator) -> Kernel:
    return Kernel.normalized(rng.dirichlet(np.ones(u_size), size=x_size))


def ib_iterate(
    j: JointPMF,
    beta: float,
    u_size: int,
    init: Kernel | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    *,
    y: str = "Y",
    x: str = "X",
    history: list | None = None,
) -> IBCurvePoint:
    """Run the self-consistent updates to a fixed point.

    Raises ConvergenceError (carrying the last iterate) when ``max_iter`` is hit.
    If ``history`` is a list, the Lagrangian of every iterate is appended to it.
    """
    if beta < 0:
        raise OutOfRange("beta must be nonnegative")
    if u_size < 1:
        raise OutOfRange("u_size must be positive")
    if tol <= 0:
        raise OutOfRange("tol must be positive")
    px, pyx = _source_arrays(j, y, x)
    if init is None:
        init = near_identity_init(px.size, u_size)
    if init.input_size != px.size or init.output_size != u_size:
        raise ValueError(f"init must be {px.size} x {u_size}, got {init.rows.shape}")

    q = np.array(init.rows)
    pruned = 0
    prev = math.inf
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        pu, pyu = decoder(px, pyx, q)
        dead = pu < PRUNE_MASS
        if dead.any() and q.shape[1] > int(dead.sum()):
            pruned += int(dead.sum())
            warnings.warn(f"pruned {int(dead.sum())} bottleneck symbols at beta={beta}",
                          EmptySupportWarning, stacklevel=2)
            q = q[:, ~dead]
            q /= q.sum(axis=1, keepdims=True)
            pu, pyu = decoder(px, pyx, q)
            prev = math.inf
        rate, score = _info_terms(px, pyx, q)
        lag = rate - beta * score
        if history is not None:
            history.append(lag)
        if abs(prev - lag) < tol:
            converged = True
            break
        prev = lag
        q = encoder_update(pyx, pu, pyu, beta)

    point = IBCurvePoint(beta=float(beta), rate=rate, score=score, encoder=Kernel.normalized(q),
                         converged=converged, iters=it, lagrangian=lag, pruned=pruned)
    if not converged:
        raise ConvergenceError(f"no convergence at beta={beta} after {max_iter} iterations",
                               point=point)
    return point


def default_betas(count: int = 60, lo: float = 0.05, hi: float = 200.0) -> list[float]:
    return [float(b) for b in np.geomspace(lo, hi, count)]


def _pick(cands: list[IBCurvePoint]) -> IBCurvePoint:
    pool = [c for c in cands if c.converged] or cands
    best = pool[0]
    for c in pool[1:]:
        if c.score > best.score + 1e-12 or (abs(c.score - best.score) <= 1e-12 and c.rate < best.rate):
            best = c
    return best


def upper_envelope(points: list[IBCurvePoint]) -> list[IBCurvePoint]:
    """Upper concave hull from the origin up to the highest-score point.

    Every hull vertex is an actual solved point; the origin (constant U) is an
    implicit anchor used by interpolation.
    """
    if not points:
        return []
    pts: list[IBCurvePoint] = []
    for p in sorted(points, key=lambda p: (p.rate, -p.score)):
        if not pts or p.rate > pts[-1].rate:
            pts.append(p)
    top = max(p.score for p in pts)
    # the leftmost point attaining the top score ends the hull; flat after it
    last = next(i for i, p in enumerate(pts) if p.score >= top - 1e-12)
    hull: list[tuple[float, float, IBCurvePoint | None]] = [(0.0, 0.0, None)]
    for p in pts[: last + 1]:
        if p.rate <= 0:
            hull[0] = (0.0, 0.0, p)
            continue
        while len(hull) >= 2:
            (r1, s1, _), (r2, s2, _) = hull[-2], hull[-1]
            # middle vertex on or below the chord from hull[-2] to p
            lhs, rhs = (s2 - s1) * (p.rate - r1), (p.score - s1) * (r2 - r1)
            if lhs <= rhs + 1e-12 * max(abs(lhs), abs(rhs)):
                hull.pop()
            else:
                break
        hull.append((p.rate, p.score, p))
    return [h[2] for h in hull if h[2] is not None]


def ib_curve(
    j: JointPMF,
    beta_schedule: list[float] | None = None,
    u_size: int | None = None,
    restarts: int = 2,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    *,
    seed: int = 0x1B,
    warm_start: bool = True,
    refine_gap: float | None = 0.02,
    max_refine: int = 200,
    y: str = "Y",
    x: str = "X",
) -> IBCurve:
    """Solve one point per beta and reduce them to the upper concave envelope.

    Candidates per beta: the near-identity initialization, ``restarts`` random
    ones (RNG keyed by (seed, beta index, restart index)) and, with
    ``warm_start``, the winner at the next smaller beta.

    With ``refine_gap`` set, the geometric midpoint of every pair of adjacent
    betas whose rates differ by more than ``refine_gap`` nats is solved too,
    until no such pair remains or ``max_refine`` extra betas were added.
    """
    betas = default_betas() if beta_schedule is None else [float(b) for b in beta_schedule]
    if not betas:
        raise OutOfRange("beta schedule must be nonempty")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise OutOfRange("beta schedule must be sorted ascending")
    x_size = j.sizes[x]
    u_size = x_size + 1 if u_size is None else u_size

    def solve(beta, key, warm):
        inits = [near_identity_init(x_size, u_size)]
        for r in range(restarts):
            rng = np.random.default_rng(np.random.SeedSequence([seed, *key, r]))
            inits.append(random_init(x_size, u_size, rng))
        if warm_start and warm is not None:
            rows = np.zeros((x_size, u_size))
            rows[:, : warm.encoder.output_size] = warm.encoder.rows
            inits.append(Kernel.normalized(0.999 * rows + 1e-3 / u_size))
        cands = []
        for init in inits:
            try:
                cands.append(ib_iterate(j, beta, u_size, init, tol, max_iter, y=y, x=x))
            except ConvergenceError as err:
                cands.append(err.point)
        return _pick(cands)

    raw: list[IBCurvePoint] = []
    for b_idx, beta in enumerate(betas):
        raw.append(solve(beta, (b_idx,), raw[-1] if raw else None))

    if refine_gap is not None:
        added = 0
        while added < max_refine:
            gaps = [i for i in range(len(raw) - 1)
                    if abs(raw[i + 1].rate - raw[i].rate) > refine_gap
                    and raw[i + 1].beta > raw[i].beta * (1 + _MIN_BETA_STEP)]
            if not gaps:
                break
            for i in reversed(gaps[: max_refine - added]):
                mid = math.sqrt(raw[i].beta * raw[i + 1].beta)
                raw.insert(i + 1, solve(mid, (len(betas), added), raw[i]))
                added += 1
    return IBCurve(source=j, points=upper_envelope(raw), raw=raw)


def ib_value_at_rate(curve: IBCurve, R: float) -> float:
    """Envelope score at rate R (flat beyond the largest solved rate)."""
    if R < 0:
        raise OutOfRange("rate must be nonnegative")
    if not curve.points:
        raise EmptyCurve("curve has no points")
    rates = np.concatenate([[0.0], curve.rates])
    scores = np.concatenate([[0.0], curve.scores])
    if rates[1] == 0.0:
        rates, scores = rates[1:], scores[1:]
    return float(np.interp(R, rates, scores))


def point_joint(j: JointPMF, point: IBCurvePoint, *, y: str = "Y", x: str = "X", u: str = "U") -> JointPMF:
    """mu_{yxu} = mu_{yx} x kappa_{u|x}."""
    pyx = j.marginal([y, x]).table
    return JointPMF((y, x, u), pyx[:, :, None] * point.encoder.rows[None, :, :])


def curve_endpoints(j: JointPMF, *, y: str = "Y", x: str = "X") -> tuple[float, float]:
    """(H(X), I(X;Y)): where the curve saturates."""
    from .probability import entropy

    return entropy(j.pmf(x)), mutual_information(j, x, y)
