"""Rectangle approximation of block-code cells and the per-letter quantizer.

A code f on a gridded X^n is split into its cells Q_m. Each cell gets an inner
cover by disjoint axis-aligned boxes that misses at most ``delta`` of its mass.
One letter quantizer f_x, fine enough that every box side is a union of its
blocks, then lets a composite map g on blocks^n reproduce f everywhere except
on the uncovered mass.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BoundViolation, EpsilonTooSmall, OutOfRange
from .probability import JointPMF, linf_distance, markov_residual, mutual_information, sequence_joint

SLACK_TOL = 1e-9

Box = tuple[tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class GriddedCodeCell:
    """Indicator of Q_m = f^{-1}(m) on the n-fold grid."""

    label: int
    members: np.ndarray

    @property
    def n(self) -> int:
        return self.members.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.members.shape


def code_cells(labels: np.ndarray, m_size: int) -> list[GriddedCodeCell]:
    """Split a label array of shape (k,)*n into one cell per label in range(m_size)."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= m_size):
        raise ValueError("labels must lie in range(m_size)")
    return [GriddedCodeCell(m, labels == m) for m in range(m_size)]


@dataclass(frozen=True, eq=False)
class RectCover:
    """Disjoint boxes inside one code cell; each box is a tuple of per-axis index tuples."""

    label: int
    shape: tuple[int, ...]
    rectangles: tuple[Box, ...]
    delta: float

    def mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        for box in self.rectangles:
            m[np.ix_(*box)] = True
        return m

    def to_json(self) -> dict:
        return {"label": self.label, "rectangles": [[list(ax) for ax in box] for box in self.rectangles]}


def _box_sums(a: np.ndarray) -> np.ndarray:
    """Prefix sums padded with a leading zero on every axis."""
    s = np.pad(a, [(1, 0)] * a.ndim)
    for ax in range(a.ndim):
        s = np.cumsum(s, axis=ax)
    return s


def _box_total(s: np.ndarray, lo: tuple[int, ...], hi: tuple[int, ...]) -> float:
    """Sum over the half-open box [lo, hi) by inclusion-exclusion on prefix sums."""
    total = 0.0
    n = len(lo)
    for corner in itertools.product((0, 1), repeat=n):
        idx = tuple(hi[i] if c else lo[i] for i, c in enumerate(corner))
        sign = -1.0 if (n - sum(corner)) % 2 else 1.0
        total += sign * s[idx]
    return total


def rect_cover(cell: GriddedCodeCell, mu: np.ndarray, delta: float) -> RectCover:
    """Greedy inner cover: repeatedly carve the heaviest box contained in what is
    still uncovered, until the uncovered mass of the cell is at most ``delta``.

    Ties go to the lexicographically smallest (lower corner, upper corner).
    """
    if delta < 0:
        raise OutOfRange("delta must be nonnegative")
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != cell.shape:
        raise ValueError(f"mu has shape {mu.shape}, cell grid is {cell.shape}")
    remaining = cell.members.copy()
    boxes: list[Box] = []
    intervals = [[(a, b) for a in range(k) for b in range(a + 1, k + 1)] for k in cell.shape]
    while float(mu[remaining].sum()) > delta:
        count = _box_sums(remaining.astype(np.float64))
        mass = _box_sums(np.where(remaining, mu, 0.0))
        best, best_key = None, None
        for combo in itertools.product(*intervals):
            lo = tuple(c[0] for c in combo)
            hi = tuple(c[1] for c in combo)
            vol = math.prod(h - l for l, h in zip(lo, hi))
            if _box_total(count, lo, hi) < vol - 0.5:
                continue
            m = _box_total(mass, lo, hi)
            key = (-m, lo, hi)
            if m > 0 and (best_key is None or key < best_key):
                best, best_key = (lo, hi), key
        lo, hi = best
        box = tuple(tuple(range(l, h)) for l, h in zip(lo, hi))
        remaining[tuple(slice(l, h) for l, h in zip(lo, hi))] = False
        boxes.append(box)
    return RectCover(cell.label, cell.shape, tuple(boxes), delta)


@dataclass(frozen=True, eq=False)
class LetterPartition:
    """One letter quantizer f_x (letter -> block) and composite g on blocks^n."""

    block_of: np.ndarray
    g: np.ndarray
    n: int

    @property
    def n_blocks(self) -> int:
        return int(self.block_of.max()) + 1

    def compose(self) -> np.ndarray:
        """g(f_x^n(x^n)) as a label array over the original grid."""
        return self.g[np.ix_(*([self.block_of] * self.n))]


def letter_partition(covers: list[RectCover], fallback: int | None = None) -> LetterPartition:
    """Common refinement of every box side across all axes and covers.

    Letters merge iff they agree on membership in every referenced side set,
    so each box is a union of block tuples. g maps a block tuple to m when it
    lies in the cover of m only, and to ``fallback`` (default: smallest label)
    otherwise.
    """
    if not covers:
        raise ValueError("need at least one cover")
    shape = covers[0].shape
    if any(c.shape != shape for c in covers):
        raise ValueError("covers must share one grid")
    if len(set(shape)) != 1:
        raise ValueError("the letter quantizer needs the same alphabet on every axis")
    k, n = shape[0], len(shape)
    sides = [set(ax) for c in covers for box in c.rectangles for ax in box]
    signatures = [tuple(a in s for s in sides) for a in range(k)]
    ids: dict[tuple, int] = {}
    block_of = np.array([ids.setdefault(sig, len(ids)) for sig in signatures], dtype=np.int64)
    nb = len(ids)
    rep = [int(np.flatnonzero(block_of == b)[0]) for b in range(nb)]

    m0 = min(c.label for c in covers) if fallback is None else fallback
    masks = [(c.label, c.mask()) for c in covers]
    g = np.full((nb,) * n, m0, dtype=np.int64)
    for blocks in itertools.product(range(nb), repeat=n):
        point = tuple(rep[b] for b in blocks)
        hit = [lab for lab, mk in masks if mk[point]]
        if len(hit) == 1:
            g[blocks] = hit[0]
    return LetterPartition(block_of, g, n)


@dataclass
class GapReport:
    n: int
    m_size: int
    y_size: int
    delta: float
    joint_distance: float
    joint_bound: float
    label_distance: float
    label_bound: float
    uncovered_mass: float
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return asdict(self)


def _label_joint(pyx_seq: np.ndarray, labels: np.ndarray, m_size: int) -> np.ndarray:
    onehot = np.zeros((labels.size, m_size))
    onehot[np.arange(labels.size), labels.ravel()] = 1.0
    return pyx_seq @ onehot


def verify_distribution_gap(j: JointPMF, labels: np.ndarray, m_size: int, lp: LetterPartition,
                            delta: float, strict: bool = True) -> GapReport:
    """d(mu_{Y^n f}, mu_{Y^n g}) <= |M|^2 delta and d(mu_f, mu_g) <= |Y|^n |M|^2 delta."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.ndim
    pyx_seq = sequence_joint(j, n)
    ny = j.sizes["Y"]
    composite = lp.compose()
    p_f = _label_joint(pyx_seq, labels, m_size)
    p_g = _label_joint(pyx_seq, composite, m_size)
    mu_x = pyx_seq.sum(axis=0).reshape(labels.shape)
    rep = GapReport(
        n=n, m_size=m_size, y_size=ny, delta=delta,
        joint_distance=linf_distance(p_f.ravel(), p_g.ravel()),
        joint_bound=m_size**2 * delta,
        label_distance=linf_distance(p_f.sum(axis=0), p_g.sum(axis=0)),
        label_bound=ny**n * m_size**2 * delta,
        uncovered_mass=float(mu_x[composite != labels].sum()),
    )
    if rep.joint_distance > rep.joint_bound + SLACK_TOL:
        rep.violations.append("joint_distance")
    if rep.label_distance > rep.label_bound + SLACK_TOL:
        rep.violations.append("label_distance")
    if strict and rep.violations:
        raise BoundViolation(f"distribution gap bounds violated: {rep.violations}", report=rep)
    return rep


def delta_for_epsilon_converse(eps: float, n: int, y_size: int, m_size: int) -> float:
    """Largest dyadic delta with -(2/n)|Y|^n |M|^3 delta ln(|M|^2 delta) <= eps
    and |Y|^n |M|^2 delta <= 1/2."""
    if eps <= 0:
        raise OutOfRange("eps must be positive")
    a = y_size**n * m_size**3
    cap = 0.5 / (y_size**n * m_size**2)

    def ok(d):
        return d <= cap and -(2.0 / n) * a * d * math.log(m_size**2 * d) <= eps

    # both conditions are monotone in delta below the cap, since |M|^2 delta <= 1/2 < 1/e
    for k in range(1, 50):
        if 2.0**-k <= cap:
            break
    lo, hi = k, 49
    if not ok(2.0**-hi):
        raise EpsilonTooSmall(f"no dyadic delta >= 1e-15 satisfies eps={eps}")
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(2.0**-mid):
            hi = mid
        else:
            lo = mid + 1
    return 2.0**-lo


@dataclass
class ConverseReport:
    eps: float
    delta: float
    n: int
    m_size: int
    letters: int
    blocks: int
    rectangles: int
    code_score: float
    composite_score: float
    mi_x_u: float
    mi_y_u: float
    markov_y_x_u: float
    rate_bound: float
    score_bound: float
    gap: GapReport
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and self.gap.ok

    def to_json(self) -> dict:
        out = asdict(self)
        out["gap"] = self.gap.to_json()
        return out


def converse_witness(j: JointPMF, labels: np.ndarray, m_size: int, eps: float,
                     delta: float | None = None) -> tuple[ConverseReport, list[RectCover], LetterPartition]:
    """Cover, quantize per letter, and single-letterize the composite code on the finite source.

    The witness U is built for (Y, X_hat) and attached to the original letters
    through kappa_{u|x} = kappa_{u|x_hat}(.|f_x(x)).
    """
    from .oracle import code_point, witness_from_code

    labels = np.asarray(labels, dtype=np.int64)
    n = labels.ndim
    ny = j.sizes["Y"]
    if delta is None:
        delta = delta_for_epsilon_converse(eps, n, ny, m_size)
    px = j.pmf("X").weights
    mu = px
    for _ in range(n - 1):
        mu = np.multiply.outer(mu, px)
    covers = [rect_cover(c, mu, delta) for c in code_cells(labels, m_size)]
    lp = letter_partition(covers)
    gap = verify_distribution_gap(j, labels, m_size, lp, delta, strict=False)

    # finite source (Y, X_hat)
    pyx = j.marginal(["Y", "X"]).table
    nb = lp.n_blocks
    p_y_hat = np.zeros((ny, nb))
    np.add.at(p_y_hat.T, lp.block_of, pyx.T)
    j_hat = JointPMF.normalized(("Y", "X"), p_y_hat)
    g_point = code_point(j_hat, n, m_size, lp.g.ravel())
    w = witness_from_code(j_hat, g_point)
    k_u = w.joint.conditional("U", "X").rows
    ext = JointPMF.normalized(("Y", "X", "U"), pyx[:, :, None] * k_u[lp.block_of][None, :, :])

    f_point = code_point(j, n, m_size, labels.ravel())
    rep = ConverseReport(
        eps=eps, delta=delta, n=n, m_size=m_size, letters=int(px.size), blocks=nb,
        rectangles=sum(len(c.rectangles) for c in covers),
        code_score=f_point.score, composite_score=g_point.score,
        mi_x_u=mutual_information(ext, "X", "U"),
        mi_y_u=mutual_information(ext, "Y", "U"),
        markov_y_x_u=markov_residual(ext, "Y", "X", "U"),
        rate_bound=math.log(m_size) / n,
        score_bound=f_point.score - eps,
        gap=gap,
    )
    if rep.markov_y_x_u > SLACK_TOL:
        rep.violations.append("markov")
    if rep.mi_x_u > rep.rate_bound + SLACK_TOL:
        rep.violations.append("rate")
    if rep.mi_y_u < rep.score_bound - SLACK_TOL:
        rep.violations.append("score")
    return rep, covers, lp
