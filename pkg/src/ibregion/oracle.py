"""Exhaustive block-code oracle and the single-letter witness for each code.

A block encoder f: X^n -> M enters the score (1/n) I(Y^n; f(X^n)) only through
its fiber partition, so enumerating set partitions of X^n into at most |M|
blocks (as restricted growth strings) covers every encoder exactly once.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import SizeExceeded
from .probability import JointPMF, MAX_CELLS, sequence_joint

MAX_SEQUENCES = 12
_BATCH = 4096


@dataclass(frozen=True)
class CodePoint:
    """One block code: ``assignment[k]`` is the label of the k-th sequence in
    lexicographic order of X^n."""

    n: int
    m_size: int
    assignment: tuple[int, ...]
    rate: float
    score: float

    @property
    def rgs(self) -> str:
        return "".join(str(a) if a < 10 else f"({a})" for a in self.assignment)


@dataclass(frozen=True, eq=False)
class WitnessVariable:
    """Auxiliary U = (f(X^n), X^{T-1}, T) with its joint over (Y, X, U)."""

    u_alphabet: tuple[tuple[int, tuple[int, ...], int], ...]
    joint: JointPMF


def restricted_growth_strings(length: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """All a with a[0] = 0, a[i] <= max(a[:i]) + 1 and a[i] < max_blocks, lexicographically."""
    if length == 0:
        yield ()
        return
    if max_blocks < 1:
        return
    a = [0] * length

    def rec(i: int, used: int):
        if i == length:
            yield tuple(a)
            return
        for v in range(min(used + 1, max_blocks)):
            a[i] = v
            yield from rec(i + 1, max(used, v + 1))

    yield from rec(1, 1)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind by the standard recurrence."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def partition_count(sequences: int, max_blocks: int) -> int:
    return sum(stirling2(sequences, k) for k in range(1, max_blocks + 1)) if sequences else 1


def _entropy_rows(t: np.ndarray, axis) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(t > 0, t * np.log(t), 0.0)
    return -terms.sum(axis=axis)


def code_scores(pyx_seq: np.ndarray, labels: np.ndarray, m_size: int) -> np.ndarray:
    """I(Y^n; f(X^n)) in nats for a batch of label vectors (shape (B, |X|^n))."""
    labels = np.atleast_2d(labels)
    onehot = np.zeros(labels.shape + (m_size,))
    np.put_along_axis(onehot, labels[..., None], 1.0, axis=-1)
    pym = np.einsum("yx,bxm->bym", pyx_seq, onehot)
    py = pyx_seq.sum(axis=1)
    pm = pym.sum(axis=1)
    h_y = _entropy_rows(py, axis=0)
    val = h_y + _entropy_rows(pm, axis=1) - _entropy_rows(pym, axis=(1, 2))
    return np.maximum(val, 0.0)


def enumerate_frontier(j: JointPMF, n: int, m_size: int, *, keep_all: bool = False,
                       y: str = "Y", x: str = "X") -> list[CodePoint]:
    """Exhaustive search over encoders X^n -> M (|M| = m_size).

    Returns the single best point, or with ``keep_all`` every partition in
    restricted-growth-string order. Ties within 1e-12 keep the
    lexicographically smallest string.
    """
    if n < 1 or m_size < 1:
        raise ValueError("n and m_size must be positive")
    seqs = j.sizes[x] ** n
    if seqs > MAX_SEQUENCES:
        raise SizeExceeded(f"|X|^n = {seqs} exceeds the enumeration guard {MAX_SEQUENCES}")
    pyx_seq = sequence_joint(j, n, y=y, x=x)
    rate = math.log(m_size) / n

    points: list[CodePoint] = []
    best: CodePoint | None = None
    gen = restricted_growth_strings(seqs, m_size)
    while True:
        chunk = list(itertools.islice(gen, _BATCH))
        if not chunk:
            break
        scores = code_scores(pyx_seq, np.array(chunk, dtype=np.int64), m_size) / n
        for rgs, s in zip(chunk, scores):
            cp = CodePoint(n, m_size, rgs, rate, float(s))
            if keep_all:
                points.append(cp)
            if best is None or cp.score > best.score + 1e-12:
                best = cp
    return points if keep_all else [best]


def code_point(j: JointPMF, n: int, m_size: int, labels: Sequence[int], *,
               y: str = "Y", x: str = "X") -> CodePoint:
    """CodePoint for an explicit labelling of X^n (no enumeration guard)."""
    labels = np.asarray(labels, dtype=np.int64).ravel()
    seqs = j.sizes[x] ** n
    if labels.size != seqs:
        raise ValueError(f"need {seqs} labels, got {labels.size}")
    if labels.min() < 0 or labels.max() >= m_size:
        raise ValueError("labels must lie in range(m_size)")
    pyx_seq = sequence_joint(j, n, y=y, x=x)
    s = float(code_scores(pyx_seq, labels[None, :], m_size)[0]) / n
    return CodePoint(n, m_size, tuple(int(v) for v in labels), math.log(m_size) / n, s)


def converse_check(point: CodePoint, curve, slack: float = 5e-3) -> bool:
    """The code's (rate, score) lies on or under the single-letter curve, up to ``slack``."""
    from .ib_solver import ib_value_at_rate

    return point.score <= ib_value_at_rate(curve, point.rate) + slack


def witness_from_code(j: JointPMF, point: CodePoint, *, y: str = "Y", x: str = "X") -> WitnessVariable:
    """Time-shared single-letterization U = (f(X^n), X^{T-1}, T), T uniform on 1..n.

    Y_T - X_T - U holds because Y_t depends on X^n only through X_t under the
    i.i.d. source; I(X;U) = H(f(X^n))/n and I(Y;U) >= I(Y^n; f(X^n))/n.
    """
    n, m_size = point.n, point.m_size
    nx = j.sizes[x]
    pyx = j.marginal([x, y]).table
    px = pyx.sum(axis=1)
    kyx = np.where(px[:, None] > 0, pyx / np.where(px > 0, px, 1.0)[:, None], 0.0)

    u_count = m_size * sum(nx**t for t in range(n))
    if pyx.size * u_count > MAX_CELLS:
        raise SizeExceeded(f"witness joint needs {pyx.size * u_count} cells")

    pxn = px
    for _ in range(n - 1):
        pxn = np.multiply.outer(pxn, px)
    pxn = np.reshape(pxn, (nx,) * n)
    labels = np.asarray(point.assignment, dtype=np.int64).reshape((nx,) * n)

    alphabet = []
    table = np.zeros((j.sizes[y], nx, u_count))
    col = 0
    for t in range(1, n + 1):
        # p(x^{t-1}, x_t, m) with the future letters summed out
        per_m = [np.where(labels == m, pxn, 0.0).sum(axis=tuple(range(t, n))) for m in range(m_size)]
        for prefix in itertools.product(range(nx), repeat=t - 1):
            for m in range(m_size):
                p_x_t = per_m[m][prefix]
                table[:, :, col] = (p_x_t[:, None] * kyx).T / n
                alphabet.append((m, tuple(prefix), t))
                col += 1
    joint = JointPMF.normalized((y, x, "U"), table)
    return WitnessVariable(tuple(alphabet), joint)


@dataclass(frozen=True)
class GrowthRow:
    n: int
    rate: float
    best_score: float
    best_so_far: float
    ceiling: float

    @property
    def gap(self) -> float:
        return self.ceiling - self.best_score


def frontier_growth(j: JointPMF, n_max: int, m_size: int, curve=None, **curve_kwargs) -> list[GrowthRow]:
    """Best exhaustive score per blocklength next to the single-letter ceiling.

    ``best_so_far`` is the running max over n' <= n; scores at a single n are
    not monotone because the per-letter rate (1/n) ln m_size shrinks with n.
    """
    from .ib_solver import ib_curve, ib_value_at_rate

    if curve is None:
        curve = ib_curve(j, **curve_kwargs)
    rows = []
    running = 0.0
    for n in range(1, n_max + 1):
        best = enumerate_frontier(j, n, m_size)[0]
        running = max(running, best.score)
        rows.append(GrowthRow(n, best.rate, best.score, running, ib_value_at_rate(curve, best.rate)))
    return rows
