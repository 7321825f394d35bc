"""Dense discrete distributions and the information measures built on them.

Everything is in nats. Tables are validated once at construction and are
read-only afterwards, so instances can be shared freely between threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InfiniteDivergence, InvalidDistribution, OutOfRange, SizeExceeded

MASS_TOL = 1e-12
MAX_CELLS = 10**7

AxisSpec = str | Sequence[str]


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def _check_mass(table: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(table)):
        raise InvalidDistribution(f"{what}: non-finite entries")
    if table.size and table.min() < 0:
        raise InvalidDistribution(f"{what}: negative entry {table.min():.3e}")
    total = float(table.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise InvalidDistribution(f"{what}: total mass {total!r} != 1")


def _entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


@dataclass(frozen=True, eq=False)
class PMF:
    """A probability vector on a finite alphabet."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise InvalidDistribution("PMF weights must be a nonempty vector")
        _check_mass(w, "PMF")
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, weights) -> "PMF":
        """Rescale nonnegative weights to unit mass (explicit renormalization)."""
        w = np.asarray(weights, dtype=np.float64)
        return cls(w / w.sum())

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True, eq=False)
class Kernel:
    """Row-stochastic conditional distribution: ``rows[i]`` is the law given input i."""

    rows: np.ndarray

    def __post_init__(self):
        r = _frozen(self.rows)
        if r.ndim != 2 or r.shape[0] == 0 or r.shape[1] == 0:
            raise InvalidDistribution("Kernel rows must form a nonempty matrix")
        if r.min() < 0 or not np.all(np.isfinite(r)):
            raise InvalidDistribution("Kernel has negative or non-finite entries")
        bad = np.abs(r.sum(axis=1) - 1.0) > MASS_TOL
        if bad.any():
            raise InvalidDistribution(f"Kernel rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "rows", r)

    @classmethod
    def normalized(cls, rows) -> "Kernel":
        r = np.asarray(rows, dtype=np.float64)
        return cls(r / r.sum(axis=1, keepdims=True))

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> PMF:
        return PMF(self.rows[i])


@dataclass(frozen=True, eq=False)
class JointPMF:
    """Joint distribution over named finite axes, stored as a dense tensor."""

    axes: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        t = _frozen(self.table)
        if len(set(axes)) != len(axes):
            raise InvalidDistribution(f"duplicate axis names in {axes}")
        if t.ndim != len(axes):
            raise InvalidDistribution(f"table has {t.ndim} dims but {len(axes)} axes")
        _check_mass(t, "JointPMF")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", t)

    @classmethod
    def normalized(cls, axes, table) -> "JointPMF":
        t = np.asarray(table, dtype=np.float64)
        return cls(tuple(axes), t / t.sum())

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(self.axes, self.table.shape))

    def _index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise KeyError(f"no axis {name!r} in {self.axes}") from None

    def marginal(self, names: Iterable[str]) -> "JointPMF":
        """Marginal on ``names`` (in the order given)."""
        names = list(names)
        keep = [self._index(n) for n in names]
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        t = self.table.sum(axis=drop) if drop else self.table
        remaining = [i for i in range(len(self.axes)) if i in keep]
        perm = [remaining.index(i) for i in keep]
        return JointPMF(tuple(names), np.transpose(t, perm))

    def pmf(self, name: str) -> PMF:
        return PMF(self.marginal([name]).table)

    def transpose(self, names: Sequence[str]) -> "JointPMF":
        if sorted(names) != sorted(self.axes):
            raise KeyError(f"{names} is not a permutation of {self.axes}")
        return JointPMF(tuple(names), np.transpose(self.table, [self._index(n) for n in names]))

    def merge(self, names: Sequence[str], new_name: str) -> "JointPMF":
        """Fuse consecutive-in-``names`` axes into one with row-major symbol order."""
        rest = [a for a in self.axes if a not in names]
        t = self.transpose(list(names) + rest).table
        merged = t.reshape((-1,) + t.shape[len(names):])
        return JointPMF((new_name, *rest), merged)

    def conditional(self, target: str, given: str) -> Kernel:
        """kappa_{target|given}; zero-mass conditioning symbols get uniform rows."""
        pair = self.marginal([given, target]).table
        mass = pair.sum(axis=1, keepdims=True)
        rows = np.where(mass > 0, pair / np.where(mass > 0, mass, 1.0), 1.0 / pair.shape[1])
        return Kernel.normalized(rows)

    def to_json(self) -> dict:
        return {
            "axes": [{"name": n, "size": int(s)} for n, s in zip(self.axes, self.table.shape)],
            "table": [float(v) for v in self.table.ravel()],
        }

    @classmethod
    def from_json(cls, obj) -> "JointPMF":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        names = [a["name"] for a in obj["axes"]]
        shape = [int(a["size"]) for a in obj["axes"]]
        return cls(tuple(names), np.asarray(obj["table"], dtype=np.float64).reshape(shape))


def _as_names(spec: AxisSpec) -> list[str]:
    return [spec] if isinstance(spec, str) else list(spec)


def _group_entropy(j: JointPMF, names: Sequence[str]) -> float:
    if not names:
        return 0.0
    return _entropy(j.marginal(names).table)


def entropy(p: PMF | JointPMF) -> float:
    """Shannon entropy in nats, with 0 ln 0 = 0."""
    return _entropy(p.weights if isinstance(p, PMF) else p.table)


def kl_divergence(p: PMF, q: PMF) -> float:
    """D(p || q) in nats; raises InfiniteDivergence on absolute-continuity failure."""
    a, b = p.weights, q.weights
    if a.shape != b.shape:
        raise ValueError(f"length mismatch {a.size} vs {b.size}")
    support = a > 0
    if np.any(b[support] == 0):
        raise InfiniteDivergence("p puts mass where q has none")
    return max(float(np.sum(a[support] * np.log(a[support] / b[support]))), 0.0)


def mutual_information(j: JointPMF, a: AxisSpec, b: AxisSpec) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B). Either side may be a group of axes."""
    na, nb = _as_names(a), _as_names(b)
    val = _group_entropy(j, na) + _group_entropy(j, nb) - _group_entropy(j, na + nb)
    return max(val, 0.0)


def conditional_mutual_information(j: JointPMF, a: AxisSpec, b: AxisSpec, c: AxisSpec) -> float:
    """I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)."""
    na, nb, nc = _as_names(a), _as_names(b), _as_names(c)
    if set(na) & set(nb) or set(na) & set(nc) or set(nb) & set(nc):
        raise ValueError("conditional mutual information needs disjoint axis groups")
    val = (_group_entropy(j, na + nc) + _group_entropy(j, nb + nc)
           - _group_entropy(j, na + nb + nc) - _group_entropy(j, nc))
    return max(val, 0.0)


def markov_residual(j: JointPMF, a: AxisSpec, b: AxisSpec, c: AxisSpec) -> float:
    """I(A;C|B): zero exactly when A - B - C is a Markov chain."""
    return conditional_mutual_information(j, a, c, b)


def is_markov_chain(j: JointPMF, a: AxisSpec, b: AxisSpec, c: AxisSpec, tol: float = 1e-9) -> bool:
    if tol <= 0:
        raise OutOfRange("tol must be positive")
    return markov_residual(j, a, b, c) <= tol


def linf_distance(p: PMF | np.ndarray, q: PMF | np.ndarray) -> float:
    a = p.weights if isinstance(p, PMF) else np.asarray(p, dtype=np.float64)
    b = q.weights if isinstance(q, PMF) else np.asarray(q, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def entropy_gap_bound(eps: float, card: int) -> float:
    """-eps * card * ln(eps): bound on |H(p) - H(q)| when d(p, q) <= eps <= 1/2."""
    if not (0 < eps <= 0.5):
        raise OutOfRange(f"eps must lie in (0, 1/2], got {eps}")
    if card < 1:
        raise OutOfRange("card must be a positive integer")
    return -eps * card * math.log(eps)


def product_extension(j: JointPMF, n: int) -> JointPMF:
    """n i.i.d. copies of ``j``; axes come out as A1..An, B1..Bn, ...

    With this ordering, ``merge`` of A1..An yields sequences in lexicographic order.
    """
    if n < 1:
        raise OutOfRange("n must be positive")
    cells = j.table.size ** n
    if cells > MAX_CELLS:
        raise SizeExceeded(f"product extension would need {cells} cells (limit {MAX_CELLS})")
    k = len(j.axes)
    t = j.table
    for _ in range(n - 1):
        t = np.multiply.outer(t, j.table)
    # outer product gives letter-major axes (A1 B1 A2 B2 ...); regroup by name
    order = [letter * k + ax for ax in range(k) for letter in range(n)]
    names = tuple(f"{name}{letter + 1}" for name in j.axes for letter in range(n))
    return JointPMF(names, np.transpose(t, order))


def sequence_joint(j: JointPMF, n: int, y: str = "Y", x: str = "X") -> np.ndarray:
    """Matrix P[y^n, x^n] of the n-fold source with sequences in lexicographic order."""
    ext = product_extension(j.marginal([y, x]), n)
    ys = [f"{y}{t + 1}" for t in range(n)]
    xs = [f"{x}{t + 1}" for t in range(n)]
    t = ext.transpose(ys + xs).table
    ny, nx = j.sizes[y] ** n, j.sizes[x] ** n
    return t.reshape(ny, nx)
