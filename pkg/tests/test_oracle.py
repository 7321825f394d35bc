import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ibregion.errors import SizeExceeded
from ibregion.oracle import (
    code_point,
    converse_check,
    enumerate_frontier,
    frontier_growth,
    partition_count,
    restricted_growth_strings,
    stirling2,
    witness_from_code,
)
from ibregion.probability import is_markov_chain, mutual_information

from conftest import random_joint
from oracles import set_partition_count, stirling_recursive

# exhaustive-search goldens on the binary symmetric source, crossover 0.1, |M| = 2
BEST = {1: ("01", 0.36806420716849697), 2: ("0011", 0.1840321035842485), 3: ("00001111", 0.12268806905616566)}
CEILING = {1: 0.368064, 2: 0.209804, 3: 0.143032}


@pytest.mark.parametrize("items,blocks", [(1, 1), (3, 2), (4, 2), (5, 3), (6, 4), (8, 2), (7, 7)])
def test_rgs_count(items, blocks):
    strings = list(restricted_growth_strings(items, blocks))
    assert len(strings) == partition_count(items, blocks)
    assert len(strings) == set_partition_count(items, blocks)
    assert len(set(strings)) == len(strings)
    assert strings == sorted(strings)


@pytest.mark.parametrize("n,k", [(4, 2), (8, 2), (10, 3), (12, 5), (6, 6), (5, 0)])
def test_stirling(n, k):
    assert stirling2(n, k) == stirling_recursive(n, k)


def test_counts_per_blocklength():
    assert [partition_count(2**n, 2) for n in (1, 2, 3)] == [2, 8, 128]


def test_m1_zero(bsc_source):
    (p,) = enumerate_frontier(bsc_source, 2, 1)
    assert p.score == pytest.approx(0.0, abs=1e-15)
    assert p.rate == 0.0


def test_n1_identity_is_mi():
    rng = np.random.default_rng(21)
    j = random_joint(rng, (3, 3), ("Y", "X"))
    (p,) = enumerate_frontier(j, 1, 3)
    assert sorted(set(p.assignment)) == [0, 1, 2]
    assert p.score == pytest.approx(mutual_information(j, "X", "Y"), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_goldens(bsc_source, n):
    (p,) = enumerate_frontier(bsc_source, n, 2)
    assert p.rgs == BEST[n][0]
    assert p.score == pytest.approx(BEST[n][1], abs=1e-12)
    assert p.rate == pytest.approx(math.log(2) / n)


def test_n2_all_under_curve(bsc_source, bsc_curve):
    pts = enumerate_frontier(bsc_source, 2, 2, keep_all=True)
    assert len(pts) == 8
    assert all(converse_check(p, bsc_curve, 5e-3) for p in pts)


def test_identity_touches_curve(bsc_source, bsc_curve):
    (p,) = enumerate_frontier(bsc_source, 1, 2)
    assert converse_check(p, bsc_curve, 1e-6)
    assert p.score == pytest.approx(0.368064, abs=1e-6)


def test_guard(bsc_source):
    with pytest.raises(SizeExceeded):
        enumerate_frontier(bsc_source, 4, 2)


def test_code_point_validation(bsc_source):
    with pytest.raises(ValueError):
        code_point(bsc_source, 2, 2, [0, 1, 0])
    with pytest.raises(ValueError):
        code_point(bsc_source, 1, 2, [0, 2])


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    j = random_joint(rng, (2, 3), ("Y", "X"))
    m = int(rng.integers(2, 5))
    labels = rng.integers(0, m, size=9)
    perm = rng.permutation(m)
    a = code_point(j, 2, m, labels).score
    b = code_point(j, 2, m, perm[labels]).score
    assert a == pytest.approx(b, abs=1e-13)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_code_invariants(seed):
    rng = np.random.default_rng(seed)
    j = random_joint(rng, (2, 2), ("Y", "X"))
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 4))
    p = code_point(j, n, m, rng.integers(0, m, size=2**n))
    assert p.score <= p.rate + 1e-9
    assert p.score <= mutual_information(j, "X", "Y") + 1e-9


class TestWitness:
    def test_identity(self, bsc_source):
        p = code_point(bsc_source, 1, 2, [0, 1])
        w = witness_from_code(bsc_source, p).joint
        assert mutual_information(w, "X", "U") == pytest.approx(math.log(2))
        assert mutual_information(w, "Y", "U") == pytest.approx(mutual_information(bsc_source, "X", "Y"))

    def test_constant(self, bsc_source):
        p = code_point(bsc_source, 1, 2, [0, 0])
        w = witness_from_code(bsc_source, p).joint
        assert mutual_information(w, "X", "U") == pytest.approx(0.0, abs=1e-15)
        assert mutual_information(w, "Y", "U") == pytest.approx(0.0, abs=1e-15)

    def test_alphabet_layout(self, bsc_source):
        p = code_point(bsc_source, 2, 2, [0, 0, 1, 1])
        w = witness_from_code(bsc_source, p)
        assert len(w.u_alphabet) == 2 * (1 + 2)
        assert w.u_alphabet[0] == (0, (), 1)
        assert w.u_alphabet[-1] == (1, (1,), 2)

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_conditions(self, seed):
        rng = np.random.default_rng(seed)
        nx = int(rng.integers(2, 4))
        j = random_joint(rng, (int(rng.integers(2, 4)), nx), ("Y", "X"))
        n = int(rng.integers(1, 3))
        m = int(rng.integers(1, 4))
        p = code_point(j, n, m, rng.integers(0, m, size=nx**n))
        w = witness_from_code(j, p).joint
        assert is_markov_chain(w, "Y", "X", "U", tol=1e-9)
        assert np.allclose(w.marginal(["Y", "X"]).table, j.table, atol=1e-12)
        assert mutual_information(w, "X", "U") <= math.log(m) / n + 1e-9
        assert mutual_information(w, "Y", "U") >= p.score - 1e-9


def test_frontier_growth(bsc_source, bsc_curve):
    rows = frontier_growth(bsc_source, 3, 2, curve=bsc_curve)
    assert [r.n for r in rows] == [1, 2, 3]
    for r in rows:
        assert r.best_score == pytest.approx(BEST[r.n][1], abs=1e-12)
        assert r.ceiling == pytest.approx(CEILING[r.n], abs=1e-4)
        assert r.ceiling >= r.best_score - 1e-9
    running = [r.best_so_far for r in rows]
    assert running == sorted(running)
    # n = 1 sits on the curve; the gap opens at n = 2 and narrows at n = 3
    assert rows[0].gap == pytest.approx(0.0, abs=1e-6)
    assert rows[2].gap < rows[1].gap


def test_frontier_growth_single_row(bsc_source, bsc_curve):
    (row,) = frontier_growth(bsc_source, 1, 2, curve=bsc_curve)
    (p,) = enumerate_frontier(bsc_source, 1, 2)
    assert row.best_score == p.score and row.rate == p.rate
