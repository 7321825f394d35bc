import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ibregion.errors import InfiniteDivergence, InvalidDistribution, OutOfRange, SizeExceeded
from ibregion.probability import (
    JointPMF,
    Kernel,
    PMF,
    conditional_mutual_information,
    entropy,
    entropy_gap_bound,
    is_markov_chain,
    kl_divergence,
    linf_distance,
    markov_residual,
    mutual_information,
    product_extension,
    sequence_joint,
)

from conftest import bsc, random_joint
from oracles import entropy_nats, mi_via_rows

seeds = st.integers(0, 2**32 - 1)


class TestPMF:
    def test_rejects_negative(self):
        with pytest.raises(InvalidDistribution):
            PMF([1.2, -0.2])

    def test_rejects_bad_mass(self):
        with pytest.raises(InvalidDistribution):
            PMF([0.5, 0.4])

    def test_tolerance_and_normalize(self):
        PMF([0.5, 0.5 + 5e-13])
        p = PMF.normalized([1.0, 3.0])
        assert np.allclose(p.weights, [0.25, 0.75])

    def test_read_only(self):
        p = PMF([0.5, 0.5])
        with pytest.raises(ValueError):
            p.weights[0] = 1.0

    def test_kernel_rows_checked(self):
        with pytest.raises(InvalidDistribution):
            Kernel([[0.5, 0.5], [0.2, 0.2]])
        k = Kernel([[1.0, 0.0], [0.3, 0.7]])
        assert (k.input_size, k.output_size) == (2, 2)
        assert np.allclose(k.row(1).weights, [0.3, 0.7])


class TestEntropy:
    def test_examples(self):
        assert entropy(PMF([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-12)
        assert entropy(PMF([1.0, 0.0])) == 0.0
        assert entropy(PMF([0.25, 0.75])) == pytest.approx(0.562335, abs=1e-6)

    @given(seeds, st.integers(1, 12))
    def test_range(self, seed, k):
        rng = np.random.default_rng(seed)
        w = rng.dirichlet(np.ones(k))
        h = entropy(PMF(w))
        assert -1e-15 <= h <= math.log(np.count_nonzero(w)) + 1e-12
        assert h == pytest.approx(entropy_nats(w.tolist()), abs=1e-12)


class TestKL:
    def test_examples(self):
        assert kl_divergence(PMF([0.3, 0.7]), PMF([0.3, 0.7])) == 0.0
        assert kl_divergence(PMF([1, 0]), PMF([0.5, 0.5])) == pytest.approx(math.log(2))
        assert kl_divergence(PMF([0.5, 0.5]), PMF([0.9, 0.1])) == pytest.approx(0.510826, abs=1e-6)

    def test_infinite(self):
        with pytest.raises(InfiniteDivergence):
            kl_divergence(PMF([0.5, 0.5]), PMF([1.0, 0.0]))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            kl_divergence(PMF([1.0]), PMF([0.5, 0.5]))

    @given(seeds, st.integers(2, 8))
    def test_nonnegative(self, seed, k):
        rng = np.random.default_rng(seed)
        assert kl_divergence(PMF(rng.dirichlet(np.ones(k))), PMF(rng.dirichlet(np.ones(k)))) >= 0


class TestMutualInformation:
    def test_product_is_zero(self):
        t = np.outer([0.2, 0.8], [0.1, 0.3, 0.6])
        assert mutual_information(JointPMF(("A", "B"), t), "A", "B") == pytest.approx(0, abs=1e-15)

    def test_copy(self):
        j = JointPMF(("X", "Y"), np.diag([0.5, 0.5]))
        assert mutual_information(j, "X", "Y") == pytest.approx(math.log(2))

    def test_bsc(self):
        assert mutual_information(bsc(0.1), "X", "Y") == pytest.approx(0.368064, abs=1e-6)

    def test_constant_conditioning(self):
        rng = np.random.default_rng(0)
        j = random_joint(rng, (3, 4, 1), ("A", "B", "C"))
        assert conditional_mutual_information(j, "A", "B", "C") == pytest.approx(
            mutual_information(j, "A", "B"), abs=1e-12)

    def test_triple_copy_zero(self):
        t = np.zeros((2, 2, 2))
        t[0, 0, 0] = t[1, 1, 1] = 0.5
        j = JointPMF(("A", "B", "C"), t)
        assert conditional_mutual_information(j, "A", "B", "C") == pytest.approx(0, abs=1e-15)

    def test_unknown_axis(self):
        with pytest.raises(KeyError):
            mutual_information(bsc(), "X", "Z")

    @settings(max_examples=50)
    @given(seeds)
    def test_rows_oracle(self, seed):
        rng = np.random.default_rng(seed)
        sizes = tuple(int(s) for s in rng.integers(1, 6, size=2))
        j = random_joint(rng, sizes, ("Y", "X"), sparse=0.3)
        assert mutual_information(j, "X", "Y") == pytest.approx(mi_via_rows(j.table.tolist()), abs=1e-12)

    @settings(max_examples=50)
    @given(seeds)
    def test_permutation_and_relabel_invariance(self, seed):
        rng = np.random.default_rng(seed)
        sizes = tuple(int(s) for s in rng.integers(2, 5, size=3))
        j = random_joint(rng, sizes, ("A", "B", "C"))
        base = (entropy(j), mutual_information(j, "A", "B"), conditional_mutual_information(j, "A", "B", "C"))
        t = j.transpose(["C", "A", "B"])
        perm = [rng.permutation(s) for s in sizes]
        rel = JointPMF(("A", "B", "C"), j.table[np.ix_(*perm)])
        for k in (t, rel):
            other = (entropy(k), mutual_information(k, "A", "B"), conditional_mutual_information(k, "A", "B", "C"))
            assert np.allclose(base, other, atol=1e-12)

    def test_grouped_axes(self):
        rng = np.random.default_rng(4)
        j = random_joint(rng, (2, 3, 2), ("A", "B", "C"))
        merged = j.merge(["B", "C"], "BC")
        assert mutual_information(j, "A", ["B", "C"]) == pytest.approx(mutual_information(merged, "A", "BC"))


class TestMarkov:
    def test_independent_extension(self):
        rng = np.random.default_rng(1)
        yx = bsc().table
        t = yx[:, :, None] * rng.dirichlet(np.ones(3))[None, None, :]
        assert is_markov_chain(JointPMF(("Y", "X", "U"), t), "Y", "X", "U")

    def test_u_equals_y(self):
        yx = bsc().table
        t = np.zeros((2, 2, 2))
        for y in range(2):
            t[y, :, y] = yx[y]
        j = JointPMF(("Y", "X", "U"), t)
        assert not is_markov_chain(j, "Y", "X", "U")
        h_y_given_x = entropy(j.marginal(["Y", "X"])) - entropy(j.marginal(["X"]))
        assert markov_residual(j, "Y", "X", "U") == pytest.approx(h_y_given_x)


class TestDistances:
    def test_examples(self):
        assert linf_distance(PMF([0.5, 0.5]), PMF([0.5, 0.5])) == 0
        assert linf_distance(PMF([1, 0]), PMF([0, 1])) == 1
        assert linf_distance(PMF([0.5, 0.5]), PMF([0.4, 0.6])) == pytest.approx(0.1)

    def test_gap_bound(self):
        assert entropy_gap_bound(0.1, 2) == pytest.approx(0.460517, abs=1e-6)
        assert entropy_gap_bound(0.5, 2) == pytest.approx(0.693147, abs=1e-6)
        gap = abs(entropy(PMF([1, 0])) - entropy(PMF([0.9, 0.1])))
        assert gap == pytest.approx(0.325083, abs=1e-6)
        assert gap <= entropy_gap_bound(0.1, 2)

    @pytest.mark.parametrize("eps", [0.0, -0.1, 0.51])
    def test_gap_bound_range(self, eps):
        with pytest.raises(OutOfRange):
            entropy_gap_bound(eps, 2)


class TestProductExtension:
    def test_n1(self):
        j = bsc()
        e = product_extension(j, 1)
        assert np.allclose(e.table, j.table)

    def test_independent_letters_additive(self):
        j = bsc(0.2)
        e = product_extension(j, 2)
        i2 = mutual_information(e, ["Y1", "Y2"], ["X1", "X2"])
        assert i2 == pytest.approx(2 * mutual_information(j, "X", "Y"), abs=1e-12)
        assert entropy(e.marginal(["X1", "X2"])) == pytest.approx(2 * math.log(2))

    def test_letter_marginals(self):
        rng = np.random.default_rng(2)
        j = random_joint(rng, (2, 3), ("Y", "X"))
        e = product_extension(j, 3)
        for t in (1, 2, 3):
            assert np.allclose(e.marginal([f"Y{t}", f"X{t}"]).table, j.table)

    def test_guard(self):
        j = JointPMF.normalized(("Y", "X"), np.ones((10, 10)))
        with pytest.raises(SizeExceeded):
            product_extension(j, 4)

    def test_sequence_joint_matches(self):
        rng = np.random.default_rng(5)
        j = random_joint(rng, (2, 3), ("Y", "X"))
        e = product_extension(j, 2).transpose(["Y1", "Y2", "X1", "X2"])
        assert np.allclose(sequence_joint(j, 2), e.table.reshape(4, 9))


class TestSerialization:
    @settings(max_examples=30)
    @given(seeds)
    def test_roundtrip_bit_exact(self, seed):
        rng = np.random.default_rng(seed)
        sizes = tuple(int(s) for s in rng.integers(1, 5, size=3))
        j = random_joint(rng, sizes, ("Y", "X", "U"))
        back = JointPMF.from_json(json.loads(json.dumps(j.to_json())))
        assert back.axes == j.axes
        assert np.array_equal(back.table, j.table)

    def test_layout(self):
        d = bsc().to_json()
        assert d["axes"] == [{"name": "Y", "size": 2}, {"name": "X", "size": 2}]
        assert len(d["table"]) == 4


class TestConditional:
    def test_rows(self):
        j = bsc(0.1)
        k = j.conditional("Y", "X")
        assert np.allclose(k.rows, [[0.9, 0.1], [0.1, 0.9]])

    def test_zero_mass_rows_uniform(self):
        j = JointPMF(("Y", "X"), np.array([[0.5, 0.0], [0.5, 0.0]]))
        assert np.allclose(j.conditional("Y", "X").rows[1], [0.5, 0.5])
