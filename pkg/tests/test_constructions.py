import math
from fractions import Fraction

import numpy as np
import pytest

from extremal.core.constructions import (
    build_partition,
    build_uit,
    build_upt,
    compression_power,
    embedding_frobenius_sq,
    evenly_check,
    identity_tensor,
    is_permutation_matrix,
    is_permutation_unfolding,
    iter_pairing_partitions,
    pairwise_contraction,
    prime_factorize,
    respects_pairing,
    symmetric_embed,
    symmetrize,
    tall_extreme,
    uit_condition,
)
from extremal.core.errors import (
    ConditionError,
    InvalidPartitionError,
    InvalidPermutationError,
    NegativeEntriesError,
    NonBinaryError,
    ShapeMismatchError,
)
from extremal.core.spectral import spectral_norm_estimate
from extremal.core.tensor import (
    DenseTensor,
    frobenius_norm,
    frobenius_norm_sq,
    inner_product,
    is_symmetric,
    matricize,
    multilinear_eval,
    standard_matricize,
)
from extremal.schemas.tensor import ModePartition


class TestConditions:
    @pytest.mark.parametrize("shape", [(2, 2, 4), (4, 4, 4), (2, 3, 6), (6, 6), (4, 4, 4, 4)])
    def test_condition_holds(self, shape):
        assert uit_condition(shape)

    @pytest.mark.parametrize("shape", [(2, 2, 2), (2, 3, 3), (3, 4, 4), (2, 8)])
    def test_condition_fails(self, shape):
        assert not uit_condition(shape)

    def test_prime_factorize(self):
        f = prime_factorize(12)
        assert f.primes == [2, 2, 3]
        assert f.doubled() == [2, 2, 3, 2, 2, 3]
        with pytest.raises(ConditionError):
            prime_factorize(1)


class TestIdentityTensors:
    def test_identity_tensor_shape_and_norm(self):
        T = identity_tensor(12)
        assert T.shape == (2, 2, 3, 2, 2, 3)
        assert frobenius_norm_sq(T) == 12
        assert is_permutation_matrix(standard_matricize(T))

    def test_build_partition_respects_pairing(self):
        P = build_partition((4, 4, 4))
        assert P.covers(6)
        assert respects_pairing(P, 3)
        assert [math.prod((2, 2, 2, 2, 2, 2)[m] for m in block) for block in P.blocks] == [4, 4, 4]

    def test_build_partition_rejects_bad_shape(self):
        with pytest.raises(ConditionError):
            build_partition((2, 3, 3))

    def test_pairing_partitions_are_valid(self):
        partitions = list(iter_pairing_partitions((2, 2, 4)))
        assert partitions
        for P in partitions:
            assert P.covers(4)
            assert respects_pairing(P, 2)

    @pytest.mark.parametrize("shape", [(2, 2, 4), (4, 4, 4), (2, 3, 6), (3, 3, 3, 3), (2, 2, 2, 2, 4)])
    def test_uit_attains_lower_bound(self, shape, fast_cfg):
        T = build_uit(shape)
        n = math.isqrt(math.prod(shape))
        assert T.shape == shape
        assert frobenius_norm_sq(T) == n
        assert evenly_check(T).passed
        est = spectral_norm_estimate(T, fast_cfg)
        assert est.value >= 1 - 1e-6
        assert est.certified_upper == 1.0
        assert est.value / frobenius_norm(T) == pytest.approx(math.prod(shape) ** -0.25, abs=1e-6)

    def test_upt_with_permutation(self, fast_cfg):
        P = build_partition((2, 2, 4))
        T = build_upt(4, [1, 3, 0, 2], P)
        assert frobenius_norm_sq(T) == 4
        assert spectral_norm_estimate(T, fast_cfg).certified_upper == 1.0

    def test_upt_rejects_paired_block(self):
        # modes 0 and 2 of the 4th identity tensor are a row/column pair
        with pytest.raises(InvalidPartitionError):
            build_upt(4, [0, 1, 2, 3], ModePartition.of((0, 2), (1,), (3,)))

    def test_upt_rejects_bad_permutation(self):
        with pytest.raises(InvalidPermutationError):
            build_upt(4, [0, 0, 1, 2], build_partition((2, 2, 4)))


class TestTall:
    def test_tall_extreme_ratio(self, fast_cfg):
        T = tall_extreme((7, 2, 3), 0, list(range(7)))
        assert frobenius_norm_sq(T) == 6
        assert is_permutation_matrix(DenseTensor(matricize(T, 0).data[:6]))
        est = spectral_norm_estimate(T, fast_cfg)
        assert est.value / frobenius_norm(T) == pytest.approx(6 ** -0.5, abs=1e-9)

    def test_not_tall(self):
        with pytest.raises(ConditionError):
            tall_extreme((3, 2, 3), 0, [0, 1, 2])

    def test_permutation_length(self):
        with pytest.raises(ShapeMismatchError):
            tall_extreme((6, 2, 3), 0, [0, 1, 2])


class TestSymmetric:
    def test_embedding_is_symmetric_with_exact_norm(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 4))
            shape = tuple(int(n) for n in rng.integers(1, 5, size=d))
            T = DenseTensor(rng.integers(-3, 4, size=shape).astype(float))
            Z = symmetric_embed(T)
            assert Z.shape == (sum(shape),) * d
            assert is_symmetric(Z)
            exact = sum((Fraction(int(v)) ** 2 for v in T.data.ravel()), Fraction(0))
            assert embedding_frobenius_sq(T) == exact / math.factorial(d)

    def test_embedding_form_on_stacked_vectors(self, rng):
        T = DenseTensor(rng.standard_normal((2, 3, 2)))
        xs = [rng.standard_normal(n) for n in T.shape]
        z = np.concatenate(xs)
        Z = symmetric_embed(T)
        assert multilinear_eval(Z, [z] * 3) == pytest.approx(multilinear_eval(T, xs))

    def test_symmetrize(self, rng):
        T = DenseTensor(rng.standard_normal((3, 3, 3)))
        S = symmetrize(T)
        assert is_symmetric(S, atol=1e-12)
        assert S.data.sum() == pytest.approx(6 * T.data.sum())

    def test_symmetrize_needs_cube(self, rng):
        with pytest.raises(ShapeMismatchError):
            symmetrize(DenseTensor(rng.standard_normal((2, 3))))


class TestEvenly:
    def test_table_witness_fails_evenly(self, nonneg_witnesses):
        T, _, _ = nonneg_witnesses["2,2,3"]
        report = evenly_check(T)
        assert not report.passed
        assert report.expected_ones is None

    def test_slice_sums(self):
        report = evenly_check(build_uit((2, 2, 4)))
        assert report.expected_ones == 4
        assert report.expected_per_slice == [2.0, 2.0, 1.0]
        assert report.slice_sums[2] == [1.0, 1.0, 1.0, 1.0]

    def test_negative_rejected(self):
        with pytest.raises(NegativeEntriesError):
            evenly_check(DenseTensor([[1.0, -1.0]]))


class TestPermutationUnfolding:
    def test_identity_tensor_unfolds_to_permutation(self):
        assert is_permutation_unfolding(identity_tensor(4))

    def test_non_binary(self):
        with pytest.raises(NonBinaryError):
            is_permutation_unfolding(DenseTensor(np.full((2, 2), 0.5)))

    def test_odd_order(self):
        with pytest.raises(ShapeMismatchError):
            is_permutation_unfolding(build_uit((4, 4, 4)))

    def test_wrong_count(self):
        assert not is_permutation_unfolding(DenseTensor.from_indices((2, 2, 2, 2), [(0, 0, 0, 0)]))


class TestPairwiseContraction:
    def test_matches_inner_product(self, rng):
        A = DenseTensor(rng.standard_normal((2, 3, 4)))
        B = DenseTensor(rng.standard_normal((2, 3, 4)))
        assert pairwise_contraction([A, B], [(0, 1, 2), (0, 1, 2)]) == pytest.approx(inner_product(A, B))

    def test_chain_of_matrices_is_trace(self, rng):
        mats = [rng.standard_normal((3, 3)) for _ in range(3)]
        tensors = [DenseTensor(m) for m in mats]
        value = pairwise_contraction(tensors, [(0, 1), (1, 2), (2, 0)])
        assert value == pytest.approx(np.trace(mats[0] @ mats[1] @ mats[2]))

    def test_label_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            pairwise_contraction([DenseTensor(np.ones((2, 3))), DenseTensor(np.ones((2, 2)))], [(0, 1), (0, 1)])

    def test_label_used_once(self, rng):
        with pytest.raises(ShapeMismatchError):
            pairwise_contraction([DenseTensor(np.ones((2, 2)))], [(0, 1)])


def test_compression_power_shape():
    T = build_uit((2, 2, 4))
    P = compression_power(T, 2)
    assert P.shape == (4, 4, 16)
    assert frobenius_norm_sq(P) == 16


def test_pairwise_contraction_bounded_by_norms(rng):
    checked = 0
    while checked < 200:
        k = int(rng.integers(2, 5))
        labels = [[] for _ in range(k)]
        dims = {}
        for label in range(int(rng.integers(k, 2 * k + 1))):
            a, b = rng.choice(k, size=2, replace=False)
            labels[a].append(label)
            labels[b].append(label)
            dims[label] = int(rng.integers(1, 4))
        if any(not ls for ls in labels):
            continue
        labels = [list(rng.permutation(ls)) for ls in labels]
        tensors = [DenseTensor(rng.standard_normal(tuple(dims[l] for l in ls))) for ls in labels]
        value = pairwise_contraction(tensors, [tuple(int(l) for l in ls) for ls in labels])
        assert abs(value) <= math.prod(frobenius_norm(T) for T in tensors) + 1e-9
        checked += 1
