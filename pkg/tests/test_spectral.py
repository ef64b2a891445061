import logging
import math

import numpy as np
import pytest

from extremal.core import spectral as spectral_module
from extremal.core.constructions import build_uit, identity_tensor, permutation_matrix, symmetrize
from extremal.core.errors import NegativeEntriesError, NotSymmetricError, ZeroTensorError
from extremal.core.spectral import (
    certified_upper_bound,
    matrix_spectral_norm,
    nuclear_lower_bound,
    ratio,
    spectral_norm_estimate,
    spectral_norm_symmetric,
    spectral_upper_bound,
    symmetric_ratio,
    uniform_contraction_value,
)
from extremal.core.tensor import DenseTensor, frobenius_norm, mode_contract, multilinear_eval
from extremal.schemas.spectral import EstimatorConfig


def random_symmetric(rng, n, d):
    return symmetrize(DenseTensor(rng.standard_normal((n,) * d)))


class TestMatrixNorm:
    def test_matches_svd(self, rng):
        M = rng.standard_normal((4, 7))
        assert matrix_spectral_norm(DenseTensor(M)) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0])

    def test_sub_permutation_is_exactly_one(self):
        M = DenseTensor.from_indices((3, 4), [(0, 2), (2, 0)])
        assert matrix_spectral_norm(M) == 1.0


class TestEstimator:
    def test_matrix_equals_top_singular_value(self, rng, fast_cfg):
        M = rng.standard_normal((5, 3))
        est = spectral_norm_estimate(DenseTensor(M), fast_cfg)
        assert est.value == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-9)

    def test_rank_one_tensor(self, rng, fast_cfg):
        xs = [rng.standard_normal(n) for n in (2, 3, 4)]
        T = DenseTensor(np.multiply.outer(np.multiply.outer(xs[0], xs[1]), xs[2]))
        est = spectral_norm_estimate(T, fast_cfg)
        assert est.value == pytest.approx(frobenius_norm(T), rel=1e-9)

    def test_witnesses_attain_value(self, rng, fast_cfg):
        T = DenseTensor(rng.standard_normal((3, 3, 2)))
        est = spectral_norm_estimate(T, fast_cfg)
        assert all(np.linalg.norm(w) == pytest.approx(1.0) for w in est.witnesses)
        assert abs(multilinear_eval(T, est.witnesses)) == pytest.approx(est.value, rel=1e-9)

    def test_estimate_below_certified_upper(self, rng, fast_cfg):
        for _ in range(10):
            T = DenseTensor(rng.standard_normal((3, 2, 4)))
            est = spectral_norm_estimate(T, fast_cfg)
            assert est.value <= est.certified_upper * (1 + 1e-9)
            assert est.certified_upper <= frobenius_norm(T) * (1 + 1e-12)

    def test_contraction_does_not_increase_the_norm(self, rng, fast_cfg):
        for _ in range(10):
            T = DenseTensor(rng.standard_normal((3, 2, 4)))
            k = int(rng.integers(0, 3))
            x = rng.standard_normal(T.shape[k])
            contracted = mode_contract(T, k, x / np.linalg.norm(x))
            upper, _ = certified_upper_bound(T)
            assert spectral_norm_estimate(contracted, fast_cfg).value <= upper + 1e-9

    def test_value_chain_for_nonnegative_tensors(self, rng, fast_cfg):
        for _ in range(200):
            d = int(rng.integers(2, 5))
            shape = tuple(int(n) for n in rng.integers(2, 5, size=d))
            T = DenseTensor(rng.random(shape) * (rng.random(shape) < 0.7))
            if T.is_zero():
                continue
            est = spectral_norm_estimate(T, fast_cfg)
            assert uniform_contraction_value(T) <= est.value + 1e-9
            assert est.value <= est.certified_upper + 1e-9
            assert est.certified_upper <= frobenius_norm(T) + 1e-9

    def test_vanishing_start_is_skipped_and_counted(self, monkeypatch, caplog):
        # every random start misses the single nonzero entry
        miss = [np.array([0.0, 1.0])] * 3
        monkeypatch.setattr(spectral_module, "_random_start", lambda shape, rng, nonnegative: miss)
        T = DenseTensor.from_indices((2, 2, 2), [(0, 0, 0)])
        with caplog.at_level(logging.INFO, logger="extremal.core.spectral"):
            est = spectral_norm_estimate(T, EstimatorConfig(starts=2, max_iters=50, tol=1e-12, seed=0))
        assert est.value == pytest.approx(1.0)
        assert est.starts_used == 4
        skipped = [r.getMessage() for r in caplog.records if "vanished" in r.getMessage()]
        assert len(skipped) == 2
        assert all(m.endswith("start skipped") for m in skipped)

    def test_history_is_monotone(self, rng, fast_cfg):
        T = DenseTensor(rng.standard_normal((4, 4, 4)))
        history = spectral_norm_estimate(T, fast_cfg).history
        assert all(b >= a - 1e-12 * abs(a) for a, b in zip(history, history[1:]))

    def test_deterministic_for_fixed_seed(self, rng, fast_cfg):
        T = DenseTensor(rng.standard_normal((3, 3, 3)))
        assert spectral_norm_estimate(T, fast_cfg) == spectral_norm_estimate(T, fast_cfg)

    def test_zero_tensor(self, fast_cfg):
        with pytest.raises(ZeroTensorError):
            spectral_norm_estimate(DenseTensor.zeros((2, 2, 2)), fast_cfg)

    def test_vector(self, fast_cfg):
        est = spectral_norm_estimate(DenseTensor([3.0, 4.0]), fast_cfg)
        assert est.value == pytest.approx(5.0)
        assert est.certified_upper == pytest.approx(5.0)

    def test_table_witness_222(self, fast_cfg, nonneg_witnesses):
        T, expected, _ = nonneg_witnesses["2,2,2"]
        assert ratio(T, fast_cfg) == pytest.approx(expected, abs=1e-9)


class TestSymmetric:
    @pytest.mark.parametrize("n,d", [(2, 3), (3, 3), (4, 3), (2, 4), (3, 4)])
    def test_agrees_with_general_estimator(self, rng, n, d):
        cfg = EstimatorConfig(starts=32, max_iters=1000, tol=1e-14, seed=1)
        for _ in range(10):
            T = random_symmetric(rng, n, d)
            general = spectral_norm_estimate(T, cfg)
            sym = spectral_norm_symmetric(T, cfg)
            assert sym.value == pytest.approx(general.value, rel=1e-6)

    def test_witness_is_repeated_unit_vector(self, rng, fast_cfg):
        T = random_symmetric(rng, 3, 3)
        est = spectral_norm_symmetric(T, fast_cfg)
        assert all(w == est.witnesses[0] for w in est.witnesses)
        assert abs(multilinear_eval(T, est.witnesses)) == pytest.approx(est.value, rel=1e-8)

    def test_even_order_finds_negative_extreme(self, fast_cfg):
        # -x^4 on the first coordinate dominates
        data = np.zeros((2, 2, 2, 2))
        data[0, 0, 0, 0] = -3.0
        data[1, 1, 1, 1] = 1.0
        est = spectral_norm_symmetric(DenseTensor(data), fast_cfg)
        assert est.value == pytest.approx(3.0)

    def test_rejects_non_symmetric(self, rng, fast_cfg):
        with pytest.raises(NotSymmetricError):
            spectral_norm_symmetric(DenseTensor(rng.standard_normal((2, 2, 2))), fast_cfg)

    def test_symmetric_table_witness(self, fast_cfg, symmetric_witnesses):
        T, expected, _ = symmetric_witnesses["n=3"]
        assert symmetric_ratio(T, fast_cfg) == pytest.approx(math.sqrt(2) / 3, abs=1e-9)


class TestCertificates:
    def test_zero(self):
        assert certified_upper_bound(DenseTensor.zeros((2, 2))) == (0.0, "zero tensor")

    @pytest.mark.parametrize("shape", [(2, 2, 4), (4, 4, 4), (2, 3, 6), (2, 2, 2, 2)])
    def test_identity_tensors_certified_one(self, shape):
        value, route = certified_upper_bound(build_uit(shape))
        assert value == 1.0

    def test_odd_order_certificate_route(self):
        # every matricization of the 4x4x4 identity tensor has norm sqrt(2)
        assert certified_upper_bound(build_uit((4, 4, 4)))[1] == "unfolded permutation tensor"

    def test_identity_tensor_has_unit_norm(self, fast_cfg):
        T = identity_tensor(12)
        est = spectral_norm_estimate(T, fast_cfg)
        assert est.value == pytest.approx(1.0, abs=1e-9)
        assert est.certified_upper == 1.0

    def test_bipartition_route_for_general_tensor(self, rng):
        T = DenseTensor(rng.standard_normal((2, 3, 4)))
        value, route = certified_upper_bound(T)
        assert route.startswith("unfolding") or route == "frobenius"
        assert value == pytest.approx(spectral_upper_bound(T))


class TestHelpers:
    def test_uniform_contraction_value(self):
        T = DenseTensor(np.ones((2, 2, 2)))
        assert uniform_contraction_value(T) == pytest.approx(8 / math.sqrt(8))

    def test_uniform_contraction_needs_nonnegative(self):
        with pytest.raises(NegativeEntriesError):
            uniform_contraction_value(DenseTensor([[1.0, -1.0]]))

    def test_nuclear_lower_bound_of_permutation_matrix(self):
        P = permutation_matrix([2, 0, 1])
        # <P, P> / ||P||_sigma = 3 equals the nuclear norm of a permutation matrix
        assert nuclear_lower_bound(P, P) == pytest.approx(3.0)

    def test_nuclear_lower_bound_below_frobenius_bound(self, rng):
        T = DenseTensor(rng.standard_normal((2, 3, 2)))
        assert nuclear_lower_bound(T, T) >= frobenius_norm(T) - 1e-12

    def test_nuclear_lower_bound_zero_test_tensor(self, rng):
        with pytest.raises(ZeroTensorError):
            nuclear_lower_bound(DenseTensor(np.ones((2, 2))), DenseTensor.zeros((2, 2)))
