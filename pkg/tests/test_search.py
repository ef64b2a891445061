import math

import numpy as np
import pytest
from pydantic import ValidationError

from extremal.core import search as search_module
from extremal.core.bounds import phi_bounds
from extremal.core.errors import NonBinaryError, SearchSpaceError
from extremal.core.search import (
    CheckpointStore,
    SearchSpace,
    _evaluate_chunk as evaluate_chunk,
    canonical_form,
    canonical_key,
    group_maps,
    group_order,
    search_min_ratio,
    symmetric_units,
)
from extremal.core.spectral import ratio
from extremal.core.tensor import DenseTensor, mode_transpose, slice_permute
from extremal.database import session_factory
from extremal.models.search_run import SearchRun
from extremal.schemas.bounds import NumberField, SpaceSpec
from extremal.schemas.search import SearchConfig
from extremal.schemas.spectral import EstimatorConfig


def search_cfg(shape, **kwargs):
    kwargs.setdefault("estimator", EstimatorConfig(starts=8, max_iters=300, tol=1e-12, seed=0))
    kwargs.setdefault("polish_starts", 32)
    kwargs.setdefault("parallelism", 1)
    return SearchConfig(shape=shape, **kwargs)


def random_binary(rng, shape, density=0.4):
    return DenseTensor((rng.random(shape) < density).astype(float))


class TestGroup:
    def test_group_size(self):
        # slice permutations 2!*2!*3! times the single swap of the two length-2 modes
        assert group_maps((2, 2, 3)).shape == (2 * 2 * 6 * 2, 12)
        assert group_maps((2, 2, 2)).shape == (8 * 6, 8)

    def test_maps_are_permutations(self):
        maps = group_maps((2, 3, 2))
        assert all(sorted(row) == list(range(12)) for row in maps)

    def test_maps_are_cached_read_only(self):
        maps = group_maps((2, 2, 2))
        assert maps is group_maps((2, 2, 2))
        with pytest.raises(ValueError):
            maps[0, 0] = 1

    def test_group_order(self):
        assert group_order((2, 2, 3)) == 2 * 2 * 6 * 2
        assert group_order((5, 5, 5)) == 120 ** 3 * 6

    def test_large_group_is_not_tabulated(self):
        with pytest.raises(SearchSpaceError):
            group_maps((5, 5, 5))
        with pytest.raises(SearchSpaceError):
            SearchSpace((6, 6))

    def test_symmetric_units_cover_the_cube(self):
        units, positions = symmetric_units(3, 3)
        assert len(units) == math.comb(5, 3)
        covered = np.concatenate(positions)
        assert sorted(covered) == list(range(27))


class TestCanonicalForm:
    def test_invariant_under_slice_permutations_and_transposes(self, rng):
        for _ in range(20):
            T = random_binary(rng, (2, 3, 3))
            canon = canonical_form(T)
            assert canonical_form(slice_permute(T, 1, [2, 0, 1])) == canon
            assert canonical_form(slice_permute(T, 0, [1, 0])) == canon
            assert canonical_form(mode_transpose(T, [0, 2, 1])) == canon

    def test_collapses_random_group_elements(self, rng):
        shape = (2, 3, 3)
        maps = group_maps(shape)
        T = random_binary(rng, shape)
        canon = canonical_form(T)
        flat = T.data.ravel()
        for g in rng.integers(0, len(maps), size=100):
            assert canonical_form(DenseTensor(flat[maps[g]].reshape(shape))) == canon

    def test_canonical_form_is_in_the_orbit(self, rng):
        T = random_binary(rng, (2, 2, 3))
        canon = canonical_form(T)
        assert len(canon.ones()) == len(T.ones())
        assert canonical_key(canon) == canonical_key(T)

    @pytest.mark.parametrize("shape", [(2, 2, 2), (2, 3, 3), (3, 3), (2, 3, 2), (2, 2, 3, 2), (4,)])
    def test_matches_minimum_over_group_table(self, rng, shape):
        space = SearchSpace(shape)
        for _ in range(10):
            T = random_binary(rng, shape, density=0.5)
            bits = (T.data.ravel() != 0).astype(np.uint8)
            assert canonical_key(T) == space.canonical_key(bits)

    def test_idempotent(self, rng):
        T = random_binary(rng, (3, 3, 2))
        canon = canonical_form(T)
        assert canonical_form(canon) == canon

    def test_large_cube_single_one(self):
        T = DenseTensor.from_indices((5, 5, 5), [(1, 3, 0)])
        assert canonical_form(T).ones() == [(4, 4, 4)]

    def test_permutation_matrices_share_the_anti_diagonal(self, rng):
        expected = [(i, 5 - i) for i in range(6)]
        for _ in range(3):
            perm = rng.permutation(6)
            T = DenseTensor.from_indices((6, 6), [(i, int(perm[i])) for i in range(6)])
            assert canonical_form(T).ones() == expected

    def test_smallest_key_puts_ones_last(self):
        T = DenseTensor.from_indices((2, 2), [(0, 0)])
        assert canonical_form(T).ones() == [(1, 1)]

    def test_zero_tensor(self):
        assert canonical_form(DenseTensor.zeros((2, 3))).is_zero()

    def test_non_binary(self):
        with pytest.raises(NonBinaryError):
            canonical_form(DenseTensor(np.full((2, 2), 0.5)))


class TestSearchSpace:
    def test_bits_round_trip(self):
        space = SearchSpace((2, 2, 3))
        bits = np.zeros(12, dtype=np.uint8)
        bits[[0, 5, 11]] = 1
        assert np.array_equal(space.bits_of(space.key_of(bits)), bits)

    def test_zero_slice(self):
        space = SearchSpace((2, 2))
        assert space.has_zero_slice(np.array([1, 1, 0, 0], dtype=np.uint8))
        assert not space.has_zero_slice(np.array([1, 0, 0, 1], dtype=np.uint8))

    def test_symmetric_tensor(self):
        space = SearchSpace((2, 2, 2), symmetric=True)
        assert space.size == 4
        bits = np.array([0, 1, 0, 0], dtype=np.uint8)
        assert space.tensor(bits).ones() == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


class TestSearchConfig:
    def test_symmetric_needs_cube(self):
        with pytest.raises(ValidationError):
            SearchConfig(shape=(2, 3), symmetric=True)

    def test_hash_ignores_parallelism(self):
        assert search_cfg((2, 2, 2), parallelism=1).config_hash() == search_cfg((2, 2, 2), parallelism=4).config_hash()
        assert search_cfg((2, 2, 2)).config_hash() != search_cfg((2, 2, 3)).config_hash()


class TestSearch:
    @pytest.mark.parametrize(
        "shape, expected",
        [((2, 2, 2), 2 / 3), ((2, 2, 3), 3 ** -0.5), ((2, 2, 4), 0.5)],
    )
    def test_minimum_ratio(self, shape, expected):
        result = search_min_ratio(search_cfg(shape))
        assert result.best_ratio == pytest.approx(expected, abs=1e-6)
        assert result.best_ratio >= phi_bounds(SpaceSpec(shape=shape, field=NumberField.BINARY)).lower - 1e-6
        assert result.complete
        assert result.witnesses

    def test_witness_attains_minimum(self, fast_cfg):
        result = search_min_ratio(search_cfg((2, 2, 2)))
        T = DenseTensor.from_indices((2, 2, 2), [tuple(idx) for idx in result.witnesses[0]])
        assert ratio(T, fast_cfg) == pytest.approx(2 / 3, abs=1e-6)

    def test_symmetric_search(self):
        result = search_min_ratio(search_cfg((2, 2, 2), symmetric=True))
        assert result.best_ratio == pytest.approx(2 / 3, abs=1e-6)
        assert result.symmetric

    def test_pruning_does_not_change_the_minimum(self):
        pruned = search_min_ratio(search_cfg((2, 2, 2)))
        full = search_min_ratio(search_cfg((2, 2, 2), prune_zero_slices=False))
        assert full.pruned == 0 and pruned.pruned > 0
        assert full.best_ratio == pytest.approx(pruned.best_ratio, abs=1e-9)
        assert full.raw_covered == pruned.raw_covered == 2 ** 8 - 1

    def test_without_canonicalization_every_tensor_is_a_class(self):
        result = search_min_ratio(search_cfg((2, 2), canonicalize=False, prune_zero_slices=False))
        assert result.explored == 2 ** 4 - 1
        assert result.best_ratio == pytest.approx(0.5 ** 0.5, abs=1e-9)

    def test_max_ones_is_incomplete(self):
        result = search_min_ratio(search_cfg((2, 2, 3), max_ones=3))
        assert not result.complete
        assert result.best_ratio == pytest.approx(3 ** -0.5, abs=1e-6)

    def test_enumeration_limit(self):
        with pytest.raises(SearchSpaceError):
            search_min_ratio(search_cfg((3, 3, 4)))

    def test_everything_pruned(self):
        with pytest.raises(SearchSpaceError):
            search_min_ratio(search_cfg((3, 3, 3), max_ones=2))

    def test_deterministic(self):
        a = search_min_ratio(search_cfg((2, 2, 3)))
        b = search_min_ratio(search_cfg((2, 2, 3)))
        assert a.model_dump(exclude={"wall_time"}) == b.model_dump(exclude={"wall_time"})


class TestCheckpoints:
    def test_finished_run_is_returned_on_resume(self, db_url):
        cfg = search_cfg((2, 2, 2))
        store = CheckpointStore(db_url)
        first = search_min_ratio(cfg, store=store)
        assert store.finished_result(cfg) == first
        again = search_min_ratio(cfg, store=store, resume=True)
        assert again == first

    def test_resume_skips_checkpointed_chunks(self, db_url, monkeypatch):
        cfg = search_cfg((2, 2, 3), chunk_size=4)
        store = CheckpointStore(db_url)
        first = search_min_ratio(cfg, store=store)
        with session_factory(store.engine)() as db:
            first_id = db.query(SearchRun).one().id
        chunks = store.completed_chunks(first_id)
        assert sum(len(entries) for entries in chunks.values()) == first.explored

        # an interrupted run that got through every chunk but never finished
        interrupted = store.open_run(cfg)
        store.save_chunks(interrupted, chunks)
        starts = []

        def counting(job):
            starts.append(job[3]["starts"])
            return evaluate_chunk(job)

        monkeypatch.setattr(search_module, "_evaluate_chunk", counting)
        resumed = search_min_ratio(cfg, store=store, resume=True)
        assert cfg.estimator.starts not in starts
        assert starts and set(starts) == {cfg.polish_starts}
        assert resumed.best_ratio == first.best_ratio
        assert resumed.witnesses == first.witnesses
        assert store.finished_result(cfg) == resumed

    def test_fresh_run_without_resume(self, db_url):
        cfg = search_cfg((2, 2, 2))
        store = CheckpointStore(db_url)
        first = store.open_run(cfg)
        assert store.open_run(cfg) != first
        assert store.open_run(cfg, resume=True) == first + 1


@pytest.mark.extended
@pytest.mark.parametrize("shape, expected, tol", [((2, 3, 3), 0.5, 1e-4), ((3, 3, 3), 0.469, 1e-3)])
def test_larger_searches(shape, expected, tol):
    result = search_min_ratio(SearchConfig(shape=shape, parallelism=2))
    assert result.best_ratio == pytest.approx(expected, abs=tol)
