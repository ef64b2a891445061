"""
Exhaustive search for the smallest spectral/Frobenius ratio over zero-one
tensors of one shape.

Tensors are enumerated by increasing number of ones and quotiented by the
group of slice permutations and mode transposes (among modes of equal
dimension); only one canonical representative per orbit is estimated.
Chunks of representatives can be spread over worker processes and are
checkpointed to the run store so an interrupted run can resume.
"""

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, islice, permutations, product
from typing import Iterator, Optional

import numpy as np

from ..database import init_db, make_engine, session_factory
from ..models.search_run import SearchCheckpoint, SearchRun
from ..schemas.search import SearchConfig, SearchResult
from ..schemas.spectral import EstimatorConfig
from .config import settings
from .errors import NonBinaryError, SearchSpaceError
from .spectral import spectral_norm_estimate, spectral_norm_symmetric
from .tensor import DenseTensor, frobenius_norm

logger = logging.getLogger(__name__)

# Integer keys fit in int64 up to this many entries; longer keys are Python ints.
INT64_KEY_BITS = 62
# Largest group table (rows times entries) built in memory.
GROUP_TABLE_LIMIT = 1 << 25
CANONICAL_BLOCK = 4096


def shape_transposes(shape: tuple[int, ...]) -> list[tuple[int, ...]]:
    d = len(shape)
    return [s for s in permutations(range(d)) if all(shape[s[m]] == shape[m] for m in range(d))]


def group_order(shape: tuple[int, ...]) -> int:
    """Number of slice permutations times shape-preserving mode transposes."""
    return math.prod(math.factorial(n) for n in shape) * len(shape_transposes(shape))


@lru_cache(maxsize=32)
def group_maps(shape: tuple[int, ...]) -> np.ndarray:
    """
    Flat index maps of every slice permutation combined with every mode
    transpose that preserves the shape. Row ``g`` sends entry ``p`` of the
    image to entry ``maps[g, p]`` of the source.

    Raises:
        SearchSpaceError: the table would exceed ``GROUP_TABLE_LIMIT`` entries.
    """
    order = group_order(shape)
    if order * math.prod(shape) > GROUP_TABLE_LIMIT:
        raise SearchSpaceError(
            f"symmetry group of shape {shape} has {order} elements; too large to tabulate"
        )
    idx = np.arange(math.prod(shape)).reshape(shape)
    transposes = shape_transposes(shape)
    maps = []
    for perms in product(*(list(permutations(range(n))) for n in shape)):
        arr = idx
        for k, p in enumerate(perms):
            arr = np.take(arr, p, axis=k)
        for s in transposes:
            maps.append(np.transpose(arr, s).ravel())
    out = np.array(maps, dtype=np.int32)
    out.setflags(write=False)
    logger.debug("built %d group elements for shape %s", len(out), shape)
    return out


@lru_cache(maxsize=32)
def symmetric_units(n: int, d: int) -> tuple[tuple[tuple[int, ...], ...], tuple[np.ndarray, ...]]:
    """Index multisets of a symmetric n^d tensor and the flat positions each one covers."""
    units = tuple(combinations_with_replacement(range(n), d))
    positions = []
    for u in units:
        perms = sorted(set(permutations(u)))
        positions.append(np.ravel_multi_index(tuple(zip(*perms)), (n,) * d))
    return units, tuple(positions)


@lru_cache(maxsize=32)
def symmetric_group_maps(n: int, d: int) -> np.ndarray:
    """Relabelings of the n indices, acting on index multisets."""
    units, _ = symmetric_units(n, d)
    index = {u: i for i, u in enumerate(units)}
    maps = [[index[tuple(sorted(sigma[i] for i in u))] for u in units] for sigma in permutations(range(n))]
    out = np.array(maps, dtype=np.int32)
    out.setflags(write=False)
    return out


def _row_keys(rows: np.ndarray):
    """Integer key of every bit row, entry ``i`` of ``N`` at bit ``N - 1 - i``."""
    N = rows.shape[1]
    if N <= INT64_KEY_BITS:
        weights = np.left_shift(np.int64(1), np.arange(N - 1, -1, -1, dtype=np.int64))
        return rows.astype(np.int64) @ weights
    packed = np.packbits(rows.astype(np.uint8), axis=1)
    pad = packed.shape[1] * 8 - N
    return np.array([int.from_bytes(r.tobytes(), "big") >> pad for r in packed], dtype=object)


class SearchSpace:
    """Zero-one tensors of one shape (optionally symmetric) with their symmetry group."""

    def __init__(self, shape: tuple[int, ...], symmetric: bool = False, canonicalize: bool = True):
        self.shape = tuple(int(n) for n in shape)
        self.symmetric = symmetric
        if symmetric:
            n, d = self.shape[0], len(self.shape)
            self.units, self._positions = symmetric_units(n, d)
            self.size = len(self.units)
            self.maps = symmetric_group_maps(n, d) if canonicalize else None
        else:
            self.size = math.prod(self.shape)
            self.maps = group_maps(self.shape) if canonicalize else None
        if self.maps is None:
            self.maps = np.arange(self.size, dtype=np.int32)[None, :]

    def bits_of(self, key: int) -> np.ndarray:
        N = self.size
        return np.fromiter(((key >> (N - 1 - i)) & 1 for i in range(N)), dtype=np.uint8, count=N)

    def key_of(self, bits: np.ndarray) -> int:
        return int(_row_keys(bits[None, :])[0])

    def orbit_keys(self, bits: np.ndarray):
        return _row_keys(bits[self.maps])

    def canonical_key(self, bits: np.ndarray) -> int:
        return int(min(self.orbit_keys(bits)))

    def tensor(self, bits: np.ndarray) -> DenseTensor:
        if not self.symmetric:
            return DenseTensor._wrap(bits.astype(np.float64).reshape(self.shape))
        flat = np.zeros(math.prod(self.shape))
        for u in np.flatnonzero(bits):
            flat[self._positions[u]] = 1.0
        return DenseTensor._wrap(flat.reshape(self.shape))

    def has_zero_slice(self, bits: np.ndarray) -> bool:
        if self.symmetric:
            used = {i for u in np.flatnonzero(bits) for i in self.units[u]}
            return len(used) < self.shape[0]
        arr = bits.reshape(self.shape)
        d = len(self.shape)
        for k in range(d):
            axes = tuple(m for m in range(d) if m != k)
            sums = arr.sum(axis=axes) if axes else arr
            if np.any(sums == 0):
                return True
        return False


def _leading_free_maps(shape: tuple[int, ...]) -> Iterator[np.ndarray]:
    """
    Blocks of flat index maps over the group elements that leave the image's
    leading slices in source order; sorting those slices afterwards covers
    the rest of the group.
    """
    idx = np.arange(math.prod(shape)).reshape(shape)
    block = []
    for s in shape_transposes(shape):
        choices = [[tuple(range(n))] if k == s[0] else permutations(range(n)) for k, n in enumerate(shape)]
        for perms in product(*choices):
            arr = idx
            for k, p in enumerate(perms):
                arr = np.take(arr, p, axis=k)
            block.append(np.transpose(arr, s).ravel())
            if len(block) == CANONICAL_BLOCK:
                yield np.array(block, dtype=np.int32)
                block = []
    if block:
        yield np.array(block, dtype=np.int32)


def canonical_key(T: DenseTensor) -> int:
    """
    Integer key of the canonical form of a zero-one tensor.

    Row-major order makes the bit string a concatenation of leading slices,
    so for every other group choice the best leading-mode permutation is the
    ascending order of those slices. The group is walked in blocks.
    """
    if not T.is_binary():
        raise NonBinaryError("canonical form is defined for zero-one tensors")
    bits = (T.data.ravel() != 0).astype(np.uint8)
    if not bits.any():
        return 0
    shape = T.shape
    lead, rest = shape[0], math.prod(shape[1:])
    best = None
    for block in _leading_free_maps(shape):
        rows = bits[block].reshape(len(block), lead, rest)
        slice_keys = _row_keys(rows.reshape(-1, rest)).reshape(len(block), lead)
        order = np.argsort(slice_keys, axis=1, kind="stable")
        ordered = np.take_along_axis(rows, order[:, :, None], axis=1).reshape(len(block), -1)
        low = min(_row_keys(ordered))
        if best is None or low < best:
            best = low
    return int(best)


def canonical_form(T: DenseTensor) -> DenseTensor:
    """
    Lexicographically smallest image of a zero-one tensor (row-major entries
    read as a bit string) under slice permutations and shape-preserving mode
    transposes.

    Raises:
        NonBinaryError: ``T`` has entries other than 0 and 1.
    """
    space = SearchSpace(T.shape, canonicalize=False)
    return space.tensor(space.bits_of(canonical_key(T)))


def _candidate_seed(seed: int, key: int) -> int:
    return int(np.random.SeedSequence([seed, key]).generate_state(1)[0])


def _candidate_ratio(space: SearchSpace, key: int, cfg: EstimatorConfig) -> float:
    T = space.tensor(space.bits_of(key))
    seeded = cfg.model_copy(update={"seed": _candidate_seed(cfg.seed, key)})
    if space.symmetric:
        estimate = spectral_norm_symmetric(T, seeded)
    else:
        estimate = spectral_norm_estimate(T, seeded)
    return estimate.value / frobenius_norm(T)


def _evaluate_chunk(job: tuple) -> list[tuple[int, float]]:
    shape, symmetric, keys, estimator = job
    cfg = EstimatorConfig.model_validate(estimator)
    space = SearchSpace(shape, symmetric, canonicalize=False)
    return [(key, _candidate_ratio(space, key, cfg)) for key in keys]


class _Tally:
    def __init__(self):
        self.explored = 0
        self.pruned = 0
        self.raw_covered = 0


def _canonical_classes(space: SearchSpace, max_ones: Optional[int], prune: bool, tally: _Tally) -> Iterator[int]:
    """Canonical keys of the nonzero orbits, by increasing number of ones."""
    N = space.size
    full = max_ones is None
    if full and N > settings.MAX_ENUMERATION_BITS:
        raise SearchSpaceError(
            f"{N} free entries exceed the {settings.MAX_ENUMERATION_BITS}-bit enumeration limit; set max_ones"
        )
    visited = np.zeros(((1 << N) + 7) // 8, dtype=np.uint8) if full else None
    seen: set[int] = set()
    for k in range(1, (N if full else min(max_ones, N)) + 1):
        for combo in combinations(range(N), k):
            if full:
                mask = sum(1 << (N - 1 - i) for i in combo)
                if visited[mask >> 3] & (1 << (mask & 7)):
                    continue
            bits = np.zeros(N, dtype=np.uint8)
            bits[list(combo)] = 1
            keys = space.orbit_keys(bits)
            if full:
                orbit = np.unique(keys)
                np.bitwise_or.at(visited, orbit >> 3, np.left_shift(1, orbit & 7).astype(np.uint8))
                canonical = int(orbit[0])
                tally.raw_covered += len(orbit)
            else:
                tally.raw_covered += 1
                canonical = int(min(keys))
                if canonical in seen:
                    continue
                seen.add(canonical)
            if prune and space.has_zero_slice(space.bits_of(canonical)):
                tally.pruned += 1
                continue
            yield canonical
        logger.info("finished tensors with %d ones: %d classes so far", k, tally.explored + tally.pruned)


def _chunks(keys: Iterator[int], size: int) -> Iterator[list[int]]:
    while True:
        chunk = list(islice(keys, size))
        if not chunk:
            return
        yield chunk


class CheckpointStore:
    """
    Search runs and per-chunk checkpoints kept in the SQL run store.

    Args:
        url: Database URL; defaults to ``settings.DATABASE_URL``.
        engine: Existing engine to use instead of ``url``.
    """

    def __init__(self, url: Optional[str] = None, engine=None):
        self.engine = engine or make_engine(url)
        init_db(self.engine)
        self._session = session_factory(self.engine)

    @staticmethod
    def _latest_run(db, config_hash: str) -> Optional[SearchRun]:
        return (
            db.query(SearchRun)
            .filter(SearchRun.config_hash == config_hash)
            .order_by(SearchRun.id.desc())
            .first()
        )

    def finished_result(self, cfg: SearchConfig) -> Optional[SearchResult]:
        with self._session() as db:
            run = self._latest_run(db, cfg.config_hash())
            if run is None or run.status != "done" or not run.result_json:
                return None
            return SearchResult.model_validate_json(run.result_json)

    def open_run(self, cfg: SearchConfig, resume: bool = False) -> int:
        """Return the id of the unfinished run to resume, or of a fresh run."""
        with self._session() as db:
            run = self._latest_run(db, cfg.config_hash()) if resume else None
            if run is not None and run.status != "done":
                logger.info("resuming search run %d", run.id)
                return run.id
            run = SearchRun(config_hash=cfg.config_hash(), config_json=cfg.model_dump_json(), status="running")
            db.add(run)
            db.commit()
            db.refresh(run)
            return run.id

    def completed_chunks(self, run_id: int) -> dict[int, list[tuple[int, float]]]:
        with self._session() as db:
            rows = db.query(SearchCheckpoint).filter(SearchCheckpoint.run_id == run_id).all()
            return {
                row.chunk_index: [(int(key), float(ratio)) for key, ratio in json.loads(row.entries_json)]
                for row in rows
            }

    def save_chunks(self, run_id: int, chunks: dict[int, list[tuple[int, float]]]) -> None:
        if not chunks:
            return
        with self._session() as db:
            for index, entries in chunks.items():
                db.add(
                    SearchCheckpoint(
                        run_id=run_id,
                        chunk_index=index,
                        entries_json=json.dumps(entries),
                        explored=len(entries),
                    )
                )
            db.commit()
        logger.info("checkpointed %d chunks of run %d", len(chunks), run_id)

    def finish(self, run_id: int, result: SearchResult) -> None:
        with self._session() as db:
            run = db.query(SearchRun).filter(SearchRun.id == run_id).first()
            run.status = "done"
            run.best_ratio = result.best_ratio
            run.explored = result.explored
            run.pruned = result.pruned
            run.result_json = result.model_dump_json()
            db.commit()


def search_min_ratio(
    cfg: SearchConfig, store: Optional[CheckpointStore] = None, resume: bool = False
) -> SearchResult:
    """
    Smallest estimated ratio over all nonzero zero-one tensors of ``cfg.shape``.

    Every canonical class is estimated with ``cfg.estimator``; classes within
    ``cfg.polish_window`` of the running minimum are re-estimated with
    ``cfg.polish_starts`` starts. Witnesses are the classes within
    ``cfg.witness_tol`` of the final minimum.

    Args:
        cfg: Search settings.
        store: Optional run store for checkpoints and the final result.
        resume: Reuse the latest run with the same configuration hash.

    Returns:
        SearchResult: Minimum ratio, canonical witnesses and counts.

    Raises:
        SearchSpaceError: Full enumeration is requested for too many entries,
            or every class was pruned.
    """
    started = time.perf_counter()
    if store is not None and resume:
        finished = store.finished_result(cfg)
        if finished is not None:
            logger.info("search for %s already finished; returning the stored result", cfg.shape)
            return finished

    space = SearchSpace(cfg.shape, cfg.symmetric, cfg.canonicalize)
    tally = _Tally()
    run_id = store.open_run(cfg, resume) if store is not None else None
    done = store.completed_chunks(run_id) if store is not None else {}
    estimator = cfg.estimator.model_dump()
    scores: dict[int, float] = {}
    unsaved: dict[int, list[tuple[int, float]]] = {}
    executor = ProcessPoolExecutor(max_workers=cfg.parallelism) if cfg.parallelism > 1 else None
    batch: list[tuple[int, list[int]]] = []

    def flush():
        jobs = [(space.shape, space.symmetric, keys, estimator) for _, keys in batch]
        outcomes = executor.map(_evaluate_chunk, jobs) if executor else map(_evaluate_chunk, jobs)
        for (index, _), entries in zip(batch, outcomes):
            scores.update(entries)
            unsaved[index] = entries
        batch.clear()
        if store is not None and len(unsaved) >= settings.CHECKPOINT_EVERY:
            store.save_chunks(run_id, unsaved)
            unsaved.clear()

    try:
        classes = _canonical_classes(space, cfg.max_ones, cfg.prune_zero_slices, tally)
        for index, keys in enumerate(_chunks(classes, cfg.chunk_size)):
            tally.explored += len(keys)
            if index in done:
                scores.update(done[index])
                continue
            batch.append((index, keys))
            if len(batch) >= 2 * cfg.parallelism:
                flush()
        if batch:
            flush()
        if store is not None:
            store.save_chunks(run_id, unsaved)
        if not scores:
            raise SearchSpaceError(f"no candidate tensors left for shape {cfg.shape}")

        polish_cfg = cfg.estimator.model_copy(update={"starts": cfg.polish_starts}).model_dump()
        polished: set[int] = set()
        while True:
            best = min(scores.values())
            near = sorted(k for k, r in scores.items() if r <= best + cfg.polish_window and k not in polished)
            if not near:
                break
            jobs = [(space.shape, space.symmetric, near[i : i + cfg.chunk_size], polish_cfg)
                    for i in range(0, len(near), cfg.chunk_size)]
            outcomes = executor.map(_evaluate_chunk, jobs) if executor else map(_evaluate_chunk, jobs)
            for entries in outcomes:
                for key, ratio in entries:
                    scores[key] = max(scores[key], ratio)
            polished.update(near)
            logger.info("polished %d candidates near %.6f", len(near), best)
    finally:
        if executor is not None:
            executor.shutdown()

    best = min(scores[k] for k in polished)
    witnesses = sorted(k for k in polished if scores[k] <= best + cfg.witness_tol)
    result = SearchResult(
        shape=space.shape,
        symmetric=cfg.symmetric,
        best_ratio=best,
        witnesses=[[list(idx) for idx in space.tensor(space.bits_of(k)).ones()] for k in witnesses],
        explored=tally.explored,
        pruned=tally.pruned,
        raw_covered=tally.raw_covered,
        complete=cfg.max_ones is None,
        max_ones=cfg.max_ones,
        seed=cfg.estimator.seed,
        wall_time=time.perf_counter() - started,
    )
    if store is not None:
        store.finish(run_id, result)
    logger.info(
        "search %s: best ratio %.6f, %d classes explored, %d pruned",
        cfg.shape, best, tally.explored, tally.pruned,
    )
    return result
