"""
Spectral norm estimation and certified upper bounds.

The estimator runs alternating rank-one maximization from several starts
and reports the best value found, which is a lower bound on the spectral
norm. The upper bound comes from norms of unfoldings, or exactly 1 when the
tensor is recognised as an unfolded permutation tensor.
"""

import logging
import math
from itertools import chain, combinations
from typing import Optional

import numpy as np

from ..schemas.spectral import EstimatorConfig, SpectralEstimate
from ..schemas.tensor import ModePartition
from .constructions import (
    build_partition,
    is_permutation_matrix,
    iter_pairing_partitions,
    uit_condition,
)
from .errors import (
    ConditionError,
    NegativeEntriesError,
    NotSymmetricError,
    ShapeMismatchError,
    ZeroTensorError,
)
from .tensor import (
    DenseTensor,
    fold,
    frobenius_norm,
    inner_product,
    is_symmetric,
    matricize,
    max_fold_shape,
    standard_matricize,
    unfold,
)

logger = logging.getLogger(__name__)

# Orders up to this size get every two-block unfolding in the upper bound.
BIPARTITION_MAX_ORDER = 8
# Cap on the partitions tried when recognising an unfolded permutation tensor.
PAIRING_PARTITION_LIMIT = 2048
VANISHING_EPS = 1e-14
TIE_RTOL = 1e-12


class _Vanished(Exception):
    pass


def matrix_spectral_norm(M: DenseTensor) -> float:
    """Largest singular value from the top eigenvalue of the smaller Gram matrix."""
    if M.order != 2:
        raise ShapeMismatchError(f"matrix spectral norm needs an order-2 tensor, got order {M.order}")
    A = M.data
    if M.is_binary() and np.any(A):
        if np.all(A.sum(axis=0) <= 1) and np.all(A.sum(axis=1) <= 1):
            return 1.0
    gram = A @ A.T if A.shape[0] <= A.shape[1] else A.T @ A
    top = float(np.linalg.eigvalsh(gram)[-1])
    return math.sqrt(max(top, 0.0))


def _two_block_unfoldings(T: DenseTensor):
    d = T.order
    if d <= BIPARTITION_MAX_ORDER:
        for size in range(1, d):
            for rows in combinations(range(d), size):
                if rows[0] != 0:
                    continue
                cols = tuple(m for m in range(d) if m not in rows)
                yield f"unfolding {rows}|{cols}", unfold(T, ModePartition(blocks=(rows, cols)))
        return
    for k in range(d):
        yield f"mode-{k} matricization", matricize(T, k)
    if d % 2 == 0:
        yield "standard matricization", standard_matricize(T)


def _is_unfolded_permutation(T: DenseTensor) -> bool:
    """Whether T folds back, through a pairing partition, into a folded permutation matrix."""
    if T.order < 2 or any(n < 2 for n in T.shape) or not T.is_binary():
        return False
    if not uit_condition(T.shape):
        return False
    n = math.isqrt(T.size)
    if int(np.count_nonzero(T.data)) != n:
        return False
    doubled = max_fold_shape((n, n))
    try:
        greedy = (build_partition(T.shape),)
    except ConditionError:
        greedy = ()
    candidates = chain(greedy, iter_pairing_partitions(T.shape, limit=PAIRING_PARTITION_LIMIT))
    for partition in candidates:
        folded = fold(T, doubled, partition)
        if is_permutation_matrix(standard_matricize(folded)):
            return True
    return False


def certified_upper_bound(T: DenseTensor) -> tuple[float, str]:
    """Upper bound on the spectral norm together with the route that produced it."""
    if T.is_zero():
        return 0.0, "zero tensor"
    if T.order == 1:
        return frobenius_norm(T), "vector"
    if T.order == 2:
        return matrix_spectral_norm(T), "matrix"
    if _is_unfolded_permutation(T):
        return 1.0, "unfolded permutation tensor"
    best, route = frobenius_norm(T), "frobenius"
    for name, M in _two_block_unfoldings(T):
        value = matrix_spectral_norm(M)
        if value < best:
            best, route = value, name
    return best, route


def spectral_upper_bound(T: DenseTensor) -> float:
    return certified_upper_bound(T)[0]


def uniform_contraction_value(T: DenseTensor) -> float:
    """Multilinear value at the normalized all-ones vectors: sum of entries over sqrt(size)."""
    if not T.is_nonnegative():
        raise NegativeEntriesError("uniform contraction value needs a nonnegative tensor")
    return float(T.data.sum()) / math.sqrt(T.size)


def _contract_except(data: np.ndarray, xs: list[np.ndarray], k: int) -> np.ndarray:
    res = data
    for m in range(len(xs) - 1, -1, -1):
        if m != k:
            res = np.tensordot(res, xs[m], axes=([m], [0]))
    return res


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm <= VANISHING_EPS:
        raise _Vanished
    return v / norm


def _random_start(shape, rng: np.random.Generator, nonnegative: bool) -> list[np.ndarray]:
    xs = []
    for n in shape:
        x = rng.standard_normal(n)
        xs.append(_unit(np.abs(x) if nonnegative else x))
    return xs


def _singular_start(T: DenseTensor) -> list[np.ndarray]:
    # top left singular vector of every mode-k matricization
    xs = []
    for k in range(T.order):
        M = matricize(T, k).data
        _, vecs = np.linalg.eigh(M @ M.T)
        xs.append(_unit(vecs[:, -1]))
    return xs


def _alternate(data: np.ndarray, xs: list[np.ndarray], cfg: EstimatorConfig, scale: float):
    """Alternating maximization from ``xs``; returns (value, xs, history, converged)."""
    d = len(xs)
    xs = [x.copy() for x in xs]
    history: list[float] = []
    value = -math.inf
    for _ in range(cfg.max_iters):
        for k in range(d):
            g = _contract_except(data, xs, k)
            norm = float(np.linalg.norm(g))
            if norm <= VANISHING_EPS * scale:
                raise _Vanished
            xs[k] = g / norm
        new_value = norm
        history.append(new_value)
        if abs(new_value - value) <= cfg.tol * max(abs(new_value), VANISHING_EPS):
            return new_value, xs, history, True
        value = new_value
    return value, xs, history, False


def _shifted_symmetric(data: np.ndarray, x: np.ndarray, cfg: EstimatorConfig, shift: float, scale: float):
    """Shifted symmetric power iteration maximizing T(x, ..., x) on the unit sphere."""
    d = data.ndim
    history: list[float] = []
    value = -math.inf
    for _ in range(cfg.max_iters):
        g = _contract_except(data, [x] * d, 0)
        step = g + shift * x
        norm = float(np.linalg.norm(step))
        if norm <= VANISHING_EPS * scale:
            raise _Vanished
        x = step / norm
        new_value = float(_contract_except(data, [x] * d, 0) @ x)
        history.append(new_value)
        if abs(new_value - value) <= cfg.tol * max(abs(new_value), VANISHING_EPS):
            return new_value, x, history, True
        value = new_value
    return value, x, history, False


def _canonical_signs(xs: list[np.ndarray]) -> list[np.ndarray]:
    # flip pairs of vectors so that every vector but the last leads with a positive entry
    xs = [x.copy() for x in xs]
    for k in range(len(xs) - 1):
        nz = np.flatnonzero(np.abs(xs[k]) > 1e-12)
        if nz.size and xs[k][nz[0]] < 0:
            xs[k] = -xs[k]
            xs[-1] = -xs[-1]
    return xs


def _better(candidate: tuple, incumbent: Optional[tuple]) -> bool:
    if incumbent is None:
        return True
    value, witness = candidate[0], np.concatenate(candidate[1])
    best, best_witness = incumbent[0], np.concatenate(incumbent[1])
    if value > best * (1 + TIE_RTOL) + TIE_RTOL:
        return True
    if best > value * (1 + TIE_RTOL) + TIE_RTOL:
        return False
    return tuple(witness.round(12)) < tuple(best_witness.round(12))


def _resolve_nonnegative(T: DenseTensor, cfg: EstimatorConfig) -> bool:
    return T.is_nonnegative() if cfg.nonnegative_mode is None else cfg.nonnegative_mode


def spectral_norm_estimate(T: DenseTensor, cfg: EstimatorConfig) -> SpectralEstimate:
    """
    Multi-start alternating rank-one maximization.

    Every start sweeps through the modes, replacing ``x_k`` by the
    normalized contraction of ``T`` with all other vectors, until the value
    stops changing by more than ``cfg.tol`` (relative). Starts are the
    normalized all-ones vectors, the top singular vectors of every
    matricization, and ``cfg.starts`` random draws; the random stream of draw
    ``i`` is seeded by ``(cfg.seed, i)``.

    Args:
        T: Nonzero tensor.
        cfg: Estimator settings.

    Returns:
        SpectralEstimate: Best value with witnesses and a certified upper bound.

    Raises:
        ZeroTensorError: ``T`` is the zero tensor.
    """
    if T.is_zero():
        raise ZeroTensorError("spectral norm estimate needs a nonzero tensor")
    data = T.data
    scale = float(np.abs(data).max())
    nonnegative = _resolve_nonnegative(T, cfg)

    structured = [[_unit(np.ones(n)) for n in T.shape]]
    if T.order >= 2:
        try:
            structured.append(_singular_start(T))
        except _Vanished:
            pass

    best = None
    starts_used = 0
    for xs in structured:
        starts_used += 1
        try:
            run = _alternate(data, xs, cfg, scale)
        except _Vanished:
            logger.debug("structured start vanished for shape %s", T.shape)
            continue
        if _better((run[0], _canonical_signs(run[1])), best and best[:2]):
            best = (run[0], _canonical_signs(run[1]), run[2], run[3])

    for i in range(cfg.starts):
        starts_used += 1
        rng = np.random.default_rng([cfg.seed, i])
        try:
            run = _alternate(data, _random_start(T.shape, rng, nonnegative), cfg, scale)
        except _Vanished:
            logger.info("contraction vanished on start %d for shape %s; start skipped", i, T.shape)
            continue
        witnesses = _canonical_signs(run[1])
        if _better((run[0], witnesses), best and best[:2]):
            best = (run[0], witnesses, run[2], run[3])

    if best is None:
        raise ZeroTensorError(f"every start vanished for shape {T.shape}")
    upper, route = certified_upper_bound(T)
    value, witnesses, history, converged = best
    logger.debug("estimate %.12g (upper %.12g via %s) for shape %s", value, upper, route, T.shape)
    return SpectralEstimate(
        value=float(value),
        witnesses=[w.tolist() for w in witnesses],
        certified_upper=upper,
        certificate=route,
        converged=converged,
        starts_used=starts_used,
        history=history,
    )


def spectral_norm_symmetric(T: DenseTensor, cfg: EstimatorConfig) -> SpectralEstimate:
    """
    Maximize ``|T(x, ..., x)|`` over unit ``x`` for a symmetric tensor.

    Uses shifted symmetric power iteration with shift ``(d - 1)`` times the
    certified upper bound, which keeps every trajectory monotone. Even
    orders are also run on ``-T`` so the most negative value is found too.

    Raises:
        ZeroTensorError: ``T`` is the zero tensor.
        NotSymmetricError: ``T`` is not symmetric.
    """
    if T.is_zero():
        raise ZeroTensorError("spectral norm estimate needs a nonzero tensor")
    scale = float(np.abs(T.data).max())
    if not is_symmetric(T, atol=1e-12 * scale):
        raise NotSymmetricError(f"tensor of shape {T.shape} is not symmetric")
    d, n = T.order, T.shape[0]
    upper, route = certified_upper_bound(T)
    shift = (d - 1) * upper
    nonnegative = _resolve_nonnegative(T, cfg)
    signs = (1.0, -1.0) if d % 2 == 0 else (1.0,)

    structured = [_unit(np.ones(n))]
    if d >= 2:
        try:
            structured.append(_singular_start(T)[0])
        except _Vanished:
            pass

    best = None
    starts_used = 0
    for sign in signs:
        data = sign * T.data
        for i, x0 in enumerate(structured + [None] * cfg.starts):
            starts_used += 1
            if x0 is None:
                rng = np.random.default_rng([cfg.seed, i - len(structured)])
                x0 = _random_start((n,), rng, nonnegative and sign > 0)[0]
            try:
                value, x, history, converged = _shifted_symmetric(data, x0, cfg, shift, scale)
            except _Vanished:
                logger.info("symmetric iteration vanished on start %d for shape %s; start skipped", i, T.shape)
                continue
            if d % 2 == 0 and x[np.flatnonzero(np.abs(x) > 1e-12)[0]] < 0:
                x = -x
            witnesses = [x] * d
            if _better((value, witnesses), best and best[:2]):
                best = (value, witnesses, history, converged)

    if best is None:
        raise ZeroTensorError(f"every start vanished for shape {T.shape}")
    value, witnesses, history, converged = best
    return SpectralEstimate(
        value=abs(float(value)),
        witnesses=[w.tolist() for w in witnesses],
        certified_upper=upper,
        certificate=route,
        converged=converged,
        starts_used=starts_used,
        history=history,
    )


def ratio(T: DenseTensor, cfg: EstimatorConfig) -> float:
    """Estimated spectral norm over Frobenius norm."""
    return spectral_norm_estimate(T, cfg).value / frobenius_norm(T)


def symmetric_ratio(T: DenseTensor, cfg: EstimatorConfig) -> float:
    return spectral_norm_symmetric(T, cfg).value / frobenius_norm(T)


def nuclear_lower_bound(T: DenseTensor, X: DenseTensor, cfg: Optional[EstimatorConfig] = None) -> float:
    """
    Duality lower bound ``|<T, X>| / upper(X)`` on the nuclear norm of ``T``.

    ``cfg`` is accepted for call-site symmetry with the estimators and is
    not used: only the certified upper bound of ``X`` enters.

    Raises:
        ShapeMismatchError: ``T`` and ``X`` differ in shape.
        ZeroTensorError: ``X`` is the zero tensor.
    """
    if X.is_zero():
        raise ZeroTensorError("nuclear lower bound needs a nonzero test tensor")
    return abs(inner_product(T, X)) / spectral_upper_bound(X)
