"""
Dense tensor container plus the index rearrangements and contractions
everything else is built from.

Entries are stored row-major (mode 0 most significant). Modes, slice
indices and permutation entries are 0-based.
"""

import logging
import math
from functools import lru_cache, reduce
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ..schemas.tensor import ModePartition
from .errors import (
    InvalidPartitionError,
    InvalidPermutationError,
    NonFiniteError,
    ShapeMismatchError,
)

logger = logging.getLogger(__name__)

Shape = tuple[int, ...]


class DenseTensor:
    """
    Immutable real tensor backed by a read-only float64 ``numpy`` array.

    Args:
        data: Anything ``numpy.array`` accepts (nested lists, arrays, a flat list).
        shape: Optional target shape; when given, ``data`` is read as a flat
            row-major list and reshaped.

    Raises:
        ShapeMismatchError: Entry count does not match ``shape`` or a dimension is < 1.
        NonFiniteError: Some entry is NaN or infinite.
    """

    __slots__ = ("_data",)

    def __init__(self, data, shape: Optional[Sequence[int]] = None):
        arr = np.array(data, dtype=np.float64)
        if shape is not None:
            shape = tuple(int(n) for n in shape)
            if any(n < 1 for n in shape):
                raise ShapeMismatchError(f"every dimension must be at least 1, got {shape}")
            if arr.size != math.prod(shape):
                raise ShapeMismatchError(f"{arr.size} entries cannot fill shape {shape}")
            arr = arr.reshape(shape)
        self._data = _freeze(arr)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "DenseTensor":
        # Internal constructor for arrays produced by this module; skips the copy.
        obj = cls.__new__(cls)
        obj._data = _freeze(np.ascontiguousarray(arr, dtype=np.float64))
        return obj

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "DenseTensor":
        return cls(np.zeros(tuple(shape)))

    @classmethod
    def from_indices(cls, shape: Sequence[int], indices: Iterable[Sequence[int]]) -> "DenseTensor":
        """Zero-one tensor with ones at the given 0-based multi-indices."""
        shape = tuple(int(n) for n in shape)
        arr = np.zeros(shape)
        for idx in indices:
            idx = tuple(int(i) for i in idx)
            if len(idx) != len(shape) or any(not 0 <= i < n for i, n in zip(idx, shape)):
                raise ShapeMismatchError(f"index {idx} is outside shape {shape}")
            arr[idx] = 1.0
        return cls._wrap(arr)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> Shape:
        return self._data.shape

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    def flat(self) -> list[float]:
        return self._data.ravel().tolist()

    def ones(self) -> list[tuple[int, ...]]:
        """0-based multi-indices of the nonzero entries, in row-major order."""
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self._data != 0)]

    def is_binary(self) -> bool:
        return bool(np.all((self._data == 0) | (self._data == 1)))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self._data >= 0))

    def is_zero(self) -> bool:
        return not np.any(self._data)

    def is_cubical(self) -> bool:
        return len(set(self.shape)) <= 1

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def allclose(self, other: "DenseTensor", atol: float = 1e-12) -> bool:
        return self.shape == other.shape and bool(np.allclose(self._data, other._data, rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self.shape}, nnz={int(np.count_nonzero(self._data))})"


def _freeze(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 0:
        raise ShapeMismatchError("a tensor needs at least one mode")
    if any(n < 1 for n in arr.shape):
        raise ShapeMismatchError(f"every dimension must be at least 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("tensor entries must be finite")
    arr.setflags(write=False)
    return arr


def _check_same_shape(T: DenseTensor, X: DenseTensor) -> None:
    if T.shape != X.shape:
        raise ShapeMismatchError(f"shapes differ: {T.shape} vs {X.shape}")


def _check_mode(T: DenseTensor, k: int) -> int:
    if not 0 <= k < T.order:
        raise ShapeMismatchError(f"mode {k} out of range for an order-{T.order} tensor")
    return k


def _vector(x, length: int, what: str) -> np.ndarray:
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != length:
        raise ShapeMismatchError(f"{what} must be a vector of length {length}, got shape {vec.shape}")
    return vec


def as_permutation(pi: Sequence[int], m: int) -> np.ndarray:
    """Validate a 0-based permutation of ``range(m)``."""
    perm = np.asarray(list(pi), dtype=np.int64)
    if perm.shape != (m,) or not np.array_equal(np.sort(perm), np.arange(m)):
        raise InvalidPermutationError(f"{list(pi)} is not a permutation of 0..{m - 1}")
    return perm


def _blocks(P: ModePartition, d: int) -> tuple[tuple[int, ...], ...]:
    if not P.covers(d):
        raise InvalidPartitionError(f"{P.blocks} is not a partition of modes 0..{d - 1}")
    return P.blocks


@lru_cache(maxsize=None)
def prime_factors(n: int) -> tuple[int, ...]:
    """Ascending prime factors of ``n`` with multiplicity; empty for ``n == 1``."""
    factors = []
    p = 2
    while p * p <= n:
        while n % p == 0:
            factors.append(p)
            n //= p
        p += 1
    if n > 1:
        factors.append(n)
    return tuple(factors)


def frobenius_norm_sq(T: DenseTensor) -> Union[int, float]:
    """Squared Frobenius norm; an exact ``int`` for zero-one tensors."""
    if T.is_binary():
        return int(np.count_nonzero(T.data))
    return float(np.vdot(T.data, T.data))


def frobenius_norm(T: DenseTensor) -> float:
    return math.sqrt(frobenius_norm_sq(T))


def inner_product(T: DenseTensor, X: DenseTensor) -> float:
    _check_same_shape(T, X)
    return float(np.vdot(T.data, X.data))


def outer_product(vectors: Sequence) -> DenseTensor:
    """Rank-one tensor x0 ⊗ x1 ⊗ ... from a nonempty list of nonempty vectors."""
    if not vectors:
        raise ShapeMismatchError("outer product needs at least one vector")
    arrays = []
    for x in vectors:
        vec = np.asarray(x, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ShapeMismatchError("outer product factors must be nonempty vectors")
        arrays.append(vec)
    return DenseTensor._wrap(reduce(np.multiply.outer, arrays))


def mode_contract(T: DenseTensor, k: int, x) -> DenseTensor:
    """Contract mode ``k`` with ``x``: the sum of the mode-k slices weighted by ``x``."""
    _check_mode(T, k)
    if T.order < 2:
        raise ShapeMismatchError("contracting a vector leaves a scalar; use inner_product")
    vec = _vector(x, T.shape[k], f"mode-{k} vector")
    return DenseTensor._wrap(np.tensordot(T.data, vec, axes=([k], [0])))


def mode_slice(T: DenseTensor, k: int, i: int) -> DenseTensor:
    _check_mode(T, k)
    if T.order < 2:
        raise ShapeMismatchError("a vector has no lower-order slices")
    if not 0 <= i < T.shape[k]:
        raise ShapeMismatchError(f"slice index {i} out of range for mode {k} of size {T.shape[k]}")
    return DenseTensor._wrap(np.take(T.data, i, axis=k))


def slice_permute(T: DenseTensor, k: int, pi: Sequence[int]) -> DenseTensor:
    """Reorder the mode-k slices: slice ``i`` of the result is slice ``pi[i]`` of ``T``."""
    _check_mode(T, k)
    perm = as_permutation(pi, T.shape[k])
    return DenseTensor._wrap(np.take(T.data, perm, axis=k))


def mode_transpose(T: DenseTensor, pi: Sequence[int]) -> DenseTensor:
    """Permute the modes: mode ``m`` of the result is mode ``pi[m]`` of ``T``."""
    perm = as_permutation(pi, T.order)
    return DenseTensor._wrap(np.transpose(T.data, perm))


def unfold(T: DenseTensor, P: ModePartition) -> DenseTensor:
    """
    Merge the modes of every block into one mode.

    Within a block the original modes keep ascending order and are combined
    row-major; the blocks appear in the order given.

    Raises:
        InvalidPartitionError: ``P`` is not a partition of ``T``'s modes.
    """
    blocks = _blocks(P, T.order)
    axes = [m for block in blocks for m in block]
    dims = [math.prod(T.shape[m] for m in block) for block in blocks]
    return DenseTensor._wrap(np.transpose(T.data, axes).reshape(dims))


def fold(M: DenseTensor, target_shape: Sequence[int], P: ModePartition) -> DenseTensor:
    """Exact inverse of :func:`unfold`: ``unfold(fold(M, shape, P), P) == M``."""
    target_shape = tuple(int(n) for n in target_shape)
    blocks = _blocks(P, len(target_shape))
    expected = tuple(math.prod(target_shape[m] for m in block) for block in blocks)
    if M.shape != expected:
        raise ShapeMismatchError(
            f"cannot fold shape {M.shape} into {target_shape}: blocks need {expected}"
        )
    axes = [m for block in blocks for m in block]
    grouped = M.data.reshape([target_shape[m] for m in axes])
    return DenseTensor._wrap(np.transpose(grouped, np.argsort(axes)))


def matricize(T: DenseTensor, k: int) -> DenseTensor:
    """Mode-k matricization: rows indexed by mode ``k``, columns by the rest."""
    if T.order < 2:
        raise ShapeMismatchError("matricization needs order at least 2")
    _check_mode(T, k)
    rest = tuple(m for m in range(T.order) if m != k)
    return unfold(T, ModePartition(blocks=((k,), rest)))


def standard_matricize(T: DenseTensor) -> DenseTensor:
    """Unfold an even-order tensor by its first and second half of modes."""
    if T.order % 2 or T.order == 0:
        raise ShapeMismatchError("standard matricization needs an even order")
    s = T.order // 2
    return unfold(T, ModePartition(blocks=(tuple(range(s)), tuple(range(s, 2 * s)))))


def vectorize(T: DenseTensor) -> DenseTensor:
    return unfold(T, ModePartition(blocks=(tuple(range(T.order)),)))


def max_fold_shape(shape: Sequence[int]) -> Shape:
    out = []
    for n in shape:
        out.extend(prime_factors(int(n)) or (1,))
    return tuple(out)


def max_fold(T: DenseTensor) -> DenseTensor:
    """Split every mode into its ascending prime factors (row-major)."""
    return DenseTensor._wrap(T.data.reshape(max_fold_shape(T.shape)))


def multilinear_eval(T: DenseTensor, xs: Sequence) -> float:
    """Value of the multilinear form ``T(x0, ..., x_{d-1})``."""
    if len(xs) != T.order:
        raise ShapeMismatchError(f"need {T.order} vectors, got {len(xs)}")
    vecs = [_vector(x, n, f"mode-{k} vector") for k, (x, n) in enumerate(zip(xs, T.shape))]
    res = T.data
    for vec in reversed(vecs):
        res = res @ vec
    return float(res)


def mode_kron(A: DenseTensor, B: DenseTensor) -> DenseTensor:
    """
    Mode-wise Kronecker product of two tensors of the same order.

    Entry ``(i_k * m_k + j_k)_k`` equals ``A[i] * B[j]``, so the result has
    shape ``(n_k * m_k)_k``.
    """
    if A.order != B.order:
        raise ShapeMismatchError(f"orders differ: {A.order} vs {B.order}")
    d = A.order
    outer = np.multiply.outer(A.data, B.data)
    interleaved = [ax for k in range(d) for ax in (k, d + k)]
    dims = [a * b for a, b in zip(A.shape, B.shape)]
    return DenseTensor._wrap(np.transpose(outer, interleaved).reshape(dims))


def kron_power(T: DenseTensor, m: int) -> DenseTensor:
    """m-fold mode-wise Kronecker power, shape ``(n_k ** m)_k``."""
    if m < 1:
        raise ShapeMismatchError(f"Kronecker power needs m >= 1, got {m}")
    return reduce(mode_kron, [T] * m)


def is_symmetric(T: DenseTensor, atol: float = 1e-12) -> bool:
    """True when ``T`` is cubical and invariant under every mode transpose."""
    if not T.is_cubical():
        return False
    d = T.order
    for k in range(d - 1):
        swapped = np.swapaxes(T.data, k, k + 1)
        if not np.allclose(swapped, T.data, rtol=0.0, atol=atol):
            return False
    return True
