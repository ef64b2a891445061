"""
Builders for the extremal tensors: identity tensors, unfolded identity and
permutation tensors, tall extremes, symmetric embeddings and
symmetrizations, plus the structural checks that go with them.
"""

import logging
import math
import string
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterator, Optional, Sequence

import numpy as np

from ..schemas.constructions import EvenlyReport, PrimeFactorization, UitSpec
from ..schemas.tensor import ModePartition
from .errors import (
    ConditionError,
    InvalidPartitionError,
    NegativeEntriesError,
    NonBinaryError,
    ShapeMismatchError,
)
from .tensor import (
    DenseTensor,
    as_permutation,
    fold,
    kron_power,
    max_fold,
    mode_kron,
    prime_factors,
    unfold,
)

logger = logging.getLogger(__name__)

__all__ = [
    "build_partition",
    "build_uit",
    "build_upt",
    "compression_power",
    "embedding_frobenius_sq",
    "evenly_check",
    "identity_tensor",
    "is_permutation_matrix",
    "is_permutation_unfolding",
    "iter_pairing_partitions",
    "mode_kron",
    "pairwise_contraction",
    "permutation_matrix",
    "prime_factorize",
    "respects_pairing",
    "symmetric_embed",
    "symmetrize",
    "tall_extreme",
    "uit_condition",
]


def prime_factorize(n: int) -> PrimeFactorization:
    if n < 2:
        raise ConditionError(f"prime factorization needs n >= 2, got {n}")
    return PrimeFactorization(n=n, primes=list(prime_factors(n)))


def uit_condition(shape: Sequence[int]) -> bool:
    """True iff sqrt(prod(shape)) is an integer divisible by every dimension."""
    total = math.prod(shape)
    root = math.isqrt(total)
    return root * root == total and all(root % n == 0 for n in shape)


def identity_tensor(n: int) -> DenseTensor:
    """The maximum folding of the n×n identity matrix."""
    if n < 2:
        raise ConditionError(f"identity tensor needs n >= 2, got {n}")
    return max_fold(DenseTensor._wrap(np.eye(n)))


def permutation_matrix(pi: Sequence[int]) -> DenseTensor:
    """Matrix with ones at ``(i, pi[i])``."""
    perm = as_permutation(pi, len(pi))
    M = np.zeros((len(perm), len(perm)))
    M[np.arange(len(perm)), perm] = 1.0
    return DenseTensor._wrap(M)


def respects_pairing(partition: ModePartition, s: int) -> bool:
    """No block holds both row mode ``j`` and its column partner ``s + j``."""
    for block in partition.blocks:
        members = set(block)
        if any(j in members and j + s in members for j in range(s)):
            return False
    return True


def build_partition(shape: Sequence[int]) -> ModePartition:
    """
    Split the 2s prime modes of the nth identity tensor into one block per
    dimension, each block multiplying to its dimension.

    Positions are scanned in increasing order and every prime factor of a
    dimension takes the smallest free position carrying that prime.

    Raises:
        ConditionError: ``shape`` fails :func:`uit_condition`.
    """
    shape = tuple(int(n) for n in shape)
    if any(n < 2 for n in shape) or not uit_condition(shape):
        raise ConditionError(f"shape {shape} does not meet the identity-tensor condition")
    n = math.isqrt(math.prod(shape))
    primes = prime_factors(n)
    s = len(primes)
    position_primes = primes + primes
    used: set[int] = set()
    blocks = []
    for dim in shape:
        block: list[int] = []
        for p in prime_factors(dim):
            for j in range(2 * s):
                partner = j - s if j >= s else j + s
                if j not in used and position_primes[j] == p and partner not in block:
                    used.add(j)
                    block.append(j)
                    break
            else:
                raise ConditionError(f"no free position for prime {p} of dimension {dim}")
        blocks.append(tuple(block))
    partition = ModePartition(blocks=tuple(blocks))
    if not (partition.covers(2 * s) and respects_pairing(partition, s)):
        raise ConditionError(f"greedy partition {partition.blocks} for {shape} breaks the pairing rule")
    return partition


def iter_pairing_partitions(shape: Sequence[int], limit: Optional[int] = None) -> Iterator[ModePartition]:
    """
    Every partition of the doubled prime modes into blocks whose primes
    multiply to the dimensions of ``shape`` and that respect the pairing rule.
    Nothing is yielded when ``shape`` fails :func:`uit_condition`.
    """
    shape = tuple(int(n) for n in shape)
    if any(n < 2 for n in shape) or not uit_condition(shape):
        return
    primes = prime_factors(math.isqrt(math.prod(shape)))
    s = len(primes)
    position_primes = primes + primes
    yielded = 0

    def extend(k: int, free: frozenset, blocks: tuple):
        if k == len(shape):
            yield ModePartition(blocks=blocks)
            return
        need = prime_factors(shape[k])
        for cand in combinations(sorted(free), len(need)):
            if sorted(position_primes[j] for j in cand) != list(need):
                continue
            if any(j + s in cand for j in cand if j < s):
                continue
            yield from extend(k + 1, free - set(cand), blocks + (cand,))

    for partition in extend(0, frozenset(range(2 * s)), ()):
        yield partition
        yielded += 1
        if limit is not None and yielded >= limit:
            return


def build_upt(n: int, pi: Sequence[int], partition: ModePartition) -> DenseTensor:
    """
    Unfolded permutation tensor: the maximum folding of the permutation
    matrix of ``pi`` unfolded by ``partition``.

    Raises:
        InvalidPermutationError: ``pi`` is not a permutation of ``range(n)``.
        InvalidPartitionError: ``partition`` does not cover the 2s prime modes
            or merges a paired row and column mode.
    """
    if len(pi) != n:
        as_permutation(pi, n)
    try:
        spec = UitSpec(n=n, partition=partition)
    except ValueError as exc:
        raise InvalidPartitionError(f"invalid partition {partition.blocks} for n={n}: {exc}")
    folded = max_fold(permutation_matrix(pi))
    return unfold(folded, spec.partition)


def build_uit(shape: Sequence[int]) -> DenseTensor:
    """Unfolded identity tensor of the given shape."""
    partition = build_partition(shape)
    n = math.isqrt(math.prod(shape))
    return build_upt(n, list(range(n)), partition)


def tall_extreme(shape: Sequence[int], j: int, pi: Sequence[int]) -> DenseTensor:
    """
    Zero-one tensor whose mode-j matricization is the first ``prod(others)``
    columns of the permutation matrix of ``pi``.

    Raises:
        ConditionError: ``shape[j]`` is smaller than the product of the others.
    """
    shape = tuple(int(n) for n in shape)
    if len(shape) < 2:
        raise ShapeMismatchError("tall extremes need order at least 2")
    if not 0 <= j < len(shape):
        raise ShapeMismatchError(f"mode {j} out of range for shape {shape}")
    rest = tuple(m for m in range(len(shape)) if m != j)
    cols = math.prod(shape[m] for m in rest)
    if shape[j] < cols:
        raise ConditionError(f"shape {shape} is not tall in mode {j}: {shape[j]} < {cols}")
    P = permutation_matrix(pi)
    if P.shape[0] != shape[j]:
        raise ShapeMismatchError(f"permutation of length {P.shape[0]} does not match dimension {shape[j]}")
    M = DenseTensor._wrap(P.data[:, :cols])
    return fold(M, shape, ModePartition(blocks=((j,), rest)))


def _scaled_embedding(T: DenseTensor) -> np.ndarray:
    # d! times the symmetric embedding: block pi holds a plain copy of T^pi
    d = T.order
    offsets = np.concatenate(([0], np.cumsum(T.shape)))
    total = int(offsets[-1])
    Z = np.zeros((total,) * d)
    for pi in permutations(range(d)):
        index = tuple(slice(offsets[m], offsets[m] + T.shape[m]) for m in pi)
        Z[index] = np.transpose(T.data, pi)
    return Z


def symmetric_embed(T: DenseTensor) -> DenseTensor:
    """
    The symmetric tensor of shape ``(sum(n),) * d`` whose homogeneous form on
    stacked variables equals the multilinear form of ``T``.
    """
    if T.order < 2:
        raise ShapeMismatchError("symmetric embedding needs order at least 2")
    return DenseTensor._wrap(_scaled_embedding(T) / math.factorial(T.order))


def embedding_frobenius_sq(T: DenseTensor) -> Fraction:
    """Exact squared Frobenius norm of :func:`symmetric_embed` as a fraction."""
    if T.order < 2:
        raise ShapeMismatchError("symmetric embedding needs order at least 2")
    scaled = _scaled_embedding(T)
    total = sum((Fraction(float(v)) ** 2 for v in scaled[scaled != 0]), Fraction(0))
    return total / math.factorial(T.order) ** 2


def symmetrize(T: DenseTensor) -> DenseTensor:
    """Sum of all d! mode transposes of a cubical tensor."""
    if not T.is_cubical():
        raise ShapeMismatchError(f"symmetrization needs equal dimensions, got {T.shape}")
    acc = np.zeros(T.shape)
    for pi in permutations(range(T.order)):
        acc += np.transpose(T.data, pi)
    return DenseTensor._wrap(acc)


def compression_power(T: DenseTensor, m: int) -> DenseTensor:
    return kron_power(T, m)


def evenly_check(T: DenseTensor) -> EvenlyReport:
    """Necessary conditions for a nonnegative tensor to attain the main lower bound."""
    if not T.is_nonnegative():
        raise NegativeEntriesError("evenly check needs a nonnegative tensor")
    total = math.prod(T.shape)
    root = math.isqrt(total)
    expected = root if root * root == total else None
    ones = float(T.data.sum())
    slice_sums, per_slice = [], []
    slices_ok = expected is not None
    for k, n in enumerate(T.shape):
        axes = tuple(m for m in range(T.order) if m != k)
        sums = T.data.sum(axis=axes) if axes else T.data.copy()
        slice_sums.append([float(v) for v in sums])
        target = expected / n if expected is not None and expected % n == 0 else None
        per_slice.append(target)
        slices_ok = slices_ok and target is not None and bool(np.all(sums == target))
    binary = T.is_binary()
    ones_ok = expected is not None and ones == expected
    return EvenlyReport(
        shape=list(T.shape),
        is_binary=binary,
        ones=ones,
        expected_ones=expected,
        slice_sums=slice_sums,
        expected_per_slice=per_slice,
        ones_ok=ones_ok,
        slices_ok=slices_ok,
        passed=binary and ones_ok and slices_ok,
    )


def is_permutation_matrix(M: DenseTensor) -> bool:
    if M.order != 2 or M.shape[0] != M.shape[1] or not M.is_binary():
        return False
    return bool(np.all(M.data.sum(axis=0) == 1) and np.all(M.data.sum(axis=1) == 1))


def is_permutation_unfolding(T: DenseTensor) -> bool:
    """
    True iff some two-block unfolding of an even-order zero-one tensor is a
    permutation matrix. Orderings inside a block only permute rows or
    columns, so only the split of the modes matters.

    Raises:
        NonBinaryError: ``T`` has entries other than 0 and 1.
        ShapeMismatchError: ``T`` has odd order.
    """
    if not T.is_binary():
        raise NonBinaryError("permutation unfolding check needs a zero-one tensor")
    if T.order % 2:
        raise ShapeMismatchError(f"permutation unfolding check needs even order, got {T.order}")
    total = T.size
    n = math.isqrt(total)
    if n * n != total or int(np.count_nonzero(T.data)) != n:
        return False
    d = T.order
    for size in range(1, d // 2 + 1):
        for rows in combinations(range(d), size):
            if rows[0] != 0:
                continue
            if math.prod(T.shape[m] for m in rows) != n:
                continue
            cols = tuple(m for m in range(d) if m not in rows)
            if is_permutation_matrix(unfold(T, ModePartition(blocks=(rows, cols)))):
                return True
    return False


def pairwise_contraction(tensors: Sequence[DenseTensor], index_sets: Sequence[Sequence[int]]) -> float:
    """
    Sum over all index labels of the product of entries, where ``index_sets[k]``
    labels the modes of ``tensors[k]`` and every label occurs in exactly two
    tensors.
    """
    if len(tensors) != len(index_sets):
        raise ShapeMismatchError("need one index set per tensor")
    labels = sorted({lab for idx in index_sets for lab in idx})
    if len(labels) > len(string.ascii_letters):
        raise ShapeMismatchError("too many index labels")
    letter = {lab: string.ascii_letters[i] for i, lab in enumerate(labels)}
    dims: dict[int, int] = {}
    counts: dict[int, int] = {}
    for T, idx in zip(tensors, index_sets):
        if len(idx) != T.order:
            raise ShapeMismatchError(f"{len(idx)} labels for an order-{T.order} tensor")
        for lab, n in zip(idx, T.shape):
            if dims.setdefault(lab, n) != n:
                raise ShapeMismatchError(f"label {lab} used with dimensions {dims[lab]} and {n}")
            counts[lab] = counts.get(lab, 0) + 1
    if any(c != 2 for c in counts.values()):
        raise ShapeMismatchError("every index label must occur in exactly two tensors")
    subscripts = ",".join("".join(letter[lab] for lab in idx) for idx in index_sets) + "->"
    return float(np.einsum(subscripts, *(T.data for T in tensors)))
