import math
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from ..core.tensor import prime_factors
from .tensor import ModePartition


class PrimeFactorization(BaseModel):
    n: int = Field(..., ge=2)
    primes: List[int] = Field(..., description="Ascending prime factors with multiplicity")

    @model_validator(mode="after")
    def primes_multiply_to_n(self):
        if math.prod(self.primes) != self.n or self.primes != sorted(self.primes):
            raise ValueError(f"{self.primes} is not the ascending factorization of {self.n}")
        return self

    @property
    def length(self) -> int:
        return len(self.primes)

    def doubled(self) -> List[int]:
        """Primes of the 2s modes of the nth identity tensor."""
        return self.primes + self.primes


class UitSpec(BaseModel):
    n: int = Field(..., ge=2)
    partition: ModePartition

    @model_validator(mode="after")
    def partition_respects_pairs(self):
        s = len(prime_factors(self.n))
        if not self.partition.covers(2 * s):
            raise ValueError(f"partition must cover modes 0..{2 * s - 1}")
        for block in self.partition.blocks:
            members = set(block)
            if any(j in members and j + s in members for j in range(s)):
                raise ValueError(f"block {block} merges a row mode with its paired column mode")
        return self


class EvenlyReport(BaseModel):
    shape: List[int]
    is_binary: bool
    ones: float = Field(..., description="Sum of entries")
    expected_ones: Optional[int] = Field(None, description="sqrt of the entry count, when an integer")
    slice_sums: List[List[float]] = Field(..., description="Entry sum of every mode-k slice")
    expected_per_slice: List[Optional[float]]
    ones_ok: bool
    slices_ok: bool
    passed: bool = Field(..., description="All necessary conditions for attaining the main lower bound hold")
