import math
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ModePartition(BaseModel):
    """Ordered, pairwise disjoint blocks of 0-based mode indices."""

    blocks: tuple[tuple[int, ...], ...] = Field(..., description="Blocks of mode indices, in output order")

    model_config = ConfigDict(frozen=True)

    @field_validator("blocks", mode="before")
    @classmethod
    def normalize_blocks(cls, v):
        blocks = tuple(tuple(sorted(int(m) for m in block)) for block in v)
        seen = set()
        for block in blocks:
            if not block:
                raise ValueError("partition blocks must be nonempty")
            if block[0] < 0:
                raise ValueError("mode indices must be nonnegative")
            if seen.intersection(block) or len(set(block)) != len(block):
                raise ValueError("partition blocks must be disjoint")
            seen.update(block)
        return blocks

    @classmethod
    def of(cls, *blocks) -> "ModePartition":
        return cls(blocks=blocks)

    @property
    def order(self) -> int:
        return sum(len(block) for block in self.blocks)

    def covers(self, d: int) -> bool:
        return sorted(m for block in self.blocks for m in block) == list(range(d))


class TensorPayload(BaseModel):
    shape: List[int] = Field(..., min_length=1, description="Dimension of every mode")
    data: List[float] = Field(..., description="Entries in row-major order, mode 0 most significant")

    @field_validator("shape")
    @classmethod
    def dims_positive(cls, v):
        if any(n < 1 for n in v):
            raise ValueError("every dimension must be at least 1")
        return v

    @model_validator(mode="after")
    def data_matches_shape(self):
        if len(self.data) != math.prod(self.shape):
            raise ValueError(
                f"data has {len(self.data)} entries, shape {self.shape} needs {math.prod(self.shape)}"
            )
        return self
