from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

BOUND_SLACK = 1e-12


class NumberField(str, Enum):
    COMPLEX = "complex"
    REAL = "real"
    NONNEG = "nonneg"
    BINARY = "binary"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.lower() in ("nonnegative", "nonneg", "r+"):
            return cls.NONNEG
        return None

    @property
    def is_nonnegative(self) -> bool:
        return self in (NumberField.NONNEG, NumberField.BINARY)


class SpaceSpec(BaseModel):
    shape: tuple[int, ...] = Field(..., min_length=1, description="Dimensions n_1..n_d")
    field: NumberField = NumberField.NONNEG
    symmetric: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("shape")
    @classmethod
    def dims_at_least_two(cls, v):
        if any(n < 2 for n in v):
            raise ValueError(f"every dimension must be at least 2, got {v}")
        return v

    @model_validator(mode="after")
    def symmetric_needs_cube(self):
        if self.symmetric and len(set(self.shape)) != 1:
            raise ValueError(f"symmetric spaces need equal dimensions, got {self.shape}")
        return self

    @property
    def order(self) -> int:
        return len(self.shape)


class FormulaTerm(BaseModel):
    name: str = Field(..., description="Short identifier of the bound")
    role: Literal["lower", "upper", "exact"]
    value: float
    note: str = Field("", description="Where the bound comes from, in words")


class BoundReport(BaseModel):
    quantity: Literal["phi", "psi"]
    space: SpaceSpec
    lower: float
    upper: float
    exact: Optional[float] = None
    formulas: List[FormulaTerm] = Field(default_factory=list)
    conjectural: bool = Field(False, description="Values rely on the zero-one/nonnegative equality conjecture")

    @model_validator(mode="after")
    def bounds_are_ordered(self):
        if self.lower > self.upper + BOUND_SLACK:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.exact is not None and not (
            self.lower - BOUND_SLACK <= self.exact <= self.upper + BOUND_SLACK
        ):
            raise ValueError(f"exact value {self.exact} outside [{self.lower}, {self.upper}]")
        return self

    def terms(self, role: str) -> List[FormulaTerm]:
        return [f for f in self.formulas if f.role == role]

    def term(self, name: str) -> Optional[FormulaTerm]:
        return next((f for f in self.formulas if f.name == name), None)


class OrderGapReport(BaseModel):
    shape: tuple[int, ...]
    phi_order: float = Field(..., description="Order of the spectral/Frobenius extreme ratio")
    psi_order: float = Field(..., description="Order of the Frobenius/nuclear extreme ratio")
    tall: bool
    collapsed: bool = Field(..., description="Both ratios share one closed form")


class MonoCheckReport(BaseModel):
    smaller: tuple[int, ...]
    larger: tuple[int, ...]
    field: NumberField
    smaller_upper: float
    larger_lower: float
    consistent: bool
    violations: List[str] = Field(default_factory=list)
