import hashlib
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import settings
from .spectral import EstimatorConfig

Indices = List[List[int]]


def _search_estimator() -> EstimatorConfig:
    return EstimatorConfig.from_settings(starts=settings.SEARCH_STARTS)


class SearchConfig(BaseModel):
    shape: tuple[int, ...] = Field(..., min_length=1)
    symmetric: bool = False
    max_ones: Optional[int] = Field(None, ge=1, description="Stop after tensors with this many ones")
    estimator: EstimatorConfig = Field(default_factory=_search_estimator)
    polish_starts: int = Field(default_factory=lambda: settings.POLISH_STARTS, ge=1)
    polish_window: float = Field(1e-3, ge=0, description="Candidates this close to the best are re-estimated")
    witness_tol: float = Field(1e-6, ge=0)
    canonicalize: bool = True
    prune_zero_slices: bool = True
    parallelism: int = Field(default_factory=lambda: settings.JOBS, ge=1)
    chunk_size: int = Field(default_factory=lambda: settings.CHUNK_SIZE, ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_shape(self):
        if any(n < 1 for n in self.shape):
            raise ValueError(f"every dimension must be at least 1, got {self.shape}")
        if self.symmetric and len(set(self.shape)) != 1:
            raise ValueError(f"symmetric search needs equal dimensions, got {self.shape}")
        return self

    def config_hash(self) -> str:
        """Digest of every field that affects the result (worker count excluded)."""
        payload = self.model_dump_json(exclude={"parallelism"})
        return hashlib.sha256(payload.encode()).hexdigest()


class SearchResult(BaseModel):
    shape: tuple[int, ...]
    symmetric: bool
    best_ratio: float
    witnesses: List[Indices] = Field(..., description="0-based indices of the ones of every canonical minimizer")
    explored: int = Field(..., description="Canonical classes whose ratio was estimated")
    pruned: int = Field(..., description="Canonical classes skipped for an all-zero slice")
    raw_covered: int = Field(..., description="Raw nonzero tensors accounted for by the explored and pruned classes")
    complete: bool = Field(..., description="False when max_ones cut the enumeration short")
    max_ones: Optional[int] = None
    seed: int
    wall_time: float = 0.0


class TableRow(BaseModel):
    table: str
    label: str
    shape: tuple[int, ...]
    witness: Indices
    expected: float
    expected_form: str
    tolerance: float
    computed: float
    passed: bool
    lower_expected: float
    lower_computed: float
    lower_passed: bool


class TablesReport(BaseModel):
    rows: List[TableRow]
    passed: int
    total: int

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total


class ConjectureReport(BaseModel):
    n: int
    shape: tuple[int, ...]
    pool_size: int = Field(..., description="All zero-one tensors of the shape with n ones")
    evenly_candidates: int = Field(..., description="Tensors whose slices all carry the required number of ones")
    classes: int = Field(..., description="Canonical classes among the candidates")
    excluded: int = Field(..., description="Candidates with spectral norm provably above one")
    qualifying: int = Field(..., description="Candidates with certified spectral norm one")
    permutation_unfoldings: int
    counterexamples: List[Indices] = Field(default_factory=list)
    indeterminate: int
    vacuous: bool = Field(False, description="n is prime, so every candidate is a permutation matrix")

    @property
    def verified(self) -> bool:
        return not self.counterexamples and self.indeterminate == 0


class EmbeddingChainReport(BaseModel):
    shape: tuple[int, ...]
    ratio: float
    embedded_ratio: float
    factor: float = Field(..., description="sqrt(d! d^-d)")
    spectral: float
    embedded_spectral: float
    frobenius_identity: bool = Field(..., description="Squared norm of the embedding equals ||T||^2 / d! exactly")
    deviation: float
    passed: bool


class CompressionReport(BaseModel):
    shape: tuple[int, ...]
    m: int
    ratio: float
    power_ratio: float
    predicted: float
    deviation: float
    passed: bool


class UitCertificateRow(BaseModel):
    shape: tuple[int, ...]
    evenly: bool
    frobenius_exact: bool
    estimate: float
    certified_upper: float
    certificate: str
    passed: bool
