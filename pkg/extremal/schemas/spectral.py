from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..core.config import settings


class EstimatorConfig(BaseModel):
    starts: int = Field(..., ge=1, description="Random starts, on top of the structured ones")
    max_iters: int = Field(..., ge=1, description="Sweeps per start")
    tol: float = Field(..., gt=0, description="Stop when the relative value change drops below this")
    seed: int = Field(0, ge=0, description="Seed for the per-start random streams")
    nonnegative_mode: Optional[bool] = Field(
        None, description="Draw starts from the nonnegative orthant; None detects it from the tensor"
    )

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_settings(cls, **overrides) -> "EstimatorConfig":
        values = {
            "starts": settings.DEFAULT_STARTS,
            "max_iters": settings.DEFAULT_MAX_ITERS,
            "tol": settings.DEFAULT_TOL,
            "seed": settings.DEFAULT_SEED,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class SpectralEstimate(BaseModel):
    value: float = Field(..., ge=0, description="Best multilinear value found; a lower bound on the spectral norm")
    witnesses: List[List[float]] = Field(..., description="Unit vectors attaining value, one per mode")
    certified_upper: float = Field(..., description="Proven upper bound on the spectral norm")
    certificate: str = Field(..., description="Route that produced certified_upper")
    converged: bool
    starts_used: int
    history: List[float] = Field(default_factory=list, description="Per-sweep values of the winning start")


class NormsReport(BaseModel):
    shape: tuple[int, ...]
    frobenius: float
    spectral: float = Field(..., description="Estimated spectral norm (a lower bound)")
    certified_upper: float
    certificate: str
    ratio: float
    symmetric: bool = False
    converged: bool
    starts_used: int
    seed: int
