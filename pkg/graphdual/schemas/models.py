from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional
from pydantic import BaseModel, Field, field_validator

from graphdual.core.rng import SeedRecord


# -------------------------
# Command parameters
# -------------------------
class MomentsParams(BaseModel):
    graph: str = Field(..., min_length=1)
    order: int = Field(..., ge=1)
    alpha: Optional[str] = None               # rational text, e.g. "1/4" or "0.25"
    t: Optional[List[float]] = None
    x0: Optional[List[float]] = None
    exact: bool = False

    @field_validator("t")
    @classmethod
    def _non_negative_times(cls, v):
        if v is not None and any(t < 0 for t in v):
            raise ValueError("times must be non-negative")
        return v


class EstimateParams(BaseModel):
    graph: str = Field(..., min_length=1)
    a: List[int] = Field(..., min_length=1)
    alpha: float = Field(..., gt=0)
    samples: int = Field(100_000, ge=2)
    threads: Optional[int] = Field(None, ge=0)
    steps: bool = False


class SelectGraphParams(BaseModel):
    graphs: List[str] = Field(..., min_length=1)
    a: List[int] = Field(..., min_length=1)
    alpha: str
    mode: Literal["exact", "mc"] = "exact"
    samples: int = Field(100_000, ge=2)
    threads: Optional[int] = Field(None, ge=0)


class FindIsParams(BaseModel):
    graph: str = Field(..., min_length=1)
    particles: int = Field(..., ge=1)
    threshold: Optional[int] = Field(None, ge=1)
    runs: int = Field(1, ge=1)
    method: Literal["jump", "literal"] = "jump"


class SimulateDualParams(BaseModel):
    graph: str = Field(..., min_length=1)
    alpha: float = Field(0.0, ge=0)
    start: List[int] = Field(..., min_length=1)
    t: Optional[float] = Field(None, gt=0)
    paths: int = Field(1_000, ge=1)
    export_paths: int = Field(1, ge=0)


class SimulateSdeParams(BaseModel):
    graph: str = Field(..., min_length=1)
    alpha: float = Field(0.0, ge=0)
    x0: Optional[List[float]] = None
    dt: float = Field(1e-4, gt=0)
    t: float = Field(1.0, ge=0)
    paths: int = Field(100, ge=1)
    record_every: Optional[int] = Field(None, ge=1)
    boundary_policy: Optional[str] = None
    eps: float = Field(1e-6, gt=0)


class SimulateDiscreteParams(BaseModel):
    graph: str = Field(..., min_length=1)
    n0: Optional[List[int]] = None
    particles: Optional[int] = Field(None, ge=2)
    steps: int = Field(..., ge=0)
    record_every: int = Field(1, ge=1)
    alpha: float = Field(0.0, ge=0)


class SpectrumParams(BaseModel):
    graph: str = Field(..., min_length=1)
    independent_sets: bool = False
    maximal_only: bool = True


# -------------------------
# Reports
# -------------------------
class ErrorBody(BaseModel):
    type: str
    message: str


class Report(BaseModel):
    command: str
    version: str
    runId: str
    seed: Optional[SeedRecord] = None
    parameters: Dict[str, Any]
    result: Dict[str, Any]


class RunManifest(BaseModel):
    command: str
    runId: str
    argv: List[str]
    parameters: Dict[str, Any]
    seed: Optional[SeedRecord] = None
    versions: Dict[str, str]
    startedAt: str
    wallTime: float = Field(..., ge=0)
    outputs: Dict[str, str]                   # file name -> sha256
    outputsDigest: str
