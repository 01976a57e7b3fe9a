"""Request/response models for the synthesis service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class TargetSpec(BaseModel):
    """A named catalog target or an inline exact matrix (JSON form)."""

    name: Optional[str] = None
    matrix: Optional[dict] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.name is None) == (self.matrix is None):
            raise ValueError("specify exactly one of 'name' or 'matrix'")
        return self


class GenRequest(BaseModel):
    n: int = Field(ge=1, le=14)
    depth: int = Field(ge=1)
    gate_set: str = "clifford_t"
    mode: str = "classed"
    out: str
    jobs: int = Field(default=1, ge=1)


class GenResponse(BaseModel):
    path: str
    levels: list[int]
    seconds: list[float]


class SearchRequest(BaseModel):
    target: TargetSpec
    db: str
    max_depth: int = Field(ge=0)
    jobs: int = Field(default=1, ge=1)


class TdepthSearchRequest(BaseModel):
    target: TargetSpec
    max_tdepth: int = Field(ge=0)
    allow_large: bool = False


class AncillaSearchRequest(BaseModel):
    target: TargetSpec
    ancillas: int = Field(ge=0)
    db: str
    max_depth: int = Field(ge=0)


class SearchResponse(BaseModel):
    found: bool
    depth: Optional[int] = None
    t_depth: Optional[int] = None
    phase_exponent: Optional[int] = None
    circuit: Optional[str] = None
    proof_bound: int
    probe_seconds: dict[int, float]
    verified: Optional[bool] = None


class VerifyRequest(BaseModel):
    circuit: str
    target: TargetSpec


class VerifyResponse(BaseModel):
    relation: str  # exact | global_phase | ancilla_subspace | different
    phase_exponent: Optional[int] = None
    depth: int
    t_depth: int


class TparRequest(BaseModel):
    circuit: str
    ancillas: int = Field(ge=0)
    merge_phases: bool = False


class TparResponse(BaseModel):
    circuit: str
    t_count: int
    t_depth_before: int
    t_depth_after: int
    stage_bound: int


class PeepholeRequest(BaseModel):
    circuit: str
    dbs: list[str]
    window: int = Field(default=4, ge=1)
    max_width: int = Field(default=2, ge=1)


class PeepholeResponse(BaseModel):
    circuit: str
    phase_exponent: int
    depth_before: int
    depth_after: int
    gates_before: int
    gates_after: int


class CostRequest(BaseModel):
    circuit: str


class CostResponse(BaseModel):
    cost_vector: list[int]
    controlled_cost: list[int]
    controlled_t_depth_bound: int


class CliffordRequest(BaseModel):
    n: int = Field(ge=1, le=3)
    allow_large: bool = False


class CliffordResponse(BaseModel):
    count: int
    seconds: float


class ErrorBody(BaseModel):
    code: str  # usage | io | format | resource
    detail: str
