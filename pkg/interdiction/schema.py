"""Document schemas for instances, solutions and family configuration.

Structural checks only; semantic checks (ranges, stochasticity, topology)
live in ``instance.validate`` so they can be reported as violations.
"""

import json
from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from interdiction.errors import SchemaError

INSTANCE_FORMAT = "interdict-instance"
BRIDGES_FORMAT = "interdict-bridges"

M = TypeVar("M", bound=BaseModel)


def _check_int_keys(mapping: Dict[str, Any]) -> Dict[str, Any]:
    for key in mapping:
        try:
            int(key)
        except (TypeError, ValueError):
            raise ValueError(f"node key {key!r} is not an integer")
    return mapping


class GraphDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = Field(..., ge=1)
    directed: bool = False
    edges: List[Tuple[int, int]] = Field(default_factory=list)


class EvaderDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weight: float = 1.0
    target: Optional[int] = None
    start: Optional[Dict[str, float]] = None
    rows: Optional[Dict[str, Dict[str, float]]] = None
    route: Optional[List[int]] = Field(None, min_length=2)

    @field_validator("start")
    @classmethod
    def validate_start_keys(cls, v):
        return v if v is None else _check_int_keys(v)

    @field_validator("rows")
    @classmethod
    def validate_row_keys(cls, v):
        if v is None:
            return v
        _check_int_keys(v)
        for row in v.values():
            _check_int_keys(row)
        return v

    @model_validator(mode="after")
    def validate_shape(self):
        if self.route is not None:
            if self.start is not None or self.rows is not None:
                raise ValueError("route shorthand excludes start/rows")
            if self.target is not None and self.target != self.route[-1]:
                raise ValueError("target must equal the last node of the route")
        elif self.target is None or self.start is None:
            raise ValueError("evader needs either route or target+start(+rows)")
        return self


class FIProblemDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["fi"]


class BIProblemDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["bi"]
    budget: int


class InstanceDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: Literal["interdict-instance"]
    version: Literal[1]
    graph: GraphDoc
    costs: List[int]
    topology_hint: Optional[Literal["path", "cycle", "tree", "general"]] = None
    evaders: List[EvaderDoc] = Field(default_factory=list)
    problem: Union[FIProblemDoc, BIProblemDoc] = Field(..., discriminator="type")
    names: Optional[List[str]] = None
    provenance: Optional[Dict[str, Any]] = None


class PersonDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["good", "bad"]
    w: float
    bridges: List[int]


class BridgesDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: Literal["interdict-bridges"]
    version: Literal[1]
    bridges: int = Field(..., ge=1)
    people: List[PersonDoc] = Field(default_factory=list)
    fn_bound: Optional[float] = None
    provenance: Optional[Dict[str, Any]] = None


class SolutionDoc(BaseModel):
    """Interdiction solution as emitted by ``interdict solve``."""

    placement: List[int]
    cost: Optional[int] = None
    objective: Optional[float] = None
    algorithm: Optional[str] = None
    certified_optimal: Optional[bool] = None
    manifest: Optional[Dict[str, Any]] = None


class BridgeSolutionDoc(BaseModel):
    open: List[int]
    score: Optional[Dict[str, Any]] = None
    algorithm: Optional[str] = None
    manifest: Optional[Dict[str, Any]] = None


class SetsDoc(BaseModel):
    """Set family for the maximum-coverage generator."""

    sets: List[List[int]] = Field(..., min_length=1)


class FamilySpec(BaseModel):
    """One instance family from families.yaml."""

    model_config = ConfigDict(extra="forbid")

    description: str = ""
    generator: Literal[
        "path",
        "cycle",
        "tree",
        "general",
        "routes",
        "markov-path",
        "maxcov",
        "vc",
        "bridges-convex",
        "bridges-general",
    ]
    algorithm: Optional[str] = None
    problem: Literal["fi", "bi"] = "fi"
    nodes: Tuple[int, int] = (4, 10)
    evaders: Tuple[int, int] = (1, 3)
    budget: Tuple[int, int] = (0, 4)
    density: float = Field(0.3, ge=0.0, le=1.0)
    deterministic: bool = False
    unit_costs: bool = True
    max_cost: int = Field(3, ge=1)
    people: Tuple[int, int] = (2, 8)
    max_set: int = Field(3, ge=1)
    seed: int = Field(0, ge=0)
    count: int = Field(20, ge=1)

    @field_validator("nodes", "evaders", "budget", "people")
    @classmethod
    def validate_range(cls, v):
        lo, hi = v
        if lo < 0 or hi < lo:
            raise ValueError(f"range {list(v)} must satisfy 0 <= lo <= hi")
        return v


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<root>"


def load_document(text: str, model: Type[M]) -> M:
    """Parse JSON text into ``model``; failures become ``SchemaError``."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"malformed JSON: {e.msg} at line {e.lineno}") from e
    return load_object(raw, model)


def load_object(raw: Any, model: Type[M]) -> M:
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise SchemaError(first.get("msg", "invalid value"), path=_field_path(first)) from e


def document_format(text: str) -> Optional[str]:
    """Peek at the ``format`` field without validating anything else."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"malformed JSON: {e.msg} at line {e.lineno}") from e
    return raw.get("format") if isinstance(raw, dict) else None
