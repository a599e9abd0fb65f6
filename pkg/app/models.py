from datetime import datetime
from typing import Any, Dict, Optional

from sqlmodel import JSON, Column, Field, SQLModel


class RunRecord(SQLModel, table=True):
    """One CLI command that emitted a document."""

    id: Optional[int] = Field(default=None, primary_key=True)
    timestamp: datetime = Field(default_factory=datetime.utcnow)
    command: str
    algorithm: str = ""
    instance_digest: str = Field(default="", index=True)
    seed: int = 0
    wall_time: float = 0.0
    exit_code: int = 0
    document: Dict[str, Any] = Field(default_factory=dict, sa_column=Column(JSON))


class RatioRecord(SQLModel, table=True):
    """Summary of one approximation-ratio report."""

    id: Optional[int] = Field(default=None, primary_key=True)
    timestamp: datetime = Field(default_factory=datetime.utcnow)
    algorithm: str = Field(index=True)
    family: str = Field(index=True)
    seed: int = 0
    bound: str = ""
    instances: int = 0
    min_ratio: Optional[float] = None
    max_ratio: Optional[float] = None
    mean_ratio: Optional[float] = None
    passed: bool = True
    report_json: Dict[str, Any] = Field(default_factory=dict, sa_column=Column(JSON))
