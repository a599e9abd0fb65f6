import json
import os
from typing import Any, Dict, List, Optional

from sqlalchemy.engine import Engine
from sqlmodel import Session, SQLModel, create_engine, select

from .config import Config
from .logging_config import get_logger
from .models import RatioRecord, RunRecord

logger = get_logger(__name__)

_engine: Optional[Engine] = None
_engine_path: Optional[str] = None


def history_enabled() -> bool:
    return bool(Config.HISTORY_DB)


def get_engine() -> Engine:
    """Engine for ``Config.HISTORY_DB``, created on first use."""
    global _engine, _engine_path
    path = Config.HISTORY_DB
    if not path:
        raise RuntimeError("history database is disabled (HISTORY_DB is empty)")
    if _engine is None or _engine_path != path:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        # Pre-create file with restrictive permissions if it doesn't exist
        if not os.path.exists(path):
            with open(path, "w"):
                pass
            os.chmod(path, 0o600)
        _engine = create_engine(f"sqlite:///{path}", echo=False)
        _engine_path = path
    return _engine


def create_db_and_tables() -> None:
    SQLModel.metadata.create_all(get_engine())


def save_run_to_db(document: Dict[str, Any], exit_code: int = 0) -> RunRecord:
    """Store an emitted document together with its manifest fields."""
    manifest = document.get("manifest", {})
    record = RunRecord(
        command=manifest.get("command", ""),
        algorithm=manifest.get("algorithm") or "",
        instance_digest=manifest.get("instance_digest") or "",
        seed=int(manifest.get("seed") or 0),
        wall_time=float(manifest.get("wall_time") or 0.0),
        exit_code=exit_code,
        document=json.loads(json.dumps(document)),
    )
    create_db_and_tables()
    with Session(get_engine()) as session:
        session.add(record)
        session.commit()
        session.refresh(record)
        return record


def save_ratio_to_db(report: Dict[str, Any]) -> RatioRecord:
    """Store a ratio report dict (``RatioReport.to_dict`` after JSON cleanup)."""
    summary = report.get("summary", {})
    record = RatioRecord(
        algorithm=report.get("algorithm", ""),
        family=report.get("family", ""),
        seed=int(report.get("seed", 0)),
        bound=report.get("bound", ""),
        instances=int(summary.get("instances", 0)),
        min_ratio=summary.get("min_ratio"),
        max_ratio=summary.get("max_ratio"),
        mean_ratio=summary.get("mean_ratio"),
        passed=bool(summary.get("passed", False)),
        report_json=report,
    )
    create_db_and_tables()
    with Session(get_engine()) as session:
        session.add(record)
        session.commit()
        session.refresh(record)
        return record


def recent_ratio_records(algorithm: Optional[str] = None, limit: int = 20) -> List[RatioRecord]:
    create_db_and_tables()
    with Session(get_engine()) as session:
        statement = select(RatioRecord)
        if algorithm:
            statement = statement.where(RatioRecord.algorithm == algorithm)
        statement = statement.order_by(RatioRecord.id.desc()).limit(limit)  # type: ignore
        return list(session.exec(statement).all())
