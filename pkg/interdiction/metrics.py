import json
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from jinja2 import Environment, FileSystemLoader, select_autoescape

from app.logging_config import get_logger
from interdiction.rng import PRNG_ALGORITHM

logger = get_logger(__name__)


def precision(tp: float, fp: float) -> float:
    """Calculate precision metric."""
    return tp / (tp + fp) if (tp + fp) > 0 else 0.0


def recall(tp: float, fn: float) -> float:
    """Calculate recall metric."""
    return tp / (tp + fn) if (tp + fn) > 0 else 0.0


def f1_score(precision: float, recall: float) -> float:
    """Calculate F1 score."""
    return (
        2 * (precision * recall) / (precision + recall)
        if (precision + recall) > 0
        else 0.0
    )


def approximation_ratio(value: float, optimum: float) -> float:
    """value / optimum, with 0/0 read as an exact match."""
    if optimum == 0:
        return 1.0 if value == 0 else math.inf
    return value / optimum


def within_bound(value: float, optimum: float, bound: float, sense: str, slack: float) -> bool:
    """Minimization must stay below bound*OPT, maximization above it."""
    if sense == "min":
        return value <= bound * optimum + slack
    return value >= bound * optimum - slack


@dataclass
class RatioRecord:
    index: int
    value: float
    optimum: float
    ratio: float
    bound: float
    sense: str
    runtime: float
    passed: bool
    note: str = ""


@dataclass
class RatioReport:
    algorithm: str
    family: str
    seed: int
    bound_label: str
    records: List[RatioRecord] = field(default_factory=list)
    slack: float = 1e-9
    prng: str = PRNG_ALGORITHM
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_frame(self) -> pd.DataFrame:
        columns = [f.name for f in RatioRecord.__dataclass_fields__.values()]
        return pd.DataFrame([asdict(r) for r in self.records], columns=columns)

    def summary(self) -> Dict[str, Any]:
        df = self.to_frame()
        finite = df[df["ratio"].apply(math.isfinite)] if not df.empty else df
        return {
            "instances": int(len(df)),
            "min_ratio": float(finite["ratio"].min()) if not finite.empty else None,
            "max_ratio": float(finite["ratio"].max()) if not finite.empty else None,
            "mean_ratio": float(finite["ratio"].mean()) if not finite.empty else None,
            "violations": int((~df["passed"]).sum()) if not df.empty else 0,
            "total_runtime": float(df["runtime"].sum()) if not df.empty else 0.0,
            "passed": self.passed,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "family": self.family,
            "seed": self.seed,
            "prng": self.prng,
            "bound": self.bound_label,
            "slack": self.slack,
            "timestamp": self.timestamp,
            "summary": self.summary(),
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self, indent: int = 2) -> str:
        # inf ratios are written as null
        return json.dumps(_finite(self.to_dict()), indent=indent)

    def to_text(self) -> str:
        s = self.summary()
        header = [
            f"Ratio report: {self.algorithm} on '{self.family}' (seed {self.seed}, {self.prng})",
            f"Bound: {self.bound_label}   slack {self.slack:g}",
            f"Instances: {s['instances']}   violations: {s['violations']}   "
            f"passed: {'yes' if s['passed'] else 'NO'}",
        ]
        if s["instances"]:
            header.append(
                f"Ratio min/mean/max: {s['min_ratio']:.6g} / {s['mean_ratio']:.6g} / {s['max_ratio']:.6g}"
            )
        table = self.to_frame().to_string(index=False, float_format=lambda v: f"{v:.6g}")
        return "\n".join(header) + "\n\n" + table


def _finite(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def generate_html_report(report: RatioReport, output_dir: str = "reports") -> str:
    """Render a ratio report to HTML.

    Args:
        report: Report built by ``runner.ratio_report``
        output_dir: Directory to save HTML report

    Returns:
        Path to generated HTML report file
    """
    logger.info(f"Generating HTML report in {output_dir}")
    template_dir = Path(__file__).parent.parent / "app" / "templates"
    env = Environment(
        loader=FileSystemLoader(str(template_dir)),
        autoescape=select_autoescape(["html", "xml"]),
    )
    template = env.get_template("ratio_report.html")
    html_content = template.render(
        timestamp=datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        report=report,
        summary=report.summary(),
        records=report.records,
    )

    os.makedirs(output_dir, exist_ok=True)
    timestamp_file = datetime.now().strftime("%Y%m%d_%H%M%S")
    html_file = os.path.join(
        output_dir, f"ratio_report_{report.algorithm}_{report.family}_{timestamp_file}.html"
    )
    with open(html_file, "w", encoding="utf-8") as f:
        f.write(html_content)
    return html_file
