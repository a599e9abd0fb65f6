import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

import yaml  # type: ignore

from app.config import Config
from app.logging_config import get_logger
from interdiction.bridges import BridgesInstance, check_convex, frequency
from interdiction.errors import SchemaError
from interdiction.evader import collect_route_sets
from interdiction.generators import generate_family_instance
from interdiction.greedy import harmonic
from interdiction.metrics import (
    RatioRecord,
    RatioReport,
    approximation_ratio,
    within_bound,
)
from interdiction.oracle import brute_force
from interdiction.schema import FamilySpec, load_object
from interdiction.solve import choose_algorithm, run_solver

logger = get_logger(__name__)

GREEDY_BI_BOUND = 1.0 - 1.0 / math.e

BOUND_LABELS = {
    "greedy-fi": "H_m (m = number of route sets)",
    "greedy-bi": "1-1/e (unit costs), (1-1/e)/2 otherwise",
    "scsc": "f = 1 + max |sigma(g)|",
    "mincut": "1 for one evader, k for the union of k per-evader cuts",
    "auto": "bound of the algorithm auto selects, per instance",
}

DEFAULT_FAMILIES: Dict[str, Any] = {
    "profiles": {
        "default": {
            "families": {
                "path-fi": {"generator": "path", "algorithm": "path-fi", "count": 20}
            }
        }
    }
}


def instance_bound(instance: Any, algorithm: str) -> Tuple[float, str, str]:
    """(bound, sense, resolved algorithm) for one instance."""
    if isinstance(instance, BridgesInstance):
        if algorithm == "auto":
            algorithm = "convex" if check_convex(instance) is not None else "scsc"
        bound = float(frequency(instance)) if algorithm == "scsc" else 1.0
        return bound, "min", algorithm
    if algorithm == "auto":
        algorithm, _ = choose_algorithm(instance)
    if instance.problem.is_fi:
        if algorithm == "greedy-fi":
            return harmonic(len(collect_route_sets(instance))), "min", algorithm
        if algorithm == "mincut":
            return float(max(len(instance.evaders), 1)), "min", algorithm
        return 1.0, "min", algorithm
    if algorithm == "greedy-bi":
        bound = GREEDY_BI_BOUND if instance.costs.is_unit else GREEDY_BI_BOUND / 2
        return bound, "max", algorithm
    return 1.0, "max", algorithm


def evaluate_instance(spec: FamilySpec, algorithm: str, index: int) -> RatioRecord:
    """Solve instance ``index`` of the family and compare against brute force."""
    instance = generate_family_instance(spec, index)
    bound, sense, resolved = instance_bound(instance, algorithm)
    start = time.perf_counter()
    result = run_solver(instance, resolved)
    runtime = time.perf_counter() - start
    oracle = brute_force(instance)
    if isinstance(instance, BridgesInstance):
        value, optimum = float(result.score.errors), float(oracle.value)
    elif instance.problem.is_fi:
        value, optimum = float(result.cost), float(oracle.value)
    else:
        value, optimum = float(result.objective), float(oracle.value)
    passed = within_bound(value, optimum, bound, sense, Config.RATIO_SLACK)
    if not passed:
        logger.warning(
            f"Instance {index}: {resolved} value {value:.6g} violates bound {bound:.6g} "
            f"against optimum {optimum:.6g}"
        )
    return RatioRecord(
        index=index,
        value=value,
        optimum=optimum,
        ratio=approximation_ratio(value, optimum),
        bound=bound,
        sense=sense,
        runtime=runtime,
        passed=passed,
        note=resolved if resolved != algorithm else "",
    )


def _evaluate_packed(args: Tuple[FamilySpec, str, int]) -> RatioRecord:
    return evaluate_instance(*args)


class FamilyRunner:
    """Runs algorithms over the instance families declared in families.yaml."""

    def __init__(
        self,
        config_path: Optional[str] = None,
        profile: str = "default",
        progress_callback: Optional[Callable[[Dict[str, Any]], Any]] = None,
        jobs: Optional[int] = None,
    ):
        self.config_path = config_path or Config.FAMILIES_FILE
        self.profile_name = profile
        self.progress_callback = progress_callback
        self.jobs = Config.JOBS if jobs is None else jobs

    def _notify_progress(
        self, message: str, step: str = "running", current: int = 0, total: int = 0
    ) -> None:
        """Send progress notification via callback."""
        if self.progress_callback:
            self.progress_callback(
                {
                    "message": message,
                    "step": step,
                    "current": current,
                    "total": total,
                    "timestamp": time.time(),
                }
            )

    def load_config(self) -> Dict[str, Any]:
        """Load family configuration from YAML file."""
        try:
            with open(self.config_path, "r") as f:
                return yaml.safe_load(f) or {}
        except FileNotFoundError:
            logger.warning(f"{self.config_path} not found; using built-in families")
            return DEFAULT_FAMILIES

    def families(self) -> Dict[str, FamilySpec]:
        config = self.load_config()
        profiles = config.get("profiles", {})
        profile = profiles.get(self.profile_name)
        if profile is None:
            raise SchemaError(f"unknown profile '{self.profile_name}'", path="profiles")
        out = {}
        for name, raw in (profile.get("families") or {}).items():
            try:
                out[name] = load_object(raw, FamilySpec)
            except SchemaError as e:
                raise SchemaError(e.message, path=f"profiles.{self.profile_name}.families.{name}") from e
        return out

    def family(self, name: str) -> FamilySpec:
        families = self.families()
        if name not in families:
            raise SchemaError(
                f"unknown family '{name}'; profile '{self.profile_name}' has {sorted(families)}"
            )
        return families[name]

    def ratio_report(
        self, family: str, algorithm: Optional[str] = None, count: Optional[int] = None
    ) -> RatioReport:
        spec = self.family(family)
        algorithm = algorithm or spec.algorithm or "auto"
        count = spec.count if count is None else count
        logger.info(
            f"Ratio report: {algorithm} on '{family}' ({count} instances, jobs={self.jobs})"
        )
        tasks = [(spec, algorithm, i) for i in range(count)]
        records: List[RatioRecord] = []
        if self.jobs > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                for i, record in enumerate(pool.map(_evaluate_packed, tasks)):
                    records.append(record)
                    self._notify_progress(f"Instance {i + 1}", "instance", i + 1, count)
        else:
            for i, task in enumerate(tasks):
                records.append(_evaluate_packed(task))
                self._notify_progress(f"Instance {i + 1}", "instance", i + 1, count)

        report = RatioReport(
            algorithm=algorithm,
            family=family,
            seed=spec.seed,
            bound_label=BOUND_LABELS.get(algorithm, "1 (exact)"),
            records=records,
            slack=Config.RATIO_SLACK,
        )
        summary = report.summary()
        logger.info(
            f"Ratio report done: {summary['instances']} instances, "
            f"{summary['violations']} violations"
        )
        return report


def ratio_report(
    algorithm: str,
    family: str,
    config_path: Optional[str] = None,
    profile: str = "default",
    **kwargs: Any,
) -> RatioReport:
    """Main entry point for ratio reports."""
    runner = FamilyRunner(config_path=config_path, profile=profile, **kwargs)
    return runner.ratio_report(family, algorithm)
