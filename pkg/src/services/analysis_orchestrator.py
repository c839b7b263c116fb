"""
Analysis Orchestrator Service
High-level service that turns a RunSpec into results, output tables and an exit code
"""
import logging
import sys
from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Dict, List, Optional, TextIO, Tuple

import numpy as np
import pandas as pd

from src.core.allocation_engine import (
    AllocationReport,
    allocate_asymptotic,
    allocate_gradient,
    allocate_sup_location,
    allocate_time_of_ruin,
)
from src.core.errors import DomainError, RiskModelError, exit_code_for
from src.core.model import Horizon, RiskModel, RuinQuery
from src.core.ruin_engine import dynamic_var, ruin_prob
from src.services.interfaces import ConfigService
from src.services.figure_service import FigureService
from src.services.logging_service import RunLoggingService
from src.services.storage_service import ResultStorageService
from src.services.verification_service import VerificationService

logger = logging.getLogger(__name__)

COMMANDS = ("ruin", "var", "allocate", "sweep", "figures", "verify")
MODEL_COMMANDS = ("ruin", "var", "allocate", "sweep")
ALLOCATION_METHODS = ("k", "kbar", "gvar", "asymptotic")
SWEEP_PARAMETERS = ("u", "alpha", "T")
SWEEP_QUANTITIES = ("ruin", "var") + ALLOCATION_METHODS
SIM_FIELDS = {
    "paths": "paths",
    "seed": "seed",
    "workers": "workers",
    "steps": "steps_per_unit_time",
    "bandwidth": "bandwidth",
    "bridge": "bridge_correction",
}


@dataclass
class RunSpec:
    """One CLI invocation: command, model file, parameters and output destination"""
    command: str
    model_path: Optional[str] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    output_path: Optional[str] = None

    def get(self, key: str, default: Any = None) -> Any:
        value = self.parameters.get(key)
        return default if value is None else value

    def validate(self) -> None:
        """
        Check the command-specific required keys.

        Raises:
            DomainError: unknown command or missing/invalid parameters
        """
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        problems = []
        if self.command in MODEL_COMMANDS and not self.model_path:
            problems.append("--model is required")
        if self.command == "ruin" and self.get("u") is None:
            problems.append("ruin requires --u")
        if self.command == "var" and self.get("alpha") is None:
            problems.append("var requires --alpha")
        if self.command == "allocate":
            method = self.get("method")
            if method not in ALLOCATION_METHODS:
                problems.append(f"allocate requires --method in {ALLOCATION_METHODS}")
            elif method == "gvar" and self.get("alpha") is None:
                problems.append("gvar allocation requires --alpha")
            elif method in ("k", "kbar") and self.get("u") is None and self.get("alpha") is None:
                problems.append(f"{method} allocation requires --u or --alpha")
        if self.command == "sweep":
            if self.get("sweep_param") not in SWEEP_PARAMETERS:
                problems.append(f"sweep requires --sweep-param in {SWEEP_PARAMETERS}")
            if self.get("quantity") not in SWEEP_QUANTITIES:
                problems.append(f"sweep requires --quantity in {SWEEP_QUANTITIES}")
            if self.get("start") is None or self.get("stop") is None:
                problems.append("sweep requires --start and --stop")
        if problems:
            raise DomainError("; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


def error_line(error: BaseException, exit_code: int) -> str:
    """Machine-readable one-line error report for standard error"""
    message = str(error).replace('"', "'").replace("\n", " ")
    return f'error={type(error).__name__} exit={exit_code} message="{message}"\n'


def allocation_row(report: AllocationReport) -> Dict[str, Any]:
    """Flatten an AllocationReport into one wide CSV row"""
    row: Dict[str, Any] = {
        "method": report.method,
        "estimator": report.estimator,
        "horizon": str(report.horizon),
        "u": report.u,
    }
    for i, c in enumerate(report.fractions, start=1):
        row[f"c_{i}"] = c
    if report.amounts is not None:
        for i, k in enumerate(report.amounts, start=1):
            row[f"K_{i}"] = k
    for key, value in report.diagnostics.items():
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            row[key] = value
    return row


class AnalysisOrchestrator:
    """
    High-level orchestrator for analysis runs.
    Coordinates Configuration, Run Logging and Result Storage services.
    """

    def __init__(self, config_service: ConfigService,
                 logging_service: RunLoggingService,
                 storage_service: ResultStorageService,
                 error_stream: TextIO = None):
        """
        Initialize the analysis orchestrator with service dependencies.

        Args:
            config_service: ConfigService implementation (ConfigurationService)
            logging_service: RunLoggingService instance
            storage_service: ResultStorageService instance
            error_stream: Stream for the machine-readable error line (defaults to stderr)
        """
        self.config = config_service
        self.logging = logging_service
        self.storage = storage_service
        self.error_stream = error_stream
        self._handlers: Dict[str, Callable[[RunSpec], Tuple[Optional[str], int]]] = {
            "ruin": self._run_ruin,
            "var": self._run_var,
            "allocate": self._run_allocate,
            "sweep": self._run_sweep,
            "figures": self._run_figures,
            "verify": self._run_verify,
        }
        logger.info("AnalysisOrchestrator initialized")

    def run(self, spec: RunSpec) -> int:
        """
        Execute one run.

        Returns:
            0 on success, 1 on invalid input, 2 on numerical failure or failed verification
        """
        model_hash = None
        error = None
        try:
            spec.validate()
            model_hash, exit_code = self._handlers[spec.command](spec)
        except RiskModelError as e:
            exit_code = exit_code_for(e)
            error = f"{type(e).__name__}: {e}"
            self._report_error(e, exit_code)
        try:
            self.logging.log_run(spec.command, model_hash, spec.parameters, exit_code, error)
        except (OSError, ValueError) as e:
            logger.warning(f"Run log not updated: {e}")
        return exit_code

    def _report_error(self, error: Exception, exit_code: int) -> None:
        stream = self.error_stream or sys.stderr
        stream.write(error_line(error, exit_code))
        logger.error(f"Run failed with {type(error).__name__}: {error}")

    def _sim_config(self, spec: RunSpec):
        overrides = {target: spec.get(source) for source, target in SIM_FIELDS.items()}
        return self.config.sim_config(**overrides)

    def _load(self, spec: RunSpec) -> Tuple[RiskModel, str]:
        model = self.config.parse_config(spec.model_path)
        return model, self.config.model_hash(model)

    def _run_ruin(self, spec: RunSpec) -> Tuple[str, int]:
        model, model_hash = self._load(spec)
        horizon = Horizon.parse(spec.get("horizon", "inf"))
        cfg = self._sim_config(spec)
        result = ruin_prob(model, RuinQuery(float(spec.get("u")), horizon), cfg)
        frame = pd.DataFrame([{"u": float(spec.get("u")), "horizon": str(horizon), **result.to_dict()}])
        seed = cfg.seed if result.std_error is not None else None
        self.storage.save_table(frame, "ruin", spec.output_path, model_hash, seed)
        return model_hash, 0

    def _run_var(self, spec: RunSpec) -> Tuple[str, int]:
        model, model_hash = self._load(spec)
        horizon = Horizon.parse(spec.get("horizon", "inf"))
        alpha = float(spec.get("alpha"))
        frame = pd.DataFrame([{"alpha": alpha, "horizon": str(horizon),
                               "var": dynamic_var(model, alpha, horizon)}])
        self.storage.save_table(frame, "var", spec.output_path, model_hash)
        return model_hash, 0

    def _allocate(self, model: RiskModel, method: str, horizon: Horizon, u: Optional[float],
                  alpha: Optional[float], spec: RunSpec) -> AllocationReport:
        if method == "asymptotic":
            return allocate_asymptotic(model, u)
        if method == "gvar":
            return allocate_gradient(model, alpha, horizon)
        if u is None:
            u = dynamic_var(model, alpha, horizon)
        allocate = allocate_time_of_ruin if method == "k" else allocate_sup_location
        return allocate(model, u, horizon, self._sim_config(spec))

    def _run_allocate(self, spec: RunSpec) -> Tuple[str, int]:
        model, model_hash = self._load(spec)
        horizon = Horizon.parse(spec.get("horizon", "inf"))
        u = spec.get("u")
        alpha = spec.get("alpha")
        report = self._allocate(model, spec.get("method"), horizon,
                                None if u is None else float(u), None if alpha is None else float(alpha), spec)
        seed = report.diagnostics.get("seed")
        self.storage.save_table(pd.DataFrame([allocation_row(report)]), f"allocate {spec.get('method')}",
                                spec.output_path, model_hash, seed)
        return model_hash, 0

    def _sweep_grid(self, spec: RunSpec) -> np.ndarray:
        start, stop = float(spec.get("start")), float(spec.get("stop"))
        points = int(spec.get("points", 50))
        if points < 1:
            raise DomainError(f"sweep needs at least one point, got {points}")
        if spec.get("spacing", "lin") == "log":
            if not (start > 0 and stop > 0):
                raise DomainError("log spacing needs positive start and stop")
            return np.logspace(np.log10(start), np.log10(stop), points)
        return np.linspace(start, stop, points)

    def _run_sweep(self, spec: RunSpec) -> Tuple[str, int]:
        model, model_hash = self._load(spec)
        parameter = spec.get("sweep_param")
        quantity = spec.get("quantity")
        rows: List[Dict[str, Any]] = []
        for value in self._sweep_grid(spec):
            u = float(value) if parameter == "u" else spec.get("u")
            alpha = float(value) if parameter == "alpha" else spec.get("alpha")
            horizon = Horizon.finite(value) if parameter == "T" else Horizon.parse(spec.get("horizon", "inf"))
            row: Dict[str, Any] = {parameter: float(value)}
            if quantity == "ruin":
                if u is None:
                    raise DomainError("sweeping ruin needs --u unless u is the swept parameter")
                row["probability"] = ruin_prob(model, RuinQuery(float(u), horizon), self._sim_config(spec)).probability
            elif quantity == "var":
                if alpha is None:
                    raise DomainError("sweeping var needs --alpha unless alpha is the swept parameter")
                row["var"] = dynamic_var(model, float(alpha), horizon)
            else:
                report = self._allocate(model, quantity, horizon, None if u is None else float(u),
                                        None if alpha is None else float(alpha), spec)
                row.update({k: v for k, v in allocation_row(report).items() if k not in ("horizon", "method")})
            rows.append(row)
        self.storage.save_table(pd.DataFrame(rows), f"sweep {quantity} over {parameter}", spec.output_path, model_hash)
        return model_hash, 0

    def _run_figures(self, spec: RunSpec) -> Tuple[None, int]:
        points = spec.get("grid_points")
        service = FigureService() if points is None else FigureService(points, points, points)
        tables = service.all_figures(spec.get("figures"))
        self.storage.save_tables(tables, "figures", spec.output_path or "figures", units=FigureService.UNITS)
        return None, 0

    def _run_verify(self, spec: RunSpec) -> Tuple[None, int]:
        cfg = self._sim_config(spec)
        service = VerificationService(cfg)
        results = service.run_all()
        self.storage.save_table(service.to_frame(results), "verify", spec.output_path, seed=cfg.seed)
        return None, 0 if all(r.passed for r in results) else 2
