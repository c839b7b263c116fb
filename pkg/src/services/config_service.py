"""
Configuration Service Implementation
Wraps the model store and provides parsing, validation and simulation settings
"""
import hashlib
import json
import logging
import os
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from src.core.errors import ModelValidationError
from src.core.model import RiskModel, model_from_dict, model_to_dict, validate
from src.core.simulator import SimConfig
from src.services.interfaces import ModelStore

logger = logging.getLogger(__name__)


class ConfigurationService:
    """
    Business logic service for configuration management.
    Implements the ConfigService Protocol.
    """

    # Environment variables and the SimConfig fields they set
    ENVIRONMENT = {
        "RUINALLOC_SIM_PATHS": ("paths", int),
        "RUINALLOC_SIM_SEED": ("seed", int),
        "RUINALLOC_SIM_WORKERS": ("workers", int),
        "RUINALLOC_SIM_STEPS": ("steps_per_unit_time", int),
    }

    def __init__(self, model_store: ModelStore):
        """
        Initialize configuration service with a model store dependency.

        Args:
            model_store: ModelStore implementation for file I/O (FileModelStore)
        """
        self.store = model_store
        self.sim_defaults = self._load_sim_defaults()
        logger.info("ConfigurationService initialized")

    def _load_sim_defaults(self) -> SimConfig:
        """SimConfig defaults overridden by environment variables"""
        values: Dict[str, Any] = {}
        for variable, (field_name, cast) in self.ENVIRONMENT.items():
            raw = os.getenv(variable)
            if raw is None or raw == "":
                continue
            try:
                values[field_name] = cast(raw)
            except ValueError:
                logger.warning(f"Ignoring {variable}={raw!r}: not a valid {cast.__name__}")
        if values:
            logger.info(f"Simulation defaults from environment: {values}")
        return SimConfig(**values)

    def parse_config(self, path: Union[str, Path]) -> RiskModel:
        """
        Parse a model file and validate it.

        Raises:
            ConfigParseError: unreadable or malformed JSON
            ModelValidationError: schema or invariant violations
        """
        data = self.store.load(path)
        model = model_from_dict(data)
        report = validate(model)
        if not report.is_valid:
            logger.error(f"Model in {path} is invalid: {report.violations}")
            raise ModelValidationError(report.violations)
        logger.info(f"Parsed {model.kind} model with d={model.d} from {path}")
        return model

    def validate_model(self, model: RiskModel) -> Tuple[bool, str]:
        """Validate a model, returning (is_valid, message)"""
        report = validate(model)
        if report.is_valid:
            return True, "Model is valid"
        return False, "; ".join(report.violations)

    def save_model(self, path: Union[str, Path], model: RiskModel) -> Path:
        """Write a model in the JSON schema"""
        return self.store.save(path, model_to_dict(model))

    def model_hash(self, model: RiskModel) -> str:
        """SHA-256 of the canonical (sorted-key) model document"""
        canonical = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def sim_config(self, **overrides: Optional[Any]) -> SimConfig:
        """
        Simulation settings: defaults, then environment, then non-None overrides.

        Args:
            overrides: SimConfig field values (None entries are ignored)
        """
        chosen = {k: v for k, v in overrides.items() if v is not None}
        return replace(self.sim_defaults, **chosen)
