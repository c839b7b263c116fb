"""
Service Layer Protocols (Interfaces)
Defines contracts for the application services using Python Protocols
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Protocol, Union

import pandas as pd

from src.core.model import RiskModel
from src.core.simulator import SimConfig


class ModelStore(Protocol):
    """
    Protocol for model-file storage.
    Handles reading and writing raw model documents.
    """

    def load(self, path: Union[str, Path]) -> Dict[str, Any]:
        """
        Load a model document.

        Args:
            path: Location of the model file

        Returns:
            Parsed document
        """
        ...

    def save(self, path: Union[str, Path], data: Dict[str, Any]) -> Path:
        """
        Save a model document.

        Args:
            path: Destination
            data: Document to save
        """
        ...


class RunLogStore(Protocol):
    """
    Protocol for the run audit log.
    Handles appending and retrieving run records.
    """

    def append(self, log_entry: Dict[str, Any]) -> None:
        """
        Append a run record.

        Args:
            log_entry: Dictionary describing the run
        """
        ...

    def load_recent(self, days: int = 30) -> List[Dict[str, Any]]:
        """
        Load run records from the last N days.

        Args:
            days: Number of days to look back

        Returns:
            List of run records
        """
        ...


class ResultStore(Protocol):
    """Protocol for result-table output"""

    def write(self, frame: pd.DataFrame, metadata: Dict[str, str],
              path: Optional[Union[str, Path]] = None) -> str:
        """
        Write a table with its metadata header.

        Returns:
            Description of the destination
        """
        ...


class ConfigService(Protocol):
    """
    Protocol for configuration services.
    Turns model files and environment settings into validated objects.
    """

    def parse_config(self, path: Union[str, Path]) -> RiskModel:
        """
        Parse and validate a model file.

        Args:
            path: Model file

        Returns:
            Validated risk model
        """
        ...

    def model_hash(self, model: RiskModel) -> str:
        """SHA-256 of the canonical model document"""
        ...

    def sim_config(self, **overrides: Any) -> SimConfig:
        """Simulation settings from defaults, environment and overrides"""
        ...
