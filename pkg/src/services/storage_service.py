"""
Result Storage Service Implementation
Wraps the CSV store and attaches reproducibility metadata to every table
"""
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd
import scipy

import src
from src.services.interfaces import ResultStore

logger = logging.getLogger(__name__)


class ResultStorageService:
    """
    Business logic service for result output.
    Metadata holds no timestamps so identical runs produce identical files.
    """

    def __init__(self, result_store: ResultStore):
        """
        Initialize result storage service with a store dependency.

        Args:
            result_store: ResultStore implementation for output (CsvResultStore)
        """
        self.store = result_store
        logger.info("ResultStorageService initialized")

    def build_metadata(self, command: str, model_hash: Optional[str] = None,
                       seed: Optional[int] = None, units: Optional[str] = None) -> Dict[str, str]:
        """
        Metadata header lines for a result table.

        Args:
            command: Command that produced the table
            model_hash: SHA-256 of the model, if any
            seed: Simulation seed, if the table holds simulated columns
            units: Free-text units description
        """
        return {
            "ruinalloc": src.__version__,
            "command": command,
            "model_sha256": model_hash or "none",
            "seed": "none" if seed is None else str(seed),
            "versions": f"numpy={np.__version__} scipy={scipy.__version__} pandas={pd.__version__}",
            "units": units or "capital in model currency units, time in model time units",
        }

    def save_table(self, frame: pd.DataFrame, command: str, path: Optional[Union[str, Path]] = None,
                   model_hash: Optional[str] = None, seed: Optional[int] = None,
                   units: Optional[str] = None) -> str:
        """
        Write a result table with metadata.

        Returns:
            Description of the destination
        """
        metadata = self.build_metadata(command, model_hash, seed, units)
        return self.store.write(frame, metadata, path)

    def save_tables(self, tables: Dict[str, pd.DataFrame], command: str, directory: Union[str, Path],
                    units: Optional[Dict[str, str]] = None) -> Dict[str, str]:
        """
        Write several named tables as <directory>/<name>.csv.

        Returns:
            Mapping of table name to destination
        """
        units = units or {}
        written = {}
        for name, frame in tables.items():
            written[name] = self.save_table(frame, f"{command} {name}", Path(directory) / f"{name}.csv",
                                            units=units.get(name))
        logger.info(f"Wrote {len(written)} tables to {directory}")
        return written
