"""
File-based Run Log Store
Handles JSON file I/O for the audit trail of analysis runs
"""
import json
import logging
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List

logger = logging.getLogger(__name__)


class FileRunLogStore:
    """
    Low-level JSON run-log storage, one file per day.
    Responsible only for file I/O operations.
    """

    def __init__(self, log_path: Path):
        """
        Initialize file run-log store.

        Args:
            log_path: Directory holding <YYYY-MM-DD>.json files
        """
        self.log_path = Path(log_path)
        self.log_path.mkdir(parents=True, exist_ok=True)
        logger.info(f"FileRunLogStore initialized with path: {self.log_path}")

    def append(self, log_entry: Dict[str, Any]) -> None:
        """
        Append a run record to today's log file.

        Args:
            log_entry: Dictionary describing the run
        """
        log_file = self.log_path / f"{datetime.now().strftime('%Y-%m-%d')}.json"
        try:
            logs = []
            if log_file.exists():
                with open(log_file, "r") as f:
                    logs = json.load(f)
            logs.append(log_entry)
            with open(log_file, "w") as f:
                json.dump(logs, f, indent=2)
            logger.info(f"Appended run record to {log_file}")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Failed to append run record: {e}")
            raise

    def load_recent(self, days: int = 30) -> List[Dict[str, Any]]:
        """
        Load run records from the last N days.

        Args:
            days: Number of days to look back

        Returns:
            List of run records, newest file first
        """
        cutoff = (datetime.now() - timedelta(days=days)).strftime("%Y-%m-%d")
        records = []
        for log_file in sorted(self.log_path.glob("*.json"), reverse=True):
            if log_file.stem < cutoff:
                continue
            try:
                with open(log_file, "r") as f:
                    records.extend(json.load(f))
            except (OSError, json.JSONDecodeError) as e:
                logger.warning(f"Failed to load {log_file}: {e}")
        logger.info(f"Loaded {len(records)} run records")
        return records
