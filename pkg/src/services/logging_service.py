"""
Run Logging Service Implementation
Wraps the run-log store and keeps the audit trail of analysis runs
"""
import logging
from collections import Counter
from datetime import datetime
from typing import Any, Dict, List, Optional

from src.services.interfaces import RunLogStore

logger = logging.getLogger(__name__)


class RunLoggingService:
    """
    Business logic service for the run audit log.
    Recording is a no-op when no store is configured.
    """

    def __init__(self, log_store: Optional[RunLogStore] = None):
        """
        Initialize run logging service with an optional log store dependency.

        Args:
            log_store: RunLogStore implementation (FileRunLogStore), or None to disable the audit log
        """
        self.store = log_store
        logger.info(f"RunLoggingService initialized ({'enabled' if log_store else 'disabled'})")

    @property
    def enabled(self) -> bool:
        return self.store is not None

    def log_run(self, command: str, model_hash: Optional[str], parameters: Dict[str, Any],
                exit_code: int, error: Optional[str] = None) -> None:
        """
        Record one run.

        Args:
            command: CLI command name
            model_hash: SHA-256 of the model, if a model was used
            parameters: Command parameters
            exit_code: Process exit code
            error: Error class and message for failed runs
        """
        if self.store is None:
            return
        entry = {
            "timestamp": datetime.now().isoformat(),
            "command": command,
            "model_hash": model_hash,
            "parameters": {k: v for k, v in parameters.items() if v is not None},
            "exit_code": exit_code,
            "error": error,
        }
        self.store.append(entry)
        logger.info(f"Logged {command} run with exit code {exit_code}")

    def get_run_history(self, command: str = None, days: int = 30) -> List[Dict[str, Any]]:
        """
        Run records, newest first.

        Args:
            command: Optional filter by command
            days: Number of days to look back
        """
        if self.store is None:
            return []
        records = self.store.load_recent(days=days)
        if command:
            records = [r for r in records if r.get("command") == command]
        return sorted(records, key=lambda r: r.get("timestamp", ""), reverse=True)

    def get_summary_statistics(self, days: int = 30) -> Dict[str, Any]:
        """Counts of runs per command and per exit code"""
        history = self.get_run_history(days=days)
        return {
            "total_runs": len(history),
            "last_run": history[0].get("timestamp") if history else None,
            "runs_per_command": dict(Counter(r.get("command") for r in history)),
            "runs_per_exit_code": dict(Counter(r.get("exit_code") for r in history)),
        }
