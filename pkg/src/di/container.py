"""
Dependency Injection Container
Manages service instantiation, lifecycle, and dependency resolution
"""
import logging
import os
from pathlib import Path
from typing import Dict, Any, Optional, TextIO
from dotenv import load_dotenv
from src.infrastructure.config.file_model_store import FileModelStore
from src.infrastructure.logging.file_run_log_store import FileRunLogStore
from src.infrastructure.storage.csv_result_store import CsvResultStore
from src.services.config_service import ConfigurationService
from src.services.logging_service import RunLoggingService
from src.services.storage_service import ResultStorageService
from src.services.analysis_orchestrator import AnalysisOrchestrator

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

RUN_LOG_ENV = "RUINALLOC_RUN_LOG_DIR"


class DIContainer:
    """
    Dependency Injection Container
    Builds services lazily and caches each as a singleton.
    """

    def __init__(self, model_dir: Path = None, run_log_path: Path = None,
                 output_dir: Path = None, stream: TextIO = None, error_stream: TextIO = None):
        """
        Initialize the DI container.

        Args:
            model_dir: Base directory for relative model paths (defaults to the working directory)
            run_log_path: Run audit log directory (defaults to $RUINALLOC_RUN_LOG_DIR; unset disables it)
            output_dir: Base directory for relative output paths (defaults to the working directory)
            stream: Stream for tables written to standard output
            error_stream: Stream for the machine-readable error line
        """
        self.model_dir = Path(model_dir) if model_dir else Path(".")
        run_log = run_log_path or os.getenv(RUN_LOG_ENV)
        self.run_log_path = Path(run_log) if run_log else None
        self.output_dir = Path(output_dir) if output_dir else Path(".")
        self.stream = stream
        self.error_stream = error_stream

        # Singleton instance cache
        self._singletons: Dict[str, Any] = {}

        logger.info("DIContainer initialized with paths:")
        logger.info(f"  Models: {self.model_dir}")
        logger.info(f"  Run log: {self.run_log_path or 'disabled'}")
        logger.info(f"  Output: {self.output_dir}")

    def get_file_model_store(self) -> FileModelStore:
        """Get or create FileModelStore (singleton)"""
        if 'FileModelStore' not in self._singletons:
            logger.info("Creating FileModelStore singleton")
            self._singletons['FileModelStore'] = FileModelStore(self.model_dir)
        return self._singletons['FileModelStore']

    def get_file_run_log_store(self) -> Optional[FileRunLogStore]:
        """Get or create FileRunLogStore (singleton); None when the run log is disabled"""
        if self.run_log_path is None:
            return None
        if 'FileRunLogStore' not in self._singletons:
            logger.info("Creating FileRunLogStore singleton")
            self._singletons['FileRunLogStore'] = FileRunLogStore(self.run_log_path)
        return self._singletons['FileRunLogStore']

    def get_csv_result_store(self) -> CsvResultStore:
        """Get or create CsvResultStore (singleton)"""
        if 'CsvResultStore' not in self._singletons:
            logger.info("Creating CsvResultStore singleton")
            self._singletons['CsvResultStore'] = CsvResultStore(self.output_dir, self.stream)
        return self._singletons['CsvResultStore']

    def get_configuration_service(self) -> ConfigurationService:
        """Get or create ConfigurationService (singleton)"""
        if 'ConfigurationService' not in self._singletons:
            logger.info("Creating ConfigurationService singleton")
            store = self.get_file_model_store()
            self._singletons['ConfigurationService'] = ConfigurationService(store)
        return self._singletons['ConfigurationService']

    def get_run_logging_service(self) -> RunLoggingService:
        """Get or create RunLoggingService (singleton)"""
        if 'RunLoggingService' not in self._singletons:
            logger.info("Creating RunLoggingService singleton")
            store = self.get_file_run_log_store()
            self._singletons['RunLoggingService'] = RunLoggingService(store)
        return self._singletons['RunLoggingService']

    def get_result_storage_service(self) -> ResultStorageService:
        """Get or create ResultStorageService (singleton)"""
        if 'ResultStorageService' not in self._singletons:
            logger.info("Creating ResultStorageService singleton")
            store = self.get_csv_result_store()
            self._singletons['ResultStorageService'] = ResultStorageService(store)
        return self._singletons['ResultStorageService']

    def get_analysis_orchestrator(self) -> AnalysisOrchestrator:
        """Get or create AnalysisOrchestrator (singleton)"""
        if 'AnalysisOrchestrator' not in self._singletons:
            logger.info("Creating AnalysisOrchestrator singleton")
            config_service = self.get_configuration_service()
            logging_service = self.get_run_logging_service()
            storage_service = self.get_result_storage_service()
            self._singletons['AnalysisOrchestrator'] = AnalysisOrchestrator(
                config_service, logging_service, storage_service, self.error_stream
            )
        return self._singletons['AnalysisOrchestrator']

    def clear(self):
        """Clear all singleton instances (useful for testing)"""
        logger.info("Clearing all singleton instances")
        self._singletons.clear()

    def get_service_info(self) -> Dict[str, Any]:
        """Get the configured paths and the singletons created so far"""
        return {
            'model_dir': str(self.model_dir),
            'run_log_path': str(self.run_log_path) if self.run_log_path else None,
            'output_dir': str(self.output_dir),
            'singletons_created': list(self._singletons.keys())
        }


# Global container instance
_global_container: Optional[DIContainer] = None


def get_container(model_dir: Path = None, run_log_path: Path = None,
                  output_dir: Path = None) -> DIContainer:
    """
    Get or create the global DI container.

    Args:
        model_dir: Base directory for model files (optional)
        run_log_path: Run audit log directory (optional, falls back to $RUINALLOC_RUN_LOG_DIR)
        output_dir: Base directory for output files (optional)

    Returns:
        Global DIContainer instance
    """
    global _global_container

    if _global_container is None:
        _global_container = DIContainer(model_dir, run_log_path, output_dir)

    return _global_container


def reset_container():
    """Reset the global container (useful for testing)"""
    global _global_container
    if _global_container:
        _global_container.clear()
    _global_container = None
    logger.info("Global container reset")
