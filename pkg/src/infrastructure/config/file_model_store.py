"""
File-based Model Store
Handles JSON file I/O for risk-model configurations
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from src.core.errors import ConfigParseError

logger = logging.getLogger(__name__)


class FileModelStore:
    """
    Low-level JSON model file storage.
    Responsible only for file I/O; schema checks live in the configuration service.
    """

    def __init__(self, model_dir: Path = None):
        """
        Initialize file model store.

        Args:
            model_dir: Base directory for relative model paths (defaults to the working directory)
        """
        self.model_dir = Path(model_dir) if model_dir else Path(".")
        logger.info(f"FileModelStore initialized with base directory: {self.model_dir}")

    def resolve(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.model_dir / path

    def load(self, path: Union[str, Path]) -> Dict[str, Any]:
        """
        Load a model configuration from a JSON file.

        Args:
            path: Path to the model file

        Returns:
            Parsed JSON document

        Raises:
            ConfigParseError: file missing, unreadable, not UTF-8, empty or not valid JSON
        """
        model_path = self.resolve(path)
        if not model_path.exists():
            raise ConfigParseError(f"model file not found: {model_path}")
        try:
            text = model_path.read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            raise ConfigParseError(f"model file is not valid UTF-8: {model_path} (byte {e.start})")
        except OSError as e:
            raise ConfigParseError(f"cannot read model file {model_path}: {e.strerror or e}")
        if not text.strip():
            raise ConfigParseError(f"model file is empty: {model_path}", line=1, column=1)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigParseError(f"invalid JSON in {model_path}: {e.msg}", line=e.lineno, column=e.colno)
        logger.info(f"Loaded model config from {model_path}")
        return data

    def save(self, path: Union[str, Path], data: Dict[str, Any]) -> Path:
        """
        Save a model configuration to a JSON file.

        Args:
            path: Destination path
            data: Model document

        Returns:
            The resolved path written
        """
        model_path = self.resolve(path)
        model_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with open(model_path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2)
            logger.info(f"Saved model config to {model_path}")
        except OSError as e:
            logger.error(f"Failed to save model config: {e}")
            raise
        return model_path
