"""
CSV Result Store
Writes result tables as CSV preceded by '#'-prefixed metadata lines
"""
import io
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

import pandas as pd

logger = logging.getLogger(__name__)


class CsvResultStore:
    """
    Low-level CSV result storage.
    Responsible only for formatting and writing tables to files or a stream.
    """

    FLOAT_FORMAT = "%.17g"

    def __init__(self, output_dir: Path = None, stream: TextIO = None):
        """
        Initialize CSV result store.

        Args:
            output_dir: Base directory for relative output paths (defaults to the working directory)
            stream: Stream used when no output path is given (defaults to stdout)
        """
        self.output_dir = Path(output_dir) if output_dir else Path(".")
        self.stream = stream
        logger.info(f"CsvResultStore initialized with base directory: {self.output_dir}")

    def render(self, frame: pd.DataFrame, metadata: Dict[str, str]) -> str:
        """
        Render a table with its metadata header.

        Returns:
            CSV text: metadata lines, header row, data rows
        """
        buffer = io.StringIO()
        for key, value in metadata.items():
            buffer.write(f"# {key}: {value}\n")
        frame.to_csv(buffer, index=False, float_format=self.FLOAT_FORMAT, lineterminator="\n")
        return buffer.getvalue()

    def write(self, frame: pd.DataFrame, metadata: Dict[str, str],
              path: Optional[Union[str, Path]] = None) -> str:
        """
        Write a table to a file, or to the stream when path is None or '-'.

        Returns:
            Description of the destination
        """
        text = self.render(frame, metadata)
        if path is None or str(path) == "-":
            stream = self.stream or sys.stdout
            stream.write(text)
            stream.flush()
            return "<stdout>"
        target = Path(path)
        target = target if target.is_absolute() else self.output_dir / target
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(frame)} rows to {target}")
        return str(target)

    def list_outputs(self, directory: Union[str, Path]) -> List[str]:
        """Names of the CSV files in a directory"""
        directory = Path(directory)
        directory = directory if directory.is_absolute() else self.output_dir / directory
        return sorted(p.name for p in directory.glob("*.csv"))
