"""
Unit tests for CsvResultStore
"""
import io
import tempfile
from pathlib import Path

import pandas as pd
import pytest
from src.infrastructure.storage.csv_result_store import CsvResultStore


@pytest.fixture
def temp_output_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def frame():
    return pd.DataFrame({"u": [1.0, 2.0], "psi": [0.1, 1 / 3]})


def test_render_header_and_precision(frame):
    """Test metadata lines precede the header and floats keep 17 significant digits."""
    store = CsvResultStore()
    lines = store.render(frame, {"command": "ruin", "seed": "none"}).splitlines()

    assert lines[0] == "# command: ruin"
    assert lines[1] == "# seed: none"
    assert lines[2] == "u,psi"
    assert lines[4] == "2,0.33333333333333331"
    assert float(lines[4].split(",")[1]) == 1 / 3


def test_write_to_stream(frame):
    """Test path None or '-' writes to the configured stream."""
    stream = io.StringIO()
    store = CsvResultStore(stream=stream)
    assert store.write(frame, {"command": "ruin"}) == "<stdout>"
    assert store.write(frame, {"command": "ruin"}, "-") == "<stdout>"
    assert stream.getvalue().count("# command: ruin") == 2


def test_write_to_file(temp_output_dir, frame):
    """Test relative paths resolve against the output directory and parents are created."""
    store = CsvResultStore(output_dir=temp_output_dir)
    destination = store.write(frame, {"command": "var"}, "nested/out.csv")

    target = temp_output_dir / "nested" / "out.csv"
    assert destination == str(target)
    loaded = pd.read_csv(target, comment="#")
    assert list(loaded.columns) == ["u", "psi"]
    assert loaded["psi"].iloc[1] == 1 / 3


def test_list_outputs(temp_output_dir, frame):
    """Test listing the CSV files of a directory."""
    store = CsvResultStore(output_dir=temp_output_dir)
    store.write(frame, {}, "figs/b.csv")
    store.write(frame, {}, "figs/a.csv")
    (temp_output_dir / "figs" / "notes.txt").write_text("x")

    assert store.list_outputs("figs") == ["a.csv", "b.csv"]
