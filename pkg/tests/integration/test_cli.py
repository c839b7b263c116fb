"""
Integration tests for the command-line interface
Each test drives main() end to end against an isolated container
"""
import io
import math
import tempfile
from pathlib import Path

import pandas as pd
import pytest
from src.di.container import DIContainer, reset_container
from src.ui.cli import build_parser, main, parse_run_spec

MODELS = Path(__file__).resolve().parents[2] / "models"


@pytest.fixture
def isolated_container():
    """Create an isolated DI container for each test"""
    reset_container()

    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir_path = Path(tmpdir)
        container = DIContainer(
            model_dir=MODELS,
            run_log_path=tmpdir_path / 'runs',
            output_dir=tmpdir_path / 'output',
            stream=io.StringIO(),
            error_stream=io.StringIO(),
        )

        # Force the global container to use this isolated one
        import src.di.container as container_module
        container_module._global_container = container

        yield container

        reset_container()


def _table(container) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(container.stream.getvalue()), comment="#")


class TestParsing:
    """Tests for argument parsing into RunSpec"""

    def test_parse_allocate(self):
        """Test flags land in RunSpec parameters"""
        spec = parse_run_spec(["allocate", "--model", "m.json", "--method", "kbar", "--alpha", "0.01",
                               "--horizon", "5", "--paths", "1000", "--no-bridge", "--out", "a.csv"])
        assert spec.command == "allocate"
        assert spec.model_path == "m.json"
        assert spec.output_path == "a.csv"
        assert spec.parameters["alpha"] == 0.01
        assert spec.parameters["paths"] == 1000
        assert spec.parameters["bridge"] is False
        assert spec.parameters["horizon"] == "5"

    def test_defaults(self):
        """Test omitted flags are None and the horizon defaults to infinity"""
        spec = parse_run_spec(["ruin", "--model", "m.json", "--u", "1"])
        assert spec.parameters["horizon"] == "inf"
        assert spec.parameters["seed"] is None
        assert spec.parameters["bridge"] is None

    def test_every_command_has_a_subparser(self):
        """Test the parser knows all six commands"""
        parser = build_parser()
        for command in ("ruin", "var", "allocate", "sweep", "figures", "verify"):
            assert parser.parse_args([command]).command == command


class TestWorkedExamples:
    """End-to-end runs reproducing the worked examples"""

    def test_brownian_ruin(self, isolated_container):
        """Test psi(2) = exp(-4)"""
        code = main(["ruin", "--model", "brownian_example.json", "--u", "2"], isolated_container)
        assert code == 0
        assert _table(isolated_container)["probability"].iloc[0] == pytest.approx(0.0183156388887342, rel=1e-12)

    def test_cp_var(self, isolated_container):
        """Test VaR^0.01 = 44.998"""
        assert main(["var", "--model", "cp_example.json", "--alpha", "0.01"], isolated_container) == 0
        assert _table(isolated_container)["var"].iloc[0] == pytest.approx(44.998, abs=1e-3)

    def test_asymptotic_fractions(self, isolated_container):
        """Test the Brownian limit fractions 1/3 and 2/3"""
        assert main(["allocate", "--model", "brownian_example.json", "--method", "asymptotic"],
                    isolated_container) == 0
        row = _table(isolated_container).iloc[0]
        assert row["c_1"] == pytest.approx(1 / 3, abs=1e-12)
        assert row["c_2"] == pytest.approx(2 / 3, abs=1e-12)

    def test_cp_asymptotic_fractions(self, isolated_container):
        """Test the compound Poisson limit fractions 2/9 and 7/9"""
        assert main(["allocate", "--model", "cp_example.json", "--method", "asymptotic"], isolated_container) == 0
        row = _table(isolated_container).iloc[0]
        assert row["c_1"] == pytest.approx(2 / 9, abs=1e-12)

    def test_std_corr_model_file(self, isolated_container):
        """Test the std/corr model file gives certain infinite-horizon ruin for positive drift"""
        assert main(["ruin", "--model", "brownian_positive_drift.json", "--u", "3"], isolated_container) == 0
        assert _table(isolated_container)["probability"].iloc[0] == 1.0

    def test_gradient_to_file(self, isolated_container):
        """Test GVaR written to a CSV file carries the metadata header"""
        code = main(["allocate", "--model", "brownian_example.json", "--method", "gvar", "--alpha", "0.01",
                     "--out", "gvar.csv"], isolated_container)
        assert code == 0
        path = isolated_container.output_dir / "gvar.csv"
        text = path.read_text()
        assert "# command: allocate gvar\n" in text
        assert "# model_sha256: " in text
        row = pd.read_csv(path, comment="#").iloc[0]
        assert row["K_1"] == pytest.approx(-math.log(0.01) / 6, rel=1e-12)

    def test_simulated_ruin_is_reproducible(self, isolated_container):
        """Test identical seeds give identical finite-horizon estimates"""
        argv = ["ruin", "--model", "cp_example.json", "--u", "2", "--horizon", "5", "--paths", "2000",
                "--seed", "17"]
        assert main(argv + ["--out", "a.csv"], isolated_container) == 0
        assert main(argv + ["--out", "b.csv"], isolated_container) == 0
        first = (isolated_container.output_dir / "a.csv").read_text()
        assert first == (isolated_container.output_dir / "b.csv").read_text()
        assert "# seed: 17\n" in first
        assert pd.read_csv(isolated_container.output_dir / "a.csv", comment="#")["method"].iloc[0] == "monte_carlo"

    def test_sweep(self, isolated_container):
        """Test a VaR sweep over alpha"""
        code = main(["sweep", "--model", "brownian_example.json", "--sweep-param", "alpha", "--quantity", "var",
                     "--start", "0.01", "--stop", "0.1", "--points", "2", "--spacing", "log"], isolated_container)
        assert code == 0
        table = _table(isolated_container)
        assert table["var"].tolist() == pytest.approx([-0.5 * math.log(0.01), -0.5 * math.log(0.1)])


class TestErrors:
    """Exit codes and the machine-readable error line"""

    def test_unknown_flag(self, isolated_container):
        """Test usage errors exit 1"""
        assert main(["ruin", "--bogus"], isolated_container) == 1
        assert isolated_container.error_stream.getvalue().startswith("error=DomainError exit=1 ")

    def test_missing_command(self, isolated_container):
        assert main([], isolated_container) == 1

    def test_invalid_log_level(self, isolated_container):
        """Test a bad log level is a usage error, not an interpreter exit"""
        assert main(["figures", "--log-level", "LOUD"], isolated_container) == 1

    def test_missing_model(self, isolated_container):
        """Test a missing model file exits 1"""
        assert main(["ruin", "--model", "absent.json", "--u", "1"], isolated_container) == 1
        assert "error=ConfigParseError" in isolated_container.error_stream.getvalue()

    def test_no_cramer_root(self, isolated_container):
        """Test VaR of a positive-drift model exits 2"""
        assert main(["var", "--model", "brownian_positive_drift.json", "--alpha", "0.1"], isolated_container) == 2
        assert "error=NoCramerRoot exit=2" in isolated_container.error_stream.getvalue()

    def test_undefined_sup_location(self, isolated_container):
        """Test sup-location for positive drift over an infinite horizon exits 2"""
        code = main(["allocate", "--model", "brownian_positive_drift.json", "--method", "kbar", "--u", "1"],
                    isolated_container)
        assert code == 2
        assert "error=UndefinedAllocation" in isolated_container.error_stream.getvalue()


class TestRunLog:
    """Run audit log through the CLI"""

    def test_runs_are_recorded(self, isolated_container):
        """Test both successful and failed runs are logged"""
        main(["ruin", "--model", "brownian_example.json", "--u", "2"], isolated_container)
        main(["var", "--model", "brownian_positive_drift.json", "--alpha", "0.1"], isolated_container)
        summary = isolated_container.get_run_logging_service().get_summary_statistics()
        assert summary["total_runs"] == 2
        assert summary["runs_per_exit_code"] == {0: 1, 2: 1}

    def test_run_log_flag(self, isolated_container, tmp_path):
        """Test --run-log redirects the audit log"""
        target = tmp_path / "audit"
        main(["ruin", "--model", "brownian_example.json", "--u", "1", "--run-log", str(target)], isolated_container)
        assert len(list(target.glob("*.json"))) == 1
