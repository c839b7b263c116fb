"""
Unit tests for DI Container
"""
import tempfile
from pathlib import Path

import pytest
from src.di.container import RUN_LOG_ENV, DIContainer, get_container, reset_container
from src.infrastructure.config.file_model_store import FileModelStore
from src.infrastructure.storage.csv_result_store import CsvResultStore
from src.services.analysis_orchestrator import AnalysisOrchestrator
from src.services.config_service import ConfigurationService
from src.services.logging_service import RunLoggingService
from src.services.storage_service import ResultStorageService


@pytest.fixture
def temp_paths():
    """Create temporary paths for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        tmpdir_path = Path(tmpdir)
        yield {
            'models': tmpdir_path / 'models',
            'runs': tmpdir_path / 'runs',
            'output': tmpdir_path / 'output',
        }


@pytest.fixture
def container(temp_paths):
    """Create a DI container for testing."""
    return DIContainer(model_dir=temp_paths['models'], run_log_path=temp_paths['runs'],
                       output_dir=temp_paths['output'])


def test_container_initialization(container, temp_paths):
    """Test container initializes with correct paths."""
    assert container.model_dir == temp_paths['models']
    assert container.run_log_path == temp_paths['runs']
    assert container.output_dir == temp_paths['output']


def test_service_types(container):
    """Test each getter returns the expected type."""
    assert isinstance(container.get_file_model_store(), FileModelStore)
    assert isinstance(container.get_csv_result_store(), CsvResultStore)
    assert isinstance(container.get_configuration_service(), ConfigurationService)
    assert isinstance(container.get_run_logging_service(), RunLoggingService)
    assert isinstance(container.get_result_storage_service(), ResultStorageService)
    assert isinstance(container.get_analysis_orchestrator(), AnalysisOrchestrator)


def test_singletons(container):
    """Test services are created once and shared."""
    orchestrator = container.get_analysis_orchestrator()
    assert container.get_analysis_orchestrator() is orchestrator
    assert orchestrator.config is container.get_configuration_service()
    assert orchestrator.storage is container.get_result_storage_service()


def test_run_log_disabled_by_default(temp_paths, monkeypatch):
    """Test the run log is off without a path or environment variable."""
    monkeypatch.delenv(RUN_LOG_ENV, raising=False)
    container = DIContainer(model_dir=temp_paths['models'])
    assert container.get_file_run_log_store() is None
    assert not container.get_run_logging_service().enabled


def test_run_log_from_environment(temp_paths, monkeypatch):
    """Test RUINALLOC_RUN_LOG_DIR enables the run log."""
    monkeypatch.setenv(RUN_LOG_ENV, str(temp_paths['runs']))
    container = DIContainer()
    assert container.run_log_path == temp_paths['runs']
    assert container.get_run_logging_service().enabled


def test_clear(container):
    """Test clear drops every singleton."""
    store = container.get_file_model_store()
    container.clear()
    assert container.get_service_info()['singletons_created'] == []
    assert container.get_file_model_store() is not store


def test_service_info(container, temp_paths):
    """Test get_service_info reports paths and created singletons."""
    container.get_configuration_service()
    info = container.get_service_info()
    assert info['run_log_path'] == str(temp_paths['runs'])
    assert set(info['singletons_created']) == {'FileModelStore', 'ConfigurationService'}


def test_global_container(temp_paths):
    """Test get_container returns one instance until reset."""
    reset_container()
    first = get_container(model_dir=temp_paths['models'])
    assert get_container() is first
    reset_container()
    assert get_container() is not first
    reset_container()
