"""
Unit tests for phase-type claims and the weighted-portfolio ruin probability
"""
import math

import numpy as np
import pytest
from src.core.errors import DomainError
from src.core.model import CompoundPoissonExpModel
from src.core.phase_type import (
    MAX_DIMENSION,
    PhaseTypeClaim,
    matrix_exp,
    phase_type_ruin,
    weighted_premium,
)


def test_matrix_exp_basic():
    """Test e^0 = I and e^diag = diag(e^.)."""
    np.testing.assert_allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(matrix_exp(np.diag([-1.0, 2.0])), np.diag([math.exp(-1.0), math.exp(2.0)]),
                               rtol=1e-14)


@pytest.mark.parametrize("matrix", [
    np.zeros((2, 3)),
    np.zeros(4),
    np.full((2, 2), np.nan),
    np.zeros((MAX_DIMENSION + 1, MAX_DIMENSION + 1)),
])
def test_matrix_exp_rejects_bad_input(matrix):
    """Test non-square, non-finite and oversized matrices are rejected."""
    with pytest.raises(DomainError):
        matrix_exp(matrix)


def test_phase_type_claim_validation():
    """Test gamma must be a distribution and M a sub-intensity matrix."""
    with pytest.raises(DomainError):
        PhaseTypeClaim(gamma=(0.5, 0.4), sub_intensity=((-1.0, 0.0), (0.0, -1.0)))
    with pytest.raises(DomainError):
        PhaseTypeClaim(gamma=(0.5, 0.5), sub_intensity=((1.0, 0.0), (0.0, -1.0)))
    with pytest.raises(DomainError):
        PhaseTypeClaim(gamma=(1.0,), sub_intensity=((-1.0, 0.0), (0.0, -1.0)))


def test_phase_type_mean():
    """Test the mean -gamma M^{-1} e for diagonal and coupled matrices."""
    coupled = PhaseTypeClaim(gamma=(0.5, 0.5), sub_intensity=((-2.0, 1.0), (0.0, -3.0)))
    np.testing.assert_allclose(coupled.gamma_times_inverse(), [-0.25, -0.25])
    assert coupled.mean == pytest.approx(0.5)
    diagonal = PhaseTypeClaim(gamma=(0.25, 0.75), sub_intensity=((-1.0, 0.0), (0.0, -0.5)))
    assert diagonal.mean == pytest.approx(0.25 + 1.5)


def test_weighted_claims(cp_model):
    """Test the weighted portfolio has component rates theta / x_j."""
    claim = PhaseTypeClaim.weighted(cp_model, [2.0, 1.0])
    np.testing.assert_allclose(np.diag(claim.matrix), [-0.5, -1.0])
    np.testing.assert_allclose(claim.gamma_vector, [0.85 / 1.8, 0.95 / 1.8])
    assert weighted_premium(cp_model, [2.0, 1.0]) == 3.0


@pytest.mark.parametrize("u", [0.0, 1.0, 5.0, 10.0, 20.0])
def test_reduces_to_exponential_closed_form(cp_model, u):
    """Test unit weights reproduce 0.9 exp(-0.1 u)."""
    result = phase_type_ruin(cp_model, np.ones(2), u)
    assert not result.almost_sure
    assert result.probability == pytest.approx(0.9 * math.exp(-0.1 * u), abs=1e-10)


@pytest.mark.parametrize("u", [10.0, 20.0])
def test_ruin_increases_with_weight(cp_model, u):
    """Test psi rises as the weight of component 1 grows over [1, 1.2]."""
    values = [phase_type_ruin(cp_model, [x, 1.0], u).probability for x in np.linspace(1.0, 1.2, 5)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_second_component_weight(cp_model):
    """Test weighting the second component is allowed."""
    result = phase_type_ruin(cp_model, [1.0, 1.1], 5.0)
    assert 0.0 < result.probability < 1.0


def test_almost_sure_ruin_flag():
    """Test a weighted portfolio without net profit returns probability 1 with the flag set."""
    model = CompoundPoissonExpModel(premium_rates=(0.5, 1.5), intensities=(0.85, 0.95), claim_rate=1.0)
    result = phase_type_ruin(model, [10.0, 1.0], 3.0)
    assert result.almost_sure
    assert result.probability == 1.0
    assert result.to_dict() == {"probability": 1.0, "almost_sure": True}


@pytest.mark.parametrize("x", [[1.1, 1.1], [0.0, 1.0], [-1.0, 1.0], [1.0, 1.0, 1.0], [np.inf, 1.0]])
def test_weight_checks(cp_model, x):
    """Test weights must be positive, finite, of length d, with at most one away from 1."""
    with pytest.raises(DomainError):
        phase_type_ruin(cp_model, x, 1.0)


def test_rejects_negative_capital_and_brownian(cp_model, brownian_model):
    """Test capital and model-type checks."""
    with pytest.raises(DomainError):
        phase_type_ruin(cp_model, [1.0, 1.0], -1.0)
    with pytest.raises(DomainError):
        phase_type_ruin(brownian_model, [1.0, 1.0], 1.0)
