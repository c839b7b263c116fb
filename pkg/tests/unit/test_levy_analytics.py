"""
Unit tests for Lévy exponents, Cramér roots and the exponential tilt
"""
import math

import numpy as np
import pytest
from src.core.errors import DomainError, NoCramerRoot
from src.core.levy_analytics import (
    cond_abs_mean_bivariate_normal,
    cramer_root,
    cramer_root_generic,
    joint_transform,
    levy_exponent_aggregate,
    levy_exponent_derivative,
    tilt,
)
from src.core.model import CompoundPoissonExpModel


def test_brownian_cramer_root(brownian_model):
    """Test theta* = -2r/sigma^2 and that it is a root of the exponent."""
    theta_star = cramer_root(brownian_model)
    assert theta_star == 2.0
    assert levy_exponent_aggregate(brownian_model, theta_star) == pytest.approx(0.0, abs=1e-14)
    assert levy_exponent_derivative(brownian_model, 0.0) == -3.0


def test_cp_cramer_root(cp_model):
    """Test theta* = theta - lambda/r for exponential claims."""
    theta_star = cramer_root(cp_model)
    assert theta_star == pytest.approx(0.1, abs=1e-14)
    assert levy_exponent_aggregate(cp_model, theta_star) == pytest.approx(0.0, abs=1e-14)
    assert levy_exponent_derivative(cp_model, theta_star) > 0


def test_no_root_without_negative_drift(brownian_positive_model):
    """Test NoCramerRoot for positive drift and for violated net profit."""
    with pytest.raises(NoCramerRoot):
        cramer_root(brownian_positive_model)
    risky = CompoundPoissonExpModel(premium_rates=(0.5, 0.5), intensities=(0.85, 0.95), claim_rate=1.0)
    with pytest.raises(NoCramerRoot):
        cramer_root(risky)
    with pytest.raises(NoCramerRoot):
        tilt(risky)


def test_cp_exponent_pole(cp_model):
    """Test the exponent is undefined at and beyond the claim rate."""
    with pytest.raises(DomainError):
        levy_exponent_aggregate(cp_model, 1.0)
    with pytest.raises(DomainError):
        joint_transform(cp_model, [0.5, 1.5])


def test_joint_transform_at_root(brownian_model, cp_model):
    """Test E[exp(theta* S(1))] = 1 when every component uses the Cramér root."""
    for model in (brownian_model, cp_model):
        theta_star = cramer_root(model)
        assert joint_transform(model, [theta_star] * model.d) == pytest.approx(1.0, rel=1e-13)


def test_generic_root_brownian(brownian_model):
    """Test the generic root finder recovers the Brownian closed form."""
    root = cramer_root_generic(lambda t: levy_exponent_aggregate(brownian_model, t))
    assert root == pytest.approx(2.0, abs=1e-9)


def test_generic_root_with_pole(cp_model):
    """Test the generic root finder respects the pole of the compound Poisson exponent."""
    exponent = lambda t: -2.0 * t + 1.8 * t / (1.0 - t)
    assert cramer_root_generic(exponent, pole=1.0) == pytest.approx(0.1, abs=1e-9)
    derivative = lambda t: levy_exponent_derivative(cp_model, t)
    assert cramer_root_generic(exponent, pole=1.0, derivative=derivative) == pytest.approx(0.1, abs=1e-9)


def test_generic_root_rejects_nonnegative_drift():
    """Test the generic root finder raises when the exponent starts increasing."""
    with pytest.raises(NoCramerRoot):
        cramer_root_generic(lambda t: t + t * t)
    with pytest.raises(NoCramerRoot):
        cramer_root_generic(lambda t: -t, pole=1.0)


def test_brownian_tilt(brownian_model):
    """Test the Q-drift r_i + theta* sum_j Sigma_ji and m = -r."""
    tilted = tilt(brownian_model)
    assert tilted.m_components == (1.0, 2.0)
    assert tilted.m_total == 3.0
    assert tilted.q_model.covariance == brownian_model.covariance
    np.testing.assert_allclose(tilted.fractions, [1 / 3, 2 / 3], atol=1e-15)


def test_cp_tilt(cp_model):
    """Test the tilted compound Poisson parameters and the drift decomposition."""
    tilted = tilt(cp_model)
    q = tilted.q_model
    assert q.claim_rate == pytest.approx(0.9)
    np.testing.assert_allclose(q.intensities, [0.85 * 2 / 1.8, 0.95 * 2 / 1.8])
    assert tilted.m_total == pytest.approx(-2.0 + 4.0 / 1.8)
    assert sum(tilted.m_components) == pytest.approx(tilted.m_total, rel=1e-12)
    # the Q-drift of S equals m
    assert -q.total_premium + q.total_intensity / q.claim_rate == pytest.approx(tilted.m_total, rel=1e-12)
    np.testing.assert_allclose(tilted.fractions, [2 / 9, 7 / 9], atol=1e-12)


def test_tilted_params_to_dict(brownian_model):
    """Test the serialised tilt carries the Q-model in schema form."""
    data = tilt(brownian_model).to_dict()
    assert data["theta_star"] == 2.0
    assert data["q_model"]["type"] == "brownian"
    assert data["q_model"]["drift"] == [1.0, 2.0]


def test_cond_abs_mean_bivariate_normal():
    """Test the folded-normal conditional mean in the independent and degenerate cases."""
    independent = cond_abs_mean_bivariate_normal(0.0, 5.0, 1.0, 2.0, 0.0, 100.0)
    assert independent == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-12)
    degenerate = cond_abs_mean_bivariate_normal(1.0, 0.0, 2.0, 1.0, 1.0, -3.0)
    assert degenerate == pytest.approx(5.0)
    with pytest.raises(DomainError):
        cond_abs_mean_bivariate_normal(0.0, 0.0, 1.0, 1.0, 1.5, 0.0)


def _theta_grid(model):
    if isinstance(model, CompoundPoissonExpModel):
        return np.linspace(-3.0, model.claim_rate - 0.05, 200)
    return np.linspace(-5.0, 5.0, 200)


def test_exponent_is_convex(brownian_model, brownian_positive_model, cp_model):
    """Test second differences of kappa are non-negative on a grid."""
    h = 1e-3
    for model in (brownian_model, brownian_positive_model, cp_model):
        for t in _theta_grid(model):
            second = (levy_exponent_aggregate(model, t + h) - 2.0 * levy_exponent_aggregate(model, t)
                      + levy_exponent_aggregate(model, t - h))
            assert second >= -1e-9


def test_tilt_matches_transform_gradient(brownian_model, cp_model):
    """Test m_i is the partial derivative of ln E[exp(<theta, S(1)>)] at theta* in every coordinate."""
    h = 1e-5
    for model in (brownian_model, cp_model):
        tilted = tilt(model)
        base = np.full(model.d, tilted.theta_star)
        for i, m_i in enumerate(tilted.m_components):
            step = np.zeros(model.d)
            step[i] = h
            up = math.log(joint_transform(model, base + step))
            down = math.log(joint_transform(model, base - step))
            assert (up - down) / (2.0 * h) == pytest.approx(m_i, rel=1e-6)


def test_m_total_is_exponent_slope_at_root(brownian_model, cp_model):
    """Test m = kappa'(theta*)."""
    for model in (brownian_model, cp_model):
        tilted = tilt(model)
        assert tilted.m_total == pytest.approx(levy_exponent_derivative(model, tilted.theta_star), rel=1e-9)
