"""
Shared fixtures: the two worked-example models
"""
import pytest
from src.core.model import BrownianModel, CompoundPoissonExpModel


@pytest.fixture
def brownian_model():
    """Two correlated Brownian lines with negative drift: r=(-2,-1), unit variances, correlation 0.5."""
    return BrownianModel(drift=(-2.0, -1.0), covariance=((1.0, 0.5), (0.5, 1.0)))


@pytest.fixture
def brownian_positive_model():
    """Same covariance with positive drift r=(2,1)."""
    return BrownianModel(drift=(2.0, 1.0), covariance=((1.0, 0.5), (0.5, 1.0)))


@pytest.fixture
def cp_model():
    """Two compound Poisson lines: premiums (1,1), intensities (0.85,0.95), Exp(1) claims."""
    return CompoundPoissonExpModel(premium_rates=(1.0, 1.0), intensities=(0.85, 0.95), claim_rate=1.0)
