"""
Property tests over randomized valid models: full allocation, scale invariance,
monotonicity of the ruin probability and self-consistency of the VaR inversion
"""
import numpy as np
import pytest
from src.core.allocation_engine import allocate_sup_location, allocate_time_of_ruin
from src.core.model import BrownianModel, CompoundPoissonExpModel, Horizon, RuinQuery
from src.core.ruin_engine import dynamic_var, ruin_prob

N_CASES = 100


def _random_brownian(rng: np.random.Generator) -> BrownianModel:
    d = int(rng.integers(2, 5))
    a = rng.normal(size=(d, d))
    cov = a @ a.T + 0.1 * np.eye(d)
    return BrownianModel(drift=rng.uniform(-2.0, 1.0, size=d).tolist(), covariance=cov.tolist())


def _random_cp(rng: np.random.Generator) -> CompoundPoissonExpModel:
    while True:
        d = int(rng.integers(2, 5))
        model = CompoundPoissonExpModel(premium_rates=rng.uniform(0.5, 2.0, size=d).tolist(),
                                        intensities=rng.uniform(0.2, 1.5, size=d).tolist(),
                                        claim_rate=float(rng.uniform(0.5, 2.0)))
        if model.net_profit:
            return model


def _brownian_cases():
    rng = np.random.default_rng(20240601)
    cases = []
    for _ in range(N_CASES):
        model = _random_brownian(rng)
        u = float(rng.uniform(0.1, 3.0))
        horizon = Horizon.finite(float(rng.uniform(0.5, 5.0))) if rng.random() < 0.7 else Horizon.infinite()
        cases.append((model, u, horizon))
    return cases


def _cp_cases():
    rng = np.random.default_rng(20240602)
    return [(_random_cp(rng), float(rng.uniform(0.1, 50.0))) for _ in range(N_CASES)]


BROWNIAN_CASES = _brownian_cases()
CP_CASES = _cp_cases()


def _sup_location_defined(model: BrownianModel, horizon: Horizon) -> bool:
    return not horizon.is_infinite or model.total_drift < 0


def test_brownian_full_allocation():
    """Test sum c_i = 1 and sum K_i = u for both Brownian methods."""
    for model, u, horizon in BROWNIAN_CASES:
        report = allocate_time_of_ruin(model, u, horizon)
        assert sum(report.fractions) == pytest.approx(1.0, abs=1e-9)
        assert sum(report.amounts) == pytest.approx(u, rel=1e-9)
        if _sup_location_defined(model, horizon):
            assert sum(allocate_sup_location(model, u, horizon).fractions) == pytest.approx(1.0, abs=1e-9)


def test_cp_full_allocation():
    """Test sum c_i = 1 for both compound Poisson methods."""
    horizon = Horizon.infinite()
    for model, u in CP_CASES:
        assert sum(allocate_time_of_ruin(model, u, horizon).fractions) == pytest.approx(1.0, abs=1e-9)
        assert sum(allocate_sup_location(model, u, horizon).fractions) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("gamma", [0.5, 3.0])
def test_brownian_scale_invariance(gamma):
    """Test fractions are unchanged when the model and the capital are scaled together."""
    for model, u, horizon in BROWNIAN_CASES[:30]:
        base = allocate_time_of_ruin(model, u, horizon).fractions
        scaled = allocate_time_of_ruin(model.scaled(gamma), gamma * u, horizon).fractions
        np.testing.assert_allclose(scaled, base, atol=1e-9)
        if _sup_location_defined(model, horizon):
            base_bar = allocate_sup_location(model, u, horizon).fractions
            scaled_bar = allocate_sup_location(model.scaled(gamma), gamma * u, horizon).fractions
            np.testing.assert_allclose(scaled_bar, base_bar, atol=1e-9)


@pytest.mark.parametrize("gamma", [0.5, 3.0])
def test_cp_scale_invariance(gamma):
    """Test compound Poisson fractions under joint scaling."""
    horizon = Horizon.infinite()
    for model, u in CP_CASES[:30]:
        for allocate in (allocate_time_of_ruin, allocate_sup_location):
            base = allocate(model, u, horizon).fractions
            scaled = allocate(model.scaled(gamma), gamma * u, horizon).fractions
            np.testing.assert_allclose(scaled, base, atol=1e-9)


def test_brownian_ruin_monotonicity():
    """Test psi(u, T) is non-increasing in u and non-decreasing in T."""
    capitals = [0.1, 0.5, 1.0, 2.0, 4.0]
    horizons = [Horizon.finite(T) for T in (0.1, 1.0, 10.0)] + [Horizon.infinite()]
    for model, _, _ in BROWNIAN_CASES[:20]:
        grid = np.array([[ruin_prob(model, RuinQuery(u, h)).probability for h in horizons] for u in capitals])
        assert np.all(np.diff(grid, axis=0) <= 1e-15)
        assert np.all(np.diff(grid, axis=1) >= -1e-15)


def test_cp_ruin_monotonicity():
    """Test the compound Poisson psi(u) is decreasing in u."""
    capitals = [0.0, 1.0, 5.0, 20.0, 80.0]
    for model, _ in CP_CASES[:20]:
        values = [ruin_prob(model, RuinQuery(u, Horizon.infinite())).probability for u in capitals]
        assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("alpha", [0.01, 0.1])
def test_var_self_consistency(alpha):
    """Test psi(VaR^alpha) = alpha whenever the VaR is positive."""
    for model, _, horizon in BROWNIAN_CASES[:30]:
        if horizon.is_infinite and model.total_drift >= 0:
            continue
        var = dynamic_var(model, alpha, horizon)
        assert ruin_prob(model, RuinQuery(var, horizon)).probability == pytest.approx(alpha, rel=1e-6)
    for model, _ in CP_CASES[:30]:
        var = dynamic_var(model, alpha, Horizon.infinite())
        p = ruin_prob(model, RuinQuery(var, Horizon.infinite())).probability
        if var > 0:
            assert p == pytest.approx(alpha, rel=1e-9)
        else:
            assert p <= alpha
