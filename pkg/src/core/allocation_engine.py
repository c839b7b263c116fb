"""
Allocation Engine
Capital allocation by time of ruin (K_i), by supremum location (K-bar_i), by the
gradient of the dynamic VaR (GVaR_i), and the asymptotic fractions m_i/m.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import DomainError, NotSupported, UndefinedAllocation
from src.core.levy_analytics import cramer_root_generic, tilt
from src.core.model import BrownianModel, CompoundPoissonExpModel, Horizon, RiskModel, require_valid
from src.core.phase_type import phase_type_ruin
from src.core.ruin_engine import (
    bisect_var,
    brownian_ruin_probability,
    dynamic_var,
    expected_argmax_time_given_sup,
    expected_ruin_time_given_ruin,
)
from src.core.simulator import SimAllocation, SimConfig, simulate_allocation_sup_location, simulate_allocation_time_of_ruin

logger = logging.getLogger(__name__)

TIME_OF_RUIN = "time_of_ruin"
SUP_LOCATION = "sup_location"
GRADIENT = "gradient"
ASYMPTOTIC = "asymptotic"

CLOSED_FORM = "closed_form"
MONTE_CARLO = "monte_carlo"
NUMERIC = "numeric_gradient"

GRADIENT_STEP = 1e-4
GRADIENT_VAR_TOLERANCE = 1e-13


@dataclass(frozen=True)
class AllocationReport:
    """Allocated fractions c_i and amounts K_i for capital u"""
    method: str
    u: Optional[float]
    horizon: Horizon
    fractions: Tuple[float, ...]
    amounts: Optional[Tuple[float, ...]] = None
    estimator: str = CLOSED_FORM
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def fraction_vector(self) -> np.ndarray:
        return np.array(self.fractions)

    @property
    def amount_vector(self) -> Optional[np.ndarray]:
        return None if self.amounts is None else np.array(self.amounts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "u": self.u,
            "horizon": str(self.horizon),
            "fractions": list(self.fractions),
            "amounts": None if self.amounts is None else list(self.amounts),
            "estimator": self.estimator,
            "diagnostics": dict(self.diagnostics),
        }


def _check_capital(u: float) -> float:
    u = float(u)
    if not (u > 0 and math.isfinite(u)):
        raise DomainError(f"allocation needs capital u > 0, got {u}")
    return u


def _tuple(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _report(method: str, u: float, horizon: Horizon, amounts: np.ndarray, **diagnostics) -> AllocationReport:
    return AllocationReport(method=method, u=u, horizon=horizon, fractions=_tuple(amounts / u),
                            amounts=_tuple(amounts), diagnostics=diagnostics)


def _simulated_report(method: str, u: float, horizon: Horizon, sim: SimAllocation) -> AllocationReport:
    fractions = np.array([e.value for e in sim.fractions])
    diagnostics = {
        "fraction_std_errors": [e.std_error for e in sim.fractions],
        "n_effective": sim.aggregate_mean.n_effective,
        "seed": sim.aggregate_mean.seed,
    }
    key = "expected_ruin_time" if method == TIME_OF_RUIN else "expected_argmax_time"
    diagnostics[key] = sim.time_mean.value
    return AllocationReport(method=method, u=u, horizon=horizon, fractions=_tuple(fractions),
                            amounts=_tuple(fractions * u), estimator=MONTE_CARLO, diagnostics=diagnostics)


def _brownian_amounts(model: BrownianModel, u: float, expected_time: float) -> np.ndarray:
    """K_i = beta_i u + (r_i - beta_i r) E[time]"""
    betas = model.betas
    return betas * u + (model.drift_vector - betas * model.total_drift) * expected_time


def _cp_closed_form(model: CompoundPoissonExpModel, u: float, normalise_by_overshoot: bool):
    """
    Shared pieces of the compound Poisson closed forms.

    Returns:
        (amounts, expected_time) where expected_time = (u + 1/theta^Q) / m
    """
    tilted = tilt(model)
    q_claim_rate = tilted.q_model.claim_rate
    shares = model.intensity_vector / model.total_intensity
    expected_time = (u + 1.0 / q_claim_rate) / tilted.m_total
    drift_term = (shares * model.total_premium - model.premium_vector) * expected_time
    if normalise_by_overshoot:
        fractions = shares + drift_term / (u + 1.0 / model.claim_rate)
        return fractions * u, expected_time
    return shares * u + drift_term, expected_time


def allocate_time_of_ruin(model: RiskModel, u: float, horizon: Horizon,
                          sim_config: Optional[SimConfig] = None) -> AllocationReport:
    """
    K_i(u, S, T) = c_i u with c_i = E[S_i(tau) | tau <= T] / E[S(tau) | tau <= T].

    Raises:
        InfeasibleCondition: ruin probability underflows
        UndefinedAllocation: Brownian infinite horizon with zero drift and nonzero component drifts
        NoCramerRoot: compound Poisson without net profit
    """
    require_valid(model)
    u = _check_capital(u)
    if isinstance(model, BrownianModel):
        expected_time = expected_ruin_time_given_ruin(model, u, horizon)
        if math.isinf(expected_time):
            if np.any(model.drift_vector != 0.0):
                raise UndefinedAllocation("zero aggregate drift: expected ruin time is infinite")
            expected_time = 0.0
        amounts = _brownian_amounts(model, u, expected_time)
        return _report(TIME_OF_RUIN, u, horizon, amounts, expected_ruin_time=expected_time)

    if horizon.is_infinite:
        amounts, expected_time = _cp_closed_form(model, u, normalise_by_overshoot=True)
        return _report(TIME_OF_RUIN, u, horizon, amounts, expected_ruin_time=expected_time,
                       expected_aggregate_at_ruin=u + 1.0 / model.claim_rate)

    logger.info(f"Simulating finite-horizon compound Poisson time-of-ruin allocation (u={u}, T={horizon.T})")
    sim = simulate_allocation_time_of_ruin(model, u, horizon.T, sim_config or SimConfig())
    return _simulated_report(TIME_OF_RUIN, u, horizon, sim)


def allocate_sup_location(model: RiskModel, u: float, horizon: Horizon,
                          sim_config: Optional[SimConfig] = None) -> AllocationReport:
    """
    K-bar_i(u, S, T) = E[S_i(t*) | S(t*) = u, t* <= T].

    Raises:
        UndefinedAllocation: Brownian infinite horizon with r >= 0
        NoCramerRoot: compound Poisson without net profit
    """
    require_valid(model)
    u = _check_capital(u)
    if isinstance(model, BrownianModel):
        expected_time = expected_argmax_time_given_sup(model, u, horizon)
        amounts = _brownian_amounts(model, u, expected_time)
        return _report(SUP_LOCATION, u, horizon, amounts, expected_argmax_time=expected_time)

    if horizon.is_infinite:
        amounts, expected_time = _cp_closed_form(model, u, normalise_by_overshoot=False)
        return _report(SUP_LOCATION, u, horizon, amounts, expected_argmax_time=expected_time)

    logger.info(f"Simulating finite-horizon compound Poisson sup-location allocation (u={u}, T={horizon.T})")
    sim = simulate_allocation_sup_location(model, u, horizon.T, sim_config or SimConfig())
    return _simulated_report(SUP_LOCATION, u, horizon, sim)


def richardson_derivative(f: Callable[[float], float], x: float = 1.0, h: float = GRADIENT_STEP) -> float:
    """Central difference at steps h and h/2 combined by one Richardson step"""
    coarse = (f(x + h) - f(x - h)) / (2.0 * h)
    half = 0.5 * h
    fine = (f(x + half) - f(x - half)) / (2.0 * half)
    return (4.0 * fine - coarse) / 3.0


def _gradient_report(u: float, horizon: Horizon, amounts: np.ndarray, estimator: str,
                     **diagnostics) -> AllocationReport:
    if u <= 0.0:
        raise UndefinedAllocation("VaR is zero, gradient fractions are undefined")
    return AllocationReport(method=GRADIENT, u=u, horizon=horizon, fractions=_tuple(amounts / u),
                            amounts=_tuple(amounts), estimator=estimator,
                            diagnostics={"var": u, **diagnostics})


def weighted_cp_var(model: CompoundPoissonExpModel, i: int, x_i: float, alpha: float) -> float:
    """VaR of sum_{j != i} S_j + x_i S_i by bisection on the phase-type ruin probability"""
    x = np.ones(model.d)
    x[i] = x_i
    return bisect_var(lambda u: phase_type_ruin(model, x, u).probability, alpha,
                      tolerance=GRADIENT_VAR_TOLERANCE)


def weighted_brownian_var(model: BrownianModel, i: int, x_i: float, alpha: float, horizon: Horizon) -> float:
    """VaR of sum_{j != i} S_j + x_i S_i for the Brownian model"""
    r, variance = model.weighted_aggregate(i, x_i)
    if horizon.is_infinite:
        return variance / (2.0 * r) * math.log(alpha)
    T = horizon.T
    return bisect_var(lambda u: brownian_ruin_probability(r, variance, u, T), alpha,
                      tolerance=GRADIENT_VAR_TOLERANCE)


def allocate_gradient(model: RiskModel, alpha: float, horizon: Horizon) -> AllocationReport:
    """
    GVaR_i = d/dx_i VaR^alpha(sum_{j != i} S_j + x_i S_i) at x = 1.

    Brownian infinite horizon uses the closed form; Brownian finite horizon equals the
    sup-location allocation at u = VaR; compound Poisson differentiates the phase-type VaR.

    Raises:
        NoCramerRoot: infinite horizon without negative drift
        NotSupported: compound Poisson with a finite horizon
    """
    u = dynamic_var(model, alpha, horizon)
    if isinstance(model, BrownianModel):
        if horizon.is_infinite:
            r = model.total_drift
            variance = model.total_variance
            amounts = math.log(alpha) * (2.0 * r * r * model.cov_with_aggregate
                                         - model.drift_vector * r * variance) / (2.0 * r ** 3)
            return _gradient_report(u, horizon, amounts, CLOSED_FORM)
        sup = allocate_sup_location(model, u, horizon)
        return _gradient_report(u, horizon, sup.amount_vector, CLOSED_FORM,
                                expected_argmax_time=sup.diagnostics["expected_argmax_time"])

    if not horizon.is_infinite:
        raise NotSupported("gradient allocation needs an infinite horizon for the compound Poisson model")
    amounts = np.array([
        richardson_derivative(lambda x_i, i=i: weighted_cp_var(model, i, x_i, alpha))
        for i in range(model.d)
    ])
    logger.debug(f"Phase-type gradient amounts {amounts.tolist()} at VaR {u}")
    return _gradient_report(u, horizon, amounts, NUMERIC)


def gradient_numeric_brownian(model: BrownianModel, alpha: float, horizon: Horizon) -> AllocationReport:
    """Brownian GVaR by differentiating the weighted-portfolio VaR numerically"""
    if not isinstance(model, BrownianModel):
        raise NotSupported("numeric Brownian gradient needs a Brownian model")
    u = dynamic_var(model, alpha, horizon)
    amounts = np.array([
        richardson_derivative(lambda x_i, i=i: weighted_brownian_var(model, i, x_i, alpha, horizon))
        for i in range(model.d)
    ])
    return _gradient_report(u, horizon, amounts, NUMERIC)


def generic_gradient_allocation(weighted_exponent: Callable[[np.ndarray], Callable[[float], float]],
                                alpha: float, d: int,
                                pole: Optional[Callable[[np.ndarray], float]] = None) -> AllocationReport:
    """
    Gradient allocation of a spectrally negative model known only through exponents.

    Args:
        weighted_exponent: maps weights x to the Lévy exponent of sum_j x_j S_j
        alpha: ruin probability level
        d: number of components
        pole: maps weights x to the right end of the exponent's domain (None if entire)

    Returns:
        AllocationReport with GVaR_i = d/dx_i (-ln(alpha) / theta*(x)) at x = 1
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")

    def var_at(x: np.ndarray) -> float:
        root = cramer_root_generic(weighted_exponent(x), pole=None if pole is None else pole(x))
        return -math.log(alpha) / root

    def perturbed(i: int) -> Callable[[float], float]:
        def f(x_i: float) -> float:
            x = np.ones(d)
            x[i] = x_i
            return var_at(x)
        return f

    u = var_at(np.ones(d))
    amounts = np.array([richardson_derivative(perturbed(i)) for i in range(d)])
    return _gradient_report(u, Horizon.infinite(), amounts, NUMERIC)


def allocate_asymptotic(model: RiskModel, u: Optional[float] = None) -> AllocationReport:
    """
    Limiting fractions m_i / m from the tilted drift decomposition.

    Raises:
        NoCramerRoot: aggregate drift is not negative
    """
    tilted = tilt(model)
    fractions = tilted.fractions
    amounts = None if u is None else _tuple(fractions * _check_capital(u))
    return AllocationReport(method=ASYMPTOTIC, u=u, horizon=Horizon.infinite(), fractions=_tuple(fractions),
                            amounts=amounts,
                            diagnostics={"theta_star": tilted.theta_star, "m_total": tilted.m_total,
                                         "m_components": list(tilted.m_components)})
