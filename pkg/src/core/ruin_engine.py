"""
Ruin Engine
Closed-form ruin probabilities, the dynamic value-at-risk measure and the
first-passage / supremum-location time moments of the Brownian model.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, ndtr
from scipy.stats import norm

from src.core.errors import DomainError, InfeasibleCondition, NoCramerRoot, NotSupported, UndefinedAllocation
from src.core.levy_analytics import cramer_root, cramer_root_generic
from src.core.model import BrownianModel, CompoundPoissonExpModel, Horizon, RiskModel, RuinQuery, require_valid
from src.core.simulator import SimConfig, simulate_ruin_prob

logger = logging.getLogger(__name__)

BROWNIAN_CLOSED_FORM = "brownian_closed_form"
CP_EXP_CLOSED_FORM = "cp_exp_closed_form"
MONTE_CARLO = "monte_carlo"

# Below this |2ur/sigma^2| the ratio form of E[tau | tau <= T] loses digits
SMALL_DRIFT = 1e-6
VAR_TOLERANCE = 1e-10
MAX_BRACKET_DOUBLINGS = 1100


@dataclass(frozen=True)
class RuinResult:
    """A ruin probability and how it was obtained"""
    probability: float
    method: str
    std_error: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def brownian_ruin_probability(r: float, variance: float, u: float, T: Optional[float]) -> float:
    """
    P(sup_{t <= T} S(t) >= u) for S a Brownian motion with drift r and variance rate sigma^2.

    The reflected term exp(2ur/sigma^2) Phi(b) is evaluated in log space.
    """
    if u <= 0.0:
        return 1.0
    if T is None:
        return math.exp(2.0 * r * u / variance) if r < 0 else 1.0
    scale = math.sqrt(variance * T)
    if r == 0.0:
        return float(min(1.0, 2.0 * ndtr(-u / scale)))
    a = (-u + r * T) / scale
    b = (-u - r * T) / scale
    reflected = math.exp(2.0 * u * r / variance + float(log_ndtr(b)))
    return float(min(1.0, max(0.0, float(ndtr(a)) + reflected)))


def cp_exp_ruin_probability(model: CompoundPoissonExpModel, u: float) -> float:
    """Infinite-horizon ruin probability (lambda/(theta r)) exp(-theta* u)"""
    if not model.net_profit:
        return 1.0
    theta_star = cramer_root(model)
    lam = model.total_intensity
    return lam / (model.claim_rate * model.total_premium) * math.exp(-theta_star * u)


def ruin_prob(model: RiskModel, query: RuinQuery, sim_config: Optional[SimConfig] = None) -> RuinResult:
    """
    Ruin probability psi(u, T) or psi(u, inf).

    Finite-horizon compound Poisson ruin has no closed form and is estimated
    by exact simulation (method tag monte_carlo).

    Args:
        model: validated risk model
        query: capital and horizon
        sim_config: simulation settings for the monte_carlo route

    Returns:
        RuinResult
    """
    require_valid(model)
    u = query.u
    T = query.horizon.T
    if isinstance(model, BrownianModel):
        p = brownian_ruin_probability(model.total_drift, model.total_variance, u, T)
        return RuinResult(probability=p, method=BROWNIAN_CLOSED_FORM)
    if T is None:
        return RuinResult(probability=cp_exp_ruin_probability(model, u), method=CP_EXP_CLOSED_FORM)

    logger.info(f"No closed form for finite-horizon compound Poisson ruin, simulating (u={u}, T={T})")
    estimate = simulate_ruin_prob(model, u, T, sim_config or SimConfig())
    return RuinResult(probability=estimate.value, method=MONTE_CARLO, std_error=estimate.std_error)


def bisect_var(psi: Callable[[float], float], alpha: float, tolerance: float = VAR_TOLERANCE) -> float:
    """Smallest u with psi(u) <= alpha for a nonincreasing psi tending to 0"""
    if psi(0.0) <= alpha:
        return 0.0
    hi = 1.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if psi(hi) <= alpha:
            break
        hi *= 2.0
    else:
        raise InfeasibleCondition(f"ruin probability never drops below alpha={alpha}")
    lo = 0.0
    iterations = 0
    while hi - lo > tolerance * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if psi(mid) <= alpha:
            hi = mid
        else:
            lo = mid
        iterations += 1
    logger.debug(f"VaR bisection converged to {hi:.12g} in {iterations} iterations")
    return hi


def dynamic_var(model: RiskModel, alpha: float, horizon: Horizon) -> float:
    """
    VaR^alpha(S, T) = inf{u >= 0 : psi(u, T) <= alpha}.

    Raises:
        DomainError: alpha outside (0, 1)
        NoCramerRoot: infinite horizon with certain ruin
        NotSupported: finite-horizon compound Poisson
    """
    alpha = _check_alpha(alpha)
    require_valid(model)
    if isinstance(model, BrownianModel):
        r = model.total_drift
        variance = model.total_variance
        if horizon.is_infinite:
            if not r < 0:
                raise NoCramerRoot(f"ruin is certain for drift r={r} >= 0, no finite VaR")
            return max(0.0, variance / (2.0 * r) * math.log(alpha))
        T = horizon.T
        return bisect_var(lambda u: brownian_ruin_probability(r, variance, u, T), alpha)

    if not horizon.is_infinite:
        raise NotSupported("finite-horizon VaR is not available for the compound Poisson model")
    theta_star = cramer_root(model)
    ratio = alpha * model.claim_rate * model.total_premium / model.total_intensity
    return max(0.0, -math.log(ratio) / theta_star)


def generic_dynamic_var(exponent: Callable[[float], float], alpha: float,
                        pole: Optional[float] = None,
                        derivative: Optional[Callable[[float], float]] = None) -> float:
    """
    Infinite-horizon VaR -ln(alpha)/theta* of a spectrally negative process
    given only its Lévy exponent.
    """
    alpha = _check_alpha(alpha)
    theta_star = cramer_root_generic(exponent, pole=pole, derivative=derivative)
    return -math.log(alpha) / theta_star


def _require_brownian(model: RiskModel, what: str) -> BrownianModel:
    if not isinstance(model, BrownianModel):
        raise NotSupported(f"{what} is only available for the Brownian model")
    require_valid(model)
    return model


def _first_passage_mean_by_quadrature(r: float, variance: float, u: float, T: float) -> float:
    sigma = math.sqrt(variance)

    def weighted_density(t: float) -> float:
        return u / (sigma * math.sqrt(2.0 * math.pi * t)) * math.exp(-(u - r * t) ** 2 / (2.0 * variance * t))

    mass = brownian_ruin_probability(r, variance, u, T)
    if mass <= 0.0:
        raise InfeasibleCondition(f"P(tau(u) <= T) underflows for u={u}, T={T}")
    value, _ = integrate.quad(weighted_density, 0.0, T, limit=200, epsabs=0.0, epsrel=1e-10)
    return value / mass


def expected_ruin_time_given_ruin(model: RiskModel, u: float, horizon: Horizon) -> float:
    """
    E[tau(u) | tau(u) <= T] for the aggregated Brownian motion.

    Uses (u/r) (Phi(a) - e^{2ur/sigma^2} Phi(b)) / (Phi(a) + e^{2ur/sigma^2} Phi(b)),
    written as (u/r) tanh of half the log-ratio, and integrates the first-passage
    density when r is (close to) zero.

    Raises:
        DomainError: u <= 0
        InfeasibleCondition: ruin probability underflows
    """
    model = _require_brownian(model, "expected ruin time")
    if not u > 0:
        raise DomainError(f"expected ruin time needs u > 0, got {u}")
    r = model.total_drift
    variance = model.total_variance
    if horizon.is_infinite:
        if r < 0:
            return -u / r
        if r > 0:
            return u / r
        return math.inf

    T = horizon.T
    if r == 0.0 or abs(2.0 * u * r / variance) < SMALL_DRIFT:
        logger.warning(f"Drift r={r} is near zero, integrating the first-passage density")
        return _first_passage_mean_by_quadrature(r, variance, u, T)
    scale = math.sqrt(variance * T)
    log_direct = float(log_ndtr((-u + r * T) / scale))
    log_reflected = 2.0 * u * r / variance + float(log_ndtr((-u - r * T) / scale))
    if log_direct == -math.inf and log_reflected == -math.inf:
        raise InfeasibleCondition(f"P(tau(u) <= T) underflows for u={u}, T={T}")
    return u / r * math.tanh(0.5 * (log_direct - log_reflected))


def expected_argmax_time_given_sup(model: RiskModel, u: float, horizon: Horizon) -> float:
    """
    E[t* | S(t*) = u] where t* is the location of the supremum of S on [0, T].

    Raises:
        UndefinedAllocation: infinite horizon with r >= 0 (supremum not attained)
    """
    model = _require_brownian(model, "expected argmax time")
    if u < 0:
        raise DomainError(f"level u must be >= 0, got {u}")
    r = model.total_drift
    if horizon.is_infinite:
        if not r < 0:
            raise UndefinedAllocation(f"supremum over an infinite horizon is not attained for r={r} >= 0")
        return -u / r
    T = horizon.T
    sigma = math.sqrt(model.total_variance)
    b = (-u - r * T) / (sigma * math.sqrt(T))
    mills = math.exp(float(norm.logpdf(b)) - float(log_ndtr(b)))
    return u / (-r + sigma * mills / math.sqrt(T))


def sup_density(model: RiskModel, u: float, horizon: Horizon) -> float:
    """Density of sup_{t <= T} S(t) at level u > 0"""
    model = _require_brownian(model, "supremum density")
    r = model.total_drift
    variance = model.total_variance
    if horizon.is_infinite:
        if not r < 0:
            return 0.0
        theta_star = -2.0 * r / variance
        return theta_star * math.exp(-theta_star * u)
    T = horizon.T
    scale = math.sqrt(variance * T)
    direct = 2.0 / scale * float(norm.pdf((u - r * T) / scale))
    if r == 0.0:
        return direct
    b = (-u - r * T) / scale
    reflected = math.exp(math.log(2.0 * abs(r) / variance) + 2.0 * u * r / variance + float(log_ndtr(b)))
    return direct - float(np.sign(r)) * reflected
