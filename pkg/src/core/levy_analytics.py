"""
Lévy Analytics
Lévy exponents of the aggregated process, the Cramér root, the exponential
tilt to the Q-measure and its drift decomposition m_i.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr
from scipy.stats import norm

from src.core.errors import DomainError, NoCramerRoot
from src.core.model import (
    BrownianModel,
    CompoundPoissonExpModel,
    RiskModel,
    model_to_dict,
    require_valid,
)

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-12
MAX_ROOT_ITERATIONS = 200


@dataclass(frozen=True)
class TiltedParams:
    """The model under Q together with the Cramér root and m_1..m_d, m"""
    theta_star: float
    m_components: Tuple[float, ...]
    m_total: float
    q_model: RiskModel

    @property
    def fractions(self) -> np.ndarray:
        """m_i / m"""
        return np.array(self.m_components) / self.m_total

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta_star": self.theta_star,
            "m_components": list(self.m_components),
            "m_total": self.m_total,
            "q_model": model_to_dict(self.q_model),
        }


def levy_exponent_aggregate(model: RiskModel, theta: float) -> float:
    """
    kappa(theta) = ln E[exp(theta S(1))] for the aggregated process.

    Raises:
        DomainError: compound Poisson with theta at or beyond the claim-rate pole
    """
    require_valid(model)
    if isinstance(model, BrownianModel):
        return theta * model.total_drift + 0.5 * theta * theta * model.total_variance
    if theta >= model.claim_rate:
        raise DomainError(f"exponent diverges for theta={theta} >= claim_rate={model.claim_rate}")
    lam = model.total_intensity
    return -theta * model.total_premium + lam * theta / (model.claim_rate - theta)


def levy_exponent_derivative(model: RiskModel, theta: float) -> float:
    """kappa'(theta)"""
    require_valid(model)
    if isinstance(model, BrownianModel):
        return model.total_drift + theta * model.total_variance
    if theta >= model.claim_rate:
        raise DomainError(f"exponent diverges for theta={theta} >= claim_rate={model.claim_rate}")
    gap = model.claim_rate - theta
    return -model.total_premium + model.total_intensity * model.claim_rate / (gap * gap)


def joint_transform(model: RiskModel, thetas: Sequence[float]) -> float:
    """E[exp(<theta, S(1)>)] for a vector of per-component arguments"""
    require_valid(model)
    t = np.asarray(thetas, dtype=float)
    if isinstance(model, BrownianModel):
        return math.exp(float(t @ model.drift_vector + 0.5 * t @ model.cov_matrix @ t))
    if np.any(t >= model.claim_rate):
        raise DomainError("joint transform diverges at or beyond the claim-rate pole")
    exponent = -t * model.premium_vector + model.intensity_vector * t / (model.claim_rate - t)
    return math.exp(float(exponent.sum()))


def cramer_root(model: RiskModel) -> float:
    """
    Positive root of kappa for the aggregated process.

    Raises:
        NoCramerRoot: aggregate drift is not negative
    """
    require_valid(model)
    if isinstance(model, BrownianModel):
        r = model.total_drift
        if not r < 0:
            raise NoCramerRoot(f"aggregate drift r={r} >= 0 has no Cramér root")
        return -2.0 * r / model.total_variance
    if not model.net_profit:
        raise NoCramerRoot(
            f"net-profit condition fails (r={model.total_premium} <= "
            f"lambda/theta={model.total_intensity / model.claim_rate})"
        )
    return model.claim_rate - model.total_intensity / model.total_premium


def cramer_root_generic(exponent: Callable[[float], float], pole: Optional[float] = None,
                        derivative: Optional[Callable[[float], float]] = None) -> float:
    """
    Positive root of a user-supplied convex Lévy exponent with kappa(0) = 0 and kappa'(0) < 0.

    Newton steps are kept inside a shrinking sign-change bracket; any step that leaves
    the bracket is replaced by bisection.

    Args:
        exponent: kappa, defined on [0, pole)
        pole: right end of the domain, or None for an entire exponent
        derivative: kappa' (central differences are used when omitted)

    Returns:
        theta_star > 0 with |kappa(theta_star)| <= 1e-12 max(1, |kappa'(theta_star)|)

    Raises:
        NoCramerRoot: kappa does not change sign on (0, pole)
    """
    if pole is not None:
        if not pole > 0:
            raise DomainError(f"pole must be positive, got {pole}")
        eps = ROOT_TOLERANCE * pole
        lo, hi = eps, pole - eps
        if not exponent(hi) > 0:
            raise NoCramerRoot("exponent stays nonpositive up to its pole")
    else:
        eps = ROOT_TOLERANCE
        lo, hi = eps, 1.0
        while not exponent(hi) > 0:
            hi *= 2.0
            if hi > 1e300:
                raise NoCramerRoot("exponent stays nonpositive on (0, inf)")
    if not exponent(lo) < 0:
        raise NoCramerRoot("exponent is not negative near zero (drift is not negative)")

    def slope(x: float) -> float:
        if derivative is not None:
            return derivative(x)
        h = 1e-6 * x
        if pole is not None:
            h = min(h, 0.5 * (pole - x))
        return (exponent(x + h) - exponent(x - h)) / (2.0 * h)

    x = 0.5 * (lo + hi)
    for iteration in range(MAX_ROOT_ITERATIONS):
        value = exponent(x)
        grad = slope(x)
        if abs(value) <= ROOT_TOLERANCE * max(1.0, abs(grad)):
            logger.debug(f"Generic Cramér root {x:.16g} after {iteration} iterations")
            return x
        if value < 0:
            lo = x
        else:
            hi = x
        step = x - value / grad if grad != 0 else math.nan
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return x
    logger.warning(f"Generic Cramér root did not meet tolerance after {MAX_ROOT_ITERATIONS} iterations")
    return x


def tilt(model: RiskModel) -> TiltedParams:
    """
    Exponential change of measure with the Cramér root.

    Returns:
        TiltedParams. The Brownian Q-model keeps the covariance and shifts the drift
        to r_i + theta* sum_j Sigma_ji; the compound Poisson Q-model has claim rate
        lambda/r and intensities beta_i theta r / lambda.

    Raises:
        NoCramerRoot: propagated from cramer_root
    """
    theta_star = cramer_root(model)
    if isinstance(model, BrownianModel):
        q_drift = model.drift_vector + theta_star * model.cov_with_aggregate
        q_model = BrownianModel(drift=tuple(q_drift), covariance=model.covariance)
        return TiltedParams(
            theta_star=theta_star,
            m_components=tuple(float(m) for m in q_drift),
            m_total=-model.total_drift,
            q_model=q_model,
        )

    r = model.total_premium
    lam = model.total_intensity
    theta = model.claim_rate
    q_intensities = model.intensity_vector * theta * r / lam
    q_model = CompoundPoissonExpModel(
        premium_rates=model.premium_rates,
        intensities=tuple(q_intensities),
        claim_rate=lam / r,
    )
    m = -model.premium_vector + model.intensity_vector * theta * r * r / (lam * lam)
    return TiltedParams(
        theta_star=theta_star,
        m_components=tuple(float(v) for v in m),
        m_total=-r + theta * r * r / lam,
        q_model=q_model,
    )


def cond_abs_mean_bivariate_normal(mu1: float, mu2: float, s1: float, s2: float,
                                   rho: float, x2: float) -> float:
    """
    E[|X1| | X2 = x2] for (X1, X2) bivariate normal.

    X1 given X2 = x2 is normal with mean mu1 + rho (s1/s2)(x2 - mu2) and
    standard deviation s1 sqrt(1 - rho^2); the result is the folded-normal mean.
    """
    if not (s1 > 0 and s2 > 0):
        raise DomainError("standard deviations must be positive")
    if not abs(rho) <= 1:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho}")
    mean = mu1 + rho * (s1 / s2) * (x2 - mu2)
    sd = s1 * math.sqrt(max(0.0, 1.0 - rho * rho))
    if sd == 0.0:
        return abs(mean)
    c = -mean / sd
    return mean * (1.0 - 2.0 * float(ndtr(c))) + 2.0 * sd * float(norm.pdf(c))
