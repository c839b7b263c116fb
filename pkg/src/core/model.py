"""
Risk Model Definitions
Multivariate Brownian and compound-Poisson (exponential claims) risk models,
the horizon/query types posed against them, and their JSON schema.
"""
import logging
import math
from dataclasses import dataclass, field, asdict
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import DomainError, ModelValidationError

logger = logging.getLogger(__name__)

# Relative eigenvalue tolerance for the PSD check
PSD_TOLERANCE = 1e-10


def _as_vector(values: Sequence[float], name: str) -> Tuple[float, ...]:
    try:
        vector = tuple(float(v) for v in values)
    except (TypeError, ValueError) as e:
        raise ModelValidationError([f"{name} must be a list of numbers ({e})"])
    return vector


def _as_matrix(rows: Sequence[Sequence[float]], name: str) -> Tuple[Tuple[float, ...], ...]:
    try:
        matrix = tuple(tuple(float(v) for v in row) for row in rows)
    except (TypeError, ValueError) as e:
        raise ModelValidationError([f"{name} must be a list of lists of numbers ({e})"])
    widths = {len(row) for row in matrix}
    if len(widths) > 1:
        raise ModelValidationError([f"{name} rows have unequal lengths"])
    return matrix


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate(): violated invariants plus the drift diagnosis"""
    violations: List[str]
    drift_sign: int  # sign of the aggregate drift of S (-1 means ruin is not certain)
    net_profit: bool

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


@dataclass(frozen=True)
class AggregateParams:
    """Parameters of the aggregated process S = sum_i S_i"""
    kind: str
    total_drift: float
    total_variance: Optional[float] = None
    intensity: Optional[float] = None
    claim_rate: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class BrownianModel:
    """
    Correlated Brownian motions with drift: S_i(t) = r_i t + (Brownian part).

    drift holds r_i per unit time, covariance holds Sigma per unit time.
    The constructor only checks shapes; invariants are reported by validate().
    """
    drift: Tuple[float, ...]
    covariance: Tuple[Tuple[float, ...], ...]
    kind: ClassVar[str] = "brownian"

    def __post_init__(self):
        object.__setattr__(self, "drift", _as_vector(self.drift, "drift"))
        object.__setattr__(self, "covariance", _as_matrix(self.covariance, "cov"))
        d = len(self.drift)
        if len(self.covariance) != d or any(len(row) != d for row in self.covariance):
            raise ModelValidationError([f"cov must be {d}x{d} to match drift of length {d}"])

    @classmethod
    def from_std_corr(cls, drift: Sequence[float], std: Sequence[float],
                      corr: Sequence[Sequence[float]]) -> "BrownianModel":
        """Build Sigma = diag(std) . corr . diag(std)"""
        s = np.asarray(_as_vector(std, "std"))
        rho = np.asarray(_as_matrix(corr, "corr"))
        if rho.shape != (len(s), len(s)):
            raise ModelValidationError([f"corr must be {len(s)}x{len(s)} to match std"])
        if np.any(s < 0):
            raise ModelValidationError(["std entries must be nonnegative"])
        return cls(drift=tuple(drift), covariance=(np.outer(s, s) * rho).tolist())

    @property
    def d(self) -> int:
        return len(self.drift)

    @property
    def drift_vector(self) -> np.ndarray:
        return np.array(self.drift)

    @property
    def cov_matrix(self) -> np.ndarray:
        return np.array(self.covariance)

    @property
    def total_drift(self) -> float:
        return math.fsum(self.drift)

    @property
    def total_variance(self) -> float:
        return math.fsum(v for row in self.covariance for v in row)

    @property
    def cov_with_aggregate(self) -> np.ndarray:
        """sum_j Sigma_ji, the covariance of each component with S"""
        return self.cov_matrix.sum(axis=0)

    @property
    def betas(self) -> np.ndarray:
        """Regression coefficients of S_i on S"""
        return self.cov_with_aggregate / self.total_variance

    def weighted_aggregate(self, i: int, x: float) -> Tuple[float, float]:
        """
        Drift and variance of sum_{j != i} S_j + x S_i.

        Returns:
            Tuple of (drift, variance)
        """
        cov = self.cov_matrix
        r = self.total_drift + (x - 1.0) * self.drift[i]
        var = self.total_variance + 2.0 * (x - 1.0) * cov[:, i].sum() + (x - 1.0) ** 2 * cov[i, i]
        return r, var

    def scaled(self, gamma: float) -> "BrownianModel":
        """The model of gamma * S"""
        return BrownianModel(
            drift=tuple(gamma * r for r in self.drift),
            covariance=tuple(tuple(gamma * gamma * v for v in row) for row in self.covariance),
        )

    def sub_model(self, indices: Sequence[int]) -> "BrownianModel":
        """Restrict the model to a subset of its components"""
        cov = self.cov_matrix[np.ix_(indices, indices)]
        return BrownianModel(drift=tuple(self.drift[i] for i in indices), covariance=cov.tolist())

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.kind, "drift": list(self.drift),
                "cov": [list(row) for row in self.covariance]}


@dataclass(frozen=True)
class CompoundPoissonExpModel:
    """
    Compound Poisson components with premium drift:
    S_i(t) = -r_i t + (claims arriving at rate beta_i, Exp(theta) sizes).
    """
    premium_rates: Tuple[float, ...]
    intensities: Tuple[float, ...]
    claim_rate: float
    kind: ClassVar[str] = "cp_exp"

    def __post_init__(self):
        object.__setattr__(self, "premium_rates", _as_vector(self.premium_rates, "premium"))
        object.__setattr__(self, "intensities", _as_vector(self.intensities, "intensity"))
        try:
            object.__setattr__(self, "claim_rate", float(self.claim_rate))
        except (TypeError, ValueError):
            raise ModelValidationError(["claim_rate must be a number"])
        if len(self.premium_rates) != len(self.intensities):
            raise ModelValidationError(["premium and intensity must have the same length"])

    @property
    def d(self) -> int:
        return len(self.premium_rates)

    @property
    def premium_vector(self) -> np.ndarray:
        return np.array(self.premium_rates)

    @property
    def intensity_vector(self) -> np.ndarray:
        return np.array(self.intensities)

    @property
    def total_premium(self) -> float:
        return math.fsum(self.premium_rates)

    @property
    def total_intensity(self) -> float:
        return math.fsum(self.intensities)

    @property
    def net_profit(self) -> bool:
        return self.total_premium > self.total_intensity / self.claim_rate

    def scaled(self, gamma: float) -> "CompoundPoissonExpModel":
        """The model of gamma * S: premiums scale, claim sizes scale"""
        return CompoundPoissonExpModel(
            premium_rates=tuple(gamma * r for r in self.premium_rates),
            intensities=self.intensities,
            claim_rate=self.claim_rate / gamma,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"type": self.kind, "premium": list(self.premium_rates),
                "intensity": list(self.intensities), "claim_rate": self.claim_rate}


RiskModel = Union[BrownianModel, CompoundPoissonExpModel]


@dataclass(frozen=True)
class Horizon:
    """A finite time window (0, T] or the infinite horizon (T is None)"""
    T: Optional[float] = None

    def __post_init__(self):
        if self.T is not None:
            T = float(self.T)
            if not (T > 0 and math.isfinite(T)):
                raise DomainError(f"finite horizon needs 0 < T < inf, got {self.T}")
            object.__setattr__(self, "T", T)

    @classmethod
    def finite(cls, T: float) -> "Horizon":
        return cls(T)

    @classmethod
    def infinite(cls) -> "Horizon":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "Horizon":
        """Parse 'inf' or a positive number"""
        if str(text).strip().lower() in ("inf", "infinite", "infinity"):
            return cls.infinite()
        try:
            return cls.finite(float(text))
        except ValueError:
            raise DomainError(f"horizon must be 'inf' or a positive number, got {text!r}")

    @property
    def is_infinite(self) -> bool:
        return self.T is None

    def __str__(self) -> str:
        return "inf" if self.T is None else repr(self.T)


@dataclass(frozen=True)
class RuinQuery:
    """Initial capital u and the horizon over which ruin is assessed"""
    u: float
    horizon: Horizon = field(default_factory=Horizon.infinite)

    def __post_init__(self):
        u = float(self.u)
        if not (u >= 0 and math.isfinite(u)):
            raise DomainError(f"capital u must be a finite number >= 0, got {self.u}")
        object.__setattr__(self, "u", u)


def _brownian_violations(model: BrownianModel) -> List[str]:
    violations = []
    cov = model.cov_matrix
    if model.d < 2:
        violations.append(f"d >= 2 required, got d={model.d}")
    if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(model.drift_vector))):
        violations.append("drift and cov must be finite")
        return violations
    if not np.array_equal(cov, cov.T):
        violations.append("cov must be symmetric")
    else:
        scale = float(np.max(np.abs(cov))) if cov.size else 0.0
        eigenvalues = np.linalg.eigvalsh(cov)
        if eigenvalues.size and eigenvalues.min() < -PSD_TOLERANCE * scale:
            violations.append(f"cov must be positive semidefinite (min eigenvalue {eigenvalues.min():.6g})")
    if not model.total_variance > 0:
        violations.append("aggregate variance sum(cov) must be > 0")
    return violations


def _cp_violations(model: CompoundPoissonExpModel) -> List[str]:
    violations = []
    if model.d < 2:
        violations.append(f"d >= 2 required, got d={model.d}")
    if not all(math.isfinite(r) and r > 0 for r in model.premium_rates):
        violations.append("premium rates must be > 0")
    if not all(math.isfinite(b) and b > 0 for b in model.intensities):
        violations.append("intensities must be > 0")
    if not (math.isfinite(model.claim_rate) and model.claim_rate > 0):
        violations.append("claim_rate must be > 0")
    return violations


def validate(model: RiskModel) -> ValidationReport:
    """
    Check the invariants of a model without raising.

    Args:
        model: BrownianModel or CompoundPoissonExpModel

    Returns:
        ValidationReport listing violations (empty means valid) and the drift diagnosis
    """
    if isinstance(model, BrownianModel):
        violations = _brownian_violations(model)
        r = model.total_drift
        drift_sign = (r > 0) - (r < 0)
    elif isinstance(model, CompoundPoissonExpModel):
        violations = _cp_violations(model)
        if violations:
            drift_sign = 0
        else:
            excess = model.total_intensity / model.claim_rate - model.total_premium
            drift_sign = (excess > 0) - (excess < 0)
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")
    report = ValidationReport(violations=violations, drift_sign=drift_sign, net_profit=drift_sign < 0)
    if violations:
        logger.debug(f"Model validation failed: {violations}")
    return report


def require_valid(model: RiskModel) -> None:
    """Raise ModelValidationError unless the model is valid"""
    report = validate(model)
    if not report.is_valid:
        raise ModelValidationError(report.violations)


def aggregate_params(model: RiskModel) -> AggregateParams:
    """
    Parameters of the aggregated process S.

    Returns:
        Brownian: (r, sigma^2); compound Poisson: (r, lambda, theta)
    """
    require_valid(model)
    if isinstance(model, BrownianModel):
        return AggregateParams(kind=model.kind, total_drift=model.total_drift,
                               total_variance=model.total_variance)
    return AggregateParams(kind=model.kind, total_drift=model.total_premium,
                           intensity=model.total_intensity, claim_rate=model.claim_rate)


_SCHEMA = {
    "brownian": ({"type", "drift"}, {"cov", "std", "corr"}),
    "cp_exp": ({"type", "premium", "intensity", "claim_rate"}, set()),
}


def model_from_dict(data: Dict[str, Any]) -> RiskModel:
    """
    Build a model from its JSON representation, rejecting unknown fields.

    Raises:
        ModelValidationError: schema violations or malformed values
    """
    if not isinstance(data, dict):
        raise ModelValidationError(["model config must be a JSON object"])
    kind = data.get("type")
    if kind not in _SCHEMA:
        raise ModelValidationError([f"type must be one of {sorted(_SCHEMA)}, got {kind!r}"])
    required, optional = _SCHEMA[kind]
    unknown = set(data) - required - optional
    missing = required - set(data)
    problems = [f"unknown field '{k}'" for k in sorted(unknown)]
    problems += [f"missing field '{k}'" for k in sorted(missing)]
    if kind == "brownian":
        has_cov = "cov" in data
        has_std_corr = "std" in data and "corr" in data
        if has_cov == bool({"std", "corr"} & set(data)) or not (has_cov or has_std_corr):
            problems.append("give either 'cov' or both 'std' and 'corr'")
    if problems:
        raise ModelValidationError(problems)

    if kind == "brownian":
        if "cov" in data:
            return BrownianModel(drift=data["drift"], covariance=data["cov"])
        return BrownianModel.from_std_corr(data["drift"], data["std"], data["corr"])
    return CompoundPoissonExpModel(premium_rates=data["premium"], intensities=data["intensity"],
                                   claim_rate=data["claim_rate"])


def model_to_dict(model: RiskModel) -> Dict[str, Any]:
    """JSON representation of a model (floats round-trip exactly through json)"""
    return model.to_dict()
