"""
Phase-Type Ruin
Claims of the portfolio sum_{j != i} S_j + x_i S_i are phase-type PH(gamma, M(x)),
which gives the infinite-horizon ruin probability in matrix-exponential form.
"""
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from src.core.errors import DomainError
from src.core.model import CompoundPoissonExpModel, require_valid

logger = logging.getLogger(__name__)

MAX_DIMENSION = 64


def matrix_exp(A) -> np.ndarray:
    """
    e^A by scaling and squaring with a Padé approximant.

    Raises:
        DomainError: A is not a finite square matrix of size <= 64
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"matrix exponential needs a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DIMENSION:
        raise DomainError(f"matrix exponential limited to {MAX_DIMENSION}x{MAX_DIMENSION}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix exponential needs finite entries")
    return expm(A)


@dataclass(frozen=True)
class PhaseTypeClaim:
    """PH(gamma, M): initial distribution gamma and sub-intensity matrix M"""
    gamma: Tuple[float, ...]
    sub_intensity: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        M = np.asarray(self.sub_intensity, dtype=float)
        if M.shape != (gamma.size, gamma.size):
            raise DomainError("sub-intensity matrix must be square and match gamma")
        if np.any(gamma < 0) or abs(gamma.sum() - 1.0) > 1e-12:
            raise DomainError("gamma must be a probability vector")
        if np.any(np.diag(M) >= 0):
            raise DomainError("sub-intensity diagonal must be negative")
        if np.any(np.linalg.eigvals(M).real >= 0):
            raise DomainError("sub-intensity spectrum must lie in the open left half-plane")
        object.__setattr__(self, "gamma", tuple(gamma.tolist()))
        object.__setattr__(self, "sub_intensity", tuple(tuple(row) for row in M.tolist()))

    @classmethod
    def weighted(cls, model: CompoundPoissonExpModel, x: Sequence[float]) -> "PhaseTypeClaim":
        """Claims of sum_j x_j S_j: component j claims are Exp(theta / x_j)"""
        gamma = model.intensity_vector / model.total_intensity
        rates = model.claim_rate / np.asarray(x, dtype=float)
        return cls(gamma=tuple(gamma), sub_intensity=tuple(map(tuple, np.diag(-rates))))

    @property
    def gamma_vector(self) -> np.ndarray:
        return np.array(self.gamma)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.sub_intensity)

    def gamma_times_inverse(self) -> np.ndarray:
        """gamma M^{-1} (entrywise for diagonal M)"""
        M = self.matrix
        if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
            return self.gamma_vector / np.diag(M)
        return np.linalg.solve(M.T, self.gamma_vector)

    @property
    def mean(self) -> float:
        return float(-self.gamma_times_inverse().sum())


@dataclass(frozen=True)
class PhaseTypeRuin:
    """Ruin probability of the weighted portfolio; almost_sure flags a failed net-profit condition"""
    probability: float
    almost_sure: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def weighted_premium(model: CompoundPoissonExpModel, x: Sequence[float]) -> float:
    """Premium rate of sum_j x_j S_j"""
    return float(np.dot(np.asarray(x, dtype=float), model.premium_vector))


def _check_weights(model: CompoundPoissonExpModel, x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.d,):
        raise DomainError(f"weight vector must have length {model.d}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("weights must be finite and positive")
    if np.count_nonzero(x != 1.0) > 1:
        raise DomainError("only one component may be weighted away from 1")
    return x


def phase_type_ruin(model: CompoundPoissonExpModel, x: Sequence[float], u: float) -> PhaseTypeRuin:
    """
    Infinite-horizon ruin probability of sum_{j != i} S_j + x_i S_i:

        psi(u) = gamma_plus exp((M - M e gamma_plus) u) e,  gamma_plus = -(lambda / r(x)) gamma M^{-1}

    where r(x) is the weighted premium rate.
    """
    if not isinstance(model, CompoundPoissonExpModel):
        raise DomainError("phase-type ruin applies to the compound Poisson model")
    require_valid(model)
    x = _check_weights(model, x)
    if not u >= 0:
        raise DomainError(f"capital u must be >= 0, got {u}")

    claim = PhaseTypeClaim.weighted(model, x)
    lam = model.total_intensity
    premium = weighted_premium(model, x)
    if not lam * claim.mean < premium:
        logger.warning(f"Weighted portfolio x={x.tolist()} violates net profit, ruin is certain")
        return PhaseTypeRuin(probability=1.0, almost_sure=True)

    M = claim.matrix
    ones = np.ones(model.d)
    gamma_plus = -(lam / premium) * claim.gamma_times_inverse()
    generator = M - np.outer(M @ ones, gamma_plus)
    value = float(gamma_plus @ matrix_exp(generator * u) @ ones)
    return PhaseTypeRuin(probability=min(1.0, max(0.0, value)))
