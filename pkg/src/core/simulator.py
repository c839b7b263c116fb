"""
Monte Carlo Simulator
Path simulation of both model families, used as the oracle for every closed form.

Paths are generated in fixed-size chunks. Chunk k draws from a Philox stream keyed by
(seed, k), so results do not depend on how chunks are spread over workers. Per-chunk
arrays are concatenated in chunk order before any reduction.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.core.errors import DomainError, ZeroConditioningPaths, ZeroRuinedPaths
from src.core.levy_analytics import tilt
from src.core.model import BrownianModel, CompoundPoissonExpModel, RiskModel, require_valid

logger = logging.getLogger(__name__)

ChunkResult = Dict[str, np.ndarray]


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; bandwidth None means 5% of the conditioning level u"""
    paths: int = 1_000_000
    seed: int = 12345
    steps_per_unit_time: int = 2000
    bridge_correction: bool = True
    bandwidth: Optional[float] = None
    workers: int = 1
    chunk_size: int = 10_000

    def __post_init__(self):
        if self.paths < 1:
            raise DomainError(f"paths must be >= 1, got {self.paths}")
        if self.steps_per_unit_time < 1:
            raise DomainError(f"steps_per_unit_time must be >= 1, got {self.steps_per_unit_time}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise DomainError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1 or self.chunk_size < 1:
            raise DomainError("workers and chunk_size must be >= 1")

    def window(self, u: float) -> float:
        if self.bandwidth is not None:
            return self.bandwidth
        return 0.05 * u if u > 0 else 0.05

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SimEstimate:
    """A Monte Carlo estimate with its standard error"""
    value: float
    std_error: float
    n_effective: int
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SimAllocation:
    """Simulated allocation: ratio estimates of c_i plus the raw conditional means"""
    method: str
    fractions: Tuple[SimEstimate, ...]
    component_means: Tuple[SimEstimate, ...]
    aggregate_mean: SimEstimate
    time_mean: SimEstimate

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "fractions": [e.to_dict() for e in self.fractions],
            "component_means": [e.to_dict() for e in self.component_means],
            "aggregate_mean": self.aggregate_mean.to_dict(),
            "time_mean": self.time_mean.to_dict(),
        }


def chunk_generator(seed: int, chunk_index: int) -> np.random.Generator:
    """Counter-based stream for one chunk of paths"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk_index,))))


def _run_chunks(task: Callable[[np.random.Generator, int], ChunkResult], cfg: SimConfig) -> ChunkResult:
    sizes = [cfg.chunk_size] * (cfg.paths // cfg.chunk_size)
    if cfg.paths % cfg.chunk_size:
        sizes.append(cfg.paths % cfg.chunk_size)

    def run_one(index: int) -> ChunkResult:
        return task(chunk_generator(cfg.seed, index), sizes[index])

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_one, range(len(sizes))))
    else:
        results = [run_one(i) for i in range(len(sizes))]
    logger.debug(f"Simulated {cfg.paths} paths in {len(sizes)} chunks with {cfg.workers} worker(s)")
    return {key: np.concatenate([chunk[key] for chunk in results]) for key in results[0]}


def covariance_factor(cov: np.ndarray) -> np.ndarray:
    """L with L L^T = cov; falls back to a symmetric square root for singular matrices"""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        logger.warning("Covariance is singular, using eigen-decomposition square root")
        values, vectors = np.linalg.eigh(cov)
        return vectors * np.sqrt(np.clip(values, 0.0, None))


def _grid(T: float, cfg: SimConfig) -> Tuple[int, float]:
    n_steps = max(1, int(math.ceil(T * cfg.steps_per_unit_time)))
    return n_steps, T / n_steps


@dataclass(frozen=True)
class _BrownianPaths:
    drift: np.ndarray
    factor: np.ndarray
    betas: np.ndarray
    variance: float

    @classmethod
    def components(cls, model: BrownianModel) -> "_BrownianPaths":
        return cls(model.drift_vector, covariance_factor(model.cov_matrix), model.betas, model.total_variance)

    @classmethod
    def aggregate(cls, model: BrownianModel) -> "_BrownianPaths":
        sigma = math.sqrt(model.total_variance)
        return cls(np.array([model.total_drift]), np.array([[sigma]]), np.ones(1), model.total_variance)

    def increments(self, rng: np.random.Generator, m: int, dt: float) -> np.ndarray:
        z = rng.standard_normal((m, len(self.drift)))
        return self.drift * dt + math.sqrt(dt) * (z @ self.factor.T)


def _brownian_first_passage(paths: _BrownianPaths, u: float, T: float, cfg: SimConfig):
    n_steps, dt = _grid(T, cfg)
    d = len(paths.drift)

    def task(rng: np.random.Generator, n: int) -> ChunkResult:
        tau = np.full(n, np.inf)
        at_ruin = np.full((n, d), np.nan)
        alive = np.arange(n)
        X = np.zeros((n, d))
        agg = np.zeros(n)
        for k in range(n_steps):
            m = alive.size
            if m == 0:
                break
            dX = paths.increments(rng, m, dt)
            dS = dX.sum(axis=1)
            end = agg + dS
            hit = end >= u
            weight = np.full(m, 0.5)
            weight[hit] = (u - agg[hit]) / (end[hit] - agg[hit])
            if cfg.bridge_correction:
                uniform = 1.0 - rng.random(m)
                with np.errstate(over="ignore"):
                    crossing = np.exp(-2.0 * (u - agg) * (u - end) / (paths.variance * dt))
                hit |= uniform < crossing
            if hit.any():
                w = weight[hit]
                tau[alive[hit]] = (k + w) * dt
                gap = u - agg[hit] - w * dS[hit]
                at_ruin[alive[hit]] = X[hit] + w[:, None] * dX[hit] + paths.betas * gap[:, None]
            keep = ~hit
            X = X[keep] + dX[keep]
            agg = end[keep]
            alive = alive[keep]
        ruined = np.isfinite(tau)
        overshoot = np.where(ruined, 0.0, np.nan)
        return {"ruined": ruined, "tau": tau, "at_ruin": at_ruin, "overshoot": overshoot}

    return task


def _brownian_supremum(paths: _BrownianPaths, T: float, cfg: SimConfig):
    n_steps, dt = _grid(T, cfg)
    d = len(paths.drift)

    def task(rng: np.random.Generator, n: int) -> ChunkResult:
        best = np.zeros(n)
        best_t = np.zeros(n)
        best_at = np.zeros((n, d))
        X = np.zeros((n, d))
        agg = np.zeros(n)
        for k in range(n_steps):
            dX = paths.increments(rng, n, dt)
            dS = dX.sum(axis=1)
            end = agg + dS
            if cfg.bridge_correction:
                uniform = 1.0 - rng.random(n)
                cell_max = 0.5 * (agg + end + np.sqrt(dS * dS - 2.0 * paths.variance * dt * np.log(uniform)))
                w = 0.5
            else:
                cell_max = end
                w = 1.0
            better = cell_max > best
            if better.any():
                gap = cell_max[better] - agg[better] - w * dS[better]
                best[better] = cell_max[better]
                best_t[better] = (k + w) * dt
                best_at[better] = X[better] + w * dX[better] + paths.betas * gap[:, None]
            X += dX
            agg = end
        return {"sup": best, "argmax": best_t, "at_sup": best_at}

    return task


def _cp_arrays(model: CompoundPoissonExpModel):
    lam = model.total_intensity
    return model.premium_vector, model.intensity_vector / lam, lam, model.claim_rate


def _cp_first_passage(model: CompoundPoissonExpModel, u: float, T: float):
    premiums, probs, lam, claim_rate = _cp_arrays(model)
    d = model.d

    def task(rng: np.random.Generator, n: int) -> ChunkResult:
        tau = np.full(n, np.inf)
        at_ruin = np.full((n, d), np.nan)
        overshoot = np.full(n, np.nan)
        alive = np.arange(n)
        t = np.zeros(n)
        X = np.zeros((n, d))
        while alive.size:
            m = alive.size
            gaps = rng.exponential(1.0 / lam, m)
            labels = rng.choice(d, size=m, p=probs)
            sizes = rng.exponential(1.0 / claim_rate, m)
            t = t + gaps
            X = X - gaps[:, None] * premiums
            X[np.arange(m), labels] += sizes
            agg = X.sum(axis=1)
            in_window = t <= T
            ruined = in_window & (agg > u)
            if ruined.any():
                tau[alive[ruined]] = t[ruined]
                at_ruin[alive[ruined]] = X[ruined]
                overshoot[alive[ruined]] = agg[ruined] - u
            keep = in_window & ~ruined
            t, X, alive = t[keep], X[keep], alive[keep]
        return {"ruined": np.isfinite(tau), "tau": tau, "at_ruin": at_ruin, "overshoot": overshoot}

    return task


def _cp_supremum(model: CompoundPoissonExpModel, T: float):
    premiums, probs, lam, claim_rate = _cp_arrays(model)
    d = model.d

    def task(rng: np.random.Generator, n: int) -> ChunkResult:
        best = np.zeros(n)
        best_t = np.zeros(n)
        best_at = np.zeros((n, d))
        alive = np.arange(n)
        t = np.zeros(n)
        X = np.zeros((n, d))
        while alive.size:
            m = alive.size
            gaps = rng.exponential(1.0 / lam, m)
            labels = rng.choice(d, size=m, p=probs)
            sizes = rng.exponential(1.0 / claim_rate, m)
            t = t + gaps
            X = X - gaps[:, None] * premiums
            X[np.arange(m), labels] += sizes
            agg = X.sum(axis=1)
            in_window = t <= T
            better = in_window & (agg > best[alive])
            idx = alive[better]
            best[idx] = agg[better]
            best_t[idx] = t[better]
            best_at[idx] = X[better]
            t, X, alive = t[in_window], X[in_window], alive[in_window]
        return {"sup": best, "argmax": best_t, "at_sup": best_at}

    return task


def _check_horizon(T: float) -> float:
    T = float(T)
    if not (T > 0 and math.isfinite(T)):
        raise DomainError(f"simulation needs a finite horizon T > 0, got {T}")
    return T


def _first_passage(model: RiskModel, u: float, T: float, cfg: SimConfig, components: bool) -> ChunkResult:
    require_valid(model)
    T = _check_horizon(T)
    if u < 0:
        raise DomainError(f"capital u must be >= 0, got {u}")
    if isinstance(model, BrownianModel):
        paths = _BrownianPaths.components(model) if components else _BrownianPaths.aggregate(model)
        return _run_chunks(_brownian_first_passage(paths, u, T, cfg), cfg)
    return _run_chunks(_cp_first_passage(model, u, T), cfg)


def _suprema(model: RiskModel, T: float, cfg: SimConfig, components: bool) -> ChunkResult:
    require_valid(model)
    T = _check_horizon(T)
    if isinstance(model, BrownianModel):
        paths = _BrownianPaths.components(model) if components else _BrownianPaths.aggregate(model)
        return _run_chunks(_brownian_supremum(paths, T, cfg), cfg)
    return _run_chunks(_cp_supremum(model, T), cfg)


def _mean_estimate(samples: np.ndarray, seed: int) -> SimEstimate:
    n = samples.size
    std_error = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return SimEstimate(value=float(np.mean(samples)), std_error=std_error, n_effective=int(n), seed=seed)


def _ratio_estimate(numerator: np.ndarray, denominator: np.ndarray, seed: int) -> SimEstimate:
    """mean(y)/mean(x) with the delta-method standard error"""
    n = numerator.size
    mean_x = float(np.mean(denominator))
    ratio = float(np.mean(numerator)) / mean_x
    residual = numerator - ratio * denominator
    std_error = float(np.std(residual, ddof=1) / (math.sqrt(n) * abs(mean_x))) if n > 1 else 0.0
    return SimEstimate(value=ratio, std_error=std_error, n_effective=int(n), seed=seed)


def _allocation(method: str, values: np.ndarray, times: np.ndarray, seed: int) -> SimAllocation:
    aggregate = values.sum(axis=1)
    return SimAllocation(
        method=method,
        fractions=tuple(_ratio_estimate(values[:, i], aggregate, seed) for i in range(values.shape[1])),
        component_means=tuple(_mean_estimate(values[:, i], seed) for i in range(values.shape[1])),
        aggregate_mean=_mean_estimate(aggregate, seed),
        time_mean=_mean_estimate(times, seed),
    )


def simulate_ruin_prob(model: RiskModel, u: float, T: float, cfg: SimConfig) -> SimEstimate:
    """
    Estimate psi(u, T) as the fraction of ruined paths.

    Compound Poisson paths are simulated exactly (ruin is only possible at claim
    epochs). Brownian paths use an Euler grid on the aggregate, with the Brownian-bridge
    crossing probability applied per cell when bridge_correction is set.
    """
    result = _first_passage(model, u, T, cfg, components=False)
    ruined = result["ruined"]
    n_ruined = int(ruined.sum())
    p = n_ruined / cfg.paths
    std_error = math.sqrt(p * (1.0 - p) / cfg.paths)
    logger.info(f"Simulated ruin probability {p:.6g} +/- {std_error:.2g} (u={u}, T={T}, paths={cfg.paths})")
    return SimEstimate(value=p, std_error=std_error, n_effective=n_ruined, seed=cfg.seed)


def simulate_allocation_time_of_ruin(model: RiskModel, u: float, T: float, cfg: SimConfig) -> SimAllocation:
    """
    Ratio estimates of c_i = E[S_i(tau) | tau <= T] / E[S(tau) | tau <= T].

    Raises:
        ZeroRuinedPaths: no path was ruined
    """
    result = _first_passage(model, u, T, cfg, components=True)
    ruined = result["ruined"]
    if not ruined.any():
        raise ZeroRuinedPaths(f"no ruined paths out of {cfg.paths} (u={u}, T={T})")
    return _allocation("time_of_ruin", result["at_ruin"][ruined], result["tau"][ruined], cfg.seed)


def simulate_allocation_sup_location(model: RiskModel, u: float, T: float, cfg: SimConfig) -> SimAllocation:
    """
    Estimates of E[S_i(t*) | S(t*) = u] from paths whose supremum falls within
    the bandwidth window around u (uniform kernel).

    Raises:
        ZeroConditioningPaths: the window holds no path
    """
    result = _suprema(model, T, cfg, components=True)
    window = cfg.window(u)
    selected = np.abs(result["sup"] - u) <= window
    if not selected.any():
        raise ZeroConditioningPaths(f"no supremum within {window} of u={u} out of {cfg.paths} paths")
    return _allocation("sup_location", result["at_sup"][selected], result["argmax"][selected], cfg.seed)


def simulate_tilted_mean(model: RiskModel, cfg: SimConfig) -> List[SimEstimate]:
    """
    Sample means of S_i(1) under the tilted measure Q; these estimate m_i.

    Raises:
        NoCramerRoot: propagated from the tilt
    """
    q_model = tilt(model).q_model

    if isinstance(q_model, BrownianModel):
        factor = covariance_factor(q_model.cov_matrix)
        drift = q_model.drift_vector

        def task(rng: np.random.Generator, n: int) -> ChunkResult:
            return {"s1": drift + rng.standard_normal((n, q_model.d)) @ factor.T}
    else:
        premiums = q_model.premium_vector
        intensities = q_model.intensity_vector
        scale = 1.0 / q_model.claim_rate

        def task(rng: np.random.Generator, n: int) -> ChunkResult:
            counts = rng.poisson(intensities, size=(n, q_model.d))
            return {"s1": rng.gamma(counts, scale) - premiums}

    samples = _run_chunks(task, cfg)["s1"]
    return [_mean_estimate(samples[:, i], cfg.seed) for i in range(samples.shape[1])]


def simulate_aggregate_variance(model: RiskModel, cfg: SimConfig) -> SimEstimate:
    """Sample variance of the one-step aggregate increment S(1)"""
    require_valid(model)
    if isinstance(model, BrownianModel):
        factor = covariance_factor(model.cov_matrix)

        def task(rng: np.random.Generator, n: int) -> ChunkResult:
            return {"s": (model.drift_vector + rng.standard_normal((n, model.d)) @ factor.T).sum(axis=1)}
    else:
        def task(rng: np.random.Generator, n: int) -> ChunkResult:
            counts = rng.poisson(model.intensity_vector, size=(n, model.d))
            return {"s": (rng.gamma(counts, 1.0 / model.claim_rate) - model.premium_vector).sum(axis=1)}

    s = _run_chunks(task, cfg)["s"]
    centred = s - s.mean()
    variance = float(np.var(s, ddof=1))
    fourth = float(np.mean(centred ** 4))
    std_error = math.sqrt(max(fourth - variance * variance, 0.0) / s.size)
    return SimEstimate(value=variance, std_error=std_error, n_effective=int(s.size), seed=cfg.seed)


def sample_ruin_events(model: RiskModel, u: float, T: float, cfg: SimConfig) -> Dict[str, np.ndarray]:
    """Ruin times and overshoots S(tau) - u of the ruined paths"""
    result = _first_passage(model, u, T, cfg, components=False)
    ruined = result["ruined"]
    return {"tau": result["tau"][ruined], "overshoot": result["overshoot"][ruined]}


def sample_suprema(model: RiskModel, T: float, cfg: SimConfig) -> np.ndarray:
    """Running maxima sup_{t <= T} S(t), one per path"""
    return _suprema(model, T, cfg, components=False)["sup"]
