"""
Verification Service
Cross-checks the closed-form engines against exact identities and the Monte Carlo oracle
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Any, Callable, Dict, List

import numpy as np
import pandas as pd
from scipy import stats

from src.core.allocation_engine import (
    allocate_asymptotic,
    allocate_gradient,
    allocate_sup_location,
    allocate_time_of_ruin,
)
from src.core.errors import RiskModelError, UndefinedAllocation
from src.core.levy_analytics import tilt
from src.core.model import Horizon, RuinQuery
from src.core.phase_type import phase_type_ruin
from src.core.ruin_engine import dynamic_var, ruin_prob
from src.core.simulator import (
    SimConfig,
    sample_ruin_events,
    simulate_allocation_sup_location,
    simulate_allocation_time_of_ruin,
    simulate_ruin_prob,
    simulate_tilted_mean,
)
from src.services.figure_service import BROWNIAN_EXAMPLE, BROWNIAN_POSITIVE_DRIFT, CP_EXAMPLE

logger = logging.getLogger(__name__)

SIGMA_BUDGET = 3.0
SUP_BANDWIDTH_BIAS = 0.01
KS_LEVEL = 0.01
# Late ruins beyond this horizon are negligible for u <= 10
CP_RUIN_HORIZON = 2000.0


@dataclass
class CheckResult:
    """Outcome of one verification check"""
    name: str
    passed: bool
    value: float
    reference: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)


def _within(name: str, value: float, reference: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(abs(value - reference) <= tolerance), value=float(value),
                       reference=float(reference), tolerance=float(tolerance), detail=detail)


class VerificationService:
    """
    Runs the oracle suite. Closed-form identities are checked to machine-level
    tolerances; simulated quantities within 3 standard errors plus any stated bias budget.
    """

    def __init__(self, sim_config: SimConfig):
        """
        Initialize the verification service.

        Args:
            sim_config: Simulation settings for the Monte Carlo checks
        """
        self.sim_config = sim_config
        logger.info(f"VerificationService initialized with {sim_config.paths} paths, seed {sim_config.seed}")

    def check_brownian_asymptotic(self) -> List[CheckResult]:
        fractions = allocate_asymptotic(BROWNIAN_EXAMPLE).fractions
        return [_within(f"brownian_asymptotic_c{i + 1}", fractions[i], ref, 1e-12)
                for i, ref in enumerate((1 / 3, 2 / 3))]

    def check_spectrally_negative_exactness(self) -> List[CheckResult]:
        results = []
        for u in (0.5, 1.0, 5.0, 20.0):
            report = allocate_time_of_ruin(BROWNIAN_EXAMPLE, u, Horizon.infinite())
            results.append(_within(f"brownian_infinite_c1_u{u:g}", report.fractions[0], 1 / 3, 1e-12))
        return results

    def check_positive_drift(self) -> List[CheckResult]:
        report = allocate_time_of_ruin(BROWNIAN_POSITIVE_DRIFT, 1.0, Horizon.infinite())
        results = [_within("positive_drift_c1", report.fractions[0], 2 / 3, 1e-12)]
        try:
            allocate_sup_location(BROWNIAN_POSITIVE_DRIFT, 1.0, Horizon.infinite())
            undefined = False
        except UndefinedAllocation:
            undefined = True
        results.append(CheckResult("positive_drift_sup_location_undefined", undefined, float(undefined), 1.0, 0.0,
                                   "sup-location must raise UndefinedAllocation"))
        return results

    def check_finite_horizon_oracle(self) -> List[CheckResult]:
        horizon = Horizon.finite(1.0)
        u = dynamic_var(BROWNIAN_EXAMPLE, 0.1, horizon)
        cfg = self.sim_config
        closed = allocate_time_of_ruin(BROWNIAN_EXAMPLE, u, horizon).fractions[0]
        simulated = simulate_allocation_time_of_ruin(BROWNIAN_EXAMPLE, u, 1.0, cfg).fractions[0]
        closed_bar = allocate_sup_location(BROWNIAN_EXAMPLE, u, horizon).fractions[0]
        simulated_bar = simulate_allocation_sup_location(BROWNIAN_EXAMPLE, u, 1.0, cfg).fractions[0]
        return [
            _within("finite_T_c1_vs_simulation", simulated.value, closed,
                    SIGMA_BUDGET * simulated.std_error, f"u=VaR^0.1(S,1)={u:.6g}"),
            _within("finite_T_cbar1_vs_simulation", simulated_bar.value, closed_bar,
                    SIGMA_BUDGET * simulated_bar.std_error + SUP_BANDWIDTH_BIAS, f"bandwidth {cfg.window(u):.4g}"),
        ]

    def check_horizon_limits(self) -> List[CheckResult]:
        results = []
        for T, reference, tolerance in ((1e-6, 0.5, 1e-3), (1e3, 1 / 3, 1e-6)):
            horizon = Horizon.finite(T)
            u = dynamic_var(BROWNIAN_EXAMPLE, 0.1, horizon)
            c1 = allocate_time_of_ruin(BROWNIAN_EXAMPLE, u, horizon).fractions[0]
            cbar1 = allocate_sup_location(BROWNIAN_EXAMPLE, u, horizon).fractions[0]
            results.append(_within(f"limit_T{T:g}_c1", c1, reference, tolerance))
            results.append(_within(f"limit_T{T:g}_cbar1", cbar1, reference, tolerance))
        return results

    def check_cp_ruin(self) -> List[CheckResult]:
        results = []
        cfg = self.sim_config
        for u in (5.0, 10.0):
            closed = ruin_prob(CP_EXAMPLE, RuinQuery(u, Horizon.infinite())).probability
            estimate = simulate_ruin_prob(CP_EXAMPLE, u, CP_RUIN_HORIZON, cfg)
            results.append(_within(f"cp_ruin_u{u:g}_vs_simulation", estimate.value, closed,
                                   SIGMA_BUDGET * estimate.std_error))
        overshoot = sample_ruin_events(CP_EXAMPLE, 5.0, CP_RUIN_HORIZON, cfg)["overshoot"]
        ks = stats.kstest(overshoot, "expon", args=(0.0, 1.0 / CP_EXAMPLE.claim_rate))
        results.append(CheckResult("cp_overshoot_exponential_ks", bool(ks.pvalue > KS_LEVEL), float(ks.pvalue),
                                   KS_LEVEL, 0.0, f"KS statistic {ks.statistic:.4g} on {overshoot.size} ruins"))
        return results

    def check_cp_allocation_oracle(self) -> List[CheckResult]:
        closed = allocate_time_of_ruin(CP_EXAMPLE, 5.0, Horizon.infinite()).fractions
        simulated = simulate_allocation_time_of_ruin(CP_EXAMPLE, 5.0, CP_RUIN_HORIZON, self.sim_config).fractions
        return [_within(f"cp_c{i + 1}_u5_vs_simulation", estimate.value, reference,
                        SIGMA_BUDGET * estimate.std_error)
                for i, (estimate, reference) in enumerate(zip(simulated, closed))]

    def check_gradient_equals_sup_location(self) -> List[CheckResult]:
        results = []
        horizon = Horizon.infinite()
        for alpha in (0.01, 0.05, 0.1):
            gradient = allocate_gradient(CP_EXAMPLE, alpha, horizon)
            sup = allocate_sup_location(CP_EXAMPLE, gradient.u, horizon)
            g1, s1 = gradient.fractions[0], sup.fractions[0]
            results.append(_within(f"cp_gvar_equals_kbar_alpha{alpha:g}", g1, s1, 1e-4 * abs(s1)))
        for u in (0.0, 1.0, 5.0, 10.0, 20.0):
            phase = phase_type_ruin(CP_EXAMPLE, np.ones(CP_EXAMPLE.d), u).probability
            closed = ruin_prob(CP_EXAMPLE, RuinQuery(u, horizon)).probability
            results.append(_within(f"phase_type_reduction_u{u:g}", phase, closed, 1e-10))
        return results

    def check_convergence_in_u(self) -> List[CheckResult]:
        horizon = Horizon.infinite()
        limit = allocate_asymptotic(CP_EXAMPLE).fractions[0]
        c1 = allocate_time_of_ruin(CP_EXAMPLE, 100.0, horizon).fractions[0]
        gaps = [abs(allocate_sup_location(CP_EXAMPLE, u, horizon).fractions[0] - limit) for u in (1.0, 10.0, 100.0)]
        decreasing = gaps[0] > gaps[1] > gaps[2]
        return [
            _within("cp_c1_u100_vs_limit", c1, limit, 1e-3),
            CheckResult("cp_cbar1_gap_decreasing", decreasing, gaps[-1], 0.0, 0.0,
                        "gaps " + ", ".join(f"{g:.3g}" for g in gaps)),
        ]

    def check_tilted_means(self) -> List[CheckResult]:
        results = []
        for label, model in (("brownian", BROWNIAN_EXAMPLE), ("cp", CP_EXAMPLE)):
            expected = tilt(model).m_components
            estimates = simulate_tilted_mean(model, self.sim_config)
            for i, (estimate, m_i) in enumerate(zip(estimates, expected)):
                results.append(_within(f"{label}_tilted_mean_m{i + 1}", estimate.value, m_i,
                                       SIGMA_BUDGET * estimate.std_error))
        return results

    def run_all(self) -> List[CheckResult]:
        """Run every check; a check that raises is recorded as failed"""
        suites: List[Callable[[], List[CheckResult]]] = [
            self.check_brownian_asymptotic,
            self.check_spectrally_negative_exactness,
            self.check_positive_drift,
            self.check_finite_horizon_oracle,
            self.check_horizon_limits,
            self.check_cp_ruin,
            self.check_cp_allocation_oracle,
            self.check_gradient_equals_sup_location,
            self.check_convergence_in_u,
            self.check_tilted_means,
        ]
        results: List[CheckResult] = []
        for suite in suites:
            try:
                results.extend(suite())
            except RiskModelError as e:
                logger.error(f"{suite.__name__} raised {type(e).__name__}: {e}")
                results.append(CheckResult(suite.__name__, False, math.nan, math.nan, math.nan,
                                           f"{type(e).__name__}: {e}"))
        failed = [r.name for r in results if not r.passed]
        logger.info(f"Verification finished: {len(results) - len(failed)}/{len(results)} checks passed")
        return results

    @staticmethod
    def to_frame(results: List[CheckResult]) -> pd.DataFrame:
        return pd.DataFrame([r.to_dict() for r in results],
                            columns=["name", "passed", "value", "reference", "tolerance", "detail"])
