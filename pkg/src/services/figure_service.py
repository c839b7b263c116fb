"""
Figure Service
Builds the allocation-fraction tables behind the worked examples (one CSV per panel)
"""
import logging
from typing import Dict, Iterable, Optional

import numpy as np
import pandas as pd

from src.core.allocation_engine import allocate_gradient, allocate_sup_location, allocate_time_of_ruin
from src.core.errors import DomainError
from src.core.model import BrownianModel, CompoundPoissonExpModel, Horizon
from src.core.ruin_engine import dynamic_var

logger = logging.getLogger(__name__)

BROWNIAN_EXAMPLE = BrownianModel(drift=(-2.0, -1.0), covariance=((1.0, 0.5), (0.5, 1.0)))
BROWNIAN_POSITIVE_DRIFT = BrownianModel(drift=(2.0, 1.0), covariance=((1.0, 0.5), (0.5, 1.0)))
CP_EXAMPLE = CompoundPoissonExpModel(premium_rates=(1.0, 1.0), intensities=(0.85, 0.95), claim_rate=1.0)
CP_LESS_RISKY = CompoundPoissonExpModel(premium_rates=(1.5, 1.5), intensities=(0.85, 0.95), claim_rate=1.0)
CP_SHIFTED_INTENSITY = CompoundPoissonExpModel(premium_rates=(1.0, 1.0), intensities=(0.8, 1.0), claim_rate=1.0)

FIG1_ALPHAS = (0.001, 0.01, 0.1, 0.3)
FIG2A_HORIZONS = (0.5, 1.0, 5.0)
FIG2B_CAPITALS = (1.0, 5.0, 10.0)


class FigureService:
    """
    Produces the figure tables as long-format DataFrames.
    Grids default to alpha in logspace(-3, -0.3, 40), u in linspace(0.1, 30, 60)
    and T in logspace(-2, 2, 60).
    """

    UNITS = {
        "fig1": "T in time units; c1/cbar1 are fractions of VaR allocated to component 1",
        "fig2a": "u in capital units; T in time units; fractions of u",
        "fig2b": "u in capital units; T in time units; fractions of u",
        "fig3a": "alpha is the ruin-probability level; fractions of VaR",
        "fig3b": "u in capital units; fractions of u",
        "fig4a": "alpha is the ruin-probability level; fractions of VaR",
        "fig4b": "alpha is the ruin-probability level; fractions of VaR",
    }

    def __init__(self, alpha_points: int = 40, u_points: int = 60, t_points: int = 60):
        """
        Initialize the figure service.

        Args:
            alpha_points: Number of alpha grid points
            u_points: Number of capital grid points
            t_points: Number of horizon grid points
        """
        self.alphas = np.logspace(-3, -0.3, alpha_points)
        self.capitals = np.linspace(0.1, 30.0, u_points)
        self.horizons = np.logspace(-2, 2, t_points)
        logger.info(f"FigureService initialized with grids alpha={alpha_points}, u={u_points}, T={t_points}")

    def fig1(self) -> pd.DataFrame:
        """Brownian c1 and cbar1 at u = VaR^alpha(S, T) as functions of T"""
        rows = []
        for alpha in FIG1_ALPHAS:
            for T in self.horizons:
                horizon = Horizon.finite(T)
                u = dynamic_var(BROWNIAN_EXAMPLE, alpha, horizon)
                rows.append({
                    "alpha": alpha, "T": T, "var": u,
                    "c1": allocate_time_of_ruin(BROWNIAN_EXAMPLE, u, horizon).fractions[0],
                    "cbar1": allocate_sup_location(BROWNIAN_EXAMPLE, u, horizon).fractions[0],
                })
        return pd.DataFrame(rows)

    def _fractions_over_u(self, model: BrownianModel, horizons: Iterable[float],
                          capitals: Iterable[float]) -> pd.DataFrame:
        rows = []
        for T in horizons:
            horizon = Horizon.finite(T)
            for u in capitals:
                rows.append({
                    "T": T, "u": u,
                    "c1": allocate_time_of_ruin(model, u, horizon).fractions[0],
                    "cbar1": allocate_sup_location(model, u, horizon).fractions[0],
                })
        return pd.DataFrame(rows)

    def fig2a(self) -> pd.DataFrame:
        """Brownian c1 and cbar1 as functions of u for several horizons"""
        return self._fractions_over_u(BROWNIAN_EXAMPLE, FIG2A_HORIZONS, self.capitals)

    def fig2b(self) -> pd.DataFrame:
        """Positive-drift Brownian c1 and cbar1 as functions of T for several capitals"""
        frame = self._fractions_over_u(BROWNIAN_POSITIVE_DRIFT, self.horizons, FIG2B_CAPITALS)
        return frame.sort_values(["u", "T"], kind="mergesort").reset_index(drop=True)

    def _fractions_over_alpha(self, model: CompoundPoissonExpModel) -> pd.DataFrame:
        horizon = Horizon.infinite()
        rows = []
        for alpha in self.alphas:
            u = dynamic_var(model, alpha, horizon)
            rows.append({
                "alpha": alpha, "var": u,
                "gvar1": allocate_gradient(model, alpha, horizon).fractions[0],
                "cbar1": allocate_sup_location(model, u, horizon).fractions[0],
                "c1": allocate_time_of_ruin(model, u, horizon).fractions[0],
            })
        return pd.DataFrame(rows)

    def fig3a(self) -> pd.DataFrame:
        """Compound Poisson gradient, sup-location and time-of-ruin fractions against alpha"""
        return self._fractions_over_alpha(CP_EXAMPLE)

    def fig3b(self) -> pd.DataFrame:
        """Compound Poisson c1 and cbar1 against u"""
        horizon = Horizon.infinite()
        rows = [{
            "u": u,
            "c1": allocate_time_of_ruin(CP_EXAMPLE, u, horizon).fractions[0],
            "cbar1": allocate_sup_location(CP_EXAMPLE, u, horizon).fractions[0],
        } for u in self.capitals]
        return pd.DataFrame(rows)

    def fig4a(self) -> pd.DataFrame:
        """Fractions against alpha with premiums raised to (1.5, 1.5)"""
        return self._fractions_over_alpha(CP_LESS_RISKY)

    def fig4b(self) -> pd.DataFrame:
        """Fractions against alpha with intensities (0.8, 1)"""
        return self._fractions_over_alpha(CP_SHIFTED_INTENSITY)

    def all_figures(self, names: Optional[Iterable[str]] = None) -> Dict[str, pd.DataFrame]:
        """Build the requested figure tables (all by default)"""
        builders = {
            "fig1": self.fig1, "fig2a": self.fig2a, "fig2b": self.fig2b, "fig3a": self.fig3a,
            "fig3b": self.fig3b, "fig4a": self.fig4a, "fig4b": self.fig4b,
        }
        selected = list(names) if names else list(builders)
        unknown = set(selected) - set(builders)
        if unknown:
            raise DomainError(f"unknown figures: {sorted(unknown)}")
        tables = {}
        for name in selected:
            tables[name] = builders[name]()
            logger.info(f"Built {name} with {len(tables[name])} rows")
        return tables
