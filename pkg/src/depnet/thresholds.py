"""Sufficient conditions for the dynamics to settle into the unique equilibrium.

Four conditions of increasing convenience and restrictiveness:

* contraction (uniqueness): ``rho(A) < (beta+alpha)^2 / (gamma beta)``;
* ``rho(W) < 1`` with ``W = D + gamma A`` and ``D = diag(h_v)``,
  ``h_v = |1 - beta / (1 - i_v*)|`` (needs the equilibrium);
* ``rho(A) <= tau`` where ``tau = min((1 - max h_v)/gamma, contraction rhs)``;
* the bound-only threshold, which replaces ``i*`` by the copula-free bounds.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import general_bounds
from .dynamics import EpidemicParams
from .equilibrium import contraction_rhs
from .graph import Graph, power_iteration, spectral_radius


@dataclass
class ThresholdReport:
    rho_A: float
    cond6_rhs: float
    cond6_holds: bool
    rho_W: float | None = None
    tau: float | None = None
    cond8_holds: bool | None = None
    thm2_rhs: float | None = None
    thm2_holds: bool | None = None
    h_values: np.ndarray | None = field(default=None, repr=False)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d.pop("h_values")
        return {k: (None if isinstance(v, float) and not np.isfinite(v) else v) for k, v in d.items()}


def condition6(g: Graph, p: EpidemicParams, rho_A: float | None = None):
    """``(holds, rho_A, rhs)`` for the contraction condition (strict inequality)."""
    if rho_A is None:
        rho_A = spectral_radius(g)
    rhs = contraction_rhs(p)
    return bool(rho_A < rhs), rho_A, rhs


def h_values(p: EpidemicParams, i_star) -> np.ndarray:
    x = np.asarray(i_star, dtype=float)
    if (x >= 1.0).any():
        raise ValueError("h is undefined at an infection probability of 1")
    return np.abs(1.0 - p.beta / (1.0 - x))


def rho_W(g: Graph, p: EpidemicParams, i_star) -> float:
    """Spectral radius of ``diag(h) + gamma A``."""
    h = h_values(p, i_star)
    A = g.adjacency
    res = power_iteration(lambda x: h * x + p.gamma * (A @ x), g.n)
    return res.value


def tau(g: Graph, p: EpidemicParams, i_star) -> float:
    if p.gamma <= 0.0:
        raise ValueError("tau needs gamma > 0")
    h = h_values(p, i_star)
    return min((1.0 - h.max()) / p.gamma, contraction_rhs(p))


def theorem2_threshold(g: Graph, p: EpidemicParams, rho_A: float | None = None):
    """``(holds, rhs)`` of the threshold built from the copula-free bounds only."""
    if p.beta <= 0.0 or p.gamma <= 0.0:
        raise ValueError("needs beta > 0 and gamma > 0")
    b = general_bounds(g, p)
    if b.lower >= 1.0 or (b.upper >= 1.0).any():
        raise ValueError("bound equals 1; threshold not applicable")
    worst = max(h_values(p, [b.lower]).max(), h_values(p, b.upper).max())
    rhs = (1.0 - worst) / p.gamma
    if rho_A is None:
        rho_A = spectral_radius(g)
    return bool(rho_A <= rhs), rhs


def threshold_report(g: Graph, p: EpidemicParams, i_star=None, rho_A: float | None = None) -> ThresholdReport:
    """Evaluate every applicable condition; equilibrium-based ones need ``i_star``."""
    if rho_A is None:
        rho_A = spectral_radius(g)
    holds6, _, rhs6 = condition6(g, p, rho_A)
    rep = ThresholdReport(rho_A=rho_A, cond6_rhs=rhs6, cond6_holds=holds6)
    if i_star is not None and np.all(np.asarray(i_star) < 1.0):
        rep.h_values = h_values(p, i_star)
        rep.rho_W = rho_W(g, p, i_star)
        if p.gamma > 0.0:
            rep.tau = tau(g, p, i_star)
            rep.cond8_holds = bool(rho_A <= rep.tau)
    if p.gamma > 0.0 and p.beta > 0.0:
        try:
            rep.thm2_holds, rep.thm2_rhs = theorem2_threshold(g, p, rho_A)
        except ValueError:
            pass
    return rep
