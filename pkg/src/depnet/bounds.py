"""Closed-form bounds on equilibrium and long-run infection probabilities.

The equilibrium bounds hold for every choice of copulas; the non-equilibrium
bounds take the copulas into account and bracket the liminf/limsup of any
trajectory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import copula
from .dynamics import DependenceModel, EpidemicParams
from .graph import Graph


@dataclass
class BoundsReport:
    """Lower bound (shared by all nodes) and per-node upper bounds.

    ``kind`` is one of ``general``, ``star``, ``regular`` or ``nonequilibrium``.
    ``extras`` carries the star hub/leaf values or the per-node
    non-equilibrium bounds with their auxiliaries.
    """

    lower: float
    upper: np.ndarray
    kind: str
    extras: dict = field(default_factory=dict)


def _require_beta(p):
    if p.beta <= 0.0:
        raise ValueError("cure probability beta must be > 0")


def equilibrium_lower(p: EpidemicParams) -> float:
    if p.gamma > p.alpha + p.beta:
        return (p.gamma - p.beta) / p.gamma
    return p.alpha / (p.beta + p.alpha)


def _degree_upper(degrees, p):
    M = np.minimum(p.alpha + p.gamma * np.asarray(degrees, dtype=float) / (p.beta + 1.0), 1.0)
    return M / (p.beta + M)


def general_bounds(g: Graph, p: EpidemicParams) -> BoundsReport:
    _require_beta(p)
    return BoundsReport(equilibrium_lower(p), _degree_upper(g.degrees, p), "general")


def _quadratic_upper(load: float, p: EpidemicParams) -> float:
    """Fixed point of x = min(a + load*x, 1) / (b + min(a + load*x, 1)).

    ``load`` is the total push rate feeding the node ((N-1)gamma for a hub,
    gamma*d for a d-regular node).  Saturated branch gives 1/(beta+1);
    otherwise the positive root of load*x^2 + (a + b - load)x - a = 0.
    """
    a, b = p.alpha, p.beta
    if load == 0.0:
        return a / (a + b)
    if 1.0 / (b + 1.0) >= (1.0 - a) / load:
        return 1.0 / (b + 1.0)
    lin = a + b - load
    disc = math.sqrt(lin * lin + 4.0 * load * a)
    if lin > 0.0:
        return 2.0 * a / (lin + disc)
    return (-lin + disc) / (2.0 * load)


def star_bounds(n: int, p: EpidemicParams) -> BoundsReport:
    """Refined upper bounds for a star with hub 0 and ``n - 1`` leaves.

    ``leaf_upper`` is the self-consistent leaf value, the fixed point of
    x = M(gamma x) / (beta + M(gamma x)).  A leaf is pushed by the hub, which is
    at least as infected as the leaf, so that value can be exceeded (e.g. under
    the lower Fréchet outer copula it always is for n >= 3).
    ``leaf_upper_safe`` feeds the hub bound into the leaf instead and is always
    valid; it still never exceeds the general degree-1 bound.
    """
    if n < 2:
        raise ValueError("a star needs at least 2 nodes")
    _require_beta(p)
    hub = _quadratic_upper((n - 1) * p.gamma, p)
    leaf = _quadratic_upper(p.gamma, p)
    M = min(p.alpha + p.gamma * hub, 1.0)
    safe = M / (p.beta + M)
    upper = np.full(n, leaf)
    upper[0] = hub
    return BoundsReport(equilibrium_lower(p), upper, "star",
                        {"hub_upper": hub, "leaf_upper": leaf, "leaf_upper_safe": safe})


def regular_bounds(d: int, p: EpidemicParams, n: int | None = None) -> BoundsReport:
    """Refined upper bound shared by every node of a d-regular graph.

    ``upper`` has length ``n`` when given, otherwise a single entry.
    """
    if d < 1:
        raise ValueError("degree must be >= 1")
    _require_beta(p)
    ub = _quadratic_upper(d * p.gamma, p)
    return BoundsReport(equilibrium_lower(p), np.full(n or 1, ub), "regular", {"upper": ub})


def nonequilibrium_bounds(g: Graph, p: EpidemicParams, m: DependenceModel) -> BoundsReport:
    """Per-node bounds on liminf/limsup of i_v(t), valid whether or not i(t) converges.

    ``extras`` holds ``lower`` and ``upper`` arrays, ``mu`` (per node) and ``nu``.
    The top-level ``lower``/``upper`` are the equilibrium bounds for reference.
    """
    _require_beta(p)
    m.check_graph(g)
    a, b, c = p.alpha, p.beta, p.gamma
    deg = g.degrees.astype(float)
    nu = min(1.0 - b, a)
    mu = np.maximum(1.0 - b, np.minimum(c * deg + a, 1.0))
    keep = 1.0 - a

    # lower: every neighbour at nu -> diagonal section of C_v at dimension deg(v)
    push_lo = copula.evaluate_neighborhoods(m.node, np.full(g.n, 1.0 - c * nu), g.adjacency)
    K_lo = np.atleast_1d(copula.evaluate(m.outer, np.stack([push_lo, np.full(g.n, keep)], -1)))
    lo = np.where(K_lo >= b, (1.0 - K_lo) / (b + 1.0 - K_lo), (b - K_lo) * (1.0 - mu) + 1.0 - b)

    # upper: neighbour u at mu_u
    push_hi = copula.evaluate_neighborhoods(m.node, 1.0 - c * mu, g.adjacency)
    K_hi = np.atleast_1d(copula.evaluate(m.outer, np.stack([push_hi, np.full(g.n, keep)], -1)))
    hi = np.where(K_hi >= b, (1.0 - K_hi) / (b + 1.0 - K_hi), (b - K_hi) * (1.0 - lo) + 1.0 - b)

    eq = general_bounds(g, p)
    return BoundsReport(eq.lower, eq.upper, "nonequilibrium",
                        {"lower": lo, "upper": hi, "mu": mu, "nu": nu,
                         "K_lower": K_lo, "K_upper": K_hi})
