"""Equilibrium infection probabilities by fixed-point iteration.

At equilibrium every node satisfies

    i_v = (1 - K_v(i)) / (beta + 1 - K_v(i)),

with ``K_v`` the escape probability from :mod:`depnet.dynamics`.  The map on
the right is a contraction whenever rho(A) < (beta + alpha)^2 / (gamma beta),
so plain Picard iteration is used there; outside that regime the iteration is
damped once the residual has grown twice in a row.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import copula
from .dynamics import DependenceModel, EpidemicParams, escape_probability
from .graph import Graph, spectral_radius

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1_000_000
DAMPING = 0.5


@dataclass
class EquilibriumResult:
    i_star: np.ndarray
    iterations: int
    residual: float
    uniqueness_certified: bool
    converged: bool
    residuals: list = field(default_factory=list, repr=False)


def contraction_rhs(p: EpidemicParams) -> float:
    """(beta + alpha)^2 / (gamma beta); +inf when gamma = 0."""
    if p.gamma == 0.0:
        return float("inf")
    return (p.beta + p.alpha) ** 2 / (p.gamma * p.beta)


def _check(p):
    if p.beta <= 0.0:
        raise ValueError("cure probability beta must be > 0")


def fixed_point_map(x, g: Graph, p: EpidemicParams, m: DependenceModel) -> np.ndarray:
    K = escape_probability(x, g, p, m)
    return (1.0 - K) / (p.beta + 1.0 - K)


def equilibrium_defect(x, g: Graph, p: EpidemicParams, m: DependenceModel) -> np.ndarray:
    """Per-node defect of the equilibrium equation, ``|x - (1-b)x - (1-K)(1-x)|``."""
    x = np.asarray(x, dtype=float)
    K = escape_probability(x, g, p, m)
    return np.abs(x - (1.0 - p.beta) * x - (1.0 - K) * (1.0 - x))


def _picard(update, x0, tol, max_iter):
    x = x0
    residuals = []
    grew = 0
    damped = False
    for it in range(1, max_iter + 1):
        fx = update(x)
        new = (1.0 - DAMPING) * x + DAMPING * fx if damped else fx
        res = float(np.max(np.abs(new - x))) if new.size else 0.0
        if residuals and res > residuals[-1]:
            grew += 1
            if grew >= 2:
                damped = True
        else:
            grew = 0
        residuals.append(res)
        x = new
        if res < tol:
            return x, it, residuals, True
    return x, max_iter, residuals, False


def solve(g: Graph, p: EpidemicParams, m: DependenceModel, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER, rho_A: float | None = None) -> EquilibriumResult:
    """Solve for the equilibrium of the network model.

    Parameters
    ----------
    g, p, m
        Graph, epidemic parameters and dependence model.
    tol : float
        Stop when the max-norm change of one sweep is below ``tol``.
    max_iter : int
        Sweep budget; a non-converged result is returned (not raised) when hit.
    rho_A : float, optional
        Precomputed spectral radius of ``g``, used for the uniqueness flag.
    """
    _check(p)
    m.check_graph(g)
    if rho_A is None:
        rho_A = spectral_radius(g)
    certified = bool(rho_A < contraction_rhs(p))
    start = np.full(g.n, p.alpha / (p.alpha + p.beta))
    x, it, residuals, ok = _picard(lambda x: fixed_point_map(x, g, p, m), start, tol, max_iter)
    return EquilibriumResult(np.clip(x, 0.0, 1.0), it, residuals[-1] if residuals else 0.0,
                             certified, ok, residuals)


@dataclass
class StarEquilibrium:
    hub: float
    leaf: float
    iterations: int
    residual: float
    converged: bool


def solve_star(n: int, p: EpidemicParams, m: DependenceModel, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> StarEquilibrium:
    """Hub and leaf equilibria of the ``n``-node star.

    Reduces the network system to two unknowns: the hub sees ``n - 1``
    identical leaves, so only the diagonal section of its push copula matters,
    and each leaf sees the hub alone.
    """
    if n < 2:
        raise ValueError("a star needs at least 2 nodes")
    _check(p)
    if not m.node.supports(n - 1):
        raise ValueError(f"node copula {m.node} cannot be evaluated at degree {n - 1}")
    keep = 1.0 - p.alpha

    def hub_push_free(leaf):
        u = 1.0 - p.gamma * leaf
        return u if n == 2 else copula.diagonal(m.node, u, n - 1)

    def update(x):
        hub, leaf = x
        Kh = copula.evaluate(m.outer, [hub_push_free(leaf), keep])
        Kl = copula.evaluate(m.outer, [1.0 - p.gamma * hub, keep])
        return np.array([(1.0 - Kh) / (p.beta + 1.0 - Kh), (1.0 - Kl) / (p.beta + 1.0 - Kl)])

    start = np.full(2, p.alpha / (p.alpha + p.beta))
    x, it, residuals, ok = _picard(update, start, tol, max_iter)
    return StarEquilibrium(float(x[0]), float(x[1]), it, residuals[-1], ok)
