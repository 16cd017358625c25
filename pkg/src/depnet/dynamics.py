"""Mean-field push/pull infection dynamics with copula-coupled attacks.

One synchronous step maps the per-node infection probabilities ``i(t)`` to

    i_v(t+1) = (1 - beta) i_v(t) + [1 - K_v(i(t))] (1 - i_v(t)),
    K_v(x)   = C(C_v(1 - gamma x_u1, ..., 1 - gamma x_udeg), 1 - alpha),

where ``u1 .. udeg`` are v's neighbours.  ``K_v`` is the probability that a
secure node escapes both push and pull attacks in one step.  The neighbour
probability ``i_{v,j}`` is closed with the neighbour's marginal ``i_u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import copula
from .copula import CopulaSpec
from .graph import Graph

STATE_SLACK = 1e-12


@dataclass(frozen=True)
class EpidemicParams:
    """Per-step probabilities: pull infection ``alpha``, cure ``beta``, push ``gamma`` per edge."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if math.isnan(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
            object.__setattr__(self, name, value)

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class DependenceModel:
    """``outer`` couples push with pull (a 2-copula); ``node`` is the family used for each C_v."""

    outer: CopulaSpec = copula.INDEPENDENCE
    node: CopulaSpec = copula.INDEPENDENCE

    def __post_init__(self):
        if not self.outer.supports(2):
            raise ValueError(f"outer copula {self.outer} is not a 2-copula")

    def check_graph(self, g: Graph) -> None:
        dmax = int(g.degrees.max()) if g.n else 0
        if not self.node.supports(dmax):
            raise ValueError(f"node copula {self.node} cannot be evaluated at degree {dmax}")

    def to_dict(self):
        return {"outer": self.outer.to_dict(), "node": self.node.to_dict()}

    @classmethod
    def from_dict(cls, data):
        return cls(CopulaSpec.from_dict(data["outer"]), CopulaSpec.from_dict(data["node"]))


INDEPENDENT = DependenceModel()


class StateVector(NamedTuple):
    i: np.ndarray
    t: int = 0


def escape_probability(x, g: Graph, p: EpidemicParams, m: DependenceModel) -> np.ndarray:
    """``K_v(x)`` for every node: probability of dodging all push and pull attacks."""
    push_free = copula.evaluate_neighborhoods(m.node, 1.0 - p.gamma * np.asarray(x, dtype=float),
                                              g.adjacency)
    pairs = np.stack([push_free, np.full(g.n, 1.0 - p.alpha)], axis=-1)
    return np.atleast_1d(copula.evaluate(m.outer, pairs))


def _as_state(state) -> StateVector:
    if isinstance(state, StateVector):
        return state
    return StateVector(np.asarray(state, dtype=float), 0)


def step(state, g: Graph, p: EpidemicParams, m: DependenceModel) -> StateVector:
    """Advance one synchronous (Jacobi) step."""
    st = _as_state(state)
    x = np.asarray(st.i, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"state has shape {x.shape}, graph has {g.n} nodes")
    if np.isnan(x).any() or (x < 0.0).any() or (x > 1.0).any():
        raise ValueError("infection probabilities must lie in [0, 1]")
    K = escape_probability(x, g, p, m)
    nxt = (1.0 - p.beta) * x + (1.0 - K) * (1.0 - x)
    if (nxt < -STATE_SLACK).any() or (nxt > 1.0 + STATE_SLACK).any():
        raise ValueError("update left [0, 1] beyond rounding slack")
    return StateVector(np.clip(nxt, 0.0, 1.0), st.t + 1)


def simulate(state0, g: Graph, p: EpidemicParams, m: DependenceModel, horizon: int) -> list[StateVector]:
    """Trajectory ``[state0, step(state0), ...]`` of length ``horizon + 1``."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    m.check_graph(g)
    traj = [_as_state(state0)]
    for _ in range(horizon):
        traj.append(step(traj[-1], g, p, m))
    return traj


def trajectory_array(traj: list[StateVector]) -> np.ndarray:
    """Stack a trajectory into a ``(T, N)`` array."""
    return np.stack([s.i for s in traj])
