"""Undirected simple graphs, random generators and spectral radius."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse as sp

SPECTRAL_TOL = 1e-10
SPECTRAL_MAX_ITER = 100_000


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes ``0 .. n-1``.

    ``neighbors[v]`` is the ascending tuple of v's neighbours.  Build graphs
    with :func:`from_edges` or one of the generators rather than directly.
    """

    n: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.neighbors) != self.n:
            raise ValueError("need one neighbour list per node")
        for v, nbrs in enumerate(self.neighbors):
            if v in nbrs:
                raise ValueError(f"self-loop at node {v}")
            for u in nbrs:
                if not 0 <= u < self.n or v not in self.neighbors[u]:
                    raise ValueError(f"adjacency is not symmetric at ({v}, {u})")

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(nb) for nb in self.neighbors], dtype=np.int64)
        d.setflags(write=False)
        return d

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        indptr = np.concatenate([[0], np.cumsum(self.degrees)])
        indices = np.fromiter((u for nb in self.neighbors for u in nb), dtype=np.int64,
                              count=int(indptr[-1]))
        return sp.csr_matrix((np.ones(indices.size), indices, indptr), shape=(self.n, self.n))

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Sorted unique pairs ``(u, v)`` with ``u < v``."""
        return [(v, u) for v, nbrs in enumerate(self.neighbors) for u in nbrs if v < u]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.neighbors == other.neighbors

    def __hash__(self):
        return hash((self.n, self.neighbors))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


def from_edges(n: int, edges) -> Graph:
    """Build a graph from ``(u, v)`` pairs; duplicates collapse, self-loops raise."""
    sets = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop at node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        sets[u].add(v)
        sets[v].add(u)
    return Graph(n, tuple(tuple(sorted(s)) for s in sets))


def from_edge_list(text: str) -> Graph:
    """Parse a whitespace-separated edge list (``#`` starts a comment line)."""
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise ValueError(f"line {lineno}: negative node id")
        if u == v:
            raise ValueError(f"line {lineno}: self-loop at node {u}")
        edges.append((u, v))
    if not edges:
        raise ValueError("edge list is empty")
    n = 1 + max(max(e) for e in edges)
    return from_edges(n, edges)


def to_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def empty(n: int) -> Graph:
    return Graph(n, tuple(() for _ in range(n)))


def star(n: int) -> Graph:
    """Star with hub 0 and leaves ``1 .. n-1``."""
    if n < 2:
        raise ValueError("a star needs at least 2 nodes")
    return from_edges(n, [(0, v) for v in range(1, n)])


def complete(n: int) -> Graph:
    return from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): every unordered pair is an edge independently with probability p."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return from_edges(n, zip(iu[keep], ju[keep]))


def power_law(n: int, m: int, exponent: float, seed: int,
              finite_size_correction: bool = True) -> Graph:
    """Static-model scale-free graph.

    Node ``v`` gets weight ``(v + i0) ** (-1 / (exponent - 1))``; ``m`` endpoint
    pairs are drawn proportionally to the weights and self-loops or repeated
    pairs are dropped, so the result has at most ``m`` edges.

    With ``finite_size_correction`` (exponent < 3 only) the offset ``i0``
    follows Cho et al. (2009), as igraph's static power-law generator does;
    it tames the hub weights that otherwise dominate at finite n.  Without
    it ``i0 = 1``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > n * (n - 1) // 2:
        raise ValueError(f"m={m} exceeds the {n * (n - 1) // 2} possible edges")
    if exponent <= 2.0:
        raise ValueError("exponent must be > 2")
    rng = np.random.default_rng(seed)
    mu = 1.0 / (exponent - 1.0)
    i0 = 1.0
    if finite_size_correction and mu > 0.5:
        i0 = max(1.0, n ** (1.0 - 0.5 / mu) * (10.0 * np.sqrt(2.0) * (1.0 - mu)) ** (1.0 / mu))
    w = (np.arange(n, dtype=float) + i0) ** (-mu)
    w /= w.sum()
    a = rng.choice(n, size=m, p=w)
    b = rng.choice(n, size=m, p=w)
    ok = a != b
    return from_edges(n, zip(a[ok], b[ok]))


def random_regular(n: int, d: int, seed: int, max_restarts: int = 1000) -> Graph:
    """Uniform-ish random d-regular graph via stub pairing.

    Stubs are paired one random pair at a time, rejecting pairs that would
    create a loop or a repeated edge; a dead end restarts the whole pairing.
    """
    if d < 0 or d >= n:
        raise ValueError(f"need 0 <= d < n, got d={d}, n={n}")
    if (n * d) % 2:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")
    if d == 0:
        return empty(n)
    rng = np.random.default_rng(seed)
    for _ in range(max_restarts):
        edges = _pair_stubs(n, d, rng)
        if edges is not None:
            return from_edges(n, edges)
    raise RuntimeError(f"could not build a {d}-regular graph on {n} nodes")


def _pair_stubs(n, d, rng):
    remaining = np.full(n, d)
    nbrs = [set() for _ in range(n)]
    edges = []
    while remaining.any():
        nodes = np.flatnonzero(remaining)
        # probability of a node proportional to its open stubs
        p = remaining[nodes] / remaining[nodes].sum()
        for _attempt in range(100):
            u, v = rng.choice(nodes, size=2, p=p)
            if u != v and v not in nbrs[u]:
                break
        else:
            if not _has_suitable_pair(nodes, nbrs):
                return None
            continue
        nbrs[u].add(v)
        nbrs[v].add(u)
        remaining[u] -= 1
        remaining[v] -= 1
        edges.append((u, v))
    return edges


def _has_suitable_pair(nodes, nbrs):
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            if v not in nbrs[u]:
                return True
    return False


class PowerResult(NamedTuple):
    value: float
    iterations: int
    converged: bool


def power_iteration(matvec: Callable[[np.ndarray], np.ndarray], n: int,
                    tol: float = SPECTRAL_TOL, max_iter: int = SPECTRAL_MAX_ITER,
                    shift: float = 1.0) -> PowerResult:
    """Largest eigenvalue of a symmetric nonnegative operator.

    Iterates on ``M + shift*I`` from the all-ones vector so that a ``-rho``
    eigenvalue (bipartite structure) cannot make the iterates oscillate, and
    stops when successive Rayleigh quotients differ by less than ``tol``.
    """
    x = np.ones(n) / np.sqrt(n)
    prev = None
    for it in range(1, max_iter + 1):
        y = matvec(x) + shift * x
        rq = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return PowerResult(0.0, it, True)
        x = y / norm
        if prev is not None and abs(rq - prev) < tol:
            return PowerResult(rq - shift, it, True)
        prev = rq
    return PowerResult(prev - shift, max_iter, False)


def spectral_radius(g: Graph, tol: float = SPECTRAL_TOL, max_iter: int = SPECTRAL_MAX_ITER) -> float:
    """Spectral radius of the adjacency matrix; 0 for an edgeless graph.

    Emits :class:`ConvergenceWarning` and returns the last estimate when the
    iteration does not settle within ``max_iter`` steps.
    """
    if g.n == 0:
        raise ValueError("graph has no nodes")
    if g.num_edges == 0:
        return 0.0
    A = g.adjacency
    res = power_iteration(A.dot, g.n, tol, max_iter)
    if not res.converged:
        warnings.warn(f"power iteration stopped after {max_iter} steps at {res.value}",
                      ConvergenceWarning, stacklevel=2)
    return res.value


def is_star(g: Graph) -> int | None:
    """Hub index if ``g`` is a star on all its nodes (n >= 3), else None."""
    if g.n < 3 or g.num_edges != g.n - 1:
        return None
    hubs = np.flatnonzero(g.degrees == g.n - 1)
    if hubs.size == 1 and np.all(np.delete(g.degrees, hubs[0]) == 1):
        return int(hubs[0])
    return None


def regular_degree(g: Graph) -> int | None:
    """Common degree if every node has the same positive degree, else None."""
    d = g.degrees
    if d.size and d[0] > 0 and np.all(d == d[0]):
        return int(d[0])
    return None
