"""Communication graphs and doubly stochastic mixing matrices.

Graphs are undirected, without self-loops (self-communication is implicit:
every agent always averages its own value). Mixing matrices are built with
Metropolis-Hastings weights by default, or uniform (1/m) weights on the
complete graph, and carry their connectivity measure
rho = ||W - (1/m) 1 1^T||_2 computed at construction.

Randomness uses numpy's PCG64 generator; the algorithm name is exported as
RNG_ALGORITHM so run manifests can record it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg

RNG_ALGORITHM = "PCG64"

__all__ = [
    "RNG_ALGORITHM",
    "TopologyError",
    "ConnectivityError",
    "Graph",
    "MixingMatrix",
    "erdos_renyi",
    "ring",
    "complete",
    "metropolis_weights",
    "uniform_weights",
    "graph_to_edge_list",
    "graph_from_edge_list",
]


class TopologyError(ValueError):
    pass


class ConnectivityError(TopologyError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected graph on agents 0..m-1 with a set of unordered edges."""

    m: int
    edges: frozenset  # frozenset of (i, j) tuples with i < j

    def __post_init__(self):
        if self.m < 1:
            raise TopologyError("graph needs at least one node")
        for i, j in self.edges:
            if not (0 <= i < j < self.m):
                raise TopologyError(f"bad edge ({i}, {j}) for m={self.m}")

    def neighbors(self, i: int) -> list:
        out = [j for (a, j) in self.edges if a == i]
        out += [a for (a, j) in self.edges if j == i]
        return sorted(out)

    def degree(self, i: int) -> int:
        return sum(1 for (a, b) in self.edges if a == i or b == i)

    def is_connected(self) -> bool:
        if self.m == 1:
            return True
        adj = [[] for _ in range(self.m)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.m


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Symmetric doubly stochastic weights with cached connectivity rho."""

    w: np.ndarray
    rho: float
    graph: Graph

    def __post_init__(self):
        _validate_mixing(self.w, self.graph)
        if not 0.0 <= self.rho < 1.0:
            raise TopologyError(f"rho={self.rho} outside [0, 1)")

    @property
    def m(self) -> int:
        return self.w.shape[0]


def _validate_mixing(w: np.ndarray, g: Graph, tol: float = 1e-12) -> None:
    m = g.m
    if w.shape != (m, m):
        raise TopologyError(f"mixing matrix shape {w.shape} does not match m={m}")
    if np.abs(w - w.T).max() > tol:
        raise TopologyError("mixing matrix is not symmetric")
    if np.abs(w.sum(axis=1) - 1.0).max() > tol or np.abs(w.sum(axis=0) - 1.0).max() > tol:
        raise TopologyError("mixing matrix is not doubly stochastic")
    edge_set = g.edges
    for i in range(m):
        for j in range(i + 1, m):
            if (i, j) not in edge_set and w[i, j] != 0.0:
                raise TopologyError(f"nonzero weight on missing edge ({i}, {j})")


def _edge(i: int, j: int) -> tuple:
    return (i, j) if i < j else (j, i)


def ring(m: int) -> Graph:
    """Cycle graph on m >= 3 nodes."""
    if m < 3:
        raise TopologyError("ring needs m >= 3")
    edges = frozenset(_edge(i, (i + 1) % m) for i in range(m))
    return Graph(m, edges)


def complete(m: int) -> Graph:
    """Complete graph on m >= 2 nodes."""
    if m < 2:
        raise TopologyError("complete needs m >= 2")
    edges = frozenset((i, j) for i in range(m) for j in range(i + 1, m))
    return Graph(m, edges)


def erdos_renyi(m: int, p: float, seed: int, max_resamples: int = 100) -> Graph:
    """Connected G(m, p) sample.

    Each of the m(m-1)/2 edges is included independently with probability p.
    Disconnected samples are redrawn with seed+1, seed+2, ... up to
    `max_resamples` attempts.
    """
    if m < 2:
        raise TopologyError("erdos_renyi needs m >= 2")
    if not 0.0 < p <= 1.0:
        raise TopologyError("edge probability must be in (0, 1]")
    for attempt in range(max_resamples + 1):
        rng = np.random.Generator(np.random.PCG64(seed + attempt))
        edges = set()
        for i in range(m):
            for j in range(i + 1, m):
                if rng.random() < p:
                    edges.add((i, j))
        g = Graph(m, frozenset(edges))
        if g.is_connected():
            return g
    raise ConnectivityError(
        f"no connected G({m}, {p}) sample after {max_resamples + 1} attempts"
    )


def _rho_of(w: np.ndarray) -> float:
    m = w.shape[0]
    return linalg.spectral_norm(w - np.full((m, m), 1.0 / m))


def metropolis_weights(g: Graph) -> MixingMatrix:
    """Metropolis-Hastings mixing matrix for a connected graph.

    w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal fills the row
    sum to 1. Symmetric and doubly stochastic by construction.
    """
    if not g.is_connected():
        raise ConnectivityError("metropolis_weights requires a connected graph")
    m = g.m
    deg = [g.degree(i) for i in range(m)]
    w = np.zeros((m, m))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return MixingMatrix(w=w, rho=_rho_of(w), graph=g)


def uniform_weights(g: Graph) -> MixingMatrix:
    """W = (1/m) 1 1^T on the complete graph; rho = 0 exactly."""
    m = g.m
    if len(g.edges) != m * (m - 1) // 2:
        raise TopologyError("uniform_weights requires the complete graph")
    w = np.full((m, m), 1.0 / m)
    return MixingMatrix(w=w, rho=0.0, graph=g)


def graph_to_edge_list(g: Graph) -> str:
    """Serialize to the edge-list text format: 'm <count>' then ascending pairs."""
    lines = [f"m {g.m}"]
    lines += [f"{i} {j}" for i, j in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def graph_from_edge_list(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("m "):
        raise TopologyError("edge list must start with 'm <count>'")
    m = int(lines[0].split()[1])
    edges = set()
    for ln in lines[1:]:
        i, j = (int(t) for t in ln.split())
        edges.add(_edge(i, j))
    return Graph(m, frozenset(edges))
