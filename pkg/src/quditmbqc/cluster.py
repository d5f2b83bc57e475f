"""Cluster graphs, cluster-state preparation, and stabilizer verification.

A cluster state on a graph is the image of the uniform superposition under
the product of two-site phase gates over all edges; equivalently it is the
joint +1 eigenstate of the operators

    K_a = X_a^dag  prod_{b in nbgh(a)}  Z_b ,

one per site.  Because every entangling gate is diagonal, the whole
preparation is a single phase vector, which also makes the Ising-type
Hamiltonian evolution exact: at t = 2*pi/(d*g) the evolution phases coincide
with the entangler phases digit by digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import check_dim, gen_x, gen_z, omega_pow
from .states import StateVector, apply_local, plus_state


@dataclass(frozen=True)
class ClusterGraph:
    """Sites 1..n_sites, undirected edges, and an input/output partition."""

    d: int
    n_sites: int
    edges: frozenset[tuple[int, int]]
    input_sites: tuple[int, ...] = field(default=())
    output_sites: tuple[int, ...] = field(default=())

    def __post_init__(self):
        check_dim(self.d)
        if self.n_sites < 1:
            raise ValueError("graph needs at least one site")
        norm_edges = set()
        for e in self.edges:
            a, b = e
            if a == b:
                raise ValueError(f"self-loop at site {a}")
            if not (1 <= a <= self.n_sites and 1 <= b <= self.n_sites):
                raise ValueError(f"edge {e} references a site outside 1..{self.n_sites}")
            norm_edges.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm_edges))
        for name, sites in (("input", self.input_sites), ("output", self.output_sites)):
            if len(set(sites)) != len(sites):
                raise ValueError(f"duplicate {name} sites")
            for s in sites:
                if not 1 <= s <= self.n_sites:
                    raise ValueError(f"{name} site {s} outside 1..{self.n_sites}")
        if set(self.input_sites) & set(self.output_sites):
            raise ValueError("input and output sites must be disjoint")
        if len(self.input_sites) != len(self.output_sites):
            raise ValueError("input and output ranks must match")

    def neighbors(self, a: int) -> tuple[int, ...]:
        out = []
        for x, y in self.edges:
            if x == a:
                out.append(y)
            elif y == a:
                out.append(x)
        return tuple(sorted(out))

    def neighbor_count(self, a: int) -> int:
        return len(self.neighbors(a))

    @property
    def body_sites(self) -> tuple[int, ...]:
        marked = set(self.input_sites) | set(self.output_sites)
        return tuple(s for s in range(1, self.n_sites + 1) if s not in marked)

    @property
    def n_io(self) -> int:
        return len(self.input_sites)


def chain(d: int, n: int) -> ClusterGraph:
    """Path graph 1 - 2 - ... - n."""
    if n < 1:
        raise ValueError("chain length must be >= 1")
    return ClusterGraph(d, n, frozenset((a, a + 1) for a in range(1, n)))


def grid_graph(d: int, rows: int, cols: int) -> ClusterGraph:
    """Rectangular lattice, sites numbered row-major from 1."""
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    edges = set()
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c + 1
            if c + 1 < cols:
                edges.add((s, s + 1))
            if r + 1 < rows:
                edges.add((s, s + cols))
    return ClusterGraph(d, rows * cols, frozenset(edges))


GATE_GRAPH_KINDS = ("rot5", "un1_6", "t6")


def gate_graph(d: int, kind: str) -> ClusterGraph:
    """Named gate clusters with their input/output partitions.

    rot5:   five-site chain, input {1}, output {5} (single-qudit rotations
            and the U1n / W Clifford patterns).
    un1_6:  six-site chain, input {1}, output {6} (the Un1 pattern).
    t6:     six sites with edges {1-3, 2-4, 3-4, 3-5, 4-6}, inputs {1, 2},
            outputs {5, 6} (the imprimitive two-qudit gate).
    """
    if kind == "rot5":
        g = chain(d, 5)
        return ClusterGraph(d, 5, g.edges, (1,), (5,))
    if kind == "un1_6":
        g = chain(d, 6)
        return ClusterGraph(d, 6, g.edges, (1,), (6,))
    if kind == "t6":
        edges = frozenset({(1, 3), (2, 4), (3, 4), (3, 5), (4, 6)})
        return ClusterGraph(d, 6, edges, (1, 2), (5, 6))
    raise ValueError(f"unknown gate graph {kind!r}; expected one of {GATE_GRAPH_KINDS}")


def phase_exponents(graph: ClusterGraph) -> np.ndarray:
    """Integer exponent sum_{(a,b) in edges} t_a * t_b for every basis string."""
    d, n = graph.d, graph.n_sites
    digits = np.indices((d,) * n).reshape(n, -1)
    exps = np.zeros(d**n, dtype=np.int64)
    for a, b in graph.edges:
        exps += digits[a - 1] * digits[b - 1]
    return exps


def entangler(graph: ClusterGraph) -> Callable[[StateVector], StateVector]:
    """The edge-product of phase gates as a single diagonal transformer."""
    phases = omega_pow(graph.d, phase_exponents(graph))

    def transform(state: StateVector) -> StateVector:
        if (state.d, state.n_sites) != (graph.d, graph.n_sites):
            raise ValueError("state does not match the graph dimensions")
        return StateVector(
            state.d, state.n_sites, state.amplitudes * phases, normalized=state.normalized
        )

    return transform


def cluster_state(graph: ClusterGraph) -> StateVector:
    """Entangled cluster state: the edge entangler applied to |x(0)>^n."""
    return entangler(graph)(plus_state(graph.d, graph.n_sites))


def evolution_time(d: int, g: float) -> float:
    """Ising evolution time 2*pi/(d*g) at which the dynamics equals the entangler."""
    check_dim(d)
    if g <= 0:
        raise ValueError("coupling g must be positive")
    return 2 * np.pi / (d * g)


def hamiltonian_evolution(graph: ClusterGraph, g: float, t: float) -> Callable[[StateVector], StateVector]:
    """Diagonal evolution exp(-i H t) for H = -g sum_edges N_a N_b (hbar = 1).

    The phases are exp(i g t sum t_a t_b); at t = evolution_time(d, g) they
    equal the entangler phases exactly.
    """
    if g <= 0:
        raise ValueError("coupling g must be positive")
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    phases = np.exp(1j * g * t * phase_exponents(graph))

    def transform(state: StateVector) -> StateVector:
        if (state.d, state.n_sites) != (graph.d, graph.n_sites):
            raise ValueError("state does not match the graph dimensions")
        return StateVector(
            state.d, state.n_sites, state.amplitudes * phases, normalized=state.normalized
        )

    return transform


def apply_stabilizer(state: StateVector, graph: ClusterGraph, site: int) -> StateVector:
    """Apply K_site = X_site^dag prod_{b in nbgh(site)} Z_b."""
    out = apply_local(state, site, gen_x(graph.d).conj().T)
    z = gen_z(graph.d)
    for b in graph.neighbors(site):
        out = apply_local(out, b, z)
    return out


def stabilizer_residuals(state: StateVector, graph: ClusterGraph) -> list[tuple[int, float]]:
    """2-norm residual of each eigenvalue equation K_a |state> = |state>."""
    if (state.d, state.n_sites) != (graph.d, graph.n_sites):
        raise ValueError("state does not match the graph dimensions")
    out = []
    for a in range(1, graph.n_sites + 1):
        mapped = apply_stabilizer(state, graph, a)
        resid = float(np.linalg.norm(mapped.amplitudes - state.amplitudes))
        out.append((a, resid))
    return out


def shortest_path(graph: ClusterGraph, start: int, goal: int) -> list[int]:
    """Breadth-first shortest path, ties broken toward lower site indices."""
    for s in (start, goal):
        if not 1 <= s <= graph.n_sites:
            raise ValueError(f"site {s} outside 1..{graph.n_sites}")
    if start == goal:
        return [start]
    parent: dict[int, int] = {start: 0}
    frontier = [start]
    while frontier and goal not in parent:
        nxt = []
        for a in frontier:
            for b in graph.neighbors(a):
                if b not in parent:
                    parent[b] = a
                    nxt.append(b)
        frontier = sorted(nxt)
    if goal not in parent:
        raise ValueError(f"sites {start} and {goal} are not connected")
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]
