"""
State formation over arbitrary geography.

Nodes (locales) link into components (states). A link between i and j is
worth (1 - delta) - eta * G_ij - h * N_ij, where N_ij is the size of the
component the two would share. Graphs are networkx.Graph objects over the
config's node ids.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import networkx as nx
import numpy as np
from scipy.spatial.distance import pdist, squareform

from core import SameState, UnknownState, ValidationError
from workers import run_parallel, thread_limit

logger = logging.getLogger(__name__)

Pair = tuple[str, str]
EdgeKey = tuple[Pair, ...]


def pair_key(i: str, j: str) -> Pair:
    return (i, j) if i <= j else (j, i)


@dataclass(frozen=True)
class NetworkConfig:
    node_ids: tuple[str, ...]
    distances: np.ndarray = field(repr=False, compare=False)
    delta: float
    eta: float
    h_net: float
    eps_max: float = 0.0
    seed: int = 0
    positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        ids = tuple(str(i) for i in self.node_ids)
        object.__setattr__(self, "node_ids", ids)
        if len(set(ids)) != len(ids):
            raise ValidationError("node ids must be unique")
        try:
            g = np.asarray(self.distances, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"distance_matrix: {exc}") from None
        if g.shape != (len(ids), len(ids)):
            raise ValidationError(f"distance matrix shape {g.shape} does not match {len(ids)} nodes")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValidationError("distances must be finite and non-negative")
        if not np.array_equal(g, g.T):
            raise ValidationError("distance matrix must be symmetric")
        if np.any(np.diag(g) != 0):
            raise ValidationError("distance matrix must have a zero diagonal")
        g.setflags(write=False)
        object.__setattr__(self, "distances", g)
        if not 0 < self.delta <= 1:
            raise ValidationError(f"delta must lie in (0, 1], got {self.delta}")
        if self.eta <= 0:
            raise ValidationError(f"eta must be > 0, got {self.eta}")
        if self.h_net <= 0:
            raise ValidationError(f"h must be > 0, got {self.h_net}")
        if self.eps_max < 0:
            raise ValidationError(f"eps_max must be >= 0, got {self.eps_max}")
        object.__setattr__(self, "seed", int(self.seed))
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "_position", {node: k for k, node in enumerate(ids)})

    def __eq__(self, other):
        if not isinstance(other, NetworkConfig):
            return NotImplemented
        head = (self.node_ids, self.delta, self.eta, self.h_net, self.eps_max, self.seed, self.positions)
        other_head = (other.node_ids, other.delta, other.eta, other.h_net, other.eps_max, other.seed, other.positions)
        return head == other_head and np.array_equal(self.distances, other.distances)

    @classmethod
    def from_positions(cls, nodes: Sequence[tuple[str, float, float]], **kwargs) -> "NetworkConfig":
        ids = [str(n[0]) for n in nodes]
        coords = np.array([[float(n[1]), float(n[2])] for n in nodes], dtype=float).reshape(-1, 2)
        matrix = squareform(pdist(coords)) if len(ids) > 1 else np.zeros((len(ids), len(ids)))
        return cls(tuple(ids), matrix, positions=tuple(map(tuple, coords.tolist())), **kwargs)

    @classmethod
    def from_distance_matrix(cls, ids: Sequence[str], matrix, **kwargs) -> "NetworkConfig":
        return cls(tuple(str(i) for i in ids), matrix, **kwargs)

    def index(self, node: str) -> int:
        try:
            return self._position[str(node)]
        except KeyError:
            raise UnknownState(f"unknown node id {node!r}") from None

    def distance(self, i: str, j: str) -> float:
        return float(self.distances[self.index(i), self.index(j)])

    def total_cost(self, node: str) -> float:
        return float(self.distances[self.index(node)].sum())


@dataclass(frozen=True)
class Violation:
    i: str
    j: str
    margin: float


@dataclass(frozen=True)
class StabilityReport:
    within_violations: tuple[Violation, ...]
    between_violations: tuple[Violation, ...]
    min_within_margin: tuple[tuple[tuple[str, ...], float], ...] = ()

    @property
    def stable(self) -> bool:
        return not self.within_violations and not self.between_violations


@dataclass(frozen=True)
class ComponentBound:
    members: tuple[str, ...]
    size: int
    max_intra_distance: float
    size_cap: float

    @property
    def satisfied(self) -> bool:
        return self.size <= self.size_cap


@dataclass(frozen=True)
class PairBound:
    first: tuple[str, ...]
    second: tuple[str, ...]
    min_inter_distance: float
    required_combined_size: float

    @property
    def satisfied(self) -> bool:
        return len(self.first) + len(self.second) >= self.required_combined_size


def empty_graph(config: NetworkConfig) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(config.node_ids)
    return graph


def build_graph(config: NetworkConfig, edges) -> nx.Graph:
    graph = empty_graph(config)
    for edge in edges:
        if len(edge) != 2:
            raise ValidationError(f"edge {edge!r} must name exactly two nodes")
        i, j = (str(v) for v in edge)
        config.index(i)
        config.index(j)
        if i == j:
            raise ValidationError(f"self-link on {i!r}")
        graph.add_edge(i, j)
    return graph


def canonical_edges(graph: nx.Graph) -> EdgeKey:
    return tuple(sorted(pair_key(str(i), str(j)) for i, j in graph.edges))


def components(graph: nx.Graph) -> list[tuple[str, ...]]:
    return sorted(tuple(sorted(c)) for c in nx.connected_components(graph))


def _merged_size(graph: nx.Graph, i: str, j: str) -> int:
    comp = nx.node_connected_component(graph, i)
    if j in comp:
        return len(comp)
    return len(comp) + len(nx.node_connected_component(graph, j))


def link_utility(
    i: str, j: str, graph: nx.Graph, config: NetworkConfig, shocks: Mapping[Pair, float] | None = None
) -> float:
    i, j = str(i), str(j)
    if i == j:
        raise SameState(f"a link needs two distinct nodes, got {i!r} twice")
    for node in (i, j):
        config.index(node)
        if node not in graph:
            raise UnknownState(f"node {node!r} is not in the graph")
    value = (1.0 - config.delta) - config.eta * config.distance(i, j) - config.h_net * _merged_size(graph, i, j)
    if shocks:
        value += shocks.get(pair_key(i, j), 0.0)
    return value


def check_pairwise_stable(graph: nx.Graph, config: NetworkConfig) -> StabilityReport:
    """Within-component and between-component conditions on unshocked utility."""
    within, between = [], []
    for i, j in combinations(config.node_ids, 2):
        margin = link_utility(i, j, graph, config)
        if graph.has_edge(i, j):
            if margin < 0:
                within.append(Violation(*pair_key(i, j), margin))
        elif margin > 0:
            between.append(Violation(*pair_key(i, j), margin))

    lowest = []
    for comp in components(graph):
        margins = [link_utility(i, j, graph, config) for i, j in graph.subgraph(comp).edges]
        if margins:
            lowest.append((comp, min(margins)))
    key = lambda v: (v.i, v.j)
    return StabilityReport(tuple(sorted(within, key=key)), tuple(sorted(between, key=key)), tuple(lowest))


def component_bounds(graph: nx.Graph, config: NetworkConfig) -> tuple[list[ComponentBound], list[PairBound]]:
    """Aggregate size conditions for a nontrivial pairwise-stable network."""
    slack = 1.0 - config.delta
    comps = components(graph)
    sizes = []
    for comp in comps:
        g_max = max((config.distance(i, j) for i, j in combinations(comp, 2)), default=0.0)
        sizes.append(ComponentBound(comp, len(comp), g_max, (slack - config.eta * g_max) / config.h_net))
    pairs = []
    for a, b in combinations(comps, 2):
        g_min = min(config.distance(i, j) for i in a for j in b)
        pairs.append(PairBound(a, b, g_min, (slack - config.eta * g_min) / config.h_net))
    return sizes, pairs


def draw_shocks(config: NetworkConfig, rng: np.random.Generator | None = None) -> dict[Pair, float]:
    """One symmetric shock per unordered pair, uniform on [-eps_max, eps_max]."""
    pairs = [pair_key(i, j) for i, j in combinations(sorted(config.node_ids), 2)]
    if config.eps_max == 0:
        return dict.fromkeys(pairs, 0.0)
    rng = np.random.default_rng(config.seed) if rng is None else rng
    draws = rng.uniform(-config.eps_max, config.eps_max, size=len(pairs))
    return dict(zip(pairs, draws.tolist()))


def activation_order(config: NetworkConfig) -> list[str]:
    return sorted(config.node_ids, key=lambda node: (config.total_cost(node), node))


def simulate_formation(config: NetworkConfig, rng: np.random.Generator | None = None) -> nx.Graph:
    """Cost-ordered activation with keep/form/sever decisions on shocked utility."""
    shocks = draw_shocks(config, rng)
    graph = empty_graph(config)
    for i in activation_order(config):
        partners = sorted((j for j in config.node_ids if j != i), key=lambda j: (config.distance(i, j), j))
        for j in partners:
            if link_utility(i, j, graph, config, shocks) >= 0:
                graph.add_edge(i, j)
            elif graph.has_edge(i, j):
                graph.remove_edge(i, j)
    logger.debug("formation finished with %d links", graph.number_of_edges())
    return graph


def _run_batch(job: tuple[NetworkConfig, list[np.random.SeedSequence]]) -> Counter:
    config, seeds = job
    counts: Counter = Counter()
    for seed in seeds:
        counts[canonical_edges(simulate_formation(config, np.random.default_rng(seed)))] += 1
    return counts


def equilibrium_probability(config: NetworkConfig, runs: int, threads: int | None = None) -> dict[EdgeKey, Fraction]:
    """Frequency of each equilibrium network over seeded runs.

    Run k uses child k of SeedSequence(config.seed).spawn(runs), so results
    depend only on (config, runs).
    """
    if runs < 1:
        raise ValidationError(f"runs must be >= 1, got {runs}")
    children = np.random.SeedSequence(int(config.seed)).spawn(runs)
    workers = min(thread_limit(threads), runs)
    batches = [(config, children[k::workers]) for k in range(workers)]
    total: Counter = Counter()
    for counts in run_parallel(_run_batch, batches, workers):
        total.update(counts)
    logger.info("%d runs produced %d distinct networks", runs, len(total))
    return {key: Fraction(count, runs) for key, count in sorted(total.items())}
