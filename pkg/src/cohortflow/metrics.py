"""Graph metric kernels and their cohort-by-period aggregation.

All metrics run on the undirected, unweighted simple projection of a
period's snapshot: an edge is present iff any directed edge exists either
way.  Kernels are pure functions; betweenness optionally fans out over
source vertices with a deterministic merge, so one-worker and N-worker runs
are bit-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import NodeNotFound
from .temporal import Snapshot, TemporalNetwork


class SimpleGraph:
    """Undirected simple graph over string-named nodes.

    Nodes are kept sorted and adjacency is stored as sorted integer index
    lists, which fixes the traversal (and accumulation) order of every
    kernel.
    """

    __slots__ = ("nodes", "_index", "adj", "_adj_sets")

    def __init__(self, nodes: tuple[str, ...], adj: list[list[int]]):
        self.nodes = nodes
        self._index = {name: i for i, name in enumerate(nodes)}
        self.adj = adj
        self._adj_sets = [set(neighbors) for neighbors in adj]

    @classmethod
    def from_edges(cls, nodes, edges) -> "SimpleGraph":
        """Build from node names and (u, v) name pairs; direction, weights,
        self-loops, and duplicates are discarded."""
        names = tuple(sorted(set(nodes)))
        index = {name: i for i, name in enumerate(names)}
        seen: set[tuple[int, int]] = set()
        adj: list[list[int]] = [[] for _ in names]
        for u, v in edges:
            iu, iv = index[u], index[v]
            if iu == iv:
                continue
            key = (iu, iv) if iu < iv else (iv, iu)
            if key in seen:
                continue
            seen.add(key)
            adj[iu].append(iv)
            adj[iv].append(iu)
        for neighbors in adj:
            neighbors.sort()
        return cls(names, adj)

    @classmethod
    def from_snapshot(cls, snapshot: Snapshot) -> "SimpleGraph":
        return cls.from_edges(snapshot.nodes, snapshot.edges.keys())

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(neighbors) for neighbors in self.adj) // 2

    @property
    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return 2.0 * self.n_edges / (self.n * (self.n - 1))

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise NodeNotFound(name) from None

    def degree(self, name: str) -> int:
        return len(self.adj[self.index_of(name)])


# ---------------------------------------------------------------------------
# clustering

def _triangles_at(g: SimpleGraph, i: int) -> int:
    adj_sets = g._adj_sets
    own = adj_sets[i]
    return sum(len(own & adj_sets[j]) for j in g.adj[i]) // 2


def local_clustering(g: SimpleGraph, v: str) -> float:
    """Fraction of v's neighbor pairs that are themselves connected.

    Zero by definition when v has fewer than two neighbors.
    """
    i = g.index_of(v)
    deg = len(g.adj[i])
    if deg < 2:
        return 0.0
    return 2.0 * _triangles_at(g, i) / (deg * (deg - 1))


def local_clustering_all(g: SimpleGraph) -> list[float]:
    """Local clustering for every node, in node order."""
    out = []
    for i in range(g.n):
        deg = len(g.adj[i])
        if deg < 2:
            out.append(0.0)
        else:
            out.append(2.0 * _triangles_at(g, i) / (deg * (deg - 1)))
    return out


# ---------------------------------------------------------------------------
# betweenness (Brandes, unweighted shortest paths)

def _source_dependencies(adj: list[list[int]], s: int) -> list[float]:
    """Pair-dependency vector of a single source: Brandes' inner loop."""
    n = len(adj)
    dist = [-1] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[s] = 0
    sigma[s] = 1
    order = [s]
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        dv = dist[v] + 1
        sv = sigma[v]
        for w in adj[v]:
            dw = dist[w]
            if dw < 0:
                dist[w] = dv
                order.append(w)
                sigma[w] = sv
                preds[w].append(v)
            elif dw == dv:
                sigma[w] += sv
                preds[w].append(v)
    delta = [0.0] * n
    for i in range(len(order) - 1, 0, -1):
        w = order[i]
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
    delta[s] = 0.0
    return delta


def _dependency_rows(adj: list[list[int]], sources: list[int]) -> list[list[float]]:
    return [_source_dependencies(adj, s) for s in sources]


def betweenness(
    g: SimpleGraph, normalized: bool = True, n_jobs: int = 1
) -> dict[str, float]:
    """Betweenness centrality of every node over unweighted shortest paths.

    Normalized by (n-1)(n-2)/2 for n >= 3 and all-zero otherwise; the
    unnormalized variant keeps the raw ordered-pair accumulation (each
    unordered pair counted from both endpoints).  Unreachable pairs
    contribute nothing.

    ``n_jobs`` > 1 distributes source vertices over worker processes, but
    per-source contributions are merged in global source order, so results
    are bit-identical to the sequential run.
    """
    n = g.n
    totals = [0.0] * n
    if n >= 3:
        if n_jobs > 1:
            chunk = max(1, math.ceil(n / (n_jobs * 4)))
            batches = [list(range(i, min(i + chunk, n))) for i in range(0, n, chunk)]
            with ProcessPoolExecutor(max_workers=n_jobs) as pool:
                futures = [pool.submit(_dependency_rows, g.adj, b) for b in batches]
                for future in futures:
                    for row in future.result():
                        for v in range(n):
                            totals[v] += row[v]
        else:
            for s in range(n):
                row = _source_dependencies(g.adj, s)
                for v in range(n):
                    totals[v] += row[v]
        if normalized:
            scale = 1.0 / ((n - 1) * (n - 2))
            totals = [t * scale for t in totals]
    return {name: totals[i] for i, name in enumerate(g.nodes)}


# ---------------------------------------------------------------------------
# components

def connected_components(g: SimpleGraph) -> list[list[int]]:
    """Connected components as lists of node indices (BFS order)."""
    seen = [False] * g.n
    components = []
    for start in range(g.n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        head = 0
        while head < len(comp):
            v = comp[head]
            head += 1
            for w in g.adj[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
        components.append(comp)
    return components


def giant_component_share(g: SimpleGraph) -> float:
    """Size of the largest connected component over the node count (0 if empty)."""
    if g.n == 0:
        return 0.0
    return max(len(c) for c in connected_components(g)) / g.n


# ---------------------------------------------------------------------------
# cohort x period aggregation

@dataclass(frozen=True)
class CohortMetricsMatrix:
    """Cohort-by-period grid of one metric; None marks cohorts with no
    active member in a period, so missing data never dilutes statistics."""

    name: str
    values: tuple[tuple[float | None, ...], ...]  # [cohort-1][period-1]

    @property
    def n_cohorts(self) -> int:
        return len(self.values)

    @property
    def n_periods(self) -> int:
        return len(self.values[0]) if self.values else 0

    def cell(self, cohort: int, period: int) -> float | None:
        return self.values[cohort - 1][period - 1]

    def column(self, period: int) -> list[float | None]:
        return [row[period - 1] for row in self.values]

    def column_defined(self, period: int) -> list[float]:
        return [row[period - 1] for row in self.values if row[period - 1] is not None]

    def column_mean(self, period: int) -> float | None:
        defined = self.column_defined(period)
        if not defined:
            return None
        return sum(defined) / len(defined)

    def column_std(self, period: int) -> float | None:
        """Population standard deviation over the column's defined cells."""
        defined = self.column_defined(period)
        if not defined:
            return None
        mean = sum(defined) / len(defined)
        return math.sqrt(sum((x - mean) ** 2 for x in defined) / len(defined))

    def row_defined(self, cohort: int) -> list[float]:
        return [x for x in self.values[cohort - 1] if x is not None]


def _matrix_from_cells(
    name: str, n_cohorts: int, n_periods: int, cells: dict[tuple[int, int], float]
) -> CohortMetricsMatrix:
    rows = tuple(
        tuple(cells.get((c, p)) for p in range(1, n_periods + 1))
        for c in range(1, n_cohorts + 1)
    )
    return CohortMetricsMatrix(name=name, values=rows)


def _cohort_groups(
    net: TemporalNetwork, graph: SimpleGraph, include_passive: bool
) -> dict[int, list[str]]:
    groups: dict[int, list[str]] = {}
    for name in graph.nodes:  # sorted, so group order is deterministic
        entry = net.cohorts.entries[name]
        if not include_passive and entry.passive:
            continue
        groups.setdefault(entry.cohort, []).append(name)
    return groups


def avg_clustering_by_cohort(
    net: TemporalNetwork,
    include_passive: bool = True,
    cohort_subgraph: bool = False,
) -> CohortMetricsMatrix:
    """Mean local clustering of each cohort's active nodes, per period.

    With ``cohort_subgraph`` the coefficient is computed inside the subgraph
    induced by the cohort's active members instead of the full period graph.
    """
    n_periods = net.n_periods
    cells: dict[tuple[int, int], float] = {}
    for snap in net.snapshots:
        graph = SimpleGraph.from_snapshot(snap)
        if graph.n == 0:
            continue
        groups = _cohort_groups(net, graph, include_passive)
        if cohort_subgraph:
            for cohort, members in groups.items():
                member_set = set(members)
                sub = SimpleGraph.from_edges(
                    members,
                    (
                        (u, graph.nodes[j])
                        for u in members
                        for j in graph.adj[graph.index_of(u)]
                        if graph.nodes[j] in member_set
                    ),
                )
                values = local_clustering_all(sub)
                cells[(cohort, snap.window.index)] = sum(values) / len(values)
        else:
            per_node = local_clustering_all(graph)
            for cohort, members in groups.items():
                vals = [per_node[graph.index_of(u)] for u in members]
                cells[(cohort, snap.window.index)] = sum(vals) / len(vals)
    return _matrix_from_cells("clustering", n_periods, n_periods, cells)


def avg_betweenness_by_cohort(
    net: TemporalNetwork, include_passive: bool = True, n_jobs: int = 1
) -> CohortMetricsMatrix:
    """Mean normalized betweenness of each cohort's active nodes, per period."""
    n_periods = net.n_periods
    cells: dict[tuple[int, int], float] = {}
    for snap in net.snapshots:
        graph = SimpleGraph.from_snapshot(snap)
        if graph.n == 0:
            continue
        scores = betweenness(graph, n_jobs=n_jobs)
        groups = _cohort_groups(net, graph, include_passive)
        for cohort, members in groups.items():
            vals = [scores[u] for u in members]
            cells[(cohort, snap.window.index)] = sum(vals) / len(vals)
    return _matrix_from_cells("betweenness", n_periods, n_periods, cells)


def deviation_grid(m: CohortMetricsMatrix) -> CohortMetricsMatrix:
    """Signed z-score of every cell against its period column.

    Missing cells propagate; zero-variance columns map to all-zero scores so
    flat periods read as "no deviation" rather than blowing up.
    """
    rows: list[list[float | None]] = [
        [None] * m.n_periods for _ in range(m.n_cohorts)
    ]
    for p in range(1, m.n_periods + 1):
        mean = m.column_mean(p)
        if mean is None:
            continue
        std = m.column_std(p)
        for c in range(1, m.n_cohorts + 1):
            value = m.cell(c, p)
            if value is None:
                continue
            rows[c - 1][p - 1] = 0.0 if std == 0 else (value - mean) / std
    return CohortMetricsMatrix(
        name=m.name + "_zscore", values=tuple(tuple(r) for r in rows)
    )


def giant_component_series(net: TemporalNetwork) -> list[float]:
    """Giant-component share of every period's projection."""
    return [
        giant_component_share(SimpleGraph.from_snapshot(snap))
        for snap in net.snapshots
    ]
