"""Maximum-weight spanning forests and exact Bayes scoring.

Kruskal's procedure with a strictly-positive weight threshold picks, for
any symmetric weight matrix, an acyclic edge set whose total weight is
maximal over all forests (greedy optimality on the graphic matroid).
The forest score combines a normalized prior over edge sets with the
product of per-column and per-edge sequence measures; scoring is
independent of the root chosen in each connected component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from forestlearn.bayes_measure import DirichletPrior, log_bayes_measure
from forestlearn.dataframe import CategoricalTable, pair_counts
from forestlearn.mi_estimators import (
    EstimatorKind,
    EstimatorWeights,
    _log_measure_from_counts,
    weight_matrix,
)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


@dataclass(frozen=True)
class Forest:
    """Undirected acyclic edge set over vertices 0..n_vertices-1.

    ``roots`` holds the minimum-index vertex of every connected component
    (isolated vertices included).  ``directed_edges`` orients each edge
    away from its component root, listed in a canonical order: components
    by ascending root, breadth-first within a component, children
    ascending.  The codec and the simulator both follow this order.
    """

    n_vertices: int
    edges: frozenset[tuple[int, int]]
    roots: tuple[int, ...] = field(init=False)
    directed_edges: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        edges = frozenset((min(i, j), max(i, j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        uf = _UnionFind(self.n_vertices)
        adjacency: dict[int, list[int]] = {v: [] for v in range(self.n_vertices)}
        for i, j in sorted(edges):
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices) or i == j:
                raise ValueError(f"invalid edge ({i}, {j})")
            if not uf.union(i, j):
                raise ValueError(f"edge ({i}, {j}) closes a cycle")
            adjacency[i].append(j)
            adjacency[j].append(i)
        components: dict[int, int] = {}
        for v in range(self.n_vertices):
            root = uf.find(v)
            components[root] = min(components.get(root, v), v)
        roots = tuple(sorted(components.values()))
        directed: list[tuple[int, int]] = []
        seen = set()
        for r in roots:
            queue = [r]
            seen.add(r)
            while queue:
                v = queue.pop(0)
                for w in sorted(adjacency[v]):
                    if w not in seen:
                        seen.add(w)
                        directed.append((v, w))
                        queue.append(w)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "directed_edges", tuple(directed))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def maximum_weight_forest(matrix: np.ndarray, tie_break="lex") -> Forest:
    """Greedy maximum-weight forest from a symmetric weight matrix.

    Edges are taken in strictly descending weight, ties broken by
    (min index, max index); an edge joins only if its weight is > 0 and
    it closes no cycle.  NaN entries are treated as unconnectable.
    Sort-dominated: O(p^2 log p) for p vertices.
    """
    matrix = np.asarray(matrix, dtype=float)
    p = matrix.shape[0]
    candidates = [
        (i, j)
        for i, j in combinations(range(p), 2)
        if not math.isnan(matrix[i, j]) and matrix[i, j] > 0.0
    ]
    candidates.sort(key=lambda ij: (-matrix[ij[0], ij[1]], ij[0], ij[1]))
    uf = _UnionFind(p)
    chosen = []
    for i, j in candidates:
        if uf.union(i, j):
            chosen.append((i, j))
    return Forest(n_vertices=p, edges=frozenset(chosen))


def kruskal_positive(weights: EstimatorWeights) -> Forest:
    """Maximum-weight forest for a filled EstimatorWeights matrix."""
    return maximum_weight_forest(weights.matrix)


def learn_forest(
    table: CategoricalTable,
    kind: EstimatorKind = EstimatorKind.POSTERIOR,
    prior_weight: float = 0.5,
    edge_prior_q: float = 0.5,
    threads: int = 1,
) -> Forest:
    """Weight matrix for the chosen estimator, then the greedy forest."""
    if table.n_cols == 1:
        return Forest(n_vertices=1, edges=frozenset())
    weights = weight_matrix(table, kind, prior_weight, edge_prior_q, threads=threads)
    return kruskal_positive(weights)


# ---------------------------------------------------------------------------
# counting and enumerating forests


def forest_counts_by_edges(p: int) -> list[int]:
    """Number of labeled forests on p vertices with m edges, m = 0..p-1.

    Recurrence on the component containing vertex 1: choose its size s,
    its other members, and one of the s^(s-2) labeled trees on it.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    rows: list[list[int]] = [[1]]
    for k in range(1, p + 1):
        row = [0] * k
        for s in range(1, k + 1):
            trees = s ** (s - 2) if s >= 2 else 1
            ways = comb(k - 1, s - 1) * trees
            for m2, cnt in enumerate(rows[k - s]):
                row[s - 1 + m2] += ways * cnt
        rows.append(row)
    return rows[p]


def log_forest_prior(p: int, n_edges: int, edge_prior_q: float = 0.5) -> float:
    """Log prior probability (nats) of an edge set with ``n_edges`` edges.

    The prior weights an edge set E proportionally to ((1-q)/q)^|E| and
    is normalized exactly over all labeled forests on p vertices; q=1/2
    gives the uniform prior.
    """
    if not 0.0 < edge_prior_q < 1.0:
        raise ValueError("edge_prior_q must be in (0, 1)")
    counts = forest_counts_by_edges(p)
    if not 0 <= n_edges < len(counts) or counts[n_edges] == 0:
        raise ValueError("impossible edge count")
    log_x = math.log((1.0 - edge_prior_q) / edge_prior_q)
    terms = [math.log(c) + m * log_x for m, c in enumerate(counts) if c > 0]
    top = max(terms)
    log_norm = top + math.log(sum(math.exp(t - top) for t in terms))
    return n_edges * log_x - log_norm


def enumerate_forests(p: int):
    """Yield every acyclic edge subset over p vertices exactly once.

    Guarded to p <= 7 (36961 forests); used as the brute-force oracle for
    the greedy learner.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > 7:
        raise ValueError("enumeration limited to p <= 7")
    all_edges = list(combinations(range(p), 2))

    def recurse(idx: int, parent: list[int], chosen: list[tuple[int, int]]):
        if idx == len(all_edges):
            yield Forest(n_vertices=p, edges=frozenset(chosen))
            return
        yield from recurse(idx + 1, parent, chosen)
        i, j = all_edges[idx]

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        ri, rj = find(i), find(j)
        if ri != rj:
            parent2 = parent.copy()
            parent2[ri] = rj
            chosen.append((i, j))
            yield from recurse(idx + 1, parent2, chosen)
            chosen.pop()

    yield from recurse(0, list(range(p)), [])


# ---------------------------------------------------------------------------
# exact scoring


def _edge_log_ratio(table: CategoricalTable, i: int, j: int, prior_weight: float) -> float:
    counts = pair_counts(table, i, j)
    return (
        _log_measure_from_counts(counts.joint, prior_weight)
        - _log_measure_from_counts(counts.marginal_i_restricted, prior_weight)
        - _log_measure_from_counts(counts.marginal_j_restricted, prior_weight)
    )


def log_forest_measure(table: CategoricalTable, forest: Forest, prior_weight: float = 0.5) -> float:
    """Log of the forest's data measure (nats): per-column measures over
    each column's observed rows times, per edge, the joint measure over
    the jointly observed rows divided by both restricted marginals."""
    if forest.n_vertices != table.n_cols:
        raise ValueError("forest does not match table width")
    total = 0.0
    for i in range(table.n_cols):
        prior = DirichletPrior.symmetric(table.cardinalities[i], prior_weight)
        total += log_bayes_measure(table.column_counts(i), prior)
    for i, j in forest.sorted_edges():
        total += _edge_log_ratio(table, i, j, prior_weight)
    return total


def log_forest_score(
    table: CategoricalTable,
    forest: Forest,
    prior_weight: float = 0.5,
    edge_prior_q: float = 0.5,
) -> float:
    """Structure prior plus data measure, in nats.

    The maximizer over all forests coincides with the greedy learner's
    output built from the per-total-sample posterior weights.
    """
    return log_forest_prior(table.n_cols, forest.n_edges, edge_prior_q) + log_forest_measure(
        table, forest, prior_weight
    )


def _log_forest_measure_directed(
    table: CategoricalTable,
    forest: Forest,
    roots,
    prior_weight: float = 0.5,
) -> float:
    """Two-factor form of the measure for arbitrary per-component roots.

    Each root column is measured over its observed rows; every directed
    edge contributes the joint measure over the jointly observed rows
    divided by the parent's restricted marginal, times the child measure
    over all of the child's observed rows divided by the child's
    restricted marginal.  Used by tests to verify root invariance.
    """
    adjacency: dict[int, list[int]] = {v: [] for v in range(forest.n_vertices)}
    for i, j in forest.edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    total = 0.0
    seen: set[int] = set()
    for r in sorted(roots):
        if r in seen:
            raise ValueError("one root per component required")
        prior = DirichletPrior.symmetric(table.cardinalities[r], prior_weight)
        total += log_bayes_measure(table.column_counts(r), prior)
        seen.add(r)
        queue = [r]
        while queue:
            v = queue.pop(0)
            for w in sorted(adjacency[v]):
                if w in seen:
                    continue
                seen.add(w)
                queue.append(w)
                counts = pair_counts(table, v, w)
                prior_w = DirichletPrior.symmetric(table.cardinalities[w], prior_weight)
                total += (
                    _log_measure_from_counts(counts.joint, prior_weight)
                    - _log_measure_from_counts(counts.marginal_i_restricted, prior_weight)
                    + log_bayes_measure(counts.marginal_j_full, prior_w)
                    - _log_measure_from_counts(counts.marginal_j_restricted, prior_weight)
                )
    if len(seen) != forest.n_vertices:
        raise ValueError("roots must cover every component")
    return total
