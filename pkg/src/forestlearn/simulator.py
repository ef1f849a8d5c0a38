"""Synthetic frames from planted forest models, with random masking.

Sampling is ancestral along each component's directed edges, followed by
independent per-cell masking.  All randomness flows through numpy's
PCG64 generator seeded from a ``SeedSequence``; trial t of a multi-trial
run uses ``SeedSequence(seed, t)``, so runs are reproducible and trials
are independent of execution order.  Draws are made by inverse-CDF on
``Generator.random`` uniforms only, keeping streams stable.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from forestlearn.dataframe import MISSING, CategoricalTable
from forestlearn.forest_learn import Forest, kruskal_positive
from forestlearn.mi_estimators import EstimatorKind, weight_matrix


@dataclass(frozen=True)
class ForestModel:
    """Generative parameters of a forest-factorized categorical source.

    ``root_marginals`` maps each component root to its distribution;
    ``edge_conditionals`` maps each directed edge (parent, child) of the
    forest to a (parent_card, child_card) row-stochastic matrix.
    ``missing_rates[i]`` is the independent per-cell masking probability
    of column i.
    """

    forest: Forest
    root_marginals: dict[int, np.ndarray]
    edge_conditionals: dict[tuple[int, int], np.ndarray]
    missing_rates: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        marginals = {
            int(r): np.ascontiguousarray(v, dtype=float) for r, v in self.root_marginals.items()
        }
        conditionals = {
            (int(a), int(b)): np.ascontiguousarray(m, dtype=float)
            for (a, b), m in self.edge_conditionals.items()
        }
        rates = np.asarray(self.missing_rates, dtype=float)
        if rates.shape != (self.forest.n_vertices,):
            raise ValueError("missing_rates must have one entry per vertex")
        if np.any((rates < 0) | (rates > 1)):
            raise ValueError("missing rates must lie in [0, 1]")
        if set(marginals) != set(self.forest.roots):
            raise ValueError("root_marginals must cover exactly the component roots")
        if set(conditionals) != set(self.forest.directed_edges):
            raise ValueError("edge_conditionals must cover exactly the directed edges")
        for r, v in marginals.items():
            if v.ndim != 1 or v.size < 1 or not math.isclose(v.sum(), 1.0, abs_tol=1e-9):
                raise ValueError(f"root {r}: marginal must be a distribution")
        for (a, b), m in conditionals.items():
            if m.ndim != 2 or not np.allclose(m.sum(axis=1), 1.0, atol=1e-9):
                raise ValueError(f"edge ({a}, {b}): conditional rows must be distributions")
        object.__setattr__(self, "root_marginals", marginals)
        object.__setattr__(self, "edge_conditionals", conditionals)
        rates = rates.copy()
        rates.flags.writeable = False
        object.__setattr__(self, "missing_rates", rates)

    @property
    def n_cols(self) -> int:
        return self.forest.n_vertices

    @property
    def cardinalities(self) -> tuple[int, ...]:
        cards = [0] * self.n_cols
        for r, v in self.root_marginals.items():
            cards[r] = v.size
        for (a, b), m in self.edge_conditionals.items():
            cards[b] = m.shape[1]
        return tuple(cards)

    def validate_shapes(self) -> None:
        cards = self.cardinalities
        for (a, b), m in self.edge_conditionals.items():
            if m.shape != (cards[a], cards[b]):
                raise ValueError(f"edge ({a}, {b}): conditional shape {m.shape} inconsistent")


def _draw(rng: np.random.Generator, probs: np.ndarray, n: int) -> np.ndarray:
    """Inverse-CDF draw of n symbols from one distribution."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(n), side="right").astype(np.int32)


def _draw_conditional(rng, conditional: np.ndarray, parents: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(conditional, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(parents.size)
    out = np.empty(parents.size, dtype=np.int32)
    for value in range(conditional.shape[0]):
        sel = parents == value
        if np.any(sel):
            out[sel] = np.searchsorted(cdf[value], u[sel], side="right")
    return out


def sample_frame(model: ForestModel, n: int, seed=None) -> CategoricalTable:
    """Draw n i.i.d. rows from the model, then mask cells independently.

    The RNG consumption order is fixed: component roots ascending, then
    that component's directed edges, then mask uniforms column by column.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    model.validate_shapes()
    if seed is None:
        seed = model.seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    p = model.n_cols
    values = np.empty((n, p), dtype=np.int32)
    done = set()
    for r in model.forest.roots:
        values[:, r] = _draw(rng, model.root_marginals[r], n)
        done.add(r)
    for a, b in model.forest.directed_edges:
        values[:, b] = _draw_conditional(rng, model.edge_conditionals[(a, b)], values[:, a])
        done.add(b)
    assert len(done) == p
    for c in range(p):
        q = model.missing_rates[c]
        if q > 0:
            values[rng.random(n) < q, c] = MISSING
    cards = model.cardinalities
    return CategoricalTable(
        cells=values,
        cardinalities=cards,
        column_names=tuple(f"x{i + 1}" for i in range(p)),
        category_maps=(None,) * p,
        declared=(True,) * p,
    )


# ---------------------------------------------------------------------------
# model-exact marginals and pairwise joints


def model_marginals(model: ForestModel) -> list[np.ndarray]:
    """Exact per-column marginals, propagated along the directed edges."""
    model.validate_shapes()
    out: list[np.ndarray | None] = [None] * model.n_cols
    for r in model.forest.roots:
        out[r] = model.root_marginals[r]
    for a, b in model.forest.directed_edges:
        out[b] = out[a] @ model.edge_conditionals[(a, b)]
    return out  # type: ignore[return-value]


def _transition_matrices(model: ForestModel, marginals) -> dict[tuple[int, int], np.ndarray]:
    """Row-stochastic transitions for both orientations of every edge."""
    trans = {}
    for a, b in model.forest.directed_edges:
        m = model.edge_conditionals[(a, b)]
        trans[(a, b)] = m
        joint = marginals[a][:, None] * m
        back = joint.T / np.maximum(marginals[b][None, :].T, 1e-300)
        trans[(b, a)] = back
    return trans


def model_pair_joint(model: ForestModel, i: int, j: int) -> np.ndarray:
    """Exact joint distribution of columns (i, j) under the model.

    Within a component this is the path product of edge transitions;
    across components the columns are independent.
    """
    if i == j:
        raise ValueError("i and j must differ")
    marginals = model_marginals(model)
    adjacency: dict[int, list[int]] = {v: [] for v in range(model.n_cols)}
    for a, b in model.forest.edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    # path search from i to j
    path = None
    stack = [(i, [i])]
    visited = {i}
    while stack:
        v, sofar = stack.pop()
        if v == j:
            path = sofar
            break
        for w in adjacency[v]:
            if w not in visited:
                visited.add(w)
                stack.append((w, sofar + [w]))
    if path is None:
        return np.outer(marginals[i], marginals[j])
    trans = _transition_matrices(model, marginals)
    chain = np.eye(marginals[i].size)
    for a, b in zip(path[:-1], path[1:]):
        chain = chain @ trans[(a, b)]
    return marginals[i][:, None] * chain


def _entropy(probs: np.ndarray) -> float:
    p = probs[probs > 0]
    return float(-(p * np.log(p)).sum())


def model_entropy(model: ForestModel, i: int) -> float:
    """Exact marginal entropy of column i, in nats."""
    return _entropy(model_marginals(model)[i])


def model_mutual_information(model: ForestModel, i: int, j: int) -> float:
    """Exact mutual information of columns (i, j), in nats."""
    joint = model_pair_joint(model, i, j)
    pi = joint.sum(axis=1)
    pj = joint.sum(axis=0)
    return _entropy(pi) + _entropy(pj) - _entropy(joint.ravel())


# ---------------------------------------------------------------------------
# the three-variable hub scenario


def _binary_entropy_bits(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def masked_hub_model(flip_prob: float, hub_missing_rate: float, seed=None) -> ForestModel:
    """Three binary columns: a uniform hub x1 with children x2, x3.

    Each child equals the hub flipped with probability ``flip_prob``;
    only the hub column is masked, at ``hub_missing_rate``.  The true
    structure is {x1-x2, x1-x3}, yet for large masking rates the
    posterior-optimal learner asymptotically prefers an edge between the
    two children (see ``posterior_inconsistency_threshold``).
    """
    if not 0.0 < flip_prob < 0.5:
        raise ValueError("flip_prob must be in (0, 0.5)")
    if not 0.0 <= hub_missing_rate < 1.0:
        raise ValueError("hub_missing_rate must be in [0, 1)")
    forest = Forest(n_vertices=3, edges=frozenset({(0, 1), (0, 2)}))
    flip = np.array([[1.0 - flip_prob, flip_prob], [flip_prob, 1.0 - flip_prob]])
    return ForestModel(
        forest=forest,
        root_marginals={0: np.array([0.5, 0.5])},
        edge_conditionals={(0, 1): flip, (0, 2): flip},
        missing_rates=np.array([hub_missing_rate, 0.0, 0.0]),
        seed=seed,
    )


def hub_children_agreement(flip_prob: float) -> float:
    """Probability that the two children coincide: (1-e)^2 + e^2."""
    return (1.0 - flip_prob) ** 2 + flip_prob**2


def posterior_inconsistency_threshold(flip_prob: float) -> float:
    """Masking rate above which the posterior-optimal forest is wrong.

    Returns (H((1-e)^2 + e^2) - H(e)) / (1 - H(e)) with H the binary
    entropy in bits.  For hub missing rates above this value the
    posterior learner asymptotically links the two children instead of
    recovering the hub edges; the consistent learner is unaffected.
    """
    if not 0.0 < flip_prob < 0.5:
        raise ValueError("flip_prob must be in (0, 0.5)")
    h_flip = _binary_entropy_bits(flip_prob)
    h_agree = _binary_entropy_bits(hub_children_agreement(flip_prob))
    return (h_agree - h_flip) / (1.0 - h_flip)


# ---------------------------------------------------------------------------
# repeated-trial harness


@dataclass(frozen=True)
class TrialReport:
    """Outcome distribution of repeated learn runs on fresh samples."""

    model_edges: tuple[tuple[int, int], ...]
    n: int
    trials: int
    seed: int | None
    forest_counts: dict[EstimatorKind, dict[tuple[tuple[int, int], ...], int]]
    weight_mean: dict[EstimatorKind, np.ndarray]
    weight_var: dict[EstimatorKind, np.ndarray]

    def entropy_bits(self, kind: EstimatorKind) -> float:
        """Shannon entropy (bits) of the learned-forest distribution."""
        counts = np.array(list(self.forest_counts[kind].values()), dtype=float)
        freqs = counts / counts.sum()
        return float(-(freqs * np.log2(freqs)).sum())

    def true_forest_rate(self, kind: EstimatorKind) -> float:
        return self.forest_counts[kind].get(self.model_edges, 0) / self.trials

    def match_rate(self, kind: EstimatorKind, predicate) -> float:
        """Fraction of trials whose learned edge set satisfies predicate."""
        hits = sum(c for edges, c in self.forest_counts[kind].items() if predicate(edges))
        return hits / self.trials

    def to_json_dict(self) -> dict:
        out = {
            "model_edges": [[i + 1, j + 1] for i, j in self.model_edges],
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "estimators": {},
        }
        for kind, counts in self.forest_counts.items():
            out["estimators"][kind.value] = {
                "forest_counts": [
                    {"edges": [[i + 1, j + 1] for i, j in edges], "count": c}
                    for edges, c in sorted(counts.items())
                ],
                "entropy_bits": self.entropy_bits(kind),
                "true_forest_rate": self.true_forest_rate(kind),
                "weight_mean": self.weight_mean[kind].tolist(),
                "weight_var": self.weight_var[kind].tolist(),
            }
        return out


def run_trials(
    model: ForestModel,
    n: int,
    trials: int,
    estimators=(EstimatorKind.POSTERIOR, EstimatorKind.CONSISTENT),
    seed=None,
    prior_weight: float = 0.5,
    edge_prior_q: float = 0.5,
    threads: int = 1,
) -> TrialReport:
    """Sample ``trials`` fresh frames and learn a forest with each estimator.

    Trial t draws from ``SeedSequence(seed, t)``; the per-estimator
    outcome tallies, and the mean/variance of every pairwise weight, are
    identical however trials are scheduled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    estimators = tuple(estimators)
    p = model.n_cols

    def one(t: int):
        trial_seed = np.random.SeedSequence((seed, t) if seed is not None else t)
        table = sample_frame(model, n, seed=trial_seed)
        result = {}
        for kind in estimators:
            weights = weight_matrix(table, kind, prior_weight, edge_prior_q)
            forest = kruskal_positive(weights)
            result[kind] = (tuple(forest.sorted_edges()), weights.matrix)
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(t) for t in range(trials)]

    forest_counts: dict[EstimatorKind, dict] = {k: {} for k in estimators}
    sums = {k: np.zeros((p, p)) for k in estimators}
    sqsums = {k: np.zeros((p, p)) for k in estimators}
    for result in outcomes:
        for kind, (edges, matrix) in result.items():
            forest_counts[kind][edges] = forest_counts[kind].get(edges, 0) + 1
            clean = np.nan_to_num(matrix, nan=0.0)
            sums[kind] += clean
            sqsums[kind] += clean**2
    mean = {k: sums[k] / trials for k in estimators}
    var = {k: sqsums[k] / trials - mean[k] ** 2 for k in estimators}
    return TrialReport(
        model_edges=tuple(model.forest.sorted_edges()),
        n=n,
        trials=trials,
        seed=seed,
        forest_counts=forest_counts,
        weight_mean=mean,
        weight_var=var,
    )
