"""Pairwise edge weights: plug-in, penalized, and the two Bayesian ones.

Four estimators share the PairCounts interface:

* ``empirical_mi`` -- plug-in mutual information over the jointly
  observed rows; nonnegative, overfits (a spanning tree always results).
* ``penalized_mi`` -- plug-in value minus a dimension penalty; the
  classical description-length correction.
* ``posterior_weight`` -- per-total-sample Bayes log-ratio; maximizing
  the sum over selected edges maximizes the structure posterior.
* ``consistent_weight`` -- the same log-ratio per jointly observed row;
  converges to the true mutual information when observations keep
  arriving, and is negative in the limit exactly for independent pairs.

All values are in nats.
"""

from __future__ import annotations

import enum
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import gammaln

from forestlearn.dataframe import CategoricalTable, PairCounts, pair_counts


class EstimatorKind(enum.Enum):
    EMPIRICAL = "empirical"
    PENALIZED = "penalized"
    POSTERIOR = "posterior"
    CONSISTENT = "consistent"

    @classmethod
    def from_token(cls, token: str) -> "EstimatorKind":
        """Accepts the long names and the CLI short forms 'j' and 'k'."""
        aliases = {"j": cls.POSTERIOR, "k": cls.CONSISTENT}
        t = token.strip().lower()
        if t in aliases:
            return aliases[t]
        for kind in cls:
            if kind.value == t:
                return kind
        raise ValueError(f"unknown estimator {token!r}")


def _log_measure_from_counts(counts: np.ndarray, prior_weight: float) -> float:
    """Symmetric-prior Bayes measure straight from a count vector."""
    c = np.asarray(counts, dtype=float).ravel()
    k = c.size
    a = float(prior_weight)
    return float(gammaln(k * a) - gammaln(c.sum() + k * a) + (gammaln(c + a) - gammaln(a)).sum())


def _pair_log_ratio(counts: PairCounts, prior_weight: float) -> float:
    """log[ Q(joint) / (Q(marg i | both rows) Q(marg j | both rows)) ]."""
    return (
        _log_measure_from_counts(counts.joint, prior_weight)
        - _log_measure_from_counts(counts.marginal_i_restricted, prior_weight)
        - _log_measure_from_counts(counts.marginal_j_restricted, prior_weight)
    )


def empirical_mi(counts: PairCounts) -> float:
    """Plug-in mutual information over the jointly observed rows (nats)."""
    m = counts.n_pair
    if m == 0:
        raise ValueError("empirical MI undefined with no jointly observed row")
    joint = counts.joint
    ci = counts.marginal_i_restricted
    cj = counts.marginal_j_restricted
    total = 0.0
    for x in range(joint.shape[0]):
        for y in range(joint.shape[1]):
            cxy = joint[x, y]
            if cxy > 0:
                total += (cxy / m) * math.log(cxy * m / (ci[x] * cj[y]))
    # clamp tiny negative rounding residue; the quantity is >= 0
    return max(total, 0.0)


def penalized_mi(counts: PairCounts, total_n: int) -> float:
    """Plug-in MI minus (1/2n)(alpha-1)(beta-1) log n; may be negative."""
    if counts.n_pair == 0:
        raise ValueError("penalized MI undefined with no jointly observed row")
    ai, aj = counts.joint.shape
    penalty = (ai - 1) * (aj - 1) * math.log(total_n) / (2.0 * total_n)
    return empirical_mi(counts) - penalty


def posterior_weight(
    counts: PairCounts,
    total_n: int,
    prior_weight: float = 0.5,
    edge_prior_q: float = 0.5,
) -> float:
    """Per-total-sample Bayes log-ratio weight of the pair (nats).

    The three measures are taken over the jointly observed rows only.
    With an edge prior probability q the constant log((1-q)/q) joins the
    ratio, vanishing at q=1/2.  A pair with no jointly observed row
    contributes nothing to the structure posterior and gets weight 0.
    """
    if not 0.0 < edge_prior_q < 1.0:
        raise ValueError("edge_prior_q must be in (0, 1)")
    if counts.n_pair == 0:
        return 0.0
    if total_n < 1:
        raise ValueError("total_n must be >= 1")
    prior_term = math.log((1.0 - edge_prior_q) / edge_prior_q)
    return (prior_term + _pair_log_ratio(counts, prior_weight)) / total_n


def consistent_weight(counts: PairCounts, prior_weight: float = 0.5) -> float:
    """Bayes log-ratio per jointly observed row (nats).

    Undefined when no row is jointly observed; callers must then treat
    the pair as unconnectable.
    """
    if counts.n_pair == 0:
        raise ValueError("consistent weight undefined with no jointly observed row")
    return _pair_log_ratio(counts, prior_weight) / counts.n_pair


@dataclass(frozen=True)
class EstimatorWeights:
    """Symmetric p x p weight matrix plus the per-pair observation counts.

    ``matrix`` entries are nats; undefined entries (and the diagonal) are
    NaN.  ``n_pair_matrix[i, j]`` is the number of rows where both
    columns are observed.
    """

    kind: EstimatorKind
    matrix: np.ndarray
    n_pair_matrix: np.ndarray
    column_names: tuple[str, ...]

    def to_tsv(self) -> str:
        out = io.StringIO()
        names = self.column_names
        out.write("\t" + "\t".join(names) + "\n")
        for i, name in enumerate(names):
            row = []
            for j in range(len(names)):
                v = self.matrix[i, j]
                row.append("" if math.isnan(v) else repr(float(v)))
            out.write(name + "\t" + "\t".join(row) + "\n")
        return out.getvalue()

    def to_json_dict(self) -> dict:
        p = len(self.column_names)
        entries = []
        for i, j in combinations(range(p), 2):
            v = self.matrix[i, j]
            entries.append(
                {
                    "i": i + 1,
                    "j": j + 1,
                    "names": [self.column_names[i], self.column_names[j]],
                    "weight_nats": None if math.isnan(v) else float(v),
                    "n_pair": int(self.n_pair_matrix[i, j]),
                }
            )
        return {"kind": self.kind.value, "entries": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _pair_weight(counts: PairCounts, kind: EstimatorKind, total_n, prior_weight, edge_prior_q):
    if kind is EstimatorKind.POSTERIOR:
        return posterior_weight(counts, total_n, prior_weight, edge_prior_q)
    if counts.n_pair == 0:
        return math.nan
    if kind is EstimatorKind.EMPIRICAL:
        return empirical_mi(counts)
    if kind is EstimatorKind.PENALIZED:
        return penalized_mi(counts, total_n)
    if kind is EstimatorKind.CONSISTENT:
        return consistent_weight(counts, prior_weight)
    raise ValueError(f"unknown kind {kind!r}")


def weight_matrix(
    table: CategoricalTable,
    kind: EstimatorKind = EstimatorKind.POSTERIOR,
    prior_weight: float = 0.5,
    edge_prior_q: float = 0.5,
    threads: int = 1,
) -> EstimatorWeights:
    """Fill all p(p-1)/2 pairwise weights for the chosen estimator.

    Pair computations are independent and may run on a thread pool; the
    result is assembled by index and does not depend on completion order.
    """
    p = table.n_cols
    if p < 2:
        raise ValueError("need at least two columns")
    n = table.n_rows
    matrix = np.full((p, p), np.nan)
    n_pair = np.zeros((p, p), dtype=np.int64)
    pairs = list(combinations(range(p), 2))

    def compute(ij):
        i, j = ij
        counts = pair_counts(table, i, j)
        return i, j, counts.n_pair, _pair_weight(counts, kind, n, prior_weight, edge_prior_q)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(ij) for ij in pairs]
    for i, j, m, w in results:
        matrix[i, j] = matrix[j, i] = w
        n_pair[i, j] = n_pair[j, i] = m
    return EstimatorWeights(
        kind=kind,
        matrix=matrix,
        n_pair_matrix=n_pair,
        column_names=table.column_names,
    )
