"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from forestlearn.dataframe import MISSING, CategoricalTable
from forestlearn.forest_learn import Forest
from forestlearn.simulator import ForestModel


def make_table(cells, cardinalities=None, names=None):
    """Build a table straight from a cell grid (MISSING = -1 allowed)."""
    cells = np.asarray(cells, dtype=np.int32)
    n, p = cells.shape
    if cardinalities is None:
        cardinalities = tuple(
            int(cells[:, c][cells[:, c] >= 0].max(initial=0)) + 1 for c in range(p)
        )
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(p))
    return CategoricalTable(
        cells=cells,
        cardinalities=tuple(cardinalities),
        column_names=tuple(names),
        category_maps=(None,) * p,
        declared=(True,) * p,
    )


def random_table(rng, n, cards, missing_rate=0.0):
    p = len(cards)
    cells = np.stack([rng.integers(0, cards[c], size=n) for c in range(p)], axis=1).astype(
        np.int32
    )
    if missing_rate > 0:
        cells[rng.random((n, p)) < missing_rate] = MISSING
    return make_table(cells, cards)


def brute_force_pair_tally(table, i, j):
    """Row-by-row recount of the joint and marginal occurrence counts."""
    ai, aj = table.cardinalities[i], table.cardinalities[j]
    joint = np.zeros((ai, aj), dtype=np.int64)
    full_i = np.zeros(ai, dtype=np.int64)
    full_j = np.zeros(aj, dtype=np.int64)
    for k in range(table.n_rows):
        vi = table.cells[k, i]
        vj = table.cells[k, j]
        if vi != MISSING:
            full_i[vi] += 1
        if vj != MISSING:
            full_j[vj] += 1
        if vi != MISSING and vj != MISSING:
            joint[vi, vj] += 1
    return joint, full_i, full_j


def binary_flip_matrix(flip):
    return np.array([[1.0 - flip, flip], [flip, 1.0 - flip]])


def seven_vertex_model(flip=0.2, masked_cols=(1, 2, 5), missing=0.25, seed=None):
    """Two-component planted model: a 5-vertex tree plus a 2-vertex pair.

    Edges (0-based): (0,1), (1,2), (1,4), (2,3), (5,6); every variable is
    binary, children flip their parent with probability ``flip``.
    """
    edges = frozenset({(0, 1), (1, 2), (1, 4), (2, 3), (5, 6)})
    forest = Forest(n_vertices=7, edges=edges)
    rates = np.zeros(7)
    for c in masked_cols:
        rates[c] = missing
    flipm = binary_flip_matrix(flip)
    return ForestModel(
        forest=forest,
        root_marginals={0: np.array([0.5, 0.5]), 5: np.array([0.5, 0.5])},
        edge_conditionals={edge: flipm for edge in forest.directed_edges},
        missing_rates=rates,
        seed=seed,
    )


# Frozen regression fixture: with these 29 rows (complete data, cards
# 4,4,3,3) the posterior forest keeps edge (3,4) [1-based] that the
# plug-in spanning tree does not contain.
NOT_A_SUBSET_CSV = "\n".join(
    [
        "a,b,c,d",
        "3,1,2,1",
        "1,2,0,0",
        "3,0,1,1",
        "1,1,0,2",
        "3,1,2,2",
        "0,2,2,2",
        "3,2,1,0",
        "1,2,2,0",
        "2,1,1,2",
        "0,2,2,0",
        "1,3,0,0",
        "0,2,0,1",
        "2,3,0,0",
        "3,2,1,2",
        "0,2,2,0",
        "1,1,2,1",
        "3,2,2,1",
        "0,1,0,0",
        "0,1,2,1",
        "0,0,0,0",
        "2,2,1,2",
        "2,2,1,1",
        "2,3,1,0",
        "0,2,1,2",
        "2,0,1,2",
        "1,0,0,0",
        "3,1,2,1",
        "3,3,2,0",
        "0,0,1,1",
    ]
) + "\n"


@pytest.fixture
def worked_frame():
    """The five-row two-column frame with masked cells used throughout."""
    from forestlearn.dataframe import parse_table

    return parse_table("a,b\n0,0\n*,1\n1,*\n1,0\n*,*\n")
