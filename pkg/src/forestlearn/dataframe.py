"""Categorical data frames with explicitly missing cells.

A table is an immutable n x p grid of small integer codes.  Missing cells
are stored as ``MISSING`` (-1).  Everything downstream consumes tables
only through count statistics and row-index sets, both defined here.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass

import numpy as np

MISSING = -1

_INT_CELL = re.compile(r"^\d+$")


class ParseError(ValueError):
    """Malformed input text or a cell inconsistent with the declared schema."""


@dataclass(frozen=True)
class CategoricalTable:
    """Immutable categorical data frame.

    Parameters
    ----------
    cells : np.ndarray
        (n, p) int32 array; ``MISSING`` marks an absent cell, every other
        entry is a code in ``range(cardinalities[col])``.
    cardinalities : tuple of int
        Alphabet size per column, fixed at construction.
    column_names : tuple of str
    category_maps : tuple
        Per column, either ``None`` (cells were literal integers) or the
        tuple of original string labels indexed by code.
    declared : tuple of bool
        Per column, whether the cardinality was declared (else inferred
        as max observed code + 1).
    """

    cells: np.ndarray
    cardinalities: tuple[int, ...]
    column_names: tuple[str, ...]
    category_maps: tuple[tuple[str, ...] | None, ...]
    declared: tuple[bool, ...]

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int32)
        if cells.ndim != 2:
            raise ValueError("cells must be 2-D")
        p = cells.shape[1]
        if p == 0:
            raise ValueError("table must have at least one column")
        if len(self.cardinalities) != p or len(self.column_names) != p:
            raise ValueError("cardinalities/column_names length mismatch")
        if len(self.category_maps) != p or len(self.declared) != p:
            raise ValueError("category_maps/declared length mismatch")
        for c in range(p):
            col = cells[:, c]
            if self.cardinalities[c] < 1:
                raise ValueError(f"column {c}: cardinality must be >= 1")
            ok = (col == MISSING) | ((col >= 0) & (col < self.cardinalities[c]))
            if not np.all(ok):
                raise ValueError(f"column {c}: cell code out of range")
        cells = cells.copy()
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "cardinalities", tuple(int(a) for a in self.cardinalities))
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "category_maps", tuple(self.category_maps))
        object.__setattr__(self, "declared", tuple(bool(d) for d in self.declared))

    @property
    def n_rows(self) -> int:
        return self.cells.shape[0]

    @property
    def n_cols(self) -> int:
        return self.cells.shape[1]

    @property
    def observed(self) -> np.ndarray:
        """Boolean (n, p) mask, True where the cell is present."""
        return self.cells != MISSING

    def column(self, i: int) -> np.ndarray:
        return self.cells[:, i]

    def column_counts(self, i: int) -> np.ndarray:
        """Occurrence counts of column i over its observed rows."""
        col = self.cells[:, i]
        return np.bincount(col[col >= 0], minlength=self.cardinalities[i]).astype(np.int64)

    def to_csv(self, na_token: str = "*", delimiter: str = ",") -> str:
        """Normalized CSV: header row plus integer codes, na_token for missing."""
        out = io.StringIO()
        out.write(delimiter.join(self.column_names) + "\n")
        for row in self.cells:
            out.write(delimiter.join(na_token if v == MISSING else str(int(v)) for v in row) + "\n")
        return out.getvalue()


def parse_table(
    text: str,
    na_token: str = "*",
    declared_cardinalities=None,
    delimiter: str = ",",
    accept_na_literal: bool = False,
    schema: dict | None = None,
) -> CategoricalTable:
    """Parse delimited text (header row required) into a CategoricalTable.

    Cells are whitespace-trimmed.  A column whose observed cells are all
    nonnegative integers keeps them as literal codes; any other column is
    coded in first-appearance order and the label list is retained in
    ``category_maps`` so the coding is reproducible.

    ``schema`` is an optional sidecar dict with keys ``cardinalities``
    (list of int) and ``categories`` (column name -> label list); it wins
    over ``declared_cardinalities``.
    """
    na_tokens = {na_token}
    if accept_na_literal:
        na_tokens.add("NA")

    lines = [ln for ln in text.splitlines() if ln != ""]
    if not lines:
        raise ParseError("empty input: a header row is required")
    names = [f.strip() for f in lines[0].split(delimiter)]
    p = len(names)
    if p == 0 or names == [""]:
        raise ParseError("zero columns")

    declared = [None] * p
    if declared_cardinalities is not None:
        if len(declared_cardinalities) != p:
            raise ParseError("declared cardinalities length mismatch")
        declared = [int(a) for a in declared_cardinalities]
    schema_categories: dict[str, list[str]] = {}
    if schema is not None:
        if "cardinalities" in schema and schema["cardinalities"] is not None:
            if len(schema["cardinalities"]) != p:
                raise ParseError("schema cardinalities length mismatch")
            declared = [int(a) for a in schema["cardinalities"]]
        schema_categories = dict(schema.get("categories", {}))

    raw_rows: list[list[str]] = []
    for lineno, ln in enumerate(lines[1:], start=2):
        fields = [f.strip() for f in ln.split(delimiter)]
        if len(fields) != p:
            raise ParseError(f"line {lineno}: expected {p} fields, found {len(fields)}")
        raw_rows.append(fields)
    n = len(raw_rows)

    cells = np.full((n, p), MISSING, dtype=np.int32)
    cardinalities: list[int] = []
    category_maps: list[tuple[str, ...] | None] = []
    was_declared: list[bool] = []
    for c in range(p):
        col = [raw_rows[k][c] for k in range(n)]
        observed = [(k, v) for k, v in enumerate(col) if v not in na_tokens]
        forced_labels = schema_categories.get(names[c])
        literal = forced_labels is None and all(_INT_CELL.match(v) for _, v in observed)
        if literal:
            codes = {v: int(v) for _, v in observed}
        else:
            labels = list(forced_labels) if forced_labels is not None else []
            codes = {v: i for i, v in enumerate(labels)}
            for _, v in observed:
                if v not in codes:
                    if forced_labels is not None:
                        raise ParseError(f"column {names[c]!r}: category {v!r} not in schema")
                    codes[v] = len(codes)
                    labels.append(v)
        max_code = max(codes.values(), default=-1)
        alpha = declared[c]
        if alpha is None:
            if max_code < 0:
                raise ParseError(
                    f"column {names[c]!r}: all cells missing and no declared cardinality"
                )
            alpha = max_code + 1
        elif max_code >= alpha:
            raise ParseError(f"column {names[c]!r}: code {max_code} exceeds cardinality {alpha}")
        for k, v in observed:
            cells[k, c] = codes[v]
        cardinalities.append(alpha)
        if literal:
            category_maps.append(None)
        else:
            by_code = sorted(codes, key=codes.get)
            category_maps.append(tuple(by_code))
        was_declared.append(declared[c] is not None)

    return CategoricalTable(
        cells=cells,
        cardinalities=tuple(cardinalities),
        column_names=tuple(names),
        category_maps=tuple(category_maps),
        declared=tuple(was_declared),
    )


def index_sets(table: CategoricalTable, i: int, j: int):
    """Row-index sets ([i], [j], [i,j]) as ascending 0-based arrays.

    [i] holds the rows where column i is observed and [i,j] the rows where
    both columns are, so [i,j] is the intersection of [i] and [j].
    """
    if i == j:
        raise ValueError("i and j must differ")
    oi = table.cells[:, i] != MISSING
    oj = table.cells[:, j] != MISSING
    rows_i = np.flatnonzero(oi)
    rows_j = np.flatnonzero(oj)
    rows_ij = np.flatnonzero(oi & oj)
    return rows_i, rows_j, rows_ij


@dataclass(frozen=True)
class PairCounts:
    """Count statistics of one column pair.

    ``joint`` tallies the pair values over the rows where both columns are
    observed; the restricted marginals are its row/column sums, while the
    full marginals count each column over all of its own observed rows.
    """

    joint: np.ndarray
    marginal_i_restricted: np.ndarray
    marginal_j_restricted: np.ndarray
    marginal_i_full: np.ndarray
    marginal_j_full: np.ndarray
    n_pair: int
    n_i: int
    n_j: int


def pair_counts(table: CategoricalTable, i: int, j: int) -> PairCounts:
    """Tally joint and marginal occurrence counts for columns (i, j)."""
    rows_i, rows_j, rows_ij = index_sets(table, i, j)
    ai = table.cardinalities[i]
    aj = table.cardinalities[j]
    xi = table.cells[rows_ij, i].astype(np.int64)
    xj = table.cells[rows_ij, j].astype(np.int64)
    joint = np.bincount(xi * aj + xj, minlength=ai * aj).reshape(ai, aj)
    return PairCounts(
        joint=joint,
        marginal_i_restricted=joint.sum(axis=1),
        marginal_j_restricted=joint.sum(axis=0),
        marginal_i_full=np.bincount(table.cells[rows_i, i], minlength=ai).astype(np.int64),
        marginal_j_full=np.bincount(table.cells[rows_j, j], minlength=aj).astype(np.int64),
        n_pair=int(rows_ij.size),
        n_i=int(rows_i.size),
        n_j=int(rows_j.size),
    )
