"""Entropy, exact description length, and a lossless frame codec.

The codec writes a self-describing container: a header naming the frame
shape, the forest, and the prior; a mask payload coding each column's
missing pattern with adaptive binary predictives; and a value payload
coding the observed cells along the forest.  Value coding is two-phase
per directed edge: child cells on the jointly observed rows are coded
conditionally on the (already decoded) parent cells through the pair
measure's own predictive, and the child's remaining observed cells
continue with the marginal predictive whose counts are pre-loaded from
phase one.  Because every measure involved depends on counts only, the
accumulated ideal code length telescopes to a closed-form product of
sequence measures, reported next to the forest's Bayes score.

The container layout is documented byte-exactly in docs/format.md.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from forestlearn.dataframe import MISSING, CategoricalTable, pair_counts
from forestlearn.forest_learn import (
    Forest,
    learn_forest,
    log_forest_prior,
    log_forest_score,
    maximum_weight_forest,
)
from forestlearn.mi_estimators import (
    EstimatorKind,
    _log_measure_from_counts,
    empirical_mi,
)
from forestlearn.rangecoder import MAX_TOTAL, RangeDecoder, RangeEncoder
from forestlearn.simulator import (
    ForestModel,
    model_entropy,
    model_mutual_information,
    sample_frame,
)

_MAGIC = b"FLC1"
_VERSION = 1
_LN2 = math.log(2.0)


class CorruptStreamError(ValueError):
    """Checksum mismatch, truncation, or a malformed container."""


# ---------------------------------------------------------------------------
# source-side quantities


@dataclass(frozen=True)
class SourceSpec:
    """A forest source together with per-column observation rates.

    ``observe_rates[i]`` is the stationary probability that column i is
    observed in a row; cells are masked independently, so the joint
    observation rate of a pair is the product of its column rates.
    """

    model: ForestModel
    observe_rates: np.ndarray

    def __post_init__(self):
        rates = np.asarray(self.observe_rates, dtype=float)
        if rates.shape != (self.model.n_cols,):
            raise ValueError("observe_rates must have one entry per column")
        if np.any((rates < 0) | (rates > 1)):
            raise ValueError("observation rates must lie in [0, 1]")
        self.model.validate_shapes()
        rates = rates.copy()
        rates.flags.writeable = False
        object.__setattr__(self, "observe_rates", rates)

    @classmethod
    def from_model(cls, model: ForestModel) -> "SourceSpec":
        return cls(model=model, observe_rates=1.0 - model.missing_rates)

    @property
    def n_cols(self) -> int:
        return self.model.n_cols

    def pair_observe_rate(self, i: int, j: int) -> float:
        return float(self.observe_rates[i] * self.observe_rates[j])

    def entropy(self, i: int) -> float:
        return model_entropy(self.model, i)

    def mutual_information(self, i: int, j: int) -> float:
        return model_mutual_information(self.model, i, j)

    def mi_matrix(self) -> np.ndarray:
        p = self.n_cols
        out = np.full((p, p), np.nan)
        for i, j in combinations(range(p), 2):
            out[i, j] = out[j, i] = self.mutual_information(i, j)
        return out


def forest_entropy(spec: SourceSpec) -> float:
    """Per-sample entropy (nats) of the fully observed source.

    Sum of column entropies minus the mutual information over the edges
    of the maximum-weight forest built from the true pairwise values.
    """
    if not np.all(spec.observe_rates == 1.0):
        raise ValueError("forest_entropy requires a fully observed spec")
    mi = spec.mi_matrix()
    structure = maximum_weight_forest(mi)
    total = sum(spec.entropy(i) for i in range(spec.n_cols))
    return total - sum(mi[i, j] for i, j in structure.edges)


def conditional_entropy(spec: SourceSpec) -> float:
    """Per-sample entropy (nats) of the observed cells given the mask.

    Column entropies enter weighted by their observation rates; the edge
    set is the maximum-weight forest over the rate-weighted pairwise
    values, and each selected edge subtracts its weighted information.
    """
    p = spec.n_cols
    mi = spec.mi_matrix()
    weighted = np.full((p, p), np.nan)
    for i, j in combinations(range(p), 2):
        weighted[i, j] = weighted[j, i] = spec.pair_observe_rate(i, j) * mi[i, j]
    structure = maximum_weight_forest(weighted)
    total = sum(spec.observe_rates[i] * spec.entropy(i) for i in range(p))
    return total - sum(weighted[i, j] for i, j in structure.edges)


# ---------------------------------------------------------------------------
# description length


@dataclass(frozen=True)
class DescriptionLength:
    """Exact and asymptotic description lengths of a (table, forest) pair.

    ``exact_nats`` is the negated structure-plus-data log score;
    ``asymptotic_nats`` is the classical per-column/per-edge penalty
    approximation evaluated at the observed counts (a diagnostic, not
    the code length); ``structure_nats`` is the exact prior cost of the
    edge set alone.
    """

    exact_nats: float
    asymptotic_nats: float
    structure_nats: float

    @property
    def exact_bits(self) -> float:
        return self.exact_nats / _LN2

    @property
    def asymptotic_bits(self) -> float:
        return self.asymptotic_nats / _LN2


def _empirical_entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def description_length(
    table: CategoricalTable,
    forest: Forest,
    prior_weight: float = 0.5,
    edge_prior_q: float = 0.5,
) -> DescriptionLength:
    exact = -log_forest_score(table, forest, prior_weight, edge_prior_q)
    asym = 0.0
    for i in range(table.n_cols):
        counts = table.column_counts(i)
        n_i = int(counts.sum())
        asym += n_i * _empirical_entropy(counts)
        if n_i > 0:
            asym += 0.5 * (table.cardinalities[i] - 1) * math.log(n_i)
    for i, j in forest.sorted_edges():
        counts = pair_counts(table, i, j)
        if counts.n_pair == 0:
            continue
        penalty = (
            0.5
            * (table.cardinalities[i] - 1)
            * (table.cardinalities[j] - 1)
            * math.log(counts.n_pair)
        )
        asym -= counts.n_pair * empirical_mi(counts) - penalty
    structure = -log_forest_prior(table.n_cols, forest.n_edges, edge_prior_q)
    return DescriptionLength(exact_nats=exact, asymptotic_nats=asym, structure_nats=structure)


# ---------------------------------------------------------------------------
# container plumbing


def _write_uvarint(buf: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("uvarint must be nonnegative")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buf.append(byte | 0x80)
        else:
            buf.append(byte)
            return


def _read_uvarint(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise CorruptStreamError("truncated varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 70:
            raise CorruptStreamError("varint too long")


def _fraction_parts(value: Fraction, what: str) -> tuple[int, int]:
    frac = Fraction(value)
    if frac <= 0:
        raise ValueError(f"{what} must be positive")
    return frac.numerator, frac.denominator


@dataclass(frozen=True)
class CodedFrame:
    """A coded table: header fields plus the two payloads.

    ``mask_ideal_bits`` and ``value_ideal_bits`` are the accumulated
    information contents of the two payloads; they travel with freshly
    encoded frames only and are not serialized.
    """

    n_rows: int
    n_cols: int
    cardinalities: tuple[int, ...]
    column_names: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    prior: Fraction
    edge_prior_q: Fraction
    mask_payload: bytes
    value_payload: bytes
    mask_ideal_bits: float | None = None
    value_ideal_bits: float | None = None

    @property
    def forest(self) -> Forest:
        return Forest(n_vertices=self.n_cols, edges=frozenset(self.edges))

    def header_bytes(self) -> bytes:
        buf = bytearray()
        buf += _MAGIC
        buf.append(_VERSION)
        _write_uvarint(buf, self.n_cols)
        _write_uvarint(buf, self.n_rows)
        for a in self.cardinalities:
            _write_uvarint(buf, a)
        for name in self.column_names:
            raw = name.encode("utf-8")
            _write_uvarint(buf, len(raw))
            buf += raw
        pn, pd = _fraction_parts(self.prior, "prior")
        _write_uvarint(buf, pn)
        _write_uvarint(buf, pd)
        qn, qd = _fraction_parts(self.edge_prior_q, "edge prior")
        _write_uvarint(buf, qn)
        _write_uvarint(buf, qd)
        _write_uvarint(buf, len(self.edges))
        for i, j in self.edges:
            buf += int(i).to_bytes(2, "big")
            buf += int(j).to_bytes(2, "big")
        _write_uvarint(buf, len(self.mask_payload))
        _write_uvarint(buf, len(self.value_payload))
        crc = zlib.crc32(self.mask_payload + self.value_payload) & 0xFFFFFFFF
        buf += crc.to_bytes(4, "big")
        return bytes(buf)

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.mask_payload + self.value_payload

    @property
    def total_bits(self) -> int:
        return 8 * len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "CodedFrame":
        if data[:4] != _MAGIC:
            raise CorruptStreamError("bad magic")
        if len(data) < 5 or data[4] != _VERSION:
            raise CorruptStreamError("unsupported version")
        pos = 5
        p, pos = _read_uvarint(data, pos)
        n, pos = _read_uvarint(data, pos)
        if p < 1 or p > 0xFFFF:
            raise CorruptStreamError("bad column count")
        cards = []
        for _ in range(p):
            a, pos = _read_uvarint(data, pos)
            if a < 1:
                raise CorruptStreamError("bad cardinality")
            cards.append(a)
        names = []
        for _ in range(p):
            ln, pos = _read_uvarint(data, pos)
            if pos + ln > len(data):
                raise CorruptStreamError("truncated name")
            names.append(data[pos : pos + ln].decode("utf-8"))
            pos += ln
        pn, pos = _read_uvarint(data, pos)
        pd, pos = _read_uvarint(data, pos)
        qn, pos = _read_uvarint(data, pos)
        qd, pos = _read_uvarint(data, pos)
        if min(pn, pd, qn, qd) < 1:
            raise CorruptStreamError("bad rational")
        n_edges, pos = _read_uvarint(data, pos)
        edges = []
        for _ in range(n_edges):
            if pos + 4 > len(data):
                raise CorruptStreamError("truncated edge list")
            i = int.from_bytes(data[pos : pos + 2], "big")
            j = int.from_bytes(data[pos + 2 : pos + 4], "big")
            pos += 4
            edges.append((i, j))
        mask_len, pos = _read_uvarint(data, pos)
        value_len, pos = _read_uvarint(data, pos)
        if pos + 4 > len(data):
            raise CorruptStreamError("truncated checksum")
        crc_stored = int.from_bytes(data[pos : pos + 4], "big")
        pos += 4
        if pos + mask_len + value_len > len(data):
            raise CorruptStreamError("truncated payload")
        mask_payload = data[pos : pos + mask_len]
        value_payload = data[pos + mask_len : pos + mask_len + value_len]
        if zlib.crc32(mask_payload + value_payload) & 0xFFFFFFFF != crc_stored:
            raise CorruptStreamError("checksum mismatch")
        return cls(
            n_rows=n,
            n_cols=p,
            cardinalities=tuple(cards),
            column_names=tuple(names),
            edges=tuple(edges),
            prior=Fraction(pn, pd),
            edge_prior_q=Fraction(qn, qd),
            mask_payload=mask_payload,
            value_payload=value_payload,
        )


# ---------------------------------------------------------------------------
# the codec proper


def _coding_plan(forest: Forest):
    """Column/edge processing order shared by encoder and decoder."""
    ops = [("root", r, None) for r in forest.roots]
    ops += [("edge", i, j) for i, j in forest.directed_edges]
    return ops


def _encode_mask(table: CategoricalTable) -> tuple[bytes, float]:
    enc = RangeEncoder()
    bits = 0.0
    observed = table.observed
    for c in range(table.n_cols):
        c0 = c1 = 0  # adaptive counts: absent / present
        col = observed[:, c]
        for k in range(table.n_rows):
            total = 2 * (c0 + c1) + 2
            f_absent = 2 * c0 + 1
            if col[k]:
                enc.encode(f_absent, total, total)
                bits += math.log2(total / (total - f_absent))
                c1 += 1
            else:
                enc.encode(0, f_absent, total)
                bits += math.log2(total / f_absent)
                c0 += 1
    return enc.finish(), bits


def _decode_mask(dec: RangeDecoder, n: int, p: int) -> np.ndarray:
    observed = np.zeros((n, p), dtype=bool)
    for c in range(p):
        c0 = c1 = 0
        for k in range(n):
            total = 2 * (c0 + c1) + 2
            f_absent = 2 * c0 + 1
            t = dec.decode_target(total)
            if t < f_absent:
                dec.advance(0, f_absent, total)
                c0 += 1
            else:
                dec.advance(f_absent, total, total)
                observed[k, c] = True
                c1 += 1
    return observed


class _ColumnCoder:
    """Adaptive per-symbol predictive over one alphabet, rational prior."""

    __slots__ = ("counts", "pn", "pd", "total")

    def __init__(self, alphabet: int, pn: int, pd: int, start=None):
        self.counts = [0] * alphabet if start is None else list(start)
        self.pn = pn
        self.pd = pd
        self.total = self.pd * sum(self.counts) + alphabet * pn

    def interval(self, symbol: int):
        pd = self.pd
        pn = self.pn
        cum = 0
        counts = self.counts
        for y in range(symbol):
            cum += pd * counts[y] + pn
        freq = pd * counts[symbol] + pn
        return cum, cum + freq, self.total

    def locate(self, target: int):
        pd = self.pd
        pn = self.pn
        cum = 0
        for y, c in enumerate(self.counts):
            freq = pd * c + pn
            if target < cum + freq:
                return y, cum, cum + freq
            cum += freq
        raise CorruptStreamError("decoded target out of range")

    def update(self, symbol: int):
        self.counts[symbol] += 1
        self.total += self.pd


class _PairCoder:
    """Conditional predictive of a child symbol given its parent symbol.

    Frequencies come from the running joint counts; the conditional's
    normalizer is the parent row sum plus the joint prior mass of the
    row, so the per-row products telescope to the joint measure divided
    by its own parent marginal.
    """

    __slots__ = ("joint", "row", "beta", "pn", "pd")

    def __init__(self, alpha: int, beta: int, pn: int, pd: int):
        self.joint = [[0] * beta for _ in range(alpha)]
        self.row = [0] * alpha
        self.beta = beta
        self.pn = pn
        self.pd = pd

    def interval(self, parent: int, child: int):
        pd = self.pd
        pn = self.pn
        row = self.joint[parent]
        cum = 0
        for y in range(child):
            cum += pd * row[y] + pn
        freq = pd * row[child] + pn
        total = pd * self.row[parent] + self.beta * pn
        return cum, cum + freq, total

    def locate(self, parent: int, target: int):
        pd = self.pd
        pn = self.pn
        cum = 0
        for y, c in enumerate(self.joint[parent]):
            freq = pd * c + pn
            if target < cum + freq:
                return y, cum, cum + freq
            cum += freq
        raise CorruptStreamError("decoded target out of range")

    def total(self, parent: int) -> int:
        return self.pd * self.row[parent] + self.beta * self.pn

    def update(self, parent: int, child: int):
        self.joint[parent][child] += 1
        self.row[parent] += 1

    def child_counts(self):
        return [sum(row[y] for row in self.joint) for y in range(self.beta)]


def _prior_ints(prior: Fraction, table_n: int, max_card: int) -> tuple[int, int]:
    pn, pd = _fraction_parts(prior, "prior")
    # every predictive total must stay under the coder's frequency cap
    if pd * table_n + max_card * pn > MAX_TOTAL or 2 * table_n + 2 > MAX_TOTAL:
        raise ValueError("frame too large for the coder's frequency cap with this prior")
    return pn, pd


def _encode_values(table: CategoricalTable, forest: Forest, prior: Fraction) -> tuple[bytes, float]:
    pn, pd = _prior_ints(prior, table.n_rows, max(table.cardinalities))
    enc = RangeEncoder()
    bits = 0.0
    observed = table.observed
    cells = table.cells
    for op, a, b in _coding_plan(forest):
        if op == "root":
            coder = _ColumnCoder(table.cardinalities[a], pn, pd)
            col = cells[:, a]
            for k in np.flatnonzero(observed[:, a]):
                sym = int(col[k])
                lo, hi, total = coder.interval(sym)
                enc.encode(lo, hi, total)
                bits += math.log2(total / (hi - lo))
                coder.update(sym)
        else:
            i, j = a, b
            both = observed[:, i] & observed[:, j]
            pair = _PairCoder(table.cardinalities[i], table.cardinalities[j], pn, pd)
            ci = cells[:, i]
            cj = cells[:, j]
            for k in np.flatnonzero(both):
                parent = int(ci[k])
                child = int(cj[k])
                lo, hi, total = pair.interval(parent, child)
                enc.encode(lo, hi, total)
                bits += math.log2(total / (hi - lo))
                pair.update(parent, child)
            tail = _ColumnCoder(table.cardinalities[j], pn, pd, start=pair.child_counts())
            for k in np.flatnonzero(observed[:, j] & ~both):
                sym = int(cj[k])
                lo, hi, total = tail.interval(sym)
                enc.encode(lo, hi, total)
                bits += math.log2(total / (hi - lo))
                tail.update(sym)
    return enc.finish(), bits


def _decode_values(
    dec: RangeDecoder,
    observed: np.ndarray,
    cardinalities,
    forest: Forest,
    prior: Fraction,
) -> np.ndarray:
    n, p = observed.shape
    pn, pd = _prior_ints(prior, n, max(cardinalities) if cardinalities else 1)
    cells = np.full((n, p), MISSING, dtype=np.int32)
    for op, a, b in _coding_plan(forest):
        if op == "root":
            coder = _ColumnCoder(cardinalities[a], pn, pd)
            for k in np.flatnonzero(observed[:, a]):
                t = dec.decode_target(coder.total)
                sym, lo, hi = coder.locate(t)
                dec.advance(lo, hi, coder.total)
                coder.update(sym)
                cells[k, a] = sym
        else:
            i, j = a, b
            both = observed[:, i] & observed[:, j]
            pair = _PairCoder(cardinalities[i], cardinalities[j], pn, pd)
            for k in np.flatnonzero(both):
                parent = int(cells[k, i])
                total = pair.total(parent)
                t = dec.decode_target(total)
                child, lo, hi = pair.locate(parent, t)
                dec.advance(lo, hi, total)
                pair.update(parent, child)
                cells[k, j] = child
            tail = _ColumnCoder(cardinalities[j], pn, pd, start=pair.child_counts())
            for k in np.flatnonzero(observed[:, j] & ~both):
                t = dec.decode_target(tail.total)
                sym, lo, hi = tail.locate(t)
                dec.advance(lo, hi, tail.total)
                tail.update(sym)
                cells[k, j] = sym
    return cells


def encode(
    table: CategoricalTable,
    forest: Forest | None = None,
    prior: Fraction = Fraction(1, 2),
    edge_prior_q: Fraction = Fraction(1, 2),
) -> CodedFrame:
    """Encode a table; learns the posterior-optimal forest when none given."""
    prior = Fraction(prior)
    edge_prior_q = Fraction(edge_prior_q)
    if forest is None:
        forest = learn_forest(
            table,
            EstimatorKind.POSTERIOR,
            prior_weight=float(prior),
            edge_prior_q=float(edge_prior_q),
        )
    if forest.n_vertices != table.n_cols:
        raise ValueError("forest does not match table width")
    mask_payload, mask_bits = _encode_mask(table)
    value_payload, value_bits = _encode_values(table, forest, prior)
    return CodedFrame(
        n_rows=table.n_rows,
        n_cols=table.n_cols,
        cardinalities=table.cardinalities,
        column_names=table.column_names,
        edges=tuple(forest.sorted_edges()),
        prior=prior,
        edge_prior_q=edge_prior_q,
        mask_payload=mask_payload,
        value_payload=value_payload,
        mask_ideal_bits=mask_bits,
        value_ideal_bits=value_bits,
    )


def decode(frame: CodedFrame | bytes) -> CategoricalTable:
    """Exact reconstruction of the coded table, missing cells included."""
    if isinstance(frame, (bytes, bytearray)):
        frame = CodedFrame.from_bytes(bytes(frame))
    try:
        forest = frame.forest
    except ValueError as exc:
        raise CorruptStreamError(f"bad forest in header: {exc}") from exc
    observed = _decode_mask(RangeDecoder(frame.mask_payload), frame.n_rows, frame.n_cols)
    cells = _decode_values(
        RangeDecoder(frame.value_payload),
        observed,
        frame.cardinalities,
        forest,
        frame.prior,
    )
    if np.any((cells == MISSING) & observed) or np.any((cells != MISSING) & ~observed):
        raise CorruptStreamError("mask/value payload disagreement")
    return CategoricalTable(
        cells=cells,
        cardinalities=frame.cardinalities,
        column_names=frame.column_names,
        category_maps=(None,) * frame.n_cols,
        declared=(True,) * frame.n_cols,
    )


def coded_value_bits_closed_form(
    table: CategoricalTable, forest: Forest, prior: Fraction = Fraction(1, 2)
) -> float:
    """Telescoped information content (bits) of the value payload.

    Root columns cost their own measure; each directed edge costs the
    pair measure over the jointly observed rows divided by the measure
    the pair's predictive induces on the parent subsequence (prior mass
    beta/2 per parent symbol under the default prior), plus the child
    continuation.  The range coder's accumulated ideal length matches
    this expression to floating accuracy.
    """
    pw = float(prior)
    total = 0.0
    for op, a, b in _coding_plan(forest):
        if op == "root":
            total -= _log_measure_from_counts(table.column_counts(a), pw)
        else:
            counts = pair_counts(table, a, b)
            beta = table.cardinalities[b]
            total -= (
                _log_measure_from_counts(counts.joint, pw)
                - _log_measure_from_counts(counts.marginal_i_restricted, beta * pw)
                + _log_measure_from_counts(counts.marginal_j_full, pw)
                - _log_measure_from_counts(counts.marginal_j_restricted, pw)
            )
    return total / _LN2


# ---------------------------------------------------------------------------
# redundancy measurement


@dataclass(frozen=True)
class RedundancyReport:
    """Simulated per-sample redundancy against the penalty-sum bound.

    The description length counts header and value payload (the mask is
    conditioning side information and excluded).  The bound is the sum
    of per-column and per-edge penalties evaluated at the realized
    observation counts, the edge set being the rate-weighted true-MI
    forest.  Both the bound as implemented (all penalties added) and the
    vertex-minus-edge variant are reported.
    """

    n: int
    trials: int
    seed: int | None
    mean_length_bits: float
    mean_bits_per_sample: float
    conditional_entropy_bits: float
    redundancy_bits_per_sample: float
    bound_bits_per_sample: float
    bound_signed_bits_per_sample: float
    margin_bits: float
    trial_redundancy_bits: tuple[float, ...]
    trial_bound_bits: tuple[float, ...]
    violations: int

    @property
    def within_bound(self) -> bool:
        return self.redundancy_bits_per_sample <= self.bound_bits_per_sample + self.margin_bits

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "mean_length_bits": self.mean_length_bits,
            "mean_bits_per_sample": self.mean_bits_per_sample,
            "conditional_entropy_bits": self.conditional_entropy_bits,
            "redundancy_bits_per_sample": self.redundancy_bits_per_sample,
            "bound_bits_per_sample": self.bound_bits_per_sample,
            "bound_signed_bits_per_sample": self.bound_signed_bits_per_sample,
            "margin_bits": self.margin_bits,
            "violations": self.violations,
            "within_bound": self.within_bound,
        }


def redundancy_report(
    spec: SourceSpec,
    n: int,
    trials: int,
    seed=None,
    prior: Fraction = Fraction(1, 2),
    edge_prior_q: Fraction = Fraction(1, 2),
    margin_bits: float = 0.1,
) -> RedundancyReport:
    """Encode ``trials`` simulated frames and compare length to entropy."""
    if n < 1 or trials < 1:
        raise ValueError("n and trials must be >= 1")
    p = spec.n_cols
    mi = spec.mi_matrix()
    weighted = np.full((p, p), np.nan)
    for i, j in combinations(range(p), 2):
        weighted[i, j] = weighted[j, i] = spec.pair_observe_rate(i, j) * mi[i, j]
    rate_forest = maximum_weight_forest(weighted)
    h_cond_bits = conditional_entropy(spec) / _LN2

    model = ForestModel(
        forest=spec.model.forest,
        root_marginals=spec.model.root_marginals,
        edge_conditionals=spec.model.edge_conditionals,
        missing_rates=1.0 - spec.observe_rates,
        seed=spec.model.seed,
    )
    lengths = []
    red_bits = []
    bound_bits = []
    for t in range(trials):
        table = sample_frame(model, n, seed=np.random.SeedSequence((seed, t) if seed is not None else t))
        frame = encode(table, prior=prior, edge_prior_q=edge_prior_q)
        length_bits = 8 * len(frame.header_bytes()) + 8 * len(frame.value_payload)
        lengths.append(length_bits)
        red_bits.append(length_bits / n - h_cond_bits)
        bound = 0.0
        for i in range(p):
            n_i = int(table.observed[:, i].sum())
            if n_i > 0:
                bound += (table.cardinalities[i] - 1) / (2.0 * n) * math.log(n_i)
        for i, j in rate_forest.sorted_edges():
            n_ij = int((table.observed[:, i] & table.observed[:, j]).sum())
            if n_ij > 0:
                bound += (
                    (table.cardinalities[i] - 1)
                    * (table.cardinalities[j] - 1)
                    / (2.0 * n)
                    * math.log(n_ij)
                )
        bound_bits.append(bound / _LN2)
    mean_bound = float(np.mean(bound_bits))
    mean_red = float(np.mean(red_bits))
    # recompute the signed variant once from expected counts
    signed_bound = 0.0
    for i in range(p):
        expected_ni = spec.observe_rates[i] * n
        if expected_ni > 0:
            signed_bound += (spec.model.cardinalities[i] - 1) / (2.0 * n) * math.log(expected_ni)
    for i, j in rate_forest.sorted_edges():
        expected_nij = spec.pair_observe_rate(i, j) * n
        if expected_nij > 0:
            signed_bound -= (
                (spec.model.cardinalities[i] - 1)
                * (spec.model.cardinalities[j] - 1)
                / (2.0 * n)
                * math.log(expected_nij)
            )
    violations = sum(1 for r, b in zip(red_bits, bound_bits) if r > b + margin_bits)
    return RedundancyReport(
        n=n,
        trials=trials,
        seed=seed,
        mean_length_bits=float(np.mean(lengths)),
        mean_bits_per_sample=float(np.mean(lengths)) / n,
        conditional_entropy_bits=h_cond_bits,
        redundancy_bits_per_sample=mean_red,
        bound_bits_per_sample=mean_bound,
        bound_signed_bits_per_sample=signed_bound / _LN2,
        margin_bits=margin_bits,
        trial_redundancy_bits=tuple(red_bits),
        trial_bound_bits=tuple(bound_bits),
        violations=violations,
    )
