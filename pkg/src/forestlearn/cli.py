"""Command-line interface: learn / mi-matrix / score / encode / decode / simulate.

Every subcommand is a pure function of its input files and flags; each
JSON report echoes the resolved configuration and the library version,
so a rerun from the report header reproduces the outputs byte for byte.

Exit codes: 0 success, 2 I/O failure, 3 parse failure, 4 corrupt
container, 5 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

import forestlearn
from forestlearn.dataframe import CategoricalTable, ParseError, parse_table
from forestlearn.forest_learn import Forest, kruskal_positive, log_forest_score
from forestlearn.mi_estimators import EstimatorKind, weight_matrix
from forestlearn.simulator import ForestModel, masked_hub_model, run_trials
from forestlearn.universal_code import (
    CodedFrame,
    CorruptStreamError,
    coded_value_bits_closed_form,
    decode,
    description_length,
    encode,
)

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_CORRUPT = 4
EXIT_CONFIG = 5

_LN2 = math.log(2.0)


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve 2 for I/O
        raise ConfigError(message)


def _parse_rational(text: str) -> Fraction:
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            value = Fraction(int(num), int(den))
        else:
            value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational {text!r}") from exc
    if value <= 0:
        raise ConfigError("rational flag must be positive")
    return value


def _default_threads() -> int:
    env = os.environ.get("FORESTLEARN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("FORESTLEARN_THREADS must be an integer")
    return os.cpu_count() or 1


def _add_common(sub: argparse.ArgumentParser, estimator=False):
    sub.add_argument("--input", required=False, help="input file path")
    sub.add_argument("--output", required=False, help="output path or prefix")
    sub.add_argument("--na", default="*", help="missing-cell token (default '*')")
    sub.add_argument(
        "--accept-na",
        action="store_true",
        help="additionally treat the literal 'NA' as missing",
    )
    sub.add_argument("--delimiter", default=",", help="field delimiter (default ',')")
    sub.add_argument("--schema", help="JSON sidecar with cardinalities/category maps")
    sub.add_argument("--prior", default="1/2", help="per-symbol prior pseudo-count (rational)")
    sub.add_argument("--edge-prior-q", default="1/2", help="prior independence probability")
    sub.add_argument("--seed", type=int, default=None, help="RNG seed")
    sub.add_argument("--threads", type=int, default=None, help="worker threads")
    sub.add_argument("--log-base", choices=["bits", "nats"], default=None)
    if estimator:
        sub.add_argument(
            "--estimator",
            default="j",
            help="one of empirical|penalized|j|k (j=posterior, k=consistent)",
        )


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_table(args) -> CategoricalTable:
    if not args.input:
        raise ConfigError("--input is required")
    text = _read_text(args.input)
    schema = None
    if args.schema:
        schema = json.loads(_read_text(args.schema))
    return parse_table(
        text,
        na_token=args.na,
        delimiter=args.delimiter,
        accept_na_literal=args.accept_na,
        schema=schema,
    )


def _config_dict(args, command: str) -> dict:
    keys = (
        "input output na accept_na delimiter schema prior edge_prior_q seed threads log_base"
    ).split()
    out = {"command": command}
    for key in keys:
        out[key] = getattr(args, key, None)
    if hasattr(args, "estimator"):
        out["estimator"] = args.estimator
    return out


def _report(args, command: str, body: dict) -> dict:
    return {
        "version": forestlearn.__version__,
        "config": _config_dict(args, command),
        **body,
    }


def _emit_json(report: dict, path: str | None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _table_summary(table: CategoricalTable) -> dict:
    return {
        "n_rows": table.n_rows,
        "n_cols": table.n_cols,
        "column_names": list(table.column_names),
        "cardinalities": list(table.cardinalities),
        "cardinality_source": ["declared" if d else "inferred" for d in table.declared],
        "category_maps": {
            name: list(cats)
            for name, cats in zip(table.column_names, table.category_maps)
            if cats is not None
        },
    }


def _weight_display(value_nats: float, log_base: str | None) -> tuple[float, str]:
    # weights default to nats; lengths default to bits
    if log_base == "bits":
        return value_nats / _LN2, "bits"
    return value_nats, "nats"


def _edge_records(weights, forest: Forest, log_base):
    records = []
    for i, j in forest.sorted_edges():
        value, unit = _weight_display(float(weights.matrix[i, j]), log_base)
        records.append(
            {
                "i": i + 1,
                "j": j + 1,
                "names": [weights.column_names[i], weights.column_names[j]],
                "weight": value,
                "unit": unit,
                "n_pair": int(weights.n_pair_matrix[i, j]),
            }
        )
    return records


def _edges_tsv(records) -> str:
    lines = ["i\tj\tweight\tn_pair"]
    for r in records:
        lines.append(f"{r['names'][0]}\t{r['names'][1]}\t{r['weight']!r}\t{r['n_pair']}")
    return "\n".join(lines) + "\n"


def _dot(table_names, forest: Forest, weights=None) -> str:
    lines = ["graph forest {"]
    for name in table_names:
        lines.append(f'  "{name}";')
    for i, j in forest.sorted_edges():
        label = ""
        if weights is not None:
            label = f' [label="{weights.matrix[i, j]:.4g}"]'
        lines.append(f'  "{table_names[i]}" -- "{table_names[j]}"{label};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _resolve_estimator(args) -> EstimatorKind:
    try:
        return EstimatorKind.from_token(args.estimator)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _length_unit(nats: float, log_base: str | None) -> tuple[float, str]:
    if log_base == "nats":
        return nats, "nats"
    return nats / _LN2, "bits"


def cmd_learn(args) -> int:
    table = _load_table(args)
    kind = _resolve_estimator(args)
    prior = _parse_rational(args.prior)
    q = _parse_rational(args.edge_prior_q)
    if not Fraction(0) < q < Fraction(1):
        raise ConfigError("--edge-prior-q must be in (0, 1)")
    threads = args.threads or _default_threads()
    if table.n_cols >= 2:
        weights = weight_matrix(table, kind, float(prior), float(q), threads=threads)
        forest = kruskal_positive(weights)
        edges = _edge_records(weights, forest, args.log_base)
    else:
        forest = Forest(n_vertices=table.n_cols, edges=frozenset())
        weights = None
        edges = []
    score = log_forest_score(table, forest, float(prior), float(q))
    length = description_length(table, forest, float(prior), float(q))
    exact, unit = _length_unit(length.exact_nats, args.log_base)
    asym, _ = _length_unit(length.asymptotic_nats, args.log_base)
    body = {
        "input": args.input,
        "table": _table_summary(table),
        "estimator": kind.value,
        "edges": edges,
        "log_score_nats": score,
        "description_length": {
            "exact": exact,
            "asymptotic": asym,
            "unit": unit,
            "structure_nats": length.structure_nats,
        },
    }
    report = _report(args, "learn", body)
    if args.output:
        _emit_json(report, args.output + ".json")
        _write_text(args.output + ".tsv", _edges_tsv(edges))
        _write_text(args.output + ".dot", _dot(table.column_names, forest, weights))
    else:
        _emit_json(report, None)
    return EXIT_OK


def cmd_mi_matrix(args) -> int:
    table = _load_table(args)
    kind = _resolve_estimator(args)
    prior = _parse_rational(args.prior)
    q = _parse_rational(args.edge_prior_q)
    threads = args.threads or _default_threads()
    weights = weight_matrix(table, kind, float(prior), float(q), threads=threads)
    body = {"input": args.input, "table": _table_summary(table), "matrix": weights.to_json_dict()}
    report = _report(args, "mi-matrix", body)
    if args.output:
        _emit_json(report, args.output + ".json")
        _write_text(args.output + ".tsv", weights.to_tsv())
    else:
        _emit_json(report, None)
    return EXIT_OK


def _forest_from_spec(table: CategoricalTable, spec: dict) -> Forest:
    """Edges as [i, j] pairs (names or 1-based indices) or as the edge
    records a learn report carries ({"i": .., "j": ..})."""
    names = {name: idx for idx, name in enumerate(table.column_names)}
    edges = set()
    for edge in spec.get("edges", []):
        try:
            if isinstance(edge, dict):
                a, b = edge["i"], edge["j"]
            else:
                a, b = edge
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad forest edge entry {edge!r}") from exc
        if isinstance(a, str):
            try:
                i, j = names[a], names[b]
            except KeyError as exc:
                raise ConfigError(f"unknown column in forest spec: {exc}") from exc
        else:
            i, j = int(a) - 1, int(b) - 1
        if not (0 <= i < table.n_cols and 0 <= j < table.n_cols):
            raise ConfigError("forest edge out of range")
        edges.add((min(i, j), max(i, j)))
    try:
        return Forest(n_vertices=table.n_cols, edges=frozenset(edges))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_score(args) -> int:
    table = _load_table(args)
    if not args.forest:
        raise ConfigError("--forest is required")
    spec = json.loads(_read_text(args.forest))
    forest = _forest_from_spec(table, spec)
    prior = _parse_rational(args.prior)
    q = _parse_rational(args.edge_prior_q)
    score = log_forest_score(table, forest, float(prior), float(q))
    length = description_length(table, forest, float(prior), float(q))
    exact, unit = _length_unit(length.exact_nats, args.log_base)
    asym, _ = _length_unit(length.asymptotic_nats, args.log_base)
    body = {
        "input": args.input,
        "table": _table_summary(table),
        "edges": [[i + 1, j + 1] for i, j in forest.sorted_edges()],
        "log_score_nats": score,
        "description_length": {
            "exact": exact,
            "asymptotic": asym,
            "unit": unit,
            "structure_nats": length.structure_nats,
        },
    }
    _emit_json(_report(args, "score", body), args.output + ".json" if args.output else None)
    return EXIT_OK


def cmd_encode(args) -> int:
    table = _load_table(args)
    if not args.output:
        raise ConfigError("--output is required for encode")
    prior = _parse_rational(args.prior)
    q = _parse_rational(args.edge_prior_q)
    forest = None
    if args.forest:
        forest = _forest_from_spec(table, json.loads(_read_text(args.forest)))
    frame = encode(table, forest=forest, prior=prior, edge_prior_q=q)
    blob = frame.to_bytes()
    with open(args.output, "wb") as fh:
        fh.write(blob)
    used_forest = frame.forest
    length = description_length(table, used_forest, float(prior), float(q))
    closed_bits = coded_value_bits_closed_form(table, used_forest, prior)
    n = max(table.n_rows, 1)
    body = {
        "input": args.input,
        "table": _table_summary(table),
        "edges": [[i + 1, j + 1] for i, j in used_forest.sorted_edges()],
        "container_bytes": len(blob),
        "header_bytes": len(frame.header_bytes()),
        "mask_payload_bytes": len(frame.mask_payload),
        "value_payload_bytes": len(frame.value_payload),
        "mask_ideal_bits": frame.mask_ideal_bits,
        "value_ideal_bits": frame.value_ideal_bits,
        "bits_per_sample": 8 * len(blob) / n,
        "description_length_exact_bits": length.exact_bits,
        "description_length_asymptotic_bits": length.asymptotic_bits,
        "value_closed_form_bits": closed_bits,
    }
    _emit_json(_report(args, "encode", body), args.output + ".meta.json")
    return EXIT_OK


def cmd_decode(args) -> int:
    if not args.input:
        raise ConfigError("--input is required")
    with open(args.input, "rb") as fh:
        blob = fh.read()
    frame = CodedFrame.from_bytes(blob)
    table = decode(frame)
    text = table.to_csv(na_token=args.na, delimiter=args.delimiter)
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _model_from_json(spec: dict, seed) -> ForestModel:
    if spec.get("builtin") == "masked_hub":
        return masked_hub_model(
            float(spec["flip_prob"]), float(spec["hub_missing_rate"]), seed=seed
        )
    try:
        p = int(spec["p"])
        edges = frozenset((int(a) - 1, int(b) - 1) for a, b in spec.get("edges", []))
        forest = Forest(n_vertices=p, edges=edges)
        marginals = {int(k) - 1: np.asarray(v, float) for k, v in spec["root_marginals"].items()}
        conditionals = {}
        for key, matrix in spec.get("edge_conditionals", {}).items():
            a, b = key.split("-")
            conditionals[(int(a) - 1, int(b) - 1)] = np.asarray(matrix, float)
        rates = np.asarray(spec.get("missing_rates", [0.0] * p), float)
        return ForestModel(
            forest=forest,
            root_marginals=marginals,
            edge_conditionals=conditionals,
            missing_rates=rates,
            seed=seed,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad model spec: {exc}") from exc


def cmd_simulate(args) -> int:
    if not args.input:
        raise ConfigError("--input (model JSON) is required")
    spec = json.loads(_read_text(args.input))
    model = _model_from_json(spec, args.seed)
    estimators = []
    for token in (args.estimators or "j,k").split(","):
        estimators.append(EstimatorKind.from_token(token))
    threads = args.threads or _default_threads()
    prior = _parse_rational(args.prior)
    q = _parse_rational(args.edge_prior_q)
    report_data = run_trials(
        model,
        n=args.n,
        trials=args.trials,
        estimators=estimators,
        seed=args.seed,
        prior_weight=float(prior),
        edge_prior_q=float(q),
        threads=threads,
    )
    body = {"input": args.input, "trial_report": report_data.to_json_dict()}
    report = _report(args, "simulate", body)
    if args.output:
        _emit_json(report, args.output + ".json")
        lines = ["estimator\tedges\tcount\tfrequency"]
        for kind, counts in report_data.forest_counts.items():
            for edges, count in sorted(counts.items()):
                tag = ";".join(f"{i + 1}-{j + 1}" for i, j in edges) or "(empty)"
                lines.append(f"{kind.value}\t{tag}\t{count}\t{count / args.trials!r}")
        _write_text(args.output + ".tsv", "\n".join(lines) + "\n")
    else:
        _emit_json(report, None)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="forestlearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    learn = sub.add_parser("learn", help="learn a forest and report its edges and score")
    _add_common(learn, estimator=True)
    learn.set_defaults(func=cmd_learn)

    mim = sub.add_parser("mi-matrix", help="pairwise weight matrix")
    _add_common(mim, estimator=True)
    mim.set_defaults(func=cmd_mi_matrix)

    score = sub.add_parser("score", help="score a given forest against a table")
    _add_common(score)
    score.add_argument("--forest", help="JSON file with an 'edges' list")
    score.set_defaults(func=cmd_score)

    enc = sub.add_parser("encode", help="losslessly encode a table")
    _add_common(enc)
    enc.add_argument("--forest", help="optional JSON file with an 'edges' list")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a container back to CSV")
    _add_common(dec)
    dec.set_defaults(func=cmd_decode)

    sim = sub.add_parser("simulate", help="repeated learning trials on a planted model")
    _add_common(sim)
    sim.add_argument("--n", type=int, required=True, help="rows per trial")
    sim.add_argument("--trials", type=int, required=True)
    sim.add_argument("--estimators", help="comma list from empirical|penalized|j|k")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CorruptStreamError as exc:
        print(f"corrupt container: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
