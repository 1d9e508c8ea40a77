"""Command-line workflow: simulate, build, predict, evaluate, export-dot.

Exit codes: 0 on success, 1 for data problems (unreadable or invalid
input files, failed fits), 2 for configuration problems (bad flags or
config files; argparse uses 2 for usage errors as well). All commands are
deterministic given their inputs and seeds.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from collections import Counter
from pathlib import Path

from .builder import build_graph
from .dot import DotOptions, export_dot
from .errors import ConfigError, EventflowError, ParseError
from .evaluate import Metric, error_curve
from .events import MINUTES_PER_DAY
from .graph import load_model, save_model
from .ingest import CsvSchema, ingest_csv, parse_time_of_day, read_config_file, write_panel_csv
from .predict import NodeStatus, predict_as_of
from .simulate import load_sim_spec, simulate_panel


def _parse_cutoff(text: str) -> int:
    """Accept minutes-from-midnight or HH:MM; 24:00 means end of day."""
    t = text.strip()
    if t == "24:00":
        return MINUTES_PER_DAY
    if ":" in t:
        try:
            return parse_time_of_day(t, 0, "cutoff")
        except ParseError as exc:
            raise ConfigError(str(exc)) from None
    try:
        v = int(t)
    except ValueError:
        raise ConfigError(f"cutoff {text!r} is neither minutes nor HH:MM") from None
    if not 0 <= v <= MINUTES_PER_DAY:
        raise ConfigError(f"cutoff {v} outside [0, {MINUTES_PER_DAY}]")
    return v


def _parse_cutoffs(text: str) -> list[int]:
    if text.strip() == "hourly":
        return list(range(0, MINUTES_PER_DAY + 1, 60))
    cuts = [_parse_cutoff(tok) for tok in text.split(",") if tok.strip()]
    if not cuts:
        raise ConfigError("no cutoffs given")
    return cuts


def _model_schema(graph) -> CsvSchema:
    """Ingest schema for data meant to join an existing model: bucket rows
    with the model's own bucket width."""
    widths = Counter(k.bucket_width for k in graph.nodes)
    width = widths.most_common(1)[0][0]
    agg = "sum" if graph.family.is_log_link else "mean"
    return CsvSchema(bucket_width=width, aggregation=agg)


def _cmd_build(args) -> int:
    config, schema = read_config_file(args.config)
    panel, report = ingest_csv(args.data, schema)
    graph = build_graph(panel, config)
    save_model(graph, args.out)
    print(
        f"built {len(graph.nodes)} nodes, {graph.n_edges()} edges "
        f"from {report.rows_read} rows -> {args.out}"
    )
    return 0


def _cmd_predict(args) -> int:
    cutoff = _parse_cutoff(args.as_of)
    graph = load_model(args.model)
    panel, _ = ingest_csv(args.day, _model_schema(graph))
    if panel.n_days != 1:
        raise EventflowError(f"expected a single day of data, found {panel.n_days} days")
    day_values = {
        key: float(panel.matrix[0, i])
        for i, key in enumerate(panel.catalog)
        if key in graph.nodes
    }
    state = predict_as_of(graph, day_values, cutoff)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["entity", "time", "status", "value"])
        for key, status, value in state.items():
            w.writerow([key.entity, key.hhmm, status.value, repr(float(value))])
    n_obs = sum(1 for _, s, _ in state.items() if s is NodeStatus.OBSERVED)
    print(f"as of {args.as_of}: {n_obs} observed, {len(graph.nodes) - n_obs} predicted -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    graph = load_model(args.model)
    panel, _ = ingest_csv(args.test, _model_schema(graph))
    metric = Metric(args.metric)  # argparse choices guarantee validity
    baseline = {key: node.train_mean for key, node in graph.nodes.items()}
    curve = error_curve(graph, panel, baseline, _parse_cutoffs(args.cutoffs), metric)
    curve.to_csv(args.out)
    scored = [
        (m, b)
        for m, b in zip(curve.model_error, curve.baseline_error)
        if m is not None and b is not None
    ]
    if scored:
        mean_m = math.fsum(m for m, _ in scored) / len(scored)
        mean_b = math.fsum(b for _, b in scored) / len(scored)
        print(
            f"{metric.value} over {len(scored)} cutoffs: "
            f"model {mean_m:.4f} vs baseline {mean_b:.4f} -> {args.out}"
        )
    else:
        print(f"no scorable cutoffs -> {args.out}")
    return 0


def _cmd_export_dot(args) -> int:
    graph = load_model(args.model)
    text = export_dot(graph, DotOptions(min_abs_weight=args.min_weight))
    Path(args.out).write_text(text, encoding="utf-8")
    n_edges = sum(1 for line in text.splitlines() if " -> " in line)
    print(f"{len(graph.nodes)} nodes, {n_edges} edges (|coeff| >= {args.min_weight}) -> {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    spec = load_sim_spec(args.spec)
    panel = simulate_panel(spec, args.days, args.seed)
    width = panel.catalog[0].bucket_width if panel.catalog else 60
    write_panel_csv(panel, args.out, CsvSchema(bucket_width=width))
    print(
        f"simulated {panel.n_days} days x {panel.n_events} events "
        f"(seed {args.seed}) -> {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventflow",
        description="Learn a sparse dependency graph over recurring daily "
        "events and forecast the rest of the day from partial observations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="fit a dependency graph from panel data")
    p.add_argument("--data", required=True, help="long-format CSV of training days")
    p.add_argument("--config", required=True, help="flat key=value build configuration")
    p.add_argument("--out", required=True, help="model JSON destination")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("predict", help="forecast one day from values before a cutoff")
    p.add_argument("--model", required=True)
    p.add_argument("--day", required=True, help="long-format CSV holding a single day")
    p.add_argument("--as-of", required=True, dest="as_of", help="cutoff HH:MM (24:00 = end)")
    p.add_argument("--out", required=True, help="prediction CSV destination")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="error-vs-cutoff curve against the stored means")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, help="long-format CSV of held-out days")
    p.add_argument("--cutoffs", default="hourly", help='"hourly" or comma-separated times')
    p.add_argument(
        "--metric",
        default="mae",
        choices=[m.value for m in Metric],
    )
    p.add_argument("--out", required=True, help="curve CSV destination")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("export-dot", help="render the graph as Graphviz DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--min-weight", type=float, default=0.0, dest="min_weight")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_dot)

    p = sub.add_parser("simulate", help="generate synthetic data from a ground-truth DAG")
    p.add_argument("--spec", required=True, help="simulation spec JSON")
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="long-format CSV destination")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EventflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
