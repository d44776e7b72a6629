"""Command line entry point: ``sweep``, ``metrics`` and ``plot`` subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .distributions import FAMILIES
from .estimators import DEFAULT_K_KNN, DEFAULT_K_NNR, DEFAULT_RATIO_FLOOR
from .exceptions import InputError
from .harness import (
    ExperimentSpec,
    compute_metrics,
    ingest_dataset,
    read_csv,
    run_sweep,
    write_csv,
)
from .metrics import METRIC_IDS
from .plotting import render_plot
from .statespace import StateSpace


def _metric_list(text: str) -> list[str]:
    metrics = [m.strip() for m in text.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in METRIC_IDS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown metrics {unknown}; choose from {METRIC_IDS}")
    return metrics


def _float_list(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exploration-metrics", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a scale sweep over a synthetic family")
    sw.add_argument("--spec", type=Path, help="experiment spec JSON; flags below override it")
    sw.add_argument("--family", choices=FAMILIES)
    sw.add_argument("--scales", type=_float_list, help="comma-separated scale grid")
    sw.add_argument("--dim", type=int)
    sw.add_argument("--n", type=int)
    sw.add_argument("--reps", type=int)
    sw.add_argument("--metrics", type=_metric_list)
    sw.add_argument("--k", type=int, help="kNN neighbor count")
    sw.add_argument("--k-nnr", type=int, help="NNR neighborhood size")
    sw.add_argument("--seed", type=int, help="base seed; repetition r uses seed + r")
    sw.add_argument("--space", type=Path, help='state-space JSON {"lower": [...], "upper": [...]}')
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", type=Path, required=True, help="CSV output path")
    sw.add_argument("--plot", type=Path, help="also render an SVG here")

    me = sub.add_parser("metrics", help="compute metrics on an ingested dataset")
    me.add_argument("--input", type=Path, required=True)
    me.add_argument("--space", type=Path, required=True)
    me.add_argument("--format", choices=("csv", "jsonl_transitions", "jsonl"), default="csv")
    me.add_argument("--metrics", type=_metric_list, default=list(METRIC_IDS))
    me.add_argument("--k", type=int, default=DEFAULT_K_KNN)
    me.add_argument("--k-nnr", type=int, default=DEFAULT_K_NNR)
    me.add_argument("--ratio-floor", type=float, default=DEFAULT_RATIO_FLOOR)
    me.add_argument("--seed", type=int, default=0)
    me.add_argument("--clip-policy", choices=("reject", "clip"), default="reject")
    me.add_argument("--out", type=Path, help="write JSON results here instead of stdout")

    pl = sub.add_parser("plot", help="render a sweep CSV as SVG")
    pl.add_argument("--input", type=Path, required=True)
    pl.add_argument("--out", type=Path, required=True,
                    help="SVG path; with several families, one file per family is written")
    return parser


def _sweep(args) -> None:
    base = ExperimentSpec.from_json(args.spec).to_dict() if args.spec else {}
    overrides = {
        "family": args.family, "scale_grid": args.scales, "dim": args.dim, "n": args.n,
        "reps": args.reps, "metrics": args.metrics, "k_knn": args.k, "k_nnr": args.k_nnr,
        "base_seed": args.seed,
        "space": StateSpace.from_json(args.space).to_dict() if args.space else None,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    if "family" not in base:
        raise InputError("sweep needs --family or a --spec naming one")
    if base.get("space") and "dim" not in base:
        base["dim"] = len(base["space"]["lower"])
    spec = ExperimentSpec.from_dict(base)
    result = run_sweep(spec, workers=args.workers)
    write_csv(result, args.out)
    if args.plot:
        render_plot(result, args.plot)


def _metrics(args) -> None:
    space = StateSpace.from_json(args.space)
    ingested = ingest_dataset(args.input, args.format, space, args.clip_policy)
    if len(ingested.points) == 0:
        raise InputError(f"{args.input}: no states left after ingestion")
    results = compute_metrics(
        ingested.points, space, args.metrics, seed=args.seed,
        k_knn=args.k, k_nnr=args.k_nnr, ratio_floor=args.ratio_floor,
    )
    payload = {
        "n_read": ingested.n_read,
        "n_rejected": ingested.n_rejected,
        "n_clipped": ingested.n_clipped,
        "metrics": [
            {"metric": r.metric_id, "value": None if r.value != r.value else r.value,
             "params": r.params, "dataset_size": r.dataset_size}
            for r in results
        ],
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        args.out.write_text(text + "\n")
    else:
        print(text)


def _plot(args) -> None:
    results = read_csv(args.input)
    if not results:
        raise InputError(f"{args.input}: no sweep rows to plot")
    if len(results) == 1:
        render_plot(results[0], args.out)
        return
    for result in results:
        render_plot(result, args.out.with_name(f"{args.out.stem}_{result.family}{args.out.suffix}"))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"sweep": _sweep, "metrics": _metrics, "plot": _plot}[args.command]
    try:
        handler(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
