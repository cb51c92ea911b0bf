"""Command line front end.

Every subcommand prints a JSON document on stdout (``plot-data`` prints
whitespace-separated columns instead). Exit status is 0 on success, 2 when
an input fails validation, and 3 for failures while running.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from ..catalog import Catalog, CatalogError, DigestMismatch
from ..ransim import read_kpm_csv
from ..ric import TIMER_SETS, XappDescriptor, check_disjoint, onboard_xapp
from ..ric.descriptor import OnboardError
from .analysis import SUMMARY_KPIS, analyze
from .datasets import generate_dataset, segments_path, write_dataset
from .experiment import run_experiment
from .scenario import ScenarioConfig
from .sweep import SweepSpec, sweep
from .training import AGENTS, train

ENV_CATALOG = "ORANLAB_CATALOG"
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("oranlab")


class UsageError(ValueError):
    pass


def _catalog(args) -> Catalog:
    return Catalog(args.catalog or os.environ.get(ENV_CATALOG) or "catalog")


def _emit(obj: Any) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _scenario(path: str | None) -> ScenarioConfig:
    return ScenarioConfig.load(path) if path else ScenarioConfig()


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _pairs(items: Sequence[str] | None) -> dict[str, Any]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"expected KEY=VALUE, got {item!r}")
        out[key] = _parse_value(value)
    return out


# ------------------------------------------------------------------ commands
def cmd_generate(args) -> int:
    sc = _scenario(args.scenario)
    if args.seed is not None:
        sc = sc.with_(seed=args.seed)
    samples, segments = generate_dataset(sc, args.segment_windows, args.grid)
    manifest = write_dataset(args.out, samples, segments)
    _emit({"csv": str(args.out), "segments": str(manifest), "rows": len(samples),
           "segment_count": len(segments), "scenario_digest": sc.digest()})
    return EXIT_OK


def cmd_ingest(args) -> int:
    meta = _pairs(args.meta)
    seg_file = Path(args.segments) if args.segments else segments_path(args.csv)
    if seg_file.exists():
        meta["segments"] = json.loads(seg_file.read_text())
    elif args.segments:
        raise UsageError(f"segment manifest {seg_file} does not exist")
    rec = _catalog(args).ingest_dataset(args.csv, args.id, meta)
    _emit({"id": rec.id, "row_count": rec.row_count, "digest": rec.digest,
           "bounds": {k: list(v) for k, v in rec.bounds.items()}, "segments": len(meta.get("segments", []))})
    return EXIT_OK


def cmd_train(args) -> int:
    cat = _catalog(args)
    live = ScenarioConfig.load(args.live_scenario) if args.live_scenario else None
    res = train(cat, args.intent, args.dataset, args.agent, args.steps, _pairs(args.set), seed=args.seed,
                domain=args.domain, timer_set=args.timer_set, model_id=args.model_id,
                intent_id=args.intent_id, encoder_epochs=args.encoder_epochs, live_scenario=live)
    if args.metrics:
        Path(args.metrics).write_text(res.metrics_csv())
    _emit({"model_id": res.model_id, "intent_id": res.intent_id, "encoder_id": res.encoder_id,
           "domain": res.model.metadata["domain"], "metrics": args.metrics,
           "final_mean_reward": res.metrics[-1]["mean_reward"] if res.metrics else None})
    return EXIT_OK


def cmd_onboard(args) -> int:
    desc, report = onboard_xapp(_catalog(args), args.id, args.model, args.intent, args.domain,
                                TIMER_SETS[args.timer_set], args.report_ms)
    _emit(report)
    return EXIT_OK


def _descriptors(cat: Catalog, ids: Sequence[str]) -> list[XappDescriptor]:
    return [XappDescriptor.from_bytes(cat.get("xapp", i)) for i in ids]


def cmd_dispatch(args) -> int:
    """Check that xApps can be co-dispatched and show the subscription plan."""
    descs = _descriptors(_catalog(args), args.xapps)
    check_disjoint(descs)
    subs: dict[str, list[str]] = {}
    for d in descs:
        t = d.effective_timers
        subs.setdefault(f"{t.du_report}/{t.kpm_log}", []).append(d.xapp_id)
    _emit({"xapps": [d.to_obj() for d in descs],
           "subscriptions": [{"du_report_ms/kpm_log_ms": k, "xapps": v} for k, v in sorted(subs.items())]})
    return EXIT_OK


def cmd_run(args) -> int:
    cat = _catalog(args)
    sc = _scenario(args.scenario)
    if args.duration is not None:
        sc = sc.with_(duration_s=args.duration)
    result = run_experiment(sc, _descriptors(cat, args.xapp or []), args.out, catalog=cat, workers=args.workers)
    medians = {s: {k: v[k]["median"] for k in SUMMARY_KPIS} for s, v in result.summary["slices"].items()}
    _emit({"out": str(result.out_dir), "digest": result.digest, "medians": medians})
    return EXIT_OK


def cmd_analyze(args) -> int:
    res = analyze(args.csv, args.kpi, args.slice)
    if not args.cdf:
        res = {k: v for k, v in res.items() if k != "cdf"}
    _emit(res)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_obj(json.loads(Path(args.spec).read_text()))
    rows = sweep(spec, args.catalog or os.environ.get(ENV_CATALOG) or "catalog", args.out, args.workers)
    failed = [r["cell"] for r in rows if r["status"] != "ok"]
    _emit({"cells": len(rows), "failed": failed, "table": str(Path(args.out) / "sweep.csv")})
    return EXIT_OK


def cmd_plot_data(args) -> int:
    out = sys.stdout
    if args.metrics:
        lines = Path(args.metrics).read_text().splitlines()
        out.write("# " + lines[0].replace(",", " ") + "\n")
        for line in lines[1:]:
            out.write(line.replace(",", " ") + "\n")
        return EXIT_OK
    if not (args.csv and args.kpi and args.slice):
        raise UsageError("plot-data needs CSV --kpi --slice, or --metrics FILE")
    res = analyze(read_kpm_csv(args.csv), args.kpi, args.slice)
    out.write(f"# {args.kpi} cdf ({args.slice}, n={res['n']})\n")
    for x, p in zip(res["cdf"]["x"], res["cdf"]["p"]):
        out.write(f"{x!r} {p!r}\n")
    return EXIT_OK


def cmd_ls(args) -> int:
    _emit([{"id": e.id, "kind": e.kind, "digest": e.digest, "created": e.created}
           for e in _catalog(args).list(args.kind)])
    return EXIT_OK


# -------------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oranlab", description="Open RAN slicing-control lab")
    p.add_argument("--catalog", help=f"catalog root (default ${ENV_CATALOG} or ./catalog)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a synthetic KPM dataset")
    g.add_argument("--scenario")
    g.add_argument("--out", required=True)
    g.add_argument("--segment-windows", type=int, default=12)
    g.add_argument("--grid", choices=("basic", "full"), default="basic")
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("ingest", help="validate a KPM CSV and store it as a dataset")
    i.add_argument("csv")
    i.add_argument("--id", required=True)
    i.add_argument("--segments", help="segment manifest (default: <csv>.segments.json if present)")
    i.add_argument("--meta", nargs="*", metavar="KEY=VALUE")
    i.set_defaults(func=cmd_ingest)

    t = sub.add_parser("train", help="train an agent on a stored dataset")
    t.add_argument("--intent", required=True, help="intent JSON file")
    t.add_argument("--dataset", required=True)
    t.add_argument("--agent", choices=AGENTS, default="ppo")
    t.add_argument("--steps", type=int, default=1000)
    t.add_argument("--set", nargs="*", metavar="KEY=VALUE", help="hyperparameter overrides")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--domain", help="control domain (default: from the intent's actions)")
    t.add_argument("--timer-set", type=int, choices=sorted(TIMER_SETS), default=1)
    t.add_argument("--model-id")
    t.add_argument("--intent-id")
    t.add_argument("--encoder-epochs", type=int, default=20)
    t.add_argument("--metrics", help="write the training-curve CSV here")
    t.add_argument("--live-scenario", help="train against the simulator instead of the dataset")
    t.set_defaults(func=cmd_train)

    o = sub.add_parser("onboard", help="turn a stored model into an xApp descriptor")
    o.add_argument("--id", required=True)
    o.add_argument("--model", required=True)
    o.add_argument("--intent", required=True)
    o.add_argument("--domain", required=True)
    o.add_argument("--timer-set", type=int, choices=sorted(TIMER_SETS), default=1)
    o.add_argument("--report-ms", type=int)
    o.set_defaults(func=cmd_onboard)

    d = sub.add_parser("dispatch", help="check a set of xApps and show their subscriptions")
    d.add_argument("xapps", nargs="+")
    d.set_defaults(func=cmd_dispatch)

    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("--scenario")
    r.add_argument("--xapp", action="append", help="xApp id (repeatable); none runs the static baseline")
    r.add_argument("--out", required=True)
    r.add_argument("--duration", type=float, help="override the scenario duration in seconds")
    r.add_argument("--workers", type=int, default=0)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="median and CDF of one KPI")
    a.add_argument("csv")
    a.add_argument("--kpi", choices=SUMMARY_KPIS, required=True)
    a.add_argument("--slice", required=True)
    a.add_argument("--cdf", action="store_true", help="include the CDF points")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="train and run a grid of xApps")
    s.add_argument("spec")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=0)
    s.set_defaults(func=cmd_sweep)

    pd = sub.add_parser("plot-data", help="gnuplot-ready columns")
    pd.add_argument("csv", nargs="?")
    pd.add_argument("--kpi", choices=SUMMARY_KPIS)
    pd.add_argument("--slice")
    pd.add_argument("--metrics", help="training-curve CSV to reformat")
    pd.set_defaults(func=cmd_plot_data)

    ls = sub.add_parser("ls", help="list catalog entries")
    ls.add_argument("--kind", choices=("dataset", "model", "intent", "xapp"))
    ls.set_defaults(func=cmd_ls)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DigestMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, CatalogError, OnboardError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
