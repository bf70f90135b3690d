"""Command-line experiment harness.

    mohaf compare   --config exp.json --seed 0,1,2 --out runs
    mohaf ablate    --config exp.json
    mohaf scale     --config exp.json
    mohaf price-sim --config exp.json
    mohaf gen       --requests 100 --resources 25 --seed 7 -o instance.json
    mohaf allocate  instance.json --mechanism mohaf -o allocation.csv
    mohaf validate  instance.json allocation.csv

Study commands write ``<out>/<command>/<run-name>/`` holding ``config.json``,
``results.csv`` and ``summary.json``; ``<run-name>`` defaults to a UTC timestamp.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, experiments
from .experiments import ExperimentConfig
from .ingest import GenerationConfig, build_instance, parse_columns, parse_job_events
from .mechanisms import MECHANISMS, MOHAF, get_mechanism
from .model import AllocationSet, Instance, validate
from .pricing import log_to_csv

log = logging.getLogger("mohaf")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _csv_text(rows: List[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\r\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def _json_text(obj) -> str:
    def clean(x):
        if isinstance(x, float) and not math.isfinite(x):
            return None
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [clean(v) for v in x]
        return x
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def _metadata() -> dict:
    return {"package_version": __version__, "rng": "numpy.random.PCG64 via default_rng(SeedSequence)",
            "numpy_version": np.__version__}


def _run_dir(args, command: str, cfg: ExperimentConfig) -> Path:
    name = args.run_name or datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    path = Path(cfg.output_dir) / command / name
    path.mkdir(parents=True, exist_ok=True)
    return path


class _Writer:
    """Single writer for one run directory."""

    def __init__(self, root: Path):
        self.root = root

    def text(self, name: str, content: str) -> None:
        (self.root / name).write_text(content, encoding="utf-8", newline="")


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    overrides = {}
    if args.seed is not None:
        overrides["seeds"] = [int(s) for s in args.seed.split(",") if s.strip()]
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.columns is not None:
        overrides["columns"] = args.columns
    for key in ("mechanisms",):
        value = getattr(args, key, None)
        if value:
            overrides[key] = value.split(",")
    for key in ("requests", "resources", "rounds", "window"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[{"requests": "n_requests", "resources": "n_resources"}.get(key, key)] = value
    if getattr(args, "trace", None):
        overrides["trace"] = args.trace
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def _events(cfg: ExperimentConfig):
    if not cfg.trace:
        return None
    cols = parse_columns(cfg.columns) if cfg.columns else None
    return parse_job_events(Path(cfg.trace), cols)


def _failures(rows: List[dict]) -> List[dict]:
    return [{"label": r["label"], "mechanism": r["mechanism"], "seed": r["seed"], "error": r["error"]}
            for r in rows if r["error"]]


def _finish(writer: _Writer, cfg: ExperimentConfig, summary: dict, failures: List[dict]) -> int:
    summary["failures"] = failures
    summary["metadata"] = _metadata()
    writer.text("summary.json", _json_text(summary))
    print(f"wrote {writer.root}")
    if failures:
        for f in failures:
            print(f"FAILED {f['label']} seed {f['seed']}: {f['error']}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


STUDY_COLUMNS = ["label", "mechanism", "seed", "efficiency", "revenue", "satisfaction",
                 "utilization", "fairness", "energy", "objective", "error"]


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    writer = _Writer(_run_dir(args, "compare", cfg))
    writer.text("config.json", _json_text(cfg.to_dict()))
    rows = experiments.compare(cfg, _events(cfg))
    writer.text("results.csv", _csv_text(rows, STUDY_COLUMNS))
    summary = {"summary": experiments.summarize(rows)}
    if MOHAF in cfg.mechanisms and len(cfg.seeds) >= 2:
        summary["mohaf_efficiency_pvalues"] = experiments.paired_comparisons(rows, MOHAF)
    writer.text("summary.csv", _summary_csv(summary["summary"]))
    return _finish(writer, cfg, summary, _failures(rows))


def cmd_ablate(args) -> int:
    cfg = _load_config(args)
    writer = _Writer(_run_dir(args, "ablate", cfg))
    writer.text("config.json", _json_text(cfg.to_dict()))
    rows = experiments.ablate(cfg, _events(cfg))
    writer.text("results.csv", _csv_text(rows, STUDY_COLUMNS))
    summary = {
        "summary": experiments.summarize(rows, ("efficiency", "satisfaction", "fairness")),
        "weights": {name: list(w.as_tuple()) for name, w in experiments.ABLATIONS.items()},
    }
    writer.text("summary.csv", _summary_csv(summary["summary"]))
    return _finish(writer, cfg, summary, _failures(rows))


def _summary_csv(summary: dict) -> str:
    rows = []
    for label, entry in summary.items():
        for metric, stat in entry.items():
            if metric == "n":
                continue
            rows.append({"label": label, "metric": metric, "n": entry["n"],
                         "mean": stat["mean"], "ci95": stat["ci95"]})
    return _csv_text(rows, ["label", "metric", "n", "mean", "ci95"])


def cmd_scale(args) -> int:
    cfg = _load_config(args)
    writer = _Writer(_run_dir(args, "scale", cfg))
    writer.text("config.json", _json_text(cfg.to_dict()))
    results, timings = experiments.scale(cfg, _events(cfg))
    writer.text("results.csv", _csv_text(
        results, ["n_requests", "n_resources", "seed", "n_bids", "n_clusters", "n_pairs", "objective"]))
    writer.text("timing.csv", _csv_text(timings, ["n_requests", "n_resources", "seed", "wall_time_s"]))
    return _finish(writer, cfg, {"growth": experiments.growth_factors(timings)}, [])


def cmd_price_sim(args) -> int:
    cfg = _load_config(args)
    writer = _Writer(_run_dir(args, "price-sim", cfg))
    writer.text("config.json", _json_text(cfg.to_dict()))
    events = _events(cfg)
    reports, failures, chunks = {}, [], []
    for seed in cfg.seeds:
        try:
            _, round_log, report = experiments.price_sim(cfg, seed, events)
        except Exception as exc:
            failures.append({"label": cfg.price_mechanism, "mechanism": cfg.price_mechanism,
                             "seed": seed, "error": f"{type(exc).__name__}: {exc}"})
            continue
        body = log_to_csv(round_log).splitlines(keepends=True)
        header, lines = body[0], body[1:]
        chunks.append((header, [f"{seed},{line}" for line in lines]))
        reports[str(seed)] = report.to_dict()
    header = "seed," + (chunks[0][0] if chunks else "round,resource_id,price,utilization,revenue\r\n")
    writer.text("results.csv", header + "".join(line for _, lines in chunks for line in lines))
    writer.text("convergence.json", _json_text(reports))
    return _finish(writer, cfg, {"convergence": reports}, failures)


def cmd_gen(args) -> int:
    events = None
    if args.trace:
        cols = parse_columns(args.columns) if args.columns else None
        events = parse_job_events(Path(args.trace), cols)
    inst = build_instance(GenerationConfig(args.requests, args.resources, args.seed_int), events)
    text = inst.to_json(indent=1)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def _read_allocation(path: Path, inst: Instance) -> AllocationSet:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return AllocationSet.from_dict(json.loads(text))
    return AllocationSet.from_csv(text, inst)


def cmd_allocate(args) -> int:
    inst = Instance.load(args.instance)
    alloc = get_mechanism(args.mechanism)(inst, seed=args.seed_int)
    out = alloc.to_csv() if not (args.output and args.output.endswith(".json")) else _json_text(alloc.to_dict())
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8", newline="")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = Instance.load(args.instance)
    alloc = _read_allocation(Path(args.allocation), inst)
    violations = validate(alloc, inst)
    for v in violations:
        print(f"{v.kind}\t{v.request_id or '-'}\t{v.resource_id or '-'}\t{v.detail}")
    print(f"{len(violations)} violation(s) in {len(alloc)} pair(s)")
    return EXIT_OK if not violations else EXIT_FAILED


def _global_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config JSON file")
    p.add_argument("--seed", help="comma-separated seed list (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--threads", type=int, help="worker processes for seed fan-out")
    p.add_argument("--columns", help="trace column map, e.g. timestamp=0,job_id=2,event_type=3")
    p.add_argument("--run-name", help="run directory name instead of a timestamp")
    p.add_argument("--trace", help="comma-separated job-event trace file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mohaf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("compare", cmd_compare, "all mechanisms on the same instances"),
        ("ablate", cmd_ablate, "MOHAF under the six ablation weight vectors"),
        ("scale", cmd_scale, "MOHAF wall time and bid count across the size ladder"),
        ("price-sim", cmd_price_sim, "multi-round dynamic pricing and convergence check"),
    ):
        p = sub.add_parser(name, help=helptext)
        _global_flags(p)
        p.add_argument("--requests", type=int)
        p.add_argument("--resources", type=int)
        p.add_argument("--mechanisms", help="comma-separated subset of " + ",".join(MECHANISMS))
        if name == "price-sim":
            p.add_argument("--rounds", type=int)
            p.add_argument("--window", type=int)
        p.set_defaults(func=fn)

    p = sub.add_parser("gen", help="generate an instance JSON")
    _global_flags(p)
    p.add_argument("--requests", type=int, default=1000)
    p.add_argument("--resources", type=int, default=250)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("allocate", help="run one mechanism on an instance JSON")
    _global_flags(p)
    p.add_argument("instance")
    p.add_argument("--mechanism", default=MOHAF, choices=sorted(MECHANISMS))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("validate", help="check an allocation (CSV or JSON) against an instance")
    _global_flags(p)
    p.add_argument("instance")
    p.add_argument("allocation")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.seed_int = int(args.seed.split(",")[0]) if args.seed else 0
        return args.func(args)
    except (ValueError, TypeError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"mohaf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
