"""Command-line entry point: ``mmfusion {compare,sweep-samples,sweep-bs,validate-config}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig, parse_config, serialize_config, validate
from .errors import ConfigError
from .harness import (
    run_experiment,
    subset_label,
    summarize,
    sweep_bs_count,
    sweep_sampling,
    sampling_label,
    with_trials,
)

log = logging.getLogger("mmfusion")

SCHEMA_VERSION = 1
CSV_COLUMNS = ("trial_id", "method", "true_x", "true_y", "est_x", "est_y", "error_m", "solver_iters", "converged")


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def _round(x: float) -> float:
    return float(fmt(x))


def write_trials_csv(path: Path, records, methods) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rec in records:
            for m in methods:
                est = rec.estimates[m]
                w.writerow([
                    rec.trial_id, m,
                    fmt(rec.true_position.x), fmt(rec.true_position.y),
                    fmt(est.position.x), fmt(est.position.y),
                    fmt(rec.errors[m]), rec.solver_iters[m],
                    "true" if rec.converged[m] else "false",
                ])


def _summary_entry(summary) -> dict:
    out = {"count": len(summary.errors), "mean": _round(summary.mean)}
    for p, v in summary.percentiles.items():
        out[f"p{p}"] = _round(v)
    return out


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def run(cfg: RunConfig, experiment: str | None = None) -> int:
    """Execute the configured experiment and write its artifacts; returns an exit status."""
    experiment = experiment or cfg.scenario.experiment
    scn = cfg.build_scenario()
    is_cfg = cfg.is_config()
    threads = cfg.output.threads
    out_dir = Path(cfg.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    want_csv = cfg.output.format in ("csv", "both")
    want_json = cfg.output.format in ("json", "both")

    curve = None
    if experiment == "compare":
        methods = list(cfg.scenario.methods)
        records = run_experiment(scn, methods, is_cfg, threads)
    elif experiment == "sweep-samples":
        counts = list(cfg.scenario.sample_counts)
        samplers = list(cfg.scenario.samplers)
        records = []
        means = sweep_sampling(scn, counts, samplers, is_cfg, threads, records_out=records)
        methods = [sampling_label(s, n) for s in samplers for n in counts]
        curve = {
            "schema_version": SCHEMA_VERSION,
            "experiment": experiment,
            "sample_counts": counts,
            "curves": {s: [_round(v) for v in means[s]] for s in samplers},
        }
    elif experiment == "sweep-bs":
        subsets = [list(s) for s in cfg.scenario.subsets]
        records = []
        sweep_bs_count(scn, subsets, is_cfg, threads, records_out=records)
        methods = [subset_label(s) for s in subsets]
        curve = {
            "schema_version": SCHEMA_VERSION,
            "experiment": experiment,
            "subsets": subsets,
            "medians": [_round(summarize(records, m).percentiles[50]) for m in methods],
        }
    else:
        raise ConfigError(f"unknown experiment {experiment!r}", field="experiment")

    flagged = [r.trial_id for r in records if r.flagged]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "num_trials": len(records),
        "master_seed": scn.master_seed,
        "bias_mode": scn.bias_mode,
        "methods": {m: _summary_entry(summarize(records, m)) for m in methods},
        "flagged_trials": flagged,
        "not_converged": {m: sum(1 for r in records if not r.converged[m]) for m in methods},
    }
    if want_csv:
        write_trials_csv(out_dir / "trials.csv", records, methods)
    if want_json:
        _write_json(out_dir / "summary.json", summary)
        if curve is not None:
            _write_json(out_dir / "curve.json", curve)
    for m in methods:
        e = summary["methods"][m]
        log.info("%-24s p50=%.3f p80=%.3f p90=%.3f mean=%.3f", m, e["p50"], e["p80"], e["p90"], e["mean"])
    if flagged:
        log.warning("%d trial(s) flagged: %s", len(flagged), flagged)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmfusion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("compare", "per-method positioning-error comparison"),
        ("sweep-samples", "mean error versus number of drawn samples"),
        ("sweep-bs", "ToA-only fusion over subsets of stations"),
        ("validate-config", "check a configuration file and exit"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="sectioned key/value configuration file")
        if name != "validate-config":
            p.add_argument("--seed", type=int, help="master seed (overrides config)")
            p.add_argument("--trials", type=int, help="number of trials (overrides config)")
            p.add_argument("--out", type=Path, help="output directory (overrides config)")
            p.add_argument("--format", choices=("csv", "json", "both"), help="outputs to write")
            p.add_argument("--threads", type=int, help="worker threads for trials")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(path: Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "validate-config":
            print(serialize_config(cfg), end="")
            return 0
        if args.seed is not None:
            cfg.scenario.master_seed = args.seed
        if args.trials is not None:
            cfg.scenario.num_trials = args.trials
        if args.out is not None:
            cfg.output.out_dir = str(args.out)
        if args.format is not None:
            cfg.output.format = args.format
        if args.threads is not None:
            cfg.output.threads = args.threads
        validate(cfg)
        return run(cfg, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
