"""Command-line front end.

    dyncomm simulate --config run.json --out bundle/
    dyncomm metrics  --log bundle/events.csv --window 1..8000 [--ratio top=21..40 bottom=1..20] --out m/
    dyncomm sweep    --config run.json --seeds 10 --out sweep/

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, SimulationConfig
from .eventlog import EventLog
from .experiment import ExperimentSpec, MetricBundle, compute_bundle, run_sweep
from .metrics import check_window, group_ratio_series, node_scores, relative_scores, trigger_matrix
from .model import run
from .serialize import (
    LogFormatError,
    manifest,
    read_event_log,
    write_event_log,
    write_json,
    write_median_series,
    write_ratio_series,
    write_score_table,
    write_trigger_matrix,
)

log = logging.getLogger("dyncomm")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3
EXPERIMENT_KEYS = {"seeds", "metrics", "interval", "reference_nodes", "top", "bottom"}


def parse_config(path) -> ExperimentSpec:
    """Read a JSON config with a ``simulation`` and an optional ``experiment`` section."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(str(path), "top level must be an object")
    unknown = sorted(set(data) - {"simulation", "experiment"})
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "simulation" not in data:
        raise ConfigError("simulation", "missing required section")
    config = SimulationConfig.from_dict(data["simulation"])
    experiment = data.get("experiment", {})
    unknown = sorted(set(experiment) - EXPERIMENT_KEYS)
    if unknown:
        raise ConfigError(f"experiment.{unknown[0]}", "unknown key")
    return ExperimentSpec(config, **experiment)


def parse_range(text: str) -> tuple[int, int]:
    """``"a..b"`` to an inclusive integer range."""
    parts = text.split("..")
    if len(parts) != 2:
        raise ConfigError("range", f"expected a..b, got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError("range", f"expected integers in {text!r}") from None
    if a > b:
        raise ConfigError("range", f"range {text!r} is reversed")
    return a, b


def parse_seeds(text: str, base_seed: int) -> tuple[int, ...]:
    """A comma list (``"3,5,8"``) or a count (``"10"`` = ``base..base+9``)."""
    try:
        if "," in text:
            return tuple(int(s) for s in text.split(",") if s.strip())
        count = int(text)
    except ValueError:
        raise ConfigError("seeds", f"expected a count or a comma list, got {text!r}") from None
    if count < 1:
        raise ConfigError("seeds", "count must be positive")
    return tuple(range(base_seed, base_seed + count))


def _prepare_out(out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_bundle(log_: EventLog, bundle: MetricBundle, spec: ExperimentSpec, out: Path) -> list[str]:
    """Write the event log and every requested metric of one run into ``out``."""
    files = ["events.csv", "responses.csv", "importance_trace.csv"]
    if bundle.trigger_pre is not None:
        write_trigger_matrix(bundle.trigger_pre, out / "trigger_pre.csv")
        write_trigger_matrix(bundle.trigger_post, out / "trigger_post.csv")
        files += ["trigger_pre.csv", "trigger_post.csv"]
    if "scores" in spec.metrics:
        columns = {
            "score_pre": None if bundle.scores_pre is None else bundle.scores_pre.scores,
            "score_post": None if bundle.scores_post is None else bundle.scores_post.scores,
        }
        for ref in spec.reference_nodes:
            columns[f"relative_to_{ref}_pre"] = bundle.relative_pre.get(ref)
            columns[f"relative_to_{ref}_post"] = bundle.relative_post.get(ref)
        write_score_table(columns, log_.n_nodes, out / "relative_scores.csv")
        files.append("relative_scores.csv")
    if bundle.ratio is not None:
        write_ratio_series(bundle.ratio, out / "ratio_series.csv")
        files.append("ratio_series.csv")
    files.append("manifest.json")
    write_event_log(
        log_,
        out,
        extra_manifest={
            "experiment": spec.to_dict(),
            "split_step": bundle.split,
            "files": sorted(files),
        },
    )
    return files


def cmd_simulate(config_path, out) -> int:
    spec = parse_config(config_path)
    out = _prepare_out(out)
    log.info("simulating N=%d T=%d seed=%d", spec.config.n_nodes, spec.config.horizon, spec.config.seed)
    event_log = run(spec.config)
    write_bundle(event_log, compute_bundle(event_log, spec), spec, out)
    return EXIT_OK


def cmd_metrics(log_path, window: str, out, ratio: Optional[Sequence[str]] = None, interval: int = 1000,
                reference_nodes: Sequence[int] = (1, 2)) -> int:
    """Recompute metrics for ``window`` from a stored log."""
    a, b = parse_range(window)
    groups = _parse_groups(ratio) if ratio else None
    event_log = read_event_log(log_path)
    try:
        win = check_window(event_log, (a, b), allow_empty=False)
    except ValueError as exc:
        raise ConfigError("window", str(exc)) from None
    out = _prepare_out(out)
    write_trigger_matrix(trigger_matrix(event_log, win), out / "trigger_matrix.csv")
    columns = {"score": node_scores(event_log, win).scores}
    for ref in reference_nodes:
        columns[f"relative_to_{ref}"] = relative_scores(event_log, ref, win)
    write_score_table(columns, event_log.n_nodes, out / "node_scores.csv")
    files = ["trigger_matrix.csv", "node_scores.csv", "manifest.json"]
    extra = {"window": [a, b], "interval": interval}
    if groups is not None:
        top, bottom = groups
        try:
            series = group_ratio_series(event_log, top, bottom, interval, win)
        except ValueError as exc:
            raise ConfigError("ratio", str(exc)) from None
        write_ratio_series(series, out / "ratio_series.csv")
        files.append("ratio_series.csv")
        extra.update(top=list(series.top), bottom=list(series.bottom))
    extra["files"] = sorted(files)
    write_json(out / "manifest.json", manifest(event_log.config, command="metrics", **extra))
    return EXIT_OK


def _parse_groups(items: Sequence[str]) -> tuple[range, range]:
    found = {}
    for item in items:
        key, _, value = item.partition("=")
        if key not in ("top", "bottom") or not value:
            raise ConfigError("ratio", f"expected top=a..b and bottom=c..d, got {item!r}")
        a, b = parse_range(value)
        found[key] = range(a, b + 1)
    if set(found) != {"top", "bottom"}:
        raise ConfigError("ratio", "both top= and bottom= are required")
    return found["top"], found["bottom"]


def cmd_sweep(config_path, seeds: str, out, workers: int = 1) -> int:
    spec = parse_config(config_path)
    spec = ExperimentSpec(
        spec.config,
        seeds=parse_seeds(seeds, spec.config.seed),
        metrics=spec.metrics,
        interval=spec.interval,
        reference_nodes=spec.reference_nodes,
        top=spec.top,
        bottom=spec.bottom,
    )
    out = _prepare_out(out)
    summary = run_sweep(spec, keep_logs=True, workers=workers)
    for seed in dict.fromkeys(spec.seeds):
        seed_spec = ExperimentSpec(spec.config.replace(seed=seed), seeds=(seed,), metrics=spec.metrics,
                                   interval=spec.interval, reference_nodes=spec.reference_nodes,
                                   top=spec.top, bottom=spec.bottom)
        write_bundle(summary.logs[seed], summary.bundles[seed], seed_spec, _prepare_out(out / f"seed_{seed}"))
    write_median_series(summary.checkpoints, summary.ratio_series, summary.median, out / "ratio_series_median.csv")
    write_json(
        out / "manifest.json",
        manifest(spec.config, command="sweep", experiment=spec.to_dict(),
                 runs=[f"seed_{s}" for s in dict.fromkeys(spec.seeds)]),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyncomm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one two-phase simulation and write its report bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("metrics", help="recompute metrics from a stored event log")
    p.add_argument("--log", required=True, help="bundle directory or its events.csv")
    p.add_argument("--window", required=True, help="inclusive step range a..b")
    p.add_argument("--ratio", nargs=2, metavar=("top=a..b", "bottom=c..d"))
    p.add_argument("--interval", type=int, default=1000)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="run one simulation per seed and aggregate the ratio series")
    p.add_argument("--config", required=True)
    p.add_argument("--seeds", required=True, help="comma list or a count")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out)
        if args.command == "metrics":
            return cmd_metrics(args.log, args.window, args.out, args.ratio, args.interval)
        return cmd_sweep(args.config, args.seeds, args.out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, LogFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
