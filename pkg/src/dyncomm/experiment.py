"""Two-phase (homogeneous, then polarized) experiments and seed sweeps."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import NEVER, ConfigError, SimulationConfig
from .eventlog import EventLog
from .metrics import (
    NodeScoreSeries,
    RatioSeries,
    TriggerMatrix,
    group_ratio_series,
    median_series,
    node_scores,
    relative_scores,
    trigger_matrix,
)
from .model import init_importance, run

METRICS = ("trigger", "scores", "ratio")


def rank_halves(config: SimulationConfig) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(top, bottom)`` node sets by initial importance rank.

    Each half holds ``N // 2`` nodes; for odd ``N`` the median node is left out.
    """
    order = np.argsort(init_importance(config), kind="stable") + 1
    half = config.n_nodes // 2
    bottom = tuple(sorted(order[:half].tolist()))
    top = tuple(sorted(order[-half:].tolist()))
    return top, bottom


@dataclass(frozen=True)
class ExperimentSpec:
    config: SimulationConfig
    seeds: tuple[int, ...] = ()
    metrics: tuple[str, ...] = METRICS
    interval: int = 1000
    reference_nodes: tuple[int, ...] = (1, 2)
    top: Optional[tuple[int, ...]] = None
    bottom: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        for name in ("seeds", "metrics", "reference_nodes", "top", "bottom"):
            value = getattr(self, name)
            if value is not None and not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        if not self.seeds:
            object.__setattr__(self, "seeds", (self.config.seed,))
        if not self.metrics:
            raise ConfigError("metrics", "at least one metric must be requested")
        unknown = sorted(set(self.metrics) - set(METRICS))
        if unknown:
            raise ConfigError("metrics", f"unknown metric {unknown[0]!r}; choose from {METRICS}")
        if not isinstance(self.interval, int) or isinstance(self.interval, bool) or self.interval < 1:
            raise ConfigError("interval", "must be a positive integer")
        n = self.config.n_nodes
        for name in ("reference_nodes", "top", "bottom"):
            nodes = getattr(self, name)
            if nodes is not None and any(not 1 <= x <= n for x in nodes):
                raise ConfigError(name, f"node labels must lie in 1..{n}")
        if (self.top is None) != (self.bottom is None):
            raise ConfigError("top", "top and bottom must be given together")
        if self.top is not None:
            if not self.top or not self.bottom:
                raise ConfigError("top", "top and bottom must be non-empty")
            if set(self.top) & set(self.bottom):
                raise ConfigError("top", "top and bottom must be disjoint")
        for s in self.seeds:
            try:
                self.config.replace(seed=s)
            except ConfigError as exc:
                raise ConfigError("seeds", str(exc)) from None

    def groups(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if self.top is not None:
            return self.top, self.bottom
        return rank_halves(self.config)

    def to_dict(self) -> dict:
        top, bottom = self.groups()
        return {
            "seeds": list(self.seeds),
            "metrics": list(self.metrics),
            "interval": self.interval,
            "reference_nodes": list(self.reference_nodes),
            "top": list(top),
            "bottom": list(bottom),
        }


@dataclass
class MetricBundle:
    """Pre/post-onset metrics of one run. Windows are ``1..split`` and ``split+1..T``."""

    seed: int
    split: int
    trigger_pre: Optional[TriggerMatrix] = None
    trigger_post: Optional[TriggerMatrix] = None
    scores_pre: Optional[NodeScoreSeries] = None
    scores_post: Optional[NodeScoreSeries] = None
    relative_pre: dict = field(default_factory=dict)
    relative_post: dict = field(default_factory=dict)
    ratio: Optional[RatioSeries] = None


def _windows(config: SimulationConfig) -> tuple[tuple[int, int], tuple[int, int]]:
    split = config.split_step
    return (1, split), (split + 1, config.horizon)


def compute_bundle(log: EventLog, spec: ExperimentSpec) -> MetricBundle:
    config = log.config
    pre, post = _windows(config)
    bundle = MetricBundle(seed=config.seed, split=pre[1])
    if "trigger" in spec.metrics:
        bundle.trigger_pre = trigger_matrix(log, pre)
        bundle.trigger_post = trigger_matrix(log, post)
    if "scores" in spec.metrics:
        if pre[1] >= pre[0]:
            bundle.scores_pre = node_scores(log, pre)
            bundle.relative_pre = {r: relative_scores(log, r, pre) for r in spec.reference_nodes}
        if post[1] >= post[0]:
            bundle.scores_post = node_scores(log, post)
            bundle.relative_post = {r: relative_scores(log, r, post) for r in spec.reference_nodes}
    if "ratio" in spec.metrics:
        top, bottom = spec.groups()
        bundle.ratio = group_ratio_series(log, top, bottom, spec.interval)
    return bundle


def run_two_phase(spec: ExperimentSpec, seed: Optional[int] = None) -> tuple[EventLog, MetricBundle]:
    """Simulate one seed and compute the pre/post metric bundle.

    The windows split at the configured onset; a run with onset ``"never"``
    is a homogeneous control split at ``horizon // 2``.
    """
    config = spec.config if seed is None else spec.config.replace(seed=seed)
    log = run(config)
    return log, compute_bundle(log, spec)


@dataclass
class SweepSummary:
    seeds: tuple[int, ...]
    checkpoints: tuple[int, ...]
    ratio_series: dict
    median: tuple[Optional[float], ...]
    bundles: dict
    logs: dict = field(default_factory=dict)

    def median_at(self, checkpoint: int) -> Optional[float]:
        return self.median[self.checkpoints.index(checkpoint)]


def _sweep_one(args):
    spec, seed, keep_log = args
    log, bundle = run_two_phase(spec, seed)
    return seed, bundle, (log if keep_log else None)


def run_sweep(
    spec: ExperimentSpec,
    keep_logs: bool = False,
    keep_matrices: bool = True,
    workers: int = 1,
) -> SweepSummary:
    """Independent run per seed, then the elementwise median of the ratio
    series. Duplicate seeds reuse one run (identical by determinism)."""
    if "ratio" not in spec.metrics:
        spec = dataclasses.replace(spec, metrics=spec.metrics + ("ratio",))
    unique = list(dict.fromkeys(spec.seeds))
    jobs = [(spec, s, keep_logs) for s in unique]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(job) for job in jobs]
    bundles, logs = {}, {}
    for seed, bundle, log in results:
        if not keep_matrices:
            bundle.trigger_pre = bundle.trigger_post = None
        bundles[seed] = bundle
        if log is not None:
            logs[seed] = log
    series = {s: bundles[s].ratio.ratios for s in unique}
    # the median counts every listed seed, duplicates included
    median = median_series([series[s] for s in spec.seeds])
    checkpoints = bundles[unique[0]].ratio.checkpoints
    return SweepSummary(tuple(spec.seeds), checkpoints, series, median, bundles, logs)


def default_spec(n_nodes: int = 40, seeds: Sequence[int] = tuple(range(10)), **overrides) -> ExperimentSpec:
    """Two periods of 8000 steps with the calibration defaults."""
    params = dict(n_nodes=n_nodes, horizon=16000, polarization_onset=8000)
    params.update(overrides)
    return ExperimentSpec(SimulationConfig(**params), seeds=tuple(seeds))


__all__ = [
    "ExperimentSpec",
    "MetricBundle",
    "SweepSummary",
    "NEVER",
    "compute_bundle",
    "default_spec",
    "rank_halves",
    "run_sweep",
    "run_two_phase",
]
