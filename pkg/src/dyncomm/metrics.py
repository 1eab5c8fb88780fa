"""Trigger heatmaps, node scores and group power ratios computed from an
:class:`~dyncomm.eventlog.EventLog`.

Windows are inclusive 1-based step ranges ``(start, end)``. ``(a, a - 1)`` is
the empty window. Absent values (zero denominators) are ``None``, never NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .eventlog import EventLog
from .model import is_even

Window = tuple[int, int]


def check_window(log: EventLog, window: Optional[Window], allow_empty: bool = True) -> Window:
    if window is None:
        return 1, len(log)
    start, end = int(window[0]), int(window[1])
    if start < 1 or end > len(log):
        raise ValueError(f"window {start}..{end} outside the log's steps 1..{len(log)}")
    if start > end + 1 or (not allow_empty and start > end):
        raise ValueError(f"window {start}..{end} is reversed or empty")
    return start, end


def _in_window(steps: np.ndarray, window: Window) -> np.ndarray:
    return (steps >= window[0]) & (steps <= window[1])


@dataclass(frozen=True, eq=False)
class TriggerMatrix:
    """``counts[i-1, j-1]``: steps in ``window`` where ``i -> j`` triggered a response of ``j``."""

    counts: np.ndarray
    window: Window

    @property
    def n_nodes(self) -> int:
        return self.counts.shape[0]

    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        if not isinstance(other, TriggerMatrix):
            return NotImplemented
        return self.window == other.window and np.array_equal(self.counts, other.counts)


@dataclass(frozen=True, eq=False)
class NodeScoreSeries:
    scores: np.ndarray
    window: Window

    def __eq__(self, other):
        if not isinstance(other, NodeScoreSeries):
            return NotImplemented
        return self.window == other.window and np.array_equal(self.scores, other.scores)


@dataclass(frozen=True)
class RatioSeries:
    """Cumulative top/bottom trigger ratio at each checkpoint."""

    checkpoints: tuple[int, ...]
    ratios: tuple[Optional[float], ...]
    top: tuple[int, ...]
    bottom: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.checkpoints)

    def at(self, checkpoint: int) -> Optional[float]:
        return self.ratios[self.checkpoints.index(checkpoint)]


def trigger_matrix(log: EventLog, window: Optional[Window] = None) -> TriggerMatrix:
    window = check_window(log, window)
    n = log.n_nodes
    tr = log.triggers
    tr = tr[_in_window(tr[:, 0], window)]
    flat = np.bincount((tr[:, 1] - 1) * n + (tr[:, 2] - 1), minlength=n * n)
    return TriggerMatrix(flat.reshape(n, n).astype(np.int64), window)


def source_counts(log: EventLog, window: Optional[Window] = None) -> np.ndarray:
    """Trigger participations per sender node over ``window``."""
    window = check_window(log, window)
    tr = log.triggers
    src = tr[_in_window(tr[:, 0], window), 1]
    return np.bincount(src - 1, minlength=log.n_nodes).astype(np.int64)


def node_scores(log: EventLog, window: Optional[Window] = None) -> NodeScoreSeries:
    """Trigger participations per node divided by the window length."""
    window = check_window(log, window, allow_empty=False)
    length = window[1] - window[0] + 1
    return NodeScoreSeries(source_counts(log, window) / length, window)


def relative_scores(log: EventLog, reference: int, window: Optional[Window] = None) -> Optional[np.ndarray]:
    """Every node's score over the score of ``reference`` (1-based).

    Returns ``None`` when the reference node never triggered in the window.
    """
    if not 1 <= reference <= log.n_nodes:
        raise IndexError(f"reference node {reference} outside 1..{log.n_nodes}")
    scores = node_scores(log, window).scores
    ref = scores[reference - 1]
    if ref == 0:
        return None
    return scores / ref


def checkpoints(window: Window, interval: int) -> list[int]:
    """``start-1+interval, start-1+2*interval, ...`` plus the window end."""
    if interval < 1:
        raise ValueError("interval must be positive")
    start, end = window
    points = list(range(start - 1 + interval, end + 1, interval))
    if end >= start and (not points or points[-1] != end):
        points.append(end)
    return points


def _node_set(nodes: Iterable[int], n: int) -> tuple[int, ...]:
    out = tuple(sorted({int(x) for x in nodes}))
    if not out:
        raise ValueError("node set must be non-empty")
    if out[0] < 1 or out[-1] > n:
        raise ValueError(f"node set contains labels outside 1..{n}")
    return out


def group_ratio_series(
    log: EventLog,
    top: Iterable[int],
    bottom: Iterable[int],
    interval: int = 1000,
    window: Optional[Window] = None,
) -> RatioSeries:
    """Ratio of cumulative trigger counts of ``top`` over ``bottom`` from the
    window start up to each checkpoint."""
    n = log.n_nodes
    top_set, bottom_set = _node_set(top, n), _node_set(bottom, n)
    if set(top_set) & set(bottom_set):
        raise ValueError("top and bottom sets must be disjoint")
    window = check_window(log, window)
    group = np.zeros(n + 1, dtype=np.int8)
    group[list(top_set)] = 1
    group[list(bottom_set)] = 2

    tr = log.triggers
    tr = tr[_in_window(tr[:, 0], window)]
    src_group = group[tr[:, 1]]
    points = checkpoints(window, interval)
    top_steps = np.sort(tr[src_group == 1, 0])
    bottom_steps = np.sort(tr[src_group == 2, 0])
    top_cum = np.searchsorted(top_steps, points, side="right")
    bottom_cum = np.searchsorted(bottom_steps, points, side="right")
    ratios = tuple(float(t / b) if b > 0 else None for t, b in zip(top_cum, bottom_cum))
    return RatioSeries(tuple(points), ratios, top_set, bottom_set)


def cross_group_fraction(matrix) -> Optional[float]:
    """Share of trigger counts between nodes of opposite parity."""
    counts = matrix.counts if isinstance(matrix, TriggerMatrix) else np.asarray(matrix)
    n = counts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 nodes")
    total = counts.sum()
    if total == 0:
        return None
    parity = is_even(np.arange(1, n + 1))
    cross = parity[:, None] != parity[None, :]
    return float(counts[cross].sum() / total)


def uniform_cross_fraction(n: int) -> float:
    """Cross-parity share of ordered off-diagonal pairs for ``n`` nodes."""
    evens = n // 2
    odds = n - evens
    return 2 * evens * odds / (n * (n - 1))


def median_series(series: Sequence[Sequence[Optional[float]]]) -> tuple[Optional[float], ...]:
    """Elementwise median ignoring absent values; absent if all are absent."""
    if not series:
        raise ValueError("no series to aggregate")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise ValueError("series lengths differ")
    out = []
    for column in zip(*series):
        values = [v for v in column if v is not None]
        out.append(float(np.median(values)) if values else None)
    return tuple(out)
