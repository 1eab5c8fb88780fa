"""Columnar record of a simulated temporal network."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

import numpy as np

from .config import SimulationConfig
from .model import EdgeSnapshot, StepOutcome


@dataclass(eq=False)
class EventLog:
    """Everything a run produced; all metrics are recomputed from it.

    edges:      ``(E, 4)`` int rows ``(step, src, dst, provenance)`` sorted by step, src, dst
    responses:  ``(R, 2)`` int rows ``(step, node)`` sorted by step, node
    trace_steps / trace_values: importance sampled at step 0, every
        ``trace_interval`` steps and at the horizon.
    """

    config: SimulationConfig
    edges: np.ndarray
    responses: np.ndarray
    trace_steps: np.ndarray
    trace_values: np.ndarray

    def __len__(self) -> int:
        return self.config.horizon

    @property
    def n_nodes(self) -> int:
        return self.config.n_nodes

    @cached_property
    def triggers(self) -> np.ndarray:
        """``(M, 3)`` rows ``(step, src, dst)``: edges whose destination fired
        at the same step."""
        n1 = self.n_nodes + 1
        edge_key = self.edges[:, 0] * n1 + self.edges[:, 2]
        resp_key = self.responses[:, 0] * n1 + self.responses[:, 1]
        hit = np.isin(edge_key, resp_key)
        return self.edges[hit][:, :3]

    def _rows(self, table: np.ndarray, k: int) -> np.ndarray:
        lo, hi = np.searchsorted(table[:, 0], [k, k + 1])
        return table[lo:hi]

    def snapshot(self, k: int) -> EdgeSnapshot:
        rows = self._rows(self.edges, k)
        return EdgeSnapshot(k, self.n_nodes, rows[:, 1].copy(), rows[:, 2].copy(), rows[:, 3].astype(np.int8))

    def outcome(self, k: int) -> StepOutcome:
        rows = self._rows(self.triggers, k)
        return StepOutcome(k, self._rows(self.responses, k)[:, 1].copy(), rows[:, 1].copy(), rows[:, 2].copy())

    @property
    def snapshots(self) -> Iterator[EdgeSnapshot]:
        return (self.snapshot(k) for k in range(1, len(self) + 1))

    @property
    def outcomes(self) -> Iterator[StepOutcome]:
        return (self.outcome(k) for k in range(1, len(self) + 1))

    @property
    def initial_importance(self) -> np.ndarray:
        return self.trace_values[0]

    @property
    def final_importance(self) -> np.ndarray:
        return self.trace_values[-1]

    def __eq__(self, other):
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            self.config == other.config
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.responses, other.responses)
            and np.array_equal(self.trace_steps, other.trace_steps)
            and np.array_equal(self.trace_values, other.trace_values)
        )


@dataclass
class EventLogBuilder:
    config: SimulationConfig
    _edges: list = field(default_factory=list)
    _responses: list = field(default_factory=list)
    _trace_steps: list = field(default_factory=list)
    _trace_values: list = field(default_factory=list)

    def add(self, snapshot: EdgeSnapshot, outcome: StepOutcome) -> None:
        k = snapshot.step
        if len(snapshot):
            rows = np.empty((len(snapshot), 4), dtype=np.int64)
            rows[:, 0] = k
            rows[:, 1] = snapshot.src
            rows[:, 2] = snapshot.dst
            rows[:, 3] = snapshot.provenance
            self._edges.append(rows)
        if len(outcome.responders):
            rows = np.empty((len(outcome.responders), 2), dtype=np.int64)
            rows[:, 0] = k
            rows[:, 1] = outcome.responders
            self._responses.append(rows)

    def trace(self, k: int, importance: np.ndarray) -> None:
        self._trace_steps.append(k)
        self._trace_values.append(np.array(importance, dtype=np.float64))

    def build(self) -> EventLog:
        edges = np.concatenate(self._edges).astype(np.int64) if self._edges else np.zeros((0, 4), np.int64)
        responses = (
            np.concatenate(self._responses).astype(np.int64) if self._responses else np.zeros((0, 2), np.int64)
        )
        return EventLog(
            self.config,
            edges,
            responses,
            np.array(self._trace_steps, dtype=np.int64),
            np.vstack(self._trace_values),
        )
