"""Stepping rule of the Dynamic Communicators model with an odd/even
polarization regime.

Node labels are 1-based everywhere in the public data (``src``, ``dst``,
responders, CSV files). Importance vectors are plain float arrays where
``importance[i - 1]`` is the importance of node ``i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from .config import SimulationConfig

BASAL = 0
RESPONSE = 1
PROVENANCE_NAMES = {BASAL: "basal", RESPONSE: "response"}


class Regime(enum.Enum):
    HOMOGENEOUS = "homogeneous"
    ODD_EVEN = "odd-even"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def is_even(nodes) -> np.ndarray:
    """Parity group of 1-based node labels (True for the evens)."""
    return np.asarray(nodes) % 2 == 0


def _pairs(edges) -> np.ndarray:
    if isinstance(edges, np.ndarray):
        return edges
    return np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class EdgeSnapshot:
    """Directed adjacency of one time step.

    Edges are unique, never self-loops, and stored sorted by ``(src, dst)``.
    ``provenance`` holds ``BASAL`` or ``RESPONSE`` per edge.
    """

    step: int
    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    provenance: np.ndarray

    @classmethod
    def merge(cls, step: int, n_nodes: int, basal=(), response=()) -> "EdgeSnapshot":
        """Union of basal and response emissions; duplicates collapse and a
        response tag wins over a basal one."""
        tags = np.full((n_nodes, n_nodes), -1, dtype=np.int8)
        for pairs, tag in ((_pairs(basal), BASAL), (_pairs(response), RESPONSE)):
            if len(pairs):
                if (pairs[:, 0] == pairs[:, 1]).any():
                    raise ValueError("self-loop in edge emission")
                tags[pairs[:, 0] - 1, pairs[:, 1] - 1] = tag
        i, j = (tags >= 0).nonzero()
        return cls(step, n_nodes, i + 1, j + 1, tags[i, j])

    @classmethod
    def empty(cls, step: int, n_nodes: int) -> "EdgeSnapshot":
        z = np.zeros(0, dtype=np.int64)
        return cls(step, n_nodes, z, z, np.zeros(0, dtype=np.int8))

    def __len__(self) -> int:
        return len(self.src)

    @property
    def edges(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def adjacency(self) -> np.ndarray:
        """0/1 matrix ``A`` with ``A[i-1, j-1] = 1`` for an edge ``i -> j``."""
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=np.float64)
        a[self.src - 1, self.dst - 1] = 1.0
        return a

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst - 1, minlength=self.n_nodes)

    def __eq__(self, other):
        if not isinstance(other, EdgeSnapshot):
            return NotImplemented
        return (
            self.step == other.step
            and self.n_nodes == other.n_nodes
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.provenance, other.provenance)
        )


@dataclass(frozen=True, eq=False)
class StepOutcome:
    """Responders of one step and the (sender, responder) trigger pairs."""

    step: int
    responders: np.ndarray
    trigger_src: np.ndarray
    trigger_dst: np.ndarray

    @classmethod
    def from_snapshot(cls, snapshot: EdgeSnapshot, responders) -> "StepOutcome":
        responders = np.unique(np.asarray(responders, dtype=np.int64))
        return cls._build(snapshot, responders)

    @classmethod
    def _build(cls, snapshot: EdgeSnapshot, responders: np.ndarray) -> "StepOutcome":
        # responders: sorted, unique, 1-based
        fired = np.zeros(snapshot.n_nodes + 1, dtype=bool)
        fired[responders] = True
        hit = fired[snapshot.dst]
        return cls(snapshot.step, responders, snapshot.src[hit], snapshot.dst[hit])

    @property
    def trigger_pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.trigger_src.tolist(), self.trigger_dst.tolist()))

    def __eq__(self, other):
        if not isinstance(other, StepOutcome):
            return NotImplemented
        return (
            self.step == other.step
            and np.array_equal(self.responders, other.responders)
            and np.array_equal(self.trigger_src, other.trigger_src)
            and np.array_equal(self.trigger_dst, other.trigger_dst)
        )


def init_importance(config: SimulationConfig) -> np.ndarray:
    """Initial importance: ``l_i = i`` for linear-rank, else the explicit list."""
    if config.importance_scheme == "explicit-list":
        return np.array(config.importance_values, dtype=np.float64)
    return np.arange(1, config.n_nodes + 1, dtype=np.float64)


def _sample_targets(sources: np.ndarray, fanout: int, n_nodes: int, rng: np.random.Generator) -> np.ndarray:
    # sources are 1-based; each picks `fanout` distinct targets among the other n-1
    m = len(sources)
    if m == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if fanout < n_nodes - 1:
        keys = rng.random((m, n_nodes - 1))
        slots = np.argpartition(keys, fanout - 1, axis=1)[:, :fanout] + 1
    else:
        # exhaustive fanout leaves nothing to draw
        slots = np.arange(1, n_nodes)[None, :]
    # skip over the source's own slot to rule out self-loops
    targets = slots + (slots >= sources[:, None])
    out = np.empty((m * fanout, 2), dtype=np.int64)
    out[:, 0] = np.repeat(sources, fanout)
    out[:, 1] = targets.ravel()
    return out


def generate_basal_edges(config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """Spontaneous content: each node fires with probability ``basal_rate``
    and sends ``basal_fanout`` edges to distinct uniform other nodes.

    Returns an ``(E, 2)`` array of 1-based ``(src, dst)`` pairs.
    """
    n = config.n_nodes
    emitters = np.flatnonzero(rng.random(n) < config.basal_rate) + 1
    return _sample_targets(emitters, config.basal_fanout, n, rng)


def generate_response_edges(responders, config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    """Edges of each responder to ``response_fanout`` distinct uniform other nodes."""
    if not isinstance(responders, np.ndarray):
        responders = np.fromiter(responders, dtype=np.int64)
    return _sample_targets(np.unique(responders.astype(np.int64)), config.response_fanout, config.n_nodes, rng)


def signed_importance_view(importance, target_group: Union[str, bool]) -> np.ndarray:
    """Importance as seen by a node of ``target_group`` ("even"/"odd"):
    same-parity senders count positive, opposite-parity senders negative."""
    if isinstance(target_group, str):
        if target_group not in ("even", "odd"):
            raise ValueError(f"target_group must be 'even' or 'odd', got {target_group!r}")
        target_group = target_group == "even"
    l = np.asarray(importance, dtype=np.float64)
    same = is_even(np.arange(1, len(l) + 1)) == bool(target_group)
    return np.where(same, l, -l)


def response_probabilities(adjacency: np.ndarray, importance: np.ndarray, regime: Regime) -> np.ndarray:
    """Response probability of every node given the step's adjacency.

    Homogeneous: ``sum_i l_i A_in / (1 + l_max * sum_i A_in)``. Under the
    odd/even regime the numerator uses the signed view for the receiver's
    parity and negative values clamp to 0. ``l_max`` is the current maximum.
    """
    l = np.asarray(importance, dtype=np.float64)
    degree = adjacency.sum(axis=0)
    denom = 1.0 + l.max() * degree
    if regime is Regime.HOMOGENEOUS:
        num = l @ adjacency
    else:
        even_num = signed_importance_view(l, True) @ adjacency
        # the odd view is the exact negation of the even view
        num = np.where(is_even(np.arange(1, len(l) + 1)), even_num, -even_num)
        num = np.maximum(num, 0.0)
    return num / denom


def response_probability(n: int, snapshot: EdgeSnapshot, importance, regime: Regime) -> float:
    """Response probability of node ``n`` (1-based) at the snapshot's step."""
    if not 1 <= n <= snapshot.n_nodes:
        raise IndexError(f"node {n} outside 1..{snapshot.n_nodes}")
    return float(response_probabilities(snapshot.adjacency(), np.asarray(importance), regime)[n - 1])


def sample_responses(
    snapshot: EdgeSnapshot, importance, regime: Regime, rng: np.random.Generator
) -> StepOutcome:
    """One Bernoulli draw per node with at least one in-edge, in ascending
    node order."""
    adjacency = snapshot.adjacency()
    p = response_probabilities(adjacency, np.asarray(importance), regime)
    active = np.flatnonzero(adjacency.any(axis=0))
    fired = active[rng.random(len(active)) < p[active]]
    return StepOutcome._build(snapshot, fired + 1)


def credited_pairs(outcome: StepOutcome, regime: Regime = Regime.HOMOGENEOUS, scope: str = "all"):
    """Trigger pairs that earn an increment under ``scope``."""
    src, dst = outcome.trigger_src, outcome.trigger_dst
    if scope == "in-group-only" and regime is Regime.ODD_EVEN:
        keep = is_even(src) == is_even(dst)
        return src[keep], dst[keep]
    return src, dst


def apply_increments(
    importance, outcome: StepOutcome, regime: Regime = Regime.HOMOGENEOUS, scope: str = "all"
) -> np.ndarray:
    """Return a new importance vector where each sender gains +1 per
    responder it had an edge toward."""
    l = np.array(importance, dtype=np.float64)
    src, _ = credited_pairs(outcome, regime, scope)
    return l + np.bincount(src - 1, minlength=len(l))


@dataclass
class ModelState:
    """Mutable state carried between steps. ``k`` is the last completed step."""

    importance: np.ndarray
    pending: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    k: int = 0


def step(
    state: ModelState, config: SimulationConfig, regime: Regime, rng: np.random.Generator
) -> tuple[ModelState, StepOutcome, EdgeSnapshot]:
    """Advance one step.

    The snapshot of step ``k`` is the union of fresh basal edges and the
    response edges emitted by the responders of ``k-1``. Increments are
    applied before the next step evaluates any probability.
    """
    if state.k >= config.horizon:
        raise ValueError(f"step {state.k + 1} beyond horizon {config.horizon}")
    k = state.k + 1
    basal = generate_basal_edges(config, rng)
    snapshot = EdgeSnapshot.merge(k, config.n_nodes, basal, state.pending)
    outcome = sample_responses(snapshot, state.importance, regime, rng)
    importance = apply_increments(state.importance, outcome, regime, config.increment_scope)
    pending = _sample_targets(outcome.responders, config.response_fanout, config.n_nodes, rng)
    return ModelState(importance, pending, k), outcome, snapshot


def regime_at(config: SimulationConfig, k: int) -> Regime:
    return Regime.ODD_EVEN if config.polarized_at(k) else Regime.HOMOGENEOUS


def run(config: SimulationConfig, rng: Optional[np.random.Generator] = None):
    """Simulate steps ``1..horizon`` and return the full :class:`EventLog`."""
    from .eventlog import EventLog, EventLogBuilder

    rng = make_rng(config.seed) if rng is None else rng
    state = ModelState(init_importance(config))
    builder = EventLogBuilder(config)
    builder.trace(0, state.importance)
    for k in range(1, config.horizon + 1):
        state, outcome, snapshot = step(state, config, regime_at(config, k), rng)
        builder.add(snapshot, outcome)
        if k % config.trace_interval == 0 or k == config.horizon:
            builder.trace(k, state.importance)
    return builder.build()


def iter_steps(config: SimulationConfig, rng: Optional[np.random.Generator] = None) -> Iterable:
    """Yield ``(state, outcome, snapshot)`` after each step; same stream as :func:`run`."""
    rng = make_rng(config.seed) if rng is None else rng
    state = ModelState(init_importance(config))
    for k in range(1, config.horizon + 1):
        state, outcome, snapshot = step(state, config, regime_at(config, k), rng)
        yield state, outcome, snapshot
