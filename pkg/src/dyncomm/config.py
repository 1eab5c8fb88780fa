"""Simulation parameters and their validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Optional, Union

NEVER = "never"
SCHEMES = ("linear-rank", "explicit-list")
INCREMENT_SCOPES = ("all", "in-group-only")
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Raised when a configuration value violates its constraint.

    The message always names the offending key.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class SimulationConfig:
    """All parameters of one simulation run.

    ``polarization_onset`` is the number of homogeneous steps: steps
    ``1..onset`` use the homogeneous response rule, steps ``onset+1..horizon``
    the odd/even polarized one. ``"never"`` keeps the whole run homogeneous.
    """

    n_nodes: int
    horizon: int
    polarization_onset: Union[int, str]
    basal_rate: float = 0.01
    basal_fanout: int = 3
    response_fanout: int = 3
    seed: int = 0
    importance_scheme: str = "linear-rank"
    importance_values: Optional[tuple[float, ...]] = None
    increment_scope: str = "all"
    trace_interval: int = 1000

    def __post_init__(self):
        if self.importance_values is not None and not isinstance(self.importance_values, tuple):
            object.__setattr__(self, "importance_values", tuple(self.importance_values))
        self._validate()

    def _validate(self) -> None:
        if not _is_int(self.n_nodes) or self.n_nodes < 2:
            raise ConfigError("n_nodes", "must be an integer >= 2")
        n = self.n_nodes
        if not _is_int(self.horizon) or self.horizon < 0:
            raise ConfigError("horizon", "must be a non-negative integer")
        onset = self.polarization_onset
        if onset != NEVER:
            if not _is_int(onset) or not 0 <= onset <= self.horizon:
                raise ConfigError(
                    "polarization_onset", f"must be an integer in [0, horizon={self.horizon}] or 'never'"
                )
        if not _is_real(self.basal_rate) or not 0.0 <= self.basal_rate <= 1.0:
            raise ConfigError("basal_rate", "must be a probability in [0, 1]")
        for key in ("basal_fanout", "response_fanout"):
            value = getattr(self, key)
            if not _is_int(value) or value < 1:
                raise ConfigError(key, "must be a positive integer")
            if value > n - 1:
                raise ConfigError(key, f"{key} must be ≤ n_nodes − 1 (= {n - 1})")
        if not _is_int(self.seed) or not 0 <= self.seed <= MAX_SEED:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        if self.importance_scheme not in SCHEMES:
            raise ConfigError("importance_scheme", f"must be one of {SCHEMES}")
        if self.importance_scheme == "explicit-list":
            values = self.importance_values
            if values is None:
                raise ConfigError("importance_values", "required for the explicit-list scheme")
            if len(values) != n:
                raise ConfigError("importance_values", f"must have exactly n_nodes={n} entries, got {len(values)}")
            if any(not _is_real(v) or not v > 0 for v in values):
                raise ConfigError("importance_values", "entries must be strictly positive reals")
            if any(a > b for a, b in zip(values, values[1:])):
                raise ConfigError("importance_values", "must be sorted non-decreasing (l_1 <= ... <= l_N)")
        elif self.importance_values is not None:
            raise ConfigError("importance_values", "only allowed with the explicit-list scheme")
        if self.increment_scope not in INCREMENT_SCOPES:
            raise ConfigError("increment_scope", f"must be one of {INCREMENT_SCOPES}")
        if not _is_int(self.trace_interval) or self.trace_interval < 1:
            raise ConfigError("trace_interval", "must be a positive integer")

    def polarized_at(self, k: int) -> bool:
        """Whether step ``k`` (1-based) runs under the odd/even regime."""
        return self.polarization_onset != NEVER and k > self.polarization_onset

    @property
    def split_step(self) -> int:
        """Last step of the pre-polarization window."""
        if self.polarization_onset == NEVER:
            return self.horizon // 2
        return self.polarization_onset

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        """Fully resolved mapping, defaults expanded; JSON-serializable."""
        out = dataclasses.asdict(self)
        if self.importance_values is not None:
            out["importance_values"] = list(self.importance_values)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        for key in ("n_nodes", "horizon", "polarization_onset"):
            if key not in data:
                raise ConfigError(key, "missing required field")
        return cls(**data)
