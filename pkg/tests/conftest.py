import numpy as np
import pytest

from dyncomm.config import SimulationConfig
from dyncomm.eventlog import EventLog

ACCEPTANCE_LINES = []


def make_log(n_nodes, horizon, edges=(), responses=(), importance=None):
    """EventLog from literal ``(step, src, dst[, prov])`` and ``(step, node)`` rows."""
    config = SimulationConfig(n_nodes=n_nodes, horizon=horizon, polarization_onset="never",
                              basal_fanout=1, response_fanout=1)
    e = np.array([tuple(r) + (0,) * (4 - len(r)) for r in edges], dtype=np.int64).reshape(-1, 4)
    r = np.array(list(responses), dtype=np.int64).reshape(-1, 2)
    l0 = np.arange(1, n_nodes + 1, dtype=float) if importance is None else np.asarray(importance, float)
    return EventLog(config, e, r, np.array([0]), l0[None, :])


@pytest.fixture
def small_config():
    return SimulationConfig(n_nodes=6, horizon=200, polarization_onset=100, basal_rate=0.2,
                            basal_fanout=2, response_fanout=2, seed=7)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
