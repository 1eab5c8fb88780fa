"""CSV/JSON persistence of event logs and metrics.

Every file is written to a temporary sibling and renamed into place. Numbers
are formatted with ``repr``/``str`` so output never depends on the locale;
absent values are empty cells.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import __version__
from .config import SimulationConfig
from .eventlog import EventLog
from .metrics import RatioSeries, TriggerMatrix
from .model import BASAL, PROVENANCE_NAMES, RESPONSE

EVENTS_FILE = "events.csv"
RESPONSES_FILE = "responses.csv"
TRACE_FILE = "importance_trace.csv"
MANIFEST_FILE = "manifest.json"

PathLike = Union[str, os.PathLike]


class LogFormatError(ValueError):
    """A stored event log could not be parsed."""


def atomic_write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def format_number(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_json(path: PathLike, data: dict) -> None:
    atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def manifest(config: SimulationConfig, **extra) -> dict:
    """Run manifest: resolved config and code version, no wall-clock fields."""
    out = {"package": "dyncomm", "version": __version__, "config": config.to_dict(), "seed": config.seed}
    out.update(extra)
    return out


# -- event log -----------------------------------------------------------------


def write_event_log(log: EventLog, directory: PathLike, extra_manifest: Optional[dict] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = {BASAL: "basal", RESPONSE: "response"}
    atomic_write_text(
        directory / EVENTS_FILE,
        _csv_text(
            ("step", "src", "dst", "provenance"),
            ((k, i, j, names[p]) for k, i, j, p in log.edges.tolist()),
        ),
    )
    atomic_write_text(
        directory / RESPONSES_FILE,
        _csv_text(("step", "node", "event"), ((k, n, "response") for k, n in log.responses.tolist())),
    )
    header = ["step"] + [f"l_{i}" for i in range(1, log.n_nodes + 1)]
    atomic_write_text(
        directory / TRACE_FILE,
        _csv_text(
            header,
            ([int(k)] + [repr(v) for v in row] for k, row in zip(log.trace_steps, log.trace_values.tolist())),
        ),
    )
    write_json(directory / MANIFEST_FILE, manifest(log.config, **(extra_manifest or {})))
    return directory


def _log_directory(path: PathLike) -> Path:
    path = Path(path)
    return path if path.is_dir() else path.parent


def _read_rows(path: Path, header: Sequence[str]) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise LogFormatError(f"{path}: empty file") from None
        if list(got) != list(header):
            raise LogFormatError(f"{path}: expected header {list(header)}, got {got}")
        return [row for row in reader]


def read_event_log(path: PathLike) -> EventLog:
    """Parse a log written by :func:`write_event_log` (directory or its events.csv)."""
    directory = _log_directory(path)
    try:
        with open(directory / MANIFEST_FILE, encoding="utf-8") as fh:
            config = SimulationConfig.from_dict(json.load(fh)["config"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise LogFormatError(f"{directory / MANIFEST_FILE}: {exc}") from exc
    n = config.n_nodes
    codes = {name: code for code, name in PROVENANCE_NAMES.items()}
    try:
        rows = _read_rows(directory / EVENTS_FILE, ("step", "src", "dst", "provenance"))
        edges = np.array([(int(k), int(i), int(j), codes[p]) for k, i, j, p in rows], dtype=np.int64).reshape(-1, 4)
        rows = _read_rows(directory / RESPONSES_FILE, ("step", "node", "event"))
        if any(r[2] != "response" for r in rows):
            raise LogFormatError(f"{directory / RESPONSES_FILE}: unknown event type")
        responses = np.array([(int(k), int(v)) for k, v, _ in rows], dtype=np.int64).reshape(-1, 2)
        rows = _read_rows(directory / TRACE_FILE, ["step"] + [f"l_{i}" for i in range(1, n + 1)])
        trace_steps = np.array([int(r[0]) for r in rows], dtype=np.int64)
        trace_values = np.array([[float(x) for x in r[1:]] for r in rows], dtype=np.float64).reshape(-1, n)
    except (KeyError, ValueError, IndexError) as exc:
        if isinstance(exc, LogFormatError):
            raise
        raise LogFormatError(f"{directory}: malformed row ({exc})") from exc
    _check_log(edges, responses, config, directory)
    return EventLog(config, edges, responses, trace_steps, trace_values)


def _check_log(edges: np.ndarray, responses: np.ndarray, config: SimulationConfig, where: Path) -> None:
    n, horizon = config.n_nodes, config.horizon
    for name, table, cols in (("events", edges, (1, 2)), ("responses", responses, (1,))):
        if len(table) == 0:
            continue
        steps = table[:, 0]
        if steps.min() < 1 or steps.max() > horizon or np.any(np.diff(steps) < 0):
            raise LogFormatError(f"{where}: {name} steps must be sorted within 1..{horizon}")
        for c in cols:
            if table[:, c].min() < 1 or table[:, c].max() > n:
                raise LogFormatError(f"{where}: {name} node labels must lie in 1..{n}")
    if len(edges) and np.any(edges[:, 1] == edges[:, 2]):
        raise LogFormatError(f"{where}: self-loop in events")


# -- metrics -------------------------------------------------------------------


def write_trigger_matrix(matrix: TriggerMatrix, path: PathLike) -> None:
    """Rows are sources ``i``, columns destinations ``j``."""
    n = matrix.n_nodes
    header = ["src"] + [str(j) for j in range(1, n + 1)]
    rows = ([i] + row for i, row in enumerate(matrix.counts.tolist(), start=1))
    atomic_write_text(path, _csv_text(header, rows))


def read_trigger_matrix(path: PathLike) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return np.array([[int(x) for x in r[1:]] for r in rows[1:]], dtype=np.int64)


def write_ratio_series(series: RatioSeries, path: PathLike) -> None:
    atomic_write_text(
        path,
        _csv_text(("step", "ratio"), ((t, format_number(r)) for t, r in zip(series.checkpoints, series.ratios))),
    )


def write_median_series(checkpoints: Sequence[int], per_seed: dict, median: Sequence, path: PathLike) -> None:
    seeds = list(per_seed)
    header = ["step", "median"] + [f"seed_{s}" for s in seeds]
    rows = (
        [t, format_number(m)] + [format_number(per_seed[s][idx]) for s in seeds]
        for idx, (t, m) in enumerate(zip(checkpoints, median))
    )
    atomic_write_text(path, _csv_text(header, rows))


def read_ratio_series(path: PathLike) -> list[tuple[int, Optional[float]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))[1:]
    return [(int(t), float(r) if r else None) for t, r, *_ in rows]


def write_score_table(columns: dict, n_nodes: int, path: PathLike) -> None:
    """One row per node; ``columns`` maps a header to a per-node vector or ``None`` (absent)."""
    header = ["node"] + list(columns)
    rows = []
    for idx in range(n_nodes):
        row = [idx + 1]
        for values in columns.values():
            row.append("" if values is None else format_number(values[idx]))
        rows.append(row)
    atomic_write_text(path, _csv_text(header, rows))
