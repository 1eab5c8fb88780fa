"""
Report bundles from the command line, and metrics from a stored log
===================================================================

``dyncomm simulate`` writes the event log plus every metric; ``dyncomm
metrics`` recomputes any window from the stored log without re-simulating.
"""

import filecmp
import subprocess
import sys
import tempfile
from pathlib import Path

here = Path(__file__).parent
out = Path(tempfile.mkdtemp(prefix="dyncomm-"))


def cli(*args):
    subprocess.run([sys.executable, "-m", "dyncomm", *args], check=True)


cli("simulate", "--config", str(here / "configs" / "n40.json"), "--out", str(out / "run"))
print(sorted(p.name for p in (out / "run").iterdir()))

cli("metrics", "--log", str(out / "run" / "events.csv"), "--window", "1..8000", "--out", str(out / "pre"))
print("recomputed pre-onset heatmap identical:",
      filecmp.cmp(out / "run" / "trigger_pre.csv", out / "pre" / "trigger_matrix.csv", shallow=False))

cli("metrics", "--log", str(out / "run"), "--window", "1..16000",
    "--ratio", "top=21..40", "bottom=1..20", "--out", str(out / "ratio"))
print((out / "ratio" / "ratio_series.csv").read_text())
