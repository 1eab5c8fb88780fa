"""
Median dissemination ratio over a seed sweep
============================================

Single trajectories are noisy, so we run ten seeds and take the elementwise
median of the cumulative top/bottom ratio. Pass ``150`` as the first argument
for the outer-circle network (about ten times slower).
"""

import sys
import time

from dyncomm.experiment import default_spec, run_sweep

n_nodes = int(sys.argv[1]) if len(sys.argv) > 1 else 40
start = time.perf_counter()
summary = run_sweep(default_spec(n_nodes, seeds=range(10)))
print(f"N={n_nodes}, {len(summary.seeds)} seeds in {time.perf_counter() - start:.0f}s")

for t, m in zip(summary.checkpoints, summary.median):
    print(f"  T'={t:>5}  median ratio={m:.5f}")

first, onset, last = summary.median_at(1000), summary.median_at(8000), summary.median_at(16000)
print("pre-onset decline:", onset < first)
print("post-onset rise:  ", last > onset)
