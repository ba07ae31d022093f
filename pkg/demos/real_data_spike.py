# Nothing synthetic about it: sweep n_train on the diabetes baseline table
# (10 standardized features, 442 rows) and the test error spikes right at
# n = 10.  Averaging over split seeds keeps one lucky split from hiding it.
#
# Run from the repo root:  python3 demos/real_data_spike.py

import numpy as np

from descent_lab import SweepConfig, median_series, run_sweep

config = SweepConfig(
    source="csv:data/diabetes.csv",
    target_column="target",
    grid=list(range(2, 31)),
    seeds=list(range(10)),
)
outcome = run_sweep(config)
d = outcome.records[0].d
print(f"diabetes: D = {d}, {len(outcome.records)} cells, {len(outcome.failures)} failures")

ns, med = median_series(outcome.records, "test_mse")
peak_i = int(np.argmax(med))
print(f"\n{'n':>4} {'median test mse':>16}")
for i, n in enumerate(ns):
    marks = []
    if n == d:
        marks.append("n = D")
    if i == peak_i:
        marks.append("peak")
    flag = ("  <-- " + ", ".join(marks)) if marks else ""
    print(f"{n:>4} {med[i]:>16.5g}{flag}")

print(f"\npeak at n = {ns[peak_i]}, {med[peak_i] / med[ns.index(3 * d)]:.1f}x the mse at n = {3 * d}")
