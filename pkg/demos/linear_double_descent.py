# Sweep n_train through the interpolation threshold n = D and watch the
# test error spike while the training error stays pinned at zero below D.
#
# Run from the repo root:  python3 demos/linear_double_descent.py

import numpy as np

from descent_lab import SweepConfig, median_series, peak_ratio, run_sweep
from descent_lab.svgplot import render_line_svg

D = 16
NOISE = 0.25
SEEDS = list(range(10))

config = SweepConfig(d=D, noise_sd=NOISE, grid=list(range(2, 3 * D + 1)), seeds=SEEDS)
outcome = run_sweep(config)
print(f"{len(outcome.records)} cells, {len(outcome.failures)} failures")

ns, test_mse = median_series(outcome.records, "test_mse")
_, train_mse = median_series(outcome.records, "train_mse")
_, sv = median_series(outcome.records, "smallest_nonzero_sv")

print(f"\n{'n':>4} {'regime':<18} {'train mse':>12} {'test mse':>12} {'sigma_R':>10}")
by_n = {r.n_train: r.regime for r in outcome.records}
for i, n in enumerate(ns):
    flag = "  <-- n = D" if n == D else ""
    print(f"{n:>4} {by_n[n]:<18} {train_mse[i]:>12.3g} {test_mse[i]:>12.3g} {sv[i]:>10.3g}{flag}")

print(f"\npeak ratio (median mse at n=D over n=3D): {peak_ratio(outcome.records, D):.2f}")

svg = render_line_svg(
    [(ns, test_mse), (ns, sv)],
    ["median test MSE", "median smallest sv"],
    [(D, f"n = D = {D}")],
    title=f"Double descent, student-teacher D = {D}",
    x_label="n_train",
    y_label="value (log)",
    log_y=True,
)
with open("linear-double-descent.svg", "w", encoding="utf-8") as fh:
    fh.write(svg)
print("wrote linear-double-descent.svg")
