# The classic picture: fit y = 2x + cos(25x) with P Legendre features and
# n = 20 samples.  Test error falls, blows up catastrophically at P = n,
# then falls again as P keeps growing -- the minimum-norm solution in the
# overparameterized regime is smoother than the interpolation-threshold one.
#
# Run from the repo root:  python3 demos/polynomial_double_descent.py

import numpy as np

from descent_lab import median_series, run_polynomial_sweep
from descent_lab.svgplot import render_line_svg

N = 20
P_GRID = list(range(1, 81))
SEEDS = list(range(10))

outcome = run_polynomial_sweep(P_GRID, n=N, seeds=SEEDS, noise_sd=0.5)
print(f"{len(outcome.records)} cells, {len(outcome.failures)} failures")

ps, med = median_series(outcome.records, "test_mse", key="d")
at = dict(zip(ps, med))
print(f"\n{'P':>4} {'median test mse':>16}")
for p in (1, 5, 10, 15, 18, 20, 22, 25, 40, 80):
    flag = "  <-- P = n" if p == N else ""
    print(f"{p:>4} {at[p]:>16.4g}{flag}")

peak_p = ps[int(np.argmax(med))]
print(f"\nworst P: {peak_p} (median mse {max(med):.3g})")

svg = render_line_svg(
    [(ps, med)],
    ["median test MSE"],
    [(N, f"P = n = {N}")],
    title=f"Polynomial double descent (n = {N})",
    x_label="number of Legendre features P",
    y_label="test MSE",
    log_y=True,
)
with open("polynomial-double-descent.svg", "w", encoding="utf-8") as fh:
    fh.write(svg)
print("wrote polynomial-double-descent.svg")
