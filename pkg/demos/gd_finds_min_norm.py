# Gradient descent from w = 0 on squared loss never leaves the row space of
# X, so on an underdetermined system it cannot converge to just any
# interpolant -- it walks straight to the minimum-norm one, X^+ Y.  No
# penalty term anywhere; the regularization is implicit in the start point
# and the geometry.
#
# Run from the repo root:  python3 demos/gd_finds_min_norm.py

import numpy as np

from descent_lab import (
    DivergenceError,
    default_learning_rate,
    fit_gradient_descent,
    pseudoinverse_apply,
)

N, D, SEED = 5, 15, 3

rng = np.random.default_rng(SEED)
x = rng.standard_normal((N, D))
y = rng.standard_normal(N)
target = pseudoinverse_apply(x, y)
eta = default_learning_rate(x)

trace = fit_gradient_descent(x, y, eta, steps=2000, record_every=100)
print(f"{N} x {D} system, eta = 1/sigma_max^2 = {eta:.4f}")
print(f"\n{'step':>6} {'||w - pinv||':>14}")
for step, dist in trace.distance_history:
    print(f"{step:>6} {dist:>14.3e}")

print(f"\nfinal distance: {trace.distance_to_pinv:.3e}")
print(f"||X^+ Y|| = {np.linalg.norm(target):.4f}")

# Any interpolant differs from X^+ Y by a null-space vector, which only adds
# norm.  Check against a few random ones.
from descent_lab import svd

s = svd(x)
print("\nnorms of other interpolants (pinv solution plus a null-space kick):")
for k in range(3):
    z = rng.standard_normal(D)
    null = z - s.v_cols @ (s.v_cols.T @ z)
    other = target + null
    print(f"  ||w||: {np.linalg.norm(other):.4f}   residual: {np.linalg.norm(x @ other - y):.2e}")
print(f"  ||w||: {np.linalg.norm(target):.4f}   residual: {np.linalg.norm(x @ target - y):.2e}  <-- gd's pick")

# And the step-size cliff: 3x the safe eta diverges within a few steps.
try:
    fit_gradient_descent(x, y, 3.0 * eta, steps=1000)
except DivergenceError as exc:
    print(f"\nat eta = 3/sigma_max^2 the loss blows up at step {exc.step}")
