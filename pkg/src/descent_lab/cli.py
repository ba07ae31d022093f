"""Command-line front end.

Three subcommands, all writing files for downstream analysis rather than
anything interactive:

* ``sweep``: walk n_train across the interpolation threshold on synthetic
  student-teacher data or a CSV dataset; write records.csv, manifest.json,
  and SVG plots of median test MSE and smallest nonzero singular value.
* ``polyfit``: walk the Legendre feature count P at fixed n; write records
  plus a panel of fitted curves below, at, and beyond the threshold.
* ``gdcheck``: verify that gradient descent from zero converges to the
  pseudoinverse solution; write per-seed distance trajectories.

Grid and seed ranges use ``a:b`` (inclusive) or ``a:b:s`` (stride) syntax.
Exit codes: 0 on success (at least 90% of cells succeeded), 1 on runtime
failure, 2 on bad flags.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .data import _legendre_matrix, make_polynomial_dataset, polynomial_target
from .errors import ConfigError, DescentLabError, DivergenceError
from .estimators import default_learning_rate, fit_gradient_descent
from .experiments import (
    SweepConfig,
    _prepare,
    _regime_fit,
    median_series,
    parse_ablation,
    parse_estimator,
    run_polynomial_sweep,
    run_sweep,
    worker_count,
)
from .linalg import pseudoinverse_apply
from .svgplot import render_line_svg

CSV_HEADER = (
    "n_train,d,seed,ablation,estimator,train_mse,test_mse,"
    "smallest_nonzero_sv,bias_term_mean,variance_term_mean,regime"
)
GD_REL_TOL = 1e-6


def _parse_range(text: str, what: str) -> list[int]:
    """``a`` -> [a]; ``a:b`` -> a..b inclusive; ``a:b:s`` -> stride s."""
    parts = text.split(":")
    if len(parts) > 3 or any(not p.strip() for p in parts):
        raise ConfigError(f"bad {what} {text!r} (use a, a:b, or a:b:s)")
    try:
        nums = [int(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad {what} {text!r} (use a, a:b, or a:b:s)") from exc
    if len(nums) == 1:
        return nums
    a, b = nums[0], nums[1]
    step = nums[2] if len(nums) == 3 else 1
    if step < 1:
        raise ConfigError(f"{what} stride must be >= 1, got {step}")
    if b < a:
        raise ConfigError(f"{what} range {text!r} is empty")
    return list(range(a, b + 1, step))


def _parse_grid(text: str) -> list[int]:
    return _parse_range(text, "grid")


def _parse_seeds(text: str) -> list[int]:
    return _parse_range(text, "seeds")


def _num(v: float) -> str:
    return f"{v:.12g}"


def write_records_csv(path, records) -> None:
    """records.csv with the stable schema: 12 significant digits, rows
    sorted by (n_train, seed), LF line endings, empty cell for a missing
    smallest_nonzero_sv."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER.split(","))
        for r in records:
            w.writerow(
                [
                    r.n_train,
                    r.d,
                    r.seed,
                    r.ablation,
                    r.estimator,
                    _num(r.train_mse),
                    _num(r.test_mse),
                    "" if r.smallest_nonzero_sv is None else _num(r.smallest_nonzero_sv),
                    _num(r.bias_term_mean),
                    _num(r.variance_term_mean),
                    r.regime,
                ]
            )


def config_hash(config: dict) -> str:
    """Stable digest of the canonicalized config; the timestamp never
    participates."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_manifest(path, command: str, config: dict, output_paths, *, extra=None) -> None:
    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "output_paths": [str(p) for p in output_paths],
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _out_dir(args, default: str) -> Path:
    out = Path(args.out if args.out else default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _maybe_plot(out_dir: Path, name: str, series, labels, markers, **kw):
    """Render one plot, skipping silently when there is nothing to draw
    (e.g. every cell failed).  Returns the file name or None."""
    if not series or any(len(s[0]) == 0 for s in series):
        return None
    ys = np.concatenate([np.asarray(s[1], dtype=np.float64) for s in series])
    if kw.get("log_y") and not (ys > 0).all():
        kw["log_y"] = False
    svg = render_line_svg(series, labels, markers, **kw)
    path = out_dir / name
    path.write_text(svg, encoding="utf-8")
    return name


def _sweep_exit_code(cells_total: int, cells_failed: int) -> int:
    if cells_total == 0:
        return 0
    return 0 if (cells_total - cells_failed) / cells_total >= 0.9 else 1


def cmd_sweep(args) -> int:
    if args.noise_sd < 0:
        raise ConfigError(f"noise-sd must be >= 0, got {args.noise_sd}")
    ablation = parse_ablation(args.ablation)
    estimator = parse_estimator(args.estimator)
    config = SweepConfig(
        source=args.dataset,
        d=args.d,
        noise_sd=args.noise_sd,
        grid=_parse_grid(args.grid) if args.grid else None,
        seeds=_parse_seeds(args.seeds),
        ablation=ablation,
        estimator=estimator,
        target_column=args.target_col,
        standardize=not args.no_standardize,
        allow_narrow_grid=args.allow_narrow_grid,
    )
    plan = _prepare(config)
    out_dir = _out_dir(args, "runs/sweep")

    outcome = run_sweep(config, _plan=plan)
    write_records_csv(out_dir / "records.csv", outcome.records)
    outputs = ["records.csv"]

    d = plan.d
    marker = [(d, f"n = D = {d}")]
    ns, med_mse = median_series(outcome.records, "test_mse")
    name = _maybe_plot(
        out_dir,
        "test-mse-vs-n.svg",
        [(ns, med_mse)],
        ["median test MSE"],
        marker,
        title=f"Test MSE across the interpolation threshold (D = {d})",
        x_label="n_train",
        y_label="test MSE",
        log_y=True,
    )
    if name:
        outputs.append(name)
    ns_sv, med_sv = median_series(outcome.records, "smallest_nonzero_sv")
    name = _maybe_plot(
        out_dir,
        "smallest-sv-vs-n.svg",
        [(ns_sv, med_sv)],
        ["median smallest nonzero SV"],
        marker,
        title=f"Smallest nonzero singular value of training X (D = {d})",
        x_label="n_train",
        y_label="singular value",
        log_y=True,
    )
    if name:
        outputs.append(name)

    cells_total = len(plan.grid) * len(config.seeds)
    cfg = {
        "dataset": args.dataset,
        "target_col": args.target_col,
        "d": args.d,
        "noise_sd": args.noise_sd,
        "grid": args.grid,
        "seeds": args.seeds,
        "ablation": ablation.label(),
        "estimator": estimator.label(),
        "standardize": not args.no_standardize,
        "out": str(out_dir),
    }
    extra = {
        "cells_total": cells_total,
        "cells_failed": len(outcome.failures),
        "failures": [
            {"n_train": f.n_train, "seed": f.seed, "error": f.error}
            for f in outcome.failures
        ],
        "resolved": {
            "d": d,
            "grid": plan.grid,
            "seeds": list(config.seeds),
            "ablation": plan.ablation.label(),
            "threads": worker_count(),
        },
    }
    outputs.append("manifest.json")
    write_manifest(out_dir / "manifest.json", "sweep", cfg, outputs, extra=extra)
    return _sweep_exit_code(cells_total, len(outcome.failures))


# P values for the fitted-curve panel: well under the threshold, at it, and
# the top of the grid.
def _panel_degrees(n: int, p_grid: list[int]) -> list[int]:
    picks = [max(1, n // 3), min(max(p_grid), n), max(p_grid)]
    out = []
    for p in picks:
        if p not in out:
            out.append(p)
    return out


def cmd_polyfit(args) -> int:
    if args.noise_sd < 0:
        raise ConfigError(f"noise-sd must be >= 0, got {args.noise_sd}")
    p_grid = _parse_grid(args.p_grid)
    seeds = _parse_seeds(args.seeds)
    out_dir = _out_dir(args, "runs/polyfit")

    outcome = run_polynomial_sweep(p_grid, args.n, seeds, args.noise_sd)
    write_records_csv(out_dir / "records.csv", outcome.records)
    outputs = ["records.csv"]

    marker = [(args.n, f"P = n = {args.n}")]
    ps, med_mse = median_series(outcome.records, "test_mse", key="d")
    name = _maybe_plot(
        out_dir,
        "test-mse-vs-p.svg",
        [(ps, med_mse)],
        ["median test MSE"],
        marker,
        title=f"Polynomial regression test MSE (n = {args.n})",
        x_label="number of Legendre features P",
        y_label="test MSE",
        log_y=True,
    )
    if name:
        outputs.append(name)

    name = _write_curve_panel(out_dir, args.n, p_grid, seeds[0], args.noise_sd)
    if name:
        outputs.append(name)

    cfg = {
        "n": args.n,
        "p_grid": args.p_grid,
        "noise_sd": args.noise_sd,
        "seeds": args.seeds,
        "out": str(out_dir),
    }
    cells_total = len(p_grid) * len(seeds)
    extra = {
        "cells_total": cells_total,
        "cells_failed": len(outcome.failures),
        "failures": [
            {"p": f.n_train, "seed": f.seed, "error": f.error}
            for f in outcome.failures
        ],
        "resolved": {"p_grid": p_grid, "seeds": seeds, "threads": worker_count()},
    }
    outputs.append("manifest.json")
    write_manifest(out_dir / "manifest.json", "polyfit", cfg, outputs, extra=extra)
    return _sweep_exit_code(cells_total, len(outcome.failures))


def _write_curve_panel(out_dir: Path, n: int, p_grid: list[int], seed: int, noise_sd: float):
    """Fitted curves at a few P values over one seed's training points."""
    xs = np.linspace(-1.0, 1.0, 400)
    target = polynomial_target(xs)
    series = [(xs, target)]
    labels = ["target"]
    styles = ["line"]
    for p in _panel_degrees(n, p_grid):
        ds = make_polynomial_dataset(n, p, noise_sd, seed)
        fit = _regime_fit(ds.X, ds.Y)
        series.append((xs, _legendre_matrix(xs, p) @ fit.beta))
        labels.append(f"fit, P = {p}")
        styles.append("line")
    ds = make_polynomial_dataset(n, 1, noise_sd, seed)
    series.append((ds.X[:, 0], ds.Y))
    labels.append("training points")
    styles.append("points")
    svg = render_line_svg(
        series,
        labels,
        None,
        title=f"Fitted polynomials around the threshold (n = {n}, seed {seed})",
        x_label="x",
        y_label="y",
        styles=styles,
        y_range=(-4.0, 4.0),
    )
    name = "fitted-curves.svg"
    (out_dir / name).write_text(svg, encoding="utf-8")
    return name


def cmd_gdcheck(args) -> int:
    if args.n < 1 or args.d < 1:
        raise ConfigError("gdcheck needs n >= 1 and d >= 1")
    if args.steps < 0:
        raise ConfigError(f"steps must be >= 0, got {args.steps}")
    if args.eta != "auto":
        try:
            eta_fixed = float(args.eta)
        except ValueError as exc:
            raise ConfigError(f"eta must be 'auto' or a number, got {args.eta!r}") from exc
        if not eta_fixed > 0:
            raise ConfigError(f"eta must be > 0, got {eta_fixed}")
    else:
        eta_fixed = None
    seeds = _parse_seeds(args.seeds)
    out_dir = _out_dir(args, "runs/gdcheck")

    record_every = max(1, args.steps // 1000)
    rows = []
    finals = []
    etas = {}
    for seed in seeds:
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((args.n, args.d))
        y = rng.standard_normal(args.n)
        eta = eta_fixed if eta_fixed is not None else default_learning_rate(x)
        etas[str(seed)] = eta
        try:
            trace = fit_gradient_descent(x, y, eta, args.steps, record_every=record_every)
        except DivergenceError as exc:
            print(
                f"descent-lab gdcheck: divergence at step {exc.step} "
                f"(seed {seed}, eta {eta:.6g})",
                file=sys.stderr,
            )
            return 1
        scale = max(1.0, float(np.linalg.norm(pseudoinverse_apply(x, y))))
        finals.append(trace.distance_to_pinv <= GD_REL_TOL * scale)
        rows.extend((seed, step, dist) for step, dist in trace.distance_history)

    with open(out_dir / "distances.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "step", "distance"])
        for seed, step, dist in rows:
            w.writerow([seed, step, _num(dist)])
    outputs = ["distances.csv"]

    series = []
    labels = []
    for seed in seeds:
        pts = [(step, dist) for s, step, dist in rows if s == seed]
        series.append(([p[0] for p in pts], [p[1] for p in pts]))
        labels.append(f"seed {seed}")
    name = _maybe_plot(
        out_dir,
        "distance-vs-step.svg",
        series,
        labels if len(labels) <= 6 else None,
        None,
        title=f"Distance to the pseudoinverse solution (n = {args.n}, d = {args.d})",
        x_label="step",
        y_label="distance",
        log_y=True,
    )
    if name:
        outputs.append(name)

    cfg = {
        "n": args.n,
        "d": args.d,
        "steps": args.steps,
        "eta": args.eta,
        "seeds": args.seeds,
        "out": str(out_dir),
    }
    extra = {
        "resolved": {"etas": etas, "record_every": record_every},
        "all_converged": bool(all(finals)),
    }
    outputs.append("manifest.json")
    write_manifest(out_dir / "manifest.json", "gdcheck", cfg, outputs, extra=extra)
    return 0 if all(finals) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="descent-lab",
        description="Double descent in ordinary linear regression: sweep it, "
        "decompose it, ablate it.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser(
        "sweep",
        help="sweep n_train across the interpolation threshold",
        description="Sweep n_train across the interpolation threshold and "
        "record train/test MSE, the smallest nonzero singular value, and the "
        "decomposition terms for every (n_train, seed) cell.",
    )
    sw.add_argument(
        "--dataset",
        default="student-teacher",
        help="'student-teacher' (synthetic) or 'csv:PATH' (default: %(default)s)",
    )
    sw.add_argument("--target-col", default=None, help="target column for csv datasets")
    sw.add_argument("--d", type=int, default=32, help="feature count for synthetic data")
    sw.add_argument("--noise-sd", type=float, default=0.25, help="target noise level")
    sw.add_argument(
        "--grid",
        default=None,
        help="n_train grid, a:b or a:b:s inclusive "
        "(default: 2:3D synthetic, ~40 log-spaced points for csv)",
    )
    sw.add_argument("--seeds", default="0:29", help="seed range, a:b or a:b:s")
    sw.add_argument(
        "--ablation",
        default="none",
        help="none | sv-cutoff[:tau] | test-projection[:tau] | linearized-targets "
        "(tau defaults to 0.9x the median sigma_max over cells)",
    )
    sw.add_argument(
        "--estimator",
        default="pinv",
        help="pinv | ridge:lambda | ridge:auto (lambda = 0.5 sigma_max^2 per cell)",
    )
    sw.add_argument(
        "--no-standardize",
        action="store_true",
        help="skip feature standardization for csv datasets",
    )
    sw.add_argument(
        "--allow-narrow-grid",
        action="store_true",
        help="allow a grid that does not span both regimes around D",
    )
    sw.add_argument("--out", default=None, help="output directory (default runs/sweep)")
    sw.set_defaults(func=cmd_sweep)

    pf = sub.add_parser(
        "polyfit",
        help="sweep the Legendre feature count P at fixed n",
        description="Polynomial regression double descent: sweep P at fixed "
        "n against a dense noiseless evaluation grid.",
    )
    pf.add_argument("--n", type=int, default=30, help="training points")
    pf.add_argument("--p-grid", default="1:200", help="P grid, a:b or a:b:s inclusive")
    pf.add_argument("--noise-sd", type=float, default=0.5, help="target noise level")
    pf.add_argument("--seeds", default="0:19", help="seed range")
    pf.add_argument("--out", default=None, help="output directory (default runs/polyfit)")
    pf.set_defaults(func=cmd_polyfit)

    gd = sub.add_parser(
        "gdcheck",
        help="check gradient descent converges to the pseudoinverse solution",
        description="Run gradient descent from zero on random instances and "
        "track the distance to the pseudoinverse solution.",
    )
    gd.add_argument("--n", type=int, default=5, help="rows")
    gd.add_argument("--d", type=int, default=10, help="columns")
    gd.add_argument("--steps", type=int, default=50000, help="gradient steps")
    gd.add_argument("--eta", default="auto", help="'auto' (1/sigma_max^2) or a number")
    gd.add_argument("--seeds", default="0:9", help="seed range")
    gd.add_argument("--out", default=None, help="output directory (default runs/gdcheck)")
    gd.set_defaults(func=cmd_gdcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"descent-lab: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"descent-lab: {exc}", file=sys.stderr)
        return 1
    except DescentLabError as exc:
        print(f"descent-lab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
