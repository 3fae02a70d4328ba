"""Reproduction harness: one executable, one CSV artifact per subcommand.

Conventions shared by all subcommands:

* every run is deterministic for fixed flags and seed (PCG64 generators;
  derived seeds are documented per subcommand);
* output is a CSV with a header row naming all columns and numbers written
  with 17 significant digits; an initial ``# generated <timestamp>`` comment
  line can be suppressed with ``--no-timestamp``;
* heatmaps are long-form (x, y, value) - plotting is left to external tools;
* exit codes: 0 success, 2 usage error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import bounds as bounds_mod
from . import estimators as est
from . import lrsp as lrsp_mod
from . import precond as precond_mod
from .errors import CovfieldError
from .geometry import (
    PointSet,
    bandwidth_percentile,
    generate_gaussian_cloud,
    load_csv,
    preset_observations,
    standardize,
    subsample,
)
from .kernel import KernelConfig, kernel_matrix
from .posterior import fit

GP_DEMO_BETA = 0.9453058162554949
GP_DEMO_SIGMA = 0.06332725946674625
PRECOND_DEFAULT_TAU = 0.004   # nugget for the benchmark systems (tau^2 = 1.6e-5)
BOUNDS_DEFAULT_SIGMA = {1: 0.05, 2: 0.05, 3: 0.4}
DISK_RADIUS = 0.4


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _write_csv(path, header, rows, timestamp: bool) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
            n += 1
    return n


def _report(path, nrows, t0) -> None:
    print(f"wrote {nrows} rows to {path} in {time.time() - t0:.2f} s")


def _load_observations(args) -> PointSet:
    if getattr(args, "obs", None):
        return load_csv(args.obs)
    return preset_observations(args.preset)


def _unit_grid(n: int) -> PointSet:
    return PointSet(np.linspace(0.0, 1.0, n)[:, None])


# ---------------------------------------------------------------- subcommands


def _cmd_field(args) -> int:
    t0 = time.time()
    S = _load_observations(args)
    if S.d != 1:
        raise CovfieldError("field expects 1-d observations")
    model = fit(S, KernelConfig(sigma=args.sigma, tau=args.tau))
    g = _unit_grid(args.grid)
    R = np.abs(model.cov_matrix(g, g))
    xs = g.coords[:, 0]
    rows = ((xs[i], xs[j], R[i, j]) for i in range(args.grid) for j in range(args.grid))
    n = _write_csv(args.out, ["x", "y", "value"], rows, not args.no_timestamp)
    _report(args.out, n, t0)
    return 0


def _disk_points(rng, count: int) -> np.ndarray:
    pts = np.empty((0, 2))
    while len(pts) < count:
        cand = rng.uniform(-DISK_RADIUS, DISK_RADIUS, size=(4 * count, 2))
        cand = cand[np.linalg.norm(cand, axis=1) <= DISK_RADIUS]
        pts = np.vstack([pts, cand])
    return pts[:count]


def _cmd_field2d(args) -> int:
    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    S = PointSet(_disk_points(rng, args.n_obs))
    xstar = _disk_points(rng, 1)[0]
    model = fit(S, KernelConfig(sigma=args.sigma, tau=args.tau))
    ax = np.linspace(-DISK_RADIUS, DISK_RADIUS, args.grid)
    yy, xx = np.meshgrid(ax, ax)
    mask = xx**2 + yy**2 <= DISK_RADIUS**2
    pts = np.column_stack([xx[mask], yy[mask]])
    vals = np.abs(model.cov_matrix(PointSet(xstar[None, :]), PointSet(pts)))[0]
    rows = [("xstar", xstar[0], xstar[1], math.nan)]
    rows += [("obs", p[0], p[1], math.nan) for p in S.coords]
    rows += [("field", p[0], p[1], v) for p, v in zip(pts, vals)]
    n = _write_csv(args.out, ["kind", "y1", "y2", "value"], rows, not args.no_timestamp)
    _report(args.out, n, t0)
    return 0


def _cmd_bounds(args) -> int:
    t0 = time.time()
    sigma = args.sigma if args.sigma is not None else BOUNDS_DEFAULT_SIGMA[args.condition]
    S = _load_observations(args)
    model = fit(S, KernelConfig(sigma=sigma))
    g = _unit_grid(args.grid)
    ystar = np.array([args.ystar])
    exact = np.abs(model.cov_matrix(g, PointSet(ystar[None, :])))[:, 0]
    curves = {
        kind: bounds_mod.estimate_curve(model, ystar, g, kind, condition=args.condition)
        for kind in bounds_mod.CURVE_KINDS
    }
    in_region = ~np.isnan(curves["distance"])
    xs = g.coords[:, 0]
    rows = (
        (xs[i], int(in_region[i]), exact[i] if in_region[i] else math.nan,
         curves["upper"][i], curves["lower"][i], curves["distance"][i])
        for i in range(g.n)
    )
    n = _write_csv(
        args.out,
        ["x", "in_region", "exact_abs", "upper_curve", "lower_curve", "distance_curve"],
        rows, not args.no_timestamp,
    )
    _report(args.out, n, t0)
    return 0


def _cmd_estimate(args) -> int:
    t0 = time.time()
    S = _load_observations(args)
    model = fit(S, KernelConfig(sigma=args.sigma))
    g = _unit_grid(args.grid)
    R = np.abs(model.cov_matrix(g, g))
    xs = g.coords[:, 0]
    small = args.sigma < est.FIELD_REGIME_CUT
    nearest = np.array([est.dist_metrics(p, S, args.sigma).nearest for p in g.coords])
    if small:
        kern = kernel_matrix(g, g, KernelConfig(sigma=args.sigma))
        G = np.sqrt(np.outer(nearest, nearest)) * kern
    else:
        cumul = np.array([est.dist_metrics(p, S, args.sigma).cumulative for p in g.coords])
        G = np.outer(nearest * cumul, nearest * cumul)
    field = est.absolute_field(G, float(R.max()))
    rows = ((xs[i], xs[j], R[i, j], field[i, j]) for i in range(g.n) for j in range(g.n))
    n = _write_csv(args.out, ["x", "y", "exact", "estimate"], rows, not args.no_timestamp)
    _report(args.out, n, t0)
    return 0


def _cmd_gp_demo(args) -> int:
    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    sx = np.sort(rng.uniform(0.0, 1.0, args.n_obs))
    S = PointSet(sx[:, None])
    f = lambda t: np.cos(25.0 * t**2)  # noqa: E731
    model = fit(S, KernelConfig(sigma=args.sigma, beta=args.beta))
    refs = est.reference_points_1d(model)
    g = _unit_grid(args.grid)
    mean = model.mean(f(sx), g)
    true_std = np.sqrt(np.maximum(0.0, [model.variance(p) for p in g.coords]))
    est_std = np.sqrt(
        np.maximum(0.0, [est.variance_estimator_auto(p, model, refs) for p in g.coords])
    )
    rows = [("obs", x, f(x), math.nan, math.nan) for x in sx]
    rows += [
        ("curve", g.coords[i, 0], mean[i], true_std[i], est_std[i]) for i in range(g.n)
    ]
    n = _write_csv(
        args.out, ["kind", "x", "mean_or_value", "true_std", "est_std"],
        rows, not args.no_timestamp,
    )
    _report(args.out, n, t0)
    return 0


def _cmd_svd(args) -> int:
    t0 = time.time()
    X = _unit_grid(args.equispaced)
    K = kernel_matrix(X, X, KernelConfig(sigma=args.sigma))
    s = np.linalg.svd(K, compute_uv=False)[: args.k]
    n = _write_csv(
        args.out, ["index", "value"],
        ((i + 1, s[i]) for i in range(len(s))), not args.no_timestamp,
    )
    _report(args.out, n, t0)
    return 0


def _parse_sweep(text: str, name: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise CovfieldError(f"{name} must look like lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise CovfieldError(f"{name}: need step > 0 and hi >= lo")
    return lo, hi, step


def _cmd_lrsp(args) -> int:
    t0 = time.time()
    X = generate_gaussian_cloud(args.n, args.d, args.seed)
    cfg = KernelConfig(sigma=args.sigma)
    perm = np.random.default_rng(args.seed + 1).permutation(args.n)
    f0 = lrsp_mod.nystrom_build(X, perm[: args.r0], cfg)
    K = kernel_matrix(X, X, cfg)
    v = np.random.default_rng(args.seed + 2).standard_normal(args.n)
    vn = np.linalg.norm(v)

    def lr_errors(rank: int) -> tuple[float, float]:
        fac = lrsp_mod.nystrom_build(X, perm[:rank], cfg)
        E = K - lrsp_mod.lowrank_dense(fac)
        return float(np.abs(E).max()), float(np.linalg.norm(E @ v) / vn)

    rows = []
    lo, hi, step = _parse_sweep(args.rank_sweep, "--rank-sweep")
    for rank in np.arange(lo, hi + 1e-9, step):
        m, two = lr_errors(int(round(rank)))
        rows.append((float(round(rank)), m, math.nan, two, math.nan))

    lo, hi, step = _parse_sweep(args.delta_sweep, "--delta-sweep")
    lr_cache: dict[int, tuple[float, float]] = {}
    for mult in np.arange(lo, hi + 1e-9, step):
        pat = lrsp_mod.pattern_by_radius(X, mult * args.sigma)
        corr = lrsp_mod.sparse_correction(X, f0, pat, cfg)
        E = K - lrsp_mod.lrsp_dense(f0, corr)
        k_eq = lrsp_mod.cost_equivalent_rank(args.r0, args.n, pat.nnz)
        kk = min(int(round(k_eq)), args.n)
        if kk not in lr_cache:
            lr_cache[kk] = lr_errors(kk)
        lm, l2 = lr_cache[kk]
        rows.append((k_eq, lm, float(np.abs(E).max()), l2, float(np.linalg.norm(E @ v) / vn)))

    n = _write_csv(
        args.out, ["equiv_rank", "lr_max", "lrsp_max", "lr_2norm", "lrsp_2norm"],
        rows, not args.no_timestamp,
    )
    _report(args.out, n, t0)
    return 0


def _cmd_precond(args) -> int:
    t0 = time.time()
    if args.data:
        X = load_csv(args.data)
        if args.subsample:
            X = subsample(X, args.subsample, args.seed)
        if args.standardize:
            X = standardize(X)
    else:
        X = generate_gaussian_cloud(args.n, args.d, args.seed)
    sigma = bandwidth_percentile(X, args.percentile)
    cfg = KernelConfig(sigma=sigma, tau=args.tau)
    delta = args.delta if args.delta is not None else 2.0 * sigma
    results = precond_mod.run_methods(
        X, cfg, r=max(1, int(round(args.r_fraction * X.n))), delta=delta,
        tol_abs=args.tol, max_iter=args.maxit,
        landmark_seed=args.seed + 1, pattern_seed=args.seed + 2, rhs_seed=args.seed + 3,
    )
    rows = (
        (r["method"], r["iterations"], r["rel_err"], r["residual"], r["fsai_nnz_fraction"])
        for r in results
    )
    n = _write_csv(
        args.out, ["method", "iterations", "rel_err", "residual", "fsai_nnz_fraction"],
        rows, not args.no_timestamp,
    )
    _report(args.out, n, t0)
    return 0


def _cmd_gen(args) -> int:
    t0 = time.time()
    X = generate_gaussian_cloud(args.n, args.d, args.seed)
    header = [f"x{i}" for i in range(args.d)]
    n = _write_csv(args.out, header, (tuple(row) for row in X.coords), not args.no_timestamp)
    _report(args.out, n, t0)
    return 0


# ---------------------------------------------------------------- arg parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the leading timestamp comment line")


def _add_observation_source(p: argparse.ArgumentParser) -> None:
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--preset", choices=["uniform1d", "nonuniform1d"])
    grp.add_argument("--obs", help="CSV of observation points")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="covfield",
        description="CSV artifacts for posterior covariance fields, bounds, "
                    "estimators, LRSP approximation and AFN preconditioning",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", help="|R(x,y)| heatmap over [0,1]^2 (long form)")
    _add_observation_source(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=101)
    _add_common(p)
    p.set_defaults(func=_cmd_field)

    p = sub.add_parser("field2d", help="disk slice |R(x*, y)| with seeded x* and observations")
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--n-obs", type=int, default=25)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_field2d)

    p = sub.add_parser("bounds", help="pattern curves vs |R(x, y*)| per condition")
    p.add_argument("--condition", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--ystar", type=float, default=0.15)
    p.add_argument("--sigma", type=float, default=None,
                   help="default 0.05/0.05/0.4 for conditions 1/2/3")
    p.add_argument("--preset", choices=["uniform1d", "nonuniform1d"], default="uniform1d")
    p.add_argument("--obs", default=None)
    p.add_argument("--grid", type=int, default=101)
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("estimate", help="exact |R| field vs calibrated estimator field")
    _add_observation_source(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--grid", type=int, default=101)
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("gp-demo", help="posterior regression with true and estimated std bands")
    p.add_argument("--beta", type=float, default=GP_DEMO_BETA)
    p.add_argument("--sigma", type=float, default=GP_DEMO_SIGMA)
    p.add_argument("--n-obs", type=int, default=15)
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--grid", type=int, default=1001)
    _add_common(p)
    p.set_defaults(func=_cmd_gp_demo)

    p = sub.add_parser("svd", help="top singular values of the kernel matrix")
    p.add_argument("--equispaced", type=int, default=500)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--k", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=_cmd_svd)

    p = sub.add_parser("lrsp", help="low-rank vs LRSP error curves at equal storage")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--r0", type=int, default=100)
    p.add_argument("--delta-sweep", default="1:10:1", help="lo:hi:step in units of sigma")
    p.add_argument("--rank-sweep", default="100:660:40")
    _add_common(p)
    p.set_defaults(func=_cmd_lrsp)

    p = sub.add_parser("precond", help="three-method preconditioning benchmark table")
    p.add_argument("--gen", choices=["randn"], default="randn")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--data", default=None, help="CSV dataset instead of synthetic")
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--standardize", action="store_true",
                   help="standardize --data columns to zero mean, unit variance")
    p.add_argument("--seed", type=int, default=42,
                   help="data seed; landmarks/pattern/rhs use seed+1/+2/+3")
    p.add_argument("--r-fraction", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=None, help="default 2 sigma")
    p.add_argument("--percentile", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--maxit", type=int, default=1000)
    p.add_argument("--tau", type=float, default=PRECOND_DEFAULT_TAU,
                   help="noise level; the benchmark solves (K + tau^2 I) z = b")
    _add_common(p)
    p.set_defaults(func=_cmd_precond)

    p = sub.add_parser("gen", help="write a seeded standard-normal dataset CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_gen)

    return ap


def run(argv) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CovfieldError, OSError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
