"""Command-line interface: lap-eig <subcommand>.

Exit codes: 0 on success, 2 on a validation error, 3 on solver failure.
File formats are plain JSON/CSV so downstream plotting stays decoupled.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np
from scipy import sparse

from . import harness, singular
from .errors import LapeigError, SolverFailure
from .graph import NeighborhoodGraph, build_graph, epsilon_schedule
from .kernels import kernel_constants, parse_kernel
from .manifolds import PointCloud, make_manifold, parse_density, sample_iid
from .spectral import (normalized_spectrum, rescale_normalized,
                       rescale_unnormalized, unnormalized_spectrum)
from .kernels import sigma_eta, sigma_tilde_eta


def _write_json(obj, path: str | None):
    text = json.dumps(obj, indent=1)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _cloud_to_json(cloud: PointCloud, manifold: str, density: str) -> dict:
    params = np.atleast_2d(cloud.params.T).T  # (n,) -> (n, 1)
    return {
        "manifold": manifold,
        "density": density,
        "seed": cloud.seed,
        "n": cloud.n,
        "points_ambient": cloud.ambient.tolist(),
        "params_intrinsic": params.tolist(),
    }


def _cloud_from_json(obj: dict) -> PointCloud:
    model = make_manifold(obj["manifold"], parse_density(obj["density"]))
    params = np.asarray(obj["params_intrinsic"], dtype=float)
    if model.m == 1:
        params = params.ravel()
    return PointCloud(manifold_id=model.label, n=int(obj["n"]), seed=int(obj["seed"]),
                      params=params,
                      ambient=np.asarray(obj["points_ambient"], dtype=float),
                      model=model)


def _graph_to_json(graph: NeighborhoodGraph, m: int) -> dict:
    trips = graph.triplets()
    return {
        "n": graph.n,
        "eps": graph.eps,
        "kernel": graph.kernel_id,
        "metric": graph.metric,
        "m": m,
        "triplets": [[int(i), int(j), float(v)] for i, j, v in trips],
    }


def _graph_from_json(obj: dict) -> tuple[NeighborhoodGraph, int]:
    trips = np.asarray(obj["triplets"], dtype=float)
    n = int(obj["n"])
    kmat = sparse.coo_matrix((trips[:, 2], (trips[:, 0].astype(int),
                                            trips[:, 1].astype(int))),
                             shape=(n, n)).tocsr()
    degrees = np.asarray(kmat.sum(axis=1)).ravel()
    graph = NeighborhoodGraph(n=n, eps=float(obj["eps"]), kernel_id=obj["kernel"],
                              metric=obj.get("metric", "ambient"),
                              kernel_matrix=kmat, degrees=degrees)
    return graph, int(obj["m"])


def _cmd_kernel_info(args) -> int:
    kernel = parse_kernel(args.kernel)
    consts = kernel_constants(kernel, args.m)
    _write_json({"sigma_eta": consts.sigma_eta,
                 "sigma_tilde_eta": consts.sigma_tilde_eta}, args.out)
    return 0


def _cmd_sample(args) -> int:
    model = make_manifold(args.manifold, parse_density(args.density))
    cloud = sample_iid(model, args.n, args.seed)
    _write_json(_cloud_to_json(cloud, args.manifold, args.density), args.out)
    return 0


def _parse_eps(text: str, n: int, m: int) -> float:
    if text.startswith("auto"):
        c = float(text.split(":", 1)[1]) if ":" in text else 1.0
        return epsilon_schedule(n, m, c)
    return float(text)


def _cmd_graph(args) -> int:
    with open(args.infile) as fh:
        cloud = _cloud_from_json(json.load(fh))
    kernel = parse_kernel(args.kernel)
    eps = _parse_eps(args.eps, cloud.n, cloud.model.m)
    graph = build_graph(cloud, kernel, eps, metric=args.metric)
    _write_json(_graph_to_json(graph, cloud.model.m), args.out)
    return 0


def _cmd_spectrum(args) -> int:
    with open(args.infile) as fh:
        graph, m = _graph_from_json(json.load(fh))
    kernel = parse_kernel(graph.kernel_id)
    sig = sigma_eta(kernel, m)
    if args.normalized:
        spec = normalized_spectrum(graph, args.k, kernel=kernel, m=m)
        rescaled = rescale_normalized(spec.values, graph.eps, sig,
                                      sigma_tilde_eta(kernel, m))
        mode = "normalized"
    else:
        spec = unnormalized_spectrum(graph, args.k)
        rescaled = rescale_unnormalized(spec.values, graph.n, graph.eps, sig, m)
        mode = "unnormalized"
    _write_json({"mode": mode, "k": args.k,
                 "values": [float(v) for v in spec.values],
                 "rescaled": [float(v) for v in rescaled],
                 "eps": graph.eps, "n": graph.n}, args.out)
    return 0


def _cmd_converge(args) -> int:
    config = harness.ExperimentConfig(
        manifold=args.manifold, density=args.density, kernel=args.kernel,
        mode=args.mode, k_max=args.k_max,
        n_grid=tuple(int(x) for x in args.n_grid.split(",")),
        trials=args.trials, master_seed=args.seed, eps_rule=args.eps,
        metric=args.metric, threads=args.threads)
    report = harness.run_convergence(config)
    harness.emit_report(report, args.out, args.format)
    med = report.medians()
    for n in sorted(med):
        print(f"n={n}: median rel error {med[n][0]:.4f} (IQR {med[n][1]:.4f})",
              file=sys.stderr)
    return 0


def _cmd_align(args) -> int:
    k, l = (int(x) for x in args.block.split(","))
    config = harness.ExperimentConfig(
        manifold=args.manifold, density=args.density, kernel=args.kernel,
        k_max=max(args.k_max, l + 1), n_grid=(args.n,), trials=args.trials,
        master_seed=args.seed, eps_rule=args.eps, metric=args.metric)
    summary = harness.run_eigvec_alignment(config, k, l)
    obj = {
        "block": list(summary.block),
        "gap": summary.gap,
        "trials": [
            {"seed_index": t.seed_index, "max_residual": t.max_residual,
             "principal_angles": [float(a) for a in t.principal_angles],
             "mass_discrepancy": t.mass_discrepancy}
            for t in summary.trials
        ],
    }
    _write_json(obj, args.out)
    return 0


def _cmd_interp(args) -> int:
    from .interp import InterpolationContext, lambda_eps
    with open(args.cloud) as fh:
        cloud = _cloud_from_json(json.load(fh))
    with open(args.u) as fh:
        u = np.asarray(json.load(fh), dtype=float)
    kernel = parse_kernel(args.kernel)
    eps = _parse_eps(args.eps, cloud.n, cloud.model.m)
    ctx = InterpolationContext(cloud=cloud, kernel=kernel, eps=eps)
    if not args.query.startswith("grid:"):
        raise LapeigError(f"unknown query spec {args.query!r}; use grid:<N>")
    count = int(args.query.split(":", 1)[1])
    if cloud.model.m != 1:
        raise LapeigError("interp query grids are built for 1-D chart models")
    theta = (np.arange(count) + 0.5) * 2.0 * math.pi / count
    vals = lambda_eps(ctx, u, theta)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["theta", "value"])
        for t, v in zip(theta, vals):
            writer.writerow([repr(float(t)), repr(float(v))])
    return 0


def _cmd_sensitivity(args) -> int:
    config = singular.SensitivityConfig(
        alpha=args.alpha, m2_radius=args.r,
        eps_grid=tuple(float(x) for x in args.eps_grid.split(",")),
        quad_resolution=args.quad)
    if args.m != 2:
        raise LapeigError("the sensitivity experiment is built for m = 2")
    rows = harness.corner_l1_sweep(config)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eps", "l1_deviation", "limit_rhs"])
        for row in rows:
            writer.writerow([repr(row.eps), repr(row.l1_deviation),
                             repr(row.limit_rhs)])
    return 0


def _cmd_dyadic(args) -> int:
    if args.theta.startswith("geometric:"):
        ratio = float(args.theta.split(":", 1)[1])
        theta = singular.geometric_theta(ratio)
    else:
        raise LapeigError(f"unknown theta spec {args.theta!r}; use geometric:<r>")
    profile = singular.dyadic_profile(theta, args.level)
    slopes = singular.dyadic_slopes(profile)
    xs = profile.grid()
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "alpha", "d_n", "e_n"])
        for i, x in enumerate(xs[:-1]):
            writer.writerow([repr(float(x)), repr(float(profile.alpha[i])),
                             repr(float(slopes.slopes[i])),
                             repr(float(slopes.jumps[i]))])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lap-eig",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-info", help="print kernel moment constants as JSON")
    p.add_argument("--kernel", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_kernel_info)

    p = sub.add_parser("sample", help="draw an i.i.d. cloud and write cloud.json")
    p.add_argument("--manifold", required=True,
                   choices=["circle", "torus", "sphere", "square", "singular"])
    p.add_argument("--density", default="const")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("graph", help="build the neighborhood graph from a cloud")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--eps", required=True, help="a number, or auto[:c]")
    p.add_argument("--kernel", default="indicator")
    p.add_argument("--metric", default="ambient", choices=["ambient", "intrinsic"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("spectrum", help="solve for the lowest eigenpairs of a graph")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("converge", help="run a convergence sweep over sample sizes")
    p.add_argument("--manifold", default="circle")
    p.add_argument("--density", default="const")
    p.add_argument("--kernel", default="indicator")
    p.add_argument("--mode", default="unnormalized",
                   choices=["unnormalized", "normalized"])
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--n-grid", default="512,1024,2048,4096")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=20240501)
    p.add_argument("--eps", default="auto:1")
    p.add_argument("--metric", default="ambient", choices=["ambient", "intrinsic"])
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("align", help="eigenvector block alignment on the circle")
    p.add_argument("--manifold", default="circle")
    p.add_argument("--density", default="const")
    p.add_argument("--kernel", default="indicator")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--block", default="1,2")
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=20240501)
    p.add_argument("--eps", default="auto:1")
    p.add_argument("--metric", default="ambient", choices=["ambient", "intrinsic"])
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("interp", help="evaluate the interpolation operator on a grid")
    p.add_argument("--cloud", required=True)
    p.add_argument("--u", required=True, help="JSON array of per-sample values")
    p.add_argument("--query", default="grid:256")
    p.add_argument("--eps", required=True, help="a number, or auto[:c]")
    p.add_argument("--kernel", default="indicator")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_interp)

    p = sub.add_parser("sensitivity", help="corner-defect sweep on square x circle")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--eps-grid", default="0.2,0.1,0.05,0.025")
    p.add_argument("--quad", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("dyadic", help="emit the dyadic bump profile as CSV")
    p.add_argument("--theta", default="geometric:0.5")
    p.add_argument("--level", type=int, default=12)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dyadic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (LapeigError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
