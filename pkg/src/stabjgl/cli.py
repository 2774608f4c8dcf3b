"""Command-line front end: ``simulate``, ``infer`` and ``evaluate``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .admm import SolverOptions
from .core import GroupedDataset, sparsity_of
from .ebic import EbicConfig
from .exceptions import StabJGLError, StageError
from .fileio import (InputFormatError, ensure_writable_dir, read_edge_sets, read_matrix_csv,
                     write_estimated_edges, write_json, write_matrix_csv, write_truth_edges)
from .metrics import confusion, mcc, precision_recall
from .parallel import worker_pool
from .pipeline import run_stabjgl
from .stability import StabilityConfig
from .synthetic import SimulationSpec, simulate

log = logging.getLogger("stabjgl")

EXIT_INPUT = 2
EXIT_SOLVER = 3


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> tuple:
    """``lo:hi:count`` with inclusive, evenly spaced endpoints."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid {text!r} is not of the form lo:hi:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid {text!r} has non-numeric parts") from None
    if count < 1 or (count > 1 and hi < lo):
        raise argparse.ArgumentTypeError(f"grid {text!r} needs count >= 1 and hi >= lo")
    if count == 1:
        return (lo,)
    return tuple(np.linspace(lo, hi, count).tolist())


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list") from None


def _float_pair(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"{text!r} is not 'lo,hi'")
    return vals


def _path_list(text: str) -> list:
    return [Path(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabjgl", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate a synthetic multi-network instance")
    sp.add_argument("--p", type=int, default=100)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--n", type=_int_list, default=(150, 200, 300))
    sp.add_argument("--sparsity", type=float, default=0.02)
    sp.add_argument("--similarity", type=float, default=1.0)
    sp.add_argument("--pcor-range", type=_float_pair, default=(0.1, 0.2))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=Path, required=True, help="output directory")

    ip = sub.add_parser("infer", help="select penalties and fit the joint model")
    ip.add_argument("--inputs", type=_path_list, required=True,
                    help="comma-separated CSV files, one per group")
    ip.add_argument("--group-names", type=lambda s: s.split(","), default=None)
    ip.add_argument("--beta1", type=float, default=0.1)
    ip.add_argument("--gamma", type=float, default=0.0)
    ip.add_argument("--nsample", type=int, default=20)
    ip.add_argument("--lambda1-grid", type=parse_grid, default=parse_grid("0.01:1:20"))
    ip.add_argument("--lambda2-grid", type=parse_grid, default=parse_grid("0:0.1:20"))
    ip.add_argument("--lambda2-init", type=float, default=0.01)
    ip.add_argument("--subsample-cap", type=float, default=0.8)
    ip.add_argument("--no-standardize", action="store_true")
    ip.add_argument("--rho", type=float, default=1.0)
    ip.add_argument("--max-iter", type=int, default=500)
    ip.add_argument("--tol", type=float, default=1e-5)
    ip.add_argument("--zero-eps", type=float, default=1e-10)
    ip.add_argument("--weights", choices=("equal", "sample_size"), default="equal")
    ip.add_argument("--seed", type=int, default=0)
    ip.add_argument("--threads", type=int, default=1)
    ip.add_argument("--out", type=Path, required=True, help="output directory")

    ep = sub.add_parser("evaluate", help="compare estimated edge lists with the truth")
    ep.add_argument("--estimates", type=_path_list, required=True,
                    help="comma-separated edge-list TSVs, one per group")
    ep.add_argument("--truth", type=Path, required=True, help="truth edge-list TSV")
    ep.add_argument("--p", type=int, default=None, help="node count if files lack it")
    ep.add_argument("--out", type=Path, required=True, help="metrics JSON path")
    return ap


def cmd_simulate(args) -> int:
    spec = SimulationSpec(p=args.p, K=args.k, n=args.n, target_sparsity=args.sparsity,
                          similarity=args.similarity, partial_corr_range=args.pcor_range,
                          seed=args.seed)
    out = ensure_writable_dir(args.out)
    inst = simulate(spec)
    names = inst.data.variable_names
    for k in range(spec.K):
        write_matrix_csv(out / f"data_group{k + 1}.csv", inst.data.groups[k], names)
        write_matrix_csv(out / f"precision_group{k + 1}.csv", inst.precisions[k], names)
    write_truth_edges(out / "truth_edges.tsv", inst.edge_sets, spec.p)
    write_json(out / "manifest.json", {
        "spec": asdict(spec),
        "seed": spec.seed,
        "measured_similarity": inst.measured_similarity(),
        "measured_sparsity": inst.measured_sparsity(),
        "files": {"data": [f"data_group{k + 1}.csv" for k in range(spec.K)],
                  "precision": [f"precision_group{k + 1}.csv" for k in range(spec.K)],
                  "truth_edges": "truth_edges.tsv"},
    })
    log.info("wrote instance to %s", out)
    return 0


def load_groups(paths, group_names=None) -> GroupedDataset:
    mats, names = [], None
    for path in paths:
        m, hdr = read_matrix_csv(path)
        if mats and m.shape[1] != mats[0].shape[1]:
            raise UsageError(f"column count mismatch: {paths[0]} has {mats[0].shape[1]} "
                             f"columns, {path} has {m.shape[1]}")
        mats.append(m)
        names = names or hdr
    if group_names is not None and len(group_names) != len(mats):
        raise UsageError(f"{len(group_names)} group names for {len(mats)} inputs")
    return GroupedDataset(mats, variable_names=names, group_names=group_names)


def cmd_infer(args) -> int:
    stab = StabilityConfig(lambda1_grid=args.lambda1_grid, lambda2_init=args.lambda2_init,
                           beta1=args.beta1, n_sample=args.nsample,
                           subsample_cap_ratio=args.subsample_cap, seed=args.seed)
    ebic_cfg = EbicConfig(lambda2_grid=args.lambda2_grid, gamma=args.gamma)
    solver = SolverOptions(admm_rho=args.rho, max_iter=args.max_iter, primal_tol=args.tol,
                           dual_tol=args.tol, zero_eps=args.zero_eps, weights=args.weights)
    if args.threads < 1:
        raise UsageError("--threads must be positive")
    out = ensure_writable_dir(args.out)
    data = load_groups(args.inputs, args.group_names)

    with worker_pool(args.threads) as pool:
        res = run_stabjgl(data, stab, ebic_cfg, solver, standardize=not args.no_standardize,
                          executor=pool)

    vt, et = res.variability, res.ebic
    edge_files = []
    for k in range(data.K):
        name = f"edges_group{k + 1}.tsv"
        write_estimated_edges(out / name, res.edge_sets[k], res.precision.theta[k],
                              res.partial_correlations[k])
        edge_files.append(name)
    write_json(out / "result.json", {
        "lambda1": res.lambda1,
        "lambda2": res.lambda2,
        "p": data.p,
        "K": data.K,
        "n": list(data.n),
        "sparsity": res.sparsity,
        "n_edges": [len(e) for e in res.edge_sets],
        "lambda1_warning": vt.warning,
        "variability": [[l, d, b] for l, d, b in zip(vt.lambda1_grid, vt.d_hat, vt.d_bar)],
        "ebic": [[l, s] for l, s in zip(et.lambda2_grid, et.scores)],
        "timings": res.timings,
        "config": {"stability": asdict(stab), "ebic": asdict(ebic_cfg), "solver": asdict(solver),
                   "standardize": not args.no_standardize,
                   "inputs": [str(p) for p in args.inputs]},
        "seed": args.seed,
        "variable_names": data.variable_names,
        "group_names": data.group_names,
        "edge_files": edge_files,
    })
    log.info("lambda1=%g lambda2=%g", res.lambda1, res.lambda2)
    return 0


def cmd_evaluate(args) -> int:
    estimates = [read_edge_sets(path, args.p)[0] for path in args.estimates]
    p = estimates[0].p
    if any(e.p != p for e in estimates):
        raise UsageError("estimated edge lists disagree on p")
    truth = read_edge_sets(args.truth, args.p if args.p is not None else p, len(estimates))
    if truth[0].p != p:
        raise UsageError(f"truth has p={truth[0].p}, estimates have p={p}")
    if len(truth) != len(estimates):
        raise UsageError(f"{len(estimates)} estimates but {len(truth)} truth groups")
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    groups = []
    for k, (est, tru) in enumerate(zip(estimates, truth), start=1):
        c = confusion(est, tru)
        prec, rec = precision_recall(c)
        groups.append({"group": k, "sparsity": sparsity_of(est), "precision": prec,
                       "recall": rec, "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn})
    K = len(estimates)
    mat = [[mcc(estimates[a], estimates[b]) for b in range(K)] for a in range(K)]
    write_json(args.out, {"p": p, "groups": groups, "pairwise_mcc": mat})
    return 0


COMMANDS = {"simulate": cmd_simulate, "infer": cmd_infer, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, InputFormatError, StabJGLError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
