"""Command-line interface.

Subcommands:

* ``check``     -- expansion verdict as JSON; exit 0 = reliable (no floor),
                   2 = floor predicted, 1 = input error
* ``expand``    -- same JSON report, always exit 0 on success
* ``bound``     -- TSV of the error bound over a noise grid
* ``simulate``  -- TSV of Monte Carlo error plus the bound over a grid
* ``angles``    -- principal angles / distances between two CSV bases
* ``phase``     -- training-set-size phase transition over a labeled dataset
* ``gen-synth`` -- write a synthetic union-of-subspaces dataset CSV

The default seed comes from SUBSPACE_MISMATCH_SEED when set.  All outputs
are plain text (TSV or JSON) so they pipe straight into plotting tools.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bounds, experiments, expansion, numlin
from .errors import SubspaceMismatchError
from .expansion import Verdict
from .model import load_dataset_csv, load_instance, save_dataset_csv
from .subspace import Subspace, principal_angles, d_max, d_min

_SEED_ENV = "SUBSPACE_MISMATCH_SEED"


def _default_seed() -> int:
    return int(os.environ.get(_SEED_ENV, "0"))


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", help="named catalog instance")
    src.add_argument("--instance", help="path to an instance JSON file")


def _add_policy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--alpha-fraction",
        type=float,
        default=0.5,
        help="fraction of the admissible tilting range to use (default 0.5)",
    )
    p.add_argument(
        "--alpha-fallback",
        type=float,
        default=1e-3,
        help="tilting value for pairs with an undefined admissible range",
    )


def _positive(p: argparse.ArgumentParser, name: str, default: float, help_: str) -> None:
    p.add_argument(name, type=float, default=default, help=help_)


def _resolve_instance(args):
    if args.catalog:
        return experiments.resolve_catalog(args.catalog).instance
    return load_instance(args.instance)


def _policy(args) -> bounds.AlphaPolicy:
    return bounds.AlphaPolicy(fraction=args.alpha_fraction, fallback=args.alpha_fallback)


def _parse_db_grid(spec: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma-separated list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec {spec!r} must be start:stop:step")
        start, stop, step = (float(v) for v in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        return [float(v) for v in np.arange(start, stop + step / 2, step)]
    values = [float(v) for v in spec.split(",") if v.strip()]
    if not values:
        raise ValueError("empty noise grid")
    return values


def _write_output(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_json(report) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"


def _cmd_check(args) -> int:
    instance = _resolve_instance(args)
    report = expansion.expand(instance, _policy(args))
    _write_output(_report_json(report), args.out)
    return 0 if report.verdict is Verdict.NO_FLOOR else 2


def _cmd_expand(args) -> int:
    instance = _resolve_instance(args)
    report = expansion.expand(instance, _policy(args))
    _write_output(_report_json(report), args.out)
    return 0


def _cmd_bound(args) -> int:
    instance = _resolve_instance(args)
    policy = _policy(args)
    grid_db = _parse_db_grid(args.snr_db)
    geoms = bounds.all_pair_geometries(instance, policy)
    points = [
        bounds.theorem1_bound(instance, experiments.db_to_sigma2(db), policy, geometries=geoms)
        for db in grid_db
    ]
    _write_output(experiments.bound_tsv(points, instance.n_classes), args.out)
    return 0


def _cmd_simulate(args) -> int:
    instance = _resolve_instance(args)
    policy = _policy(args)
    grid_db = _parse_db_grid(args.snr_db)
    if args.trials < 1:
        raise ValueError("trials must be at least 1")
    rows = experiments.sweep_noise(
        instance,
        [experiments.db_to_sigma2(db) for db in grid_db],
        args.trials,
        args.seed,
        threads=args.threads,
        policy=policy,
    )
    _write_output(experiments.sweep_tsv(rows, instance.n_classes), args.out)
    return 0


def _cmd_angles(args) -> int:
    a = Subspace.from_span(numlin.read_matrix_csv(args.basis_a))
    b = Subspace.from_span(numlin.read_matrix_csv(args.basis_b))
    pa = principal_angles(a, b)
    payload = {
        "cosines": [float(c) for c in pa.cosines],
        "angles_rad": [float(t) for t in pa.angles],
        "d_max": d_max(a, b),
        "d_min": d_min(a, b),
    }
    if args.format == "json":
        _write_output(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = ["quantity\tvalues"]
        lines.append("cosines\t" + ",".join(f"{c:.12g}" for c in pa.cosines))
        lines.append("angles_rad\t" + ",".join(f"{t:.12g}" for t in pa.angles))
        lines.append(f"d_max\t{payload['d_max']:.12g}")
        lines.append(f"d_min\t{payload['d_min']:.12g}")
        _write_output("\n".join(lines) + "\n", args.out)
    return 0


def _parse_n_grid(args, n_classes: int):
    cells = []
    if args.n_grid:
        for chunk in args.n_grid.split(";"):
            if not chunk.strip():
                continue
            cells.append(tuple(int(v) for v in chunk.split(",")))
    if args.n_star:
        for v in args.n_star.split(","):
            if v.strip():
                cells.append((int(v),) * n_classes)
    if not cells:
        raise ValueError("provide --n-grid or --n-star")
    return cells


def _cmd_phase(args) -> int:
    features, labels = load_dataset_csv(args.dataset)
    n_classes = int(np.unique(labels).size)
    cells = experiments.phase_transition(
        features,
        labels,
        rank=args.rank,
        mismatched_rank=args.mismatched_rank,
        n_grid=_parse_n_grid(args, n_classes),
        runs=args.runs,
        p_p=args.p_p,
        sigma2_eval=args.sigma2_eval,
        seed=args.seed,
        train_pool=args.train_pool,
        policy=_policy(args),
    )
    _write_output(experiments.phase_tsv(cells), args.out)
    return 0


def _cmd_gen_synth(args) -> int:
    features, labels = experiments.gen_synthetic(
        n_classes=args.classes,
        ambient_dim=args.ambient_dim,
        rank=args.rank,
        per_class=args.per_class,
        noise_std=args.noise_std,
        seed=args.seed,
    )
    save_dataset_csv(args.out, features, labels)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspace-mismatch",
        description="Reliability analysis of Gaussian subspace classification "
        "with mismatched model parameters.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_check = subs.add_parser("check", help="expansion verdict (exit 0 reliable, 2 floor)")
    p_expand = subs.add_parser("expand", help="expansion report as JSON")
    for p in (p_check, p_expand):
        _add_instance_args(p)
        _add_policy_args(p)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.set_defaults(func=_cmd_check if p is p_check else _cmd_expand)

    p_bound = subs.add_parser("bound", help="bound sweep TSV over a noise grid")
    p_sim = subs.add_parser("simulate", help="Monte Carlo + bound sweep TSV")
    for p in (p_bound, p_sim):
        _add_instance_args(p)
        _add_policy_args(p)
        p.add_argument(
            "--snr-db",
            default="0:90:10",
            help="grid of 10 log10(1/sigma2) values: start:stop:step or comma list",
        )
        p.add_argument("--out", help="write the TSV here instead of stdout")
    p_bound.set_defaults(func=_cmd_bound)
    p_sim.add_argument("--trials", type=int, default=100000, help="Monte Carlo trials per point")
    p_sim.add_argument("--seed", type=int, default=None, help="master seed")
    p_sim.add_argument("--threads", type=int, default=1, help="worker threads for batches")
    p_sim.set_defaults(func=_cmd_simulate)

    p_angles = subs.add_parser("angles", help="principal angles between two CSV bases")
    p_angles.add_argument("basis_a", help="CSV whose columns span the first subspace")
    p_angles.add_argument("basis_b", help="CSV whose columns span the second subspace")
    p_angles.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p_angles.add_argument("--out")
    p_angles.set_defaults(func=_cmd_angles)

    p_phase = subs.add_parser("phase", help="training-set-size phase transition")
    p_phase.add_argument("--dataset", required=True, help="label-first dataset CSV")
    p_phase.add_argument("--rank", type=int, required=True, help="rank of the pool models")
    p_phase.add_argument(
        "--mismatched-rank", type=int, required=True, help="rank of the n-sample models"
    )
    p_phase.add_argument("--n-grid", help="cells like '4,4,4;24,24,24' (one count per class)")
    p_phase.add_argument("--n-star", help="comma list of uniform per-class counts")
    p_phase.add_argument("--runs", type=int, default=100)
    p_phase.add_argument("--p-p", type=float, default=0.9, help="reporting probability")
    p_phase.add_argument(
        "--sigma2-eval", type=float, required=True, help="noise variance used at test time"
    )
    p_phase.add_argument("--train-pool", type=int, default=None, help="pool size per class")
    p_phase.add_argument("--seed", type=int, default=None)
    p_phase.add_argument("--out")
    _add_policy_args(p_phase)
    p_phase.set_defaults(func=_cmd_phase)

    p_gen = subs.add_parser("gen-synth", help="write a synthetic dataset CSV")
    p_gen.add_argument("--classes", type=int, default=3)
    p_gen.add_argument("--ambient-dim", type=int, default=30)
    p_gen.add_argument("--rank", type=int, default=4)
    p_gen.add_argument("--per-class", type=int, default=100)
    p_gen.add_argument("--noise-std", type=float, default=0.2)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for floor verdicts
        return 0 if exc.code in (0, None) else 1
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = _default_seed()
    if hasattr(args, "alpha_fraction") and not (0.0 < args.alpha_fraction < 1.0):
        print("error: --alpha-fraction must lie in (0, 1)", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (SubspaceMismatchError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
