"""Command line interface: ``irt test``, ``irt simulate``, ``irt verify``.

Configs and results are JSON, tabular outputs CSV. Every run requires an
explicit seed (flag, config, or the IRT_SEED environment variable); outputs
embed a digest of the resolved config so runs can be reproduced exactly.

Exit codes: 0 success, 2 validation/parse error, 3 compute budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .designs import BernoulliDesign, CompleteDesign, TwoStageDesign
from .errors import BudgetError, ParseError, ValidationError
from .imputation import imputer_from_spec
from .irt import irt_pvalue
from .network import (
    ThreeLevelExposure,
    build_network,
    cluster_network,
    load_cluster_csv,
    load_coords_csv,
    load_edge_csv,
    spatial_network,
)
from .simlab import (
    default_methods,
    gen_clustered,
    gen_spatial,
    run_rejection_study,
    write_rejection_csv,
)
from .teststat import observed_theta
from .verify import lr_expectation_curve, write_curve_csv


def config_digest(config: dict) -> str:
    """Stable sha256 over the canonicalized config."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _read_unit_column(path, column_type=float, allow_na=False):
    """CSV with columns unit,value; returns a dense per-unit array."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec:
                continue
            first = rec[0].strip()
            if not first.lstrip("-").isdigit():
                continue  # header
            raw = rec[1].strip()
            if raw.upper() == "NA":
                if not allow_na:
                    raise ParseError(f"{path}:{lineno}: NA not allowed here")
                rows.append((int(first), np.nan))
            else:
                try:
                    rows.append((int(first), column_type(raw)))
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    n = max(u for u, _ in rows) + 1
    out = np.full(n, np.nan)
    for u, v in rows:
        if not 0 <= u < n:
            raise ParseError(f"{path}: unit index {u} out of range")
        out[u] = v
    return out


def _build_network(spec: dict, n: int):
    kind = spec["kind"]
    one_indexed = spec.get("one_indexed", False)
    if kind == "edges":
        return load_edge_csv(spec["path"], n, one_indexed)
    if kind == "clusters":
        return cluster_network(load_cluster_csv(spec["path"], one_indexed))
    if kind == "spatial":
        coords = load_coords_csv(spec["path"], one_indexed)
        return spatial_network(coords, spec["radius"])
    if kind == "none":
        return build_network(n, [])
    raise ValidationError(f"unknown network kind: {kind!r}")


def _build_design(spec: dict, n: int):
    kind = spec["kind"]
    if kind == "bernoulli":
        return BernoulliDesign(n, spec["p"])
    if kind == "complete":
        return CompleteDesign(n, spec["m"])
    if kind == "two_stage":
        memberships = load_cluster_csv(
            spec["clusters"], spec.get("one_indexed", False)
        )
        return TwoStageDesign(memberships)
    raise ValidationError(f"unknown design kind: {kind!r}")


def load_experiment(config_path):
    """Load and validate a run config; returns the in-memory experiment.

    Returns (config, network, design, exposure_map, z_obs, y_obs,
    (a, b), partial).
    """
    config_path = Path(config_path)
    if not config_path.exists():
        raise ParseError(f"config not found: {config_path}")
    try:
        config = json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{config_path}: {exc}") from None
    base = config_path.parent

    def resolve(spec):
        if isinstance(spec, dict) and "path" in spec:
            spec = {**spec, "path": str(base / spec["path"])}
        return spec

    n = config["n"]
    network = _build_network(resolve(config["network"]), n)
    design_spec = dict(config["design"])
    if "clusters" in design_spec:
        design_spec["clusters"] = str(base / design_spec["clusters"])
    design = _build_design(design_spec, n)
    exposure_map = ThreeLevelExposure(network)
    a, b = config["contrast"]
    if a not in exposure_map.labels or b not in exposure_map.labels:
        raise ValidationError(
            f"contrast {config['contrast']} outside exposure set "
            f"{exposure_map.labels}"
        )
    z_obs = _read_unit_column(base / config["assignment"], int)
    y_obs = _read_unit_column(base / config["outcomes"], float, allow_na=True)
    if len(z_obs) != n or len(y_obs) != n:
        raise ValidationError("assignment/outcome files must cover all units")
    z_obs = z_obs.astype(np.int64)
    exposures = exposure_map(z_obs)
    focal = (exposures == a) | (exposures == b)
    if np.isnan(y_obs[focal]).any():
        raise ValidationError("focal units must have observed outcomes (no NA)")
    partial = observed_theta(exposures, np.nan_to_num(y_obs), a, b)
    return config, network, design, exposure_map, z_obs, y_obs, (a, b), partial


def _resolve_seed(args_seed, config_seed=None):
    env = os.environ.get("IRT_SEED")
    if env is not None:
        return int(env)
    if args_seed is not None:
        return int(args_seed)
    if config_seed is not None:
        return int(config_seed)
    raise ValidationError("a seed is required (flag, config, or IRT_SEED)")


def cmd_test(args):
    (
        config,
        network,
        design,
        exposure_map,
        z_obs,
        y_obs,
        (a, b),
        partial,
    ) = load_experiment(args.config)
    seed = _resolve_seed(args.seed, config.get("seed"))
    k = args.k or config.get("k", 2000)
    imputer = imputer_from_spec(config["imputer"])
    result = irt_pvalue(
        design, exposure_map, a, b, partial, imputer, z_obs, k=k, rng=seed
    )
    exposures = exposure_map(z_obs)
    labels, counts = np.unique(exposures, return_counts=True)
    payload = {
        "p_hat": result.p_hat,
        "k": result.k,
        "extreme_count": result.extreme_count,
        "undefined_resamples": result.undefined_resamples,
        "seed": seed,
        "n": int(network.n),
        "contrast": [a, b],
        "exposure_counts": {str(l): int(c) for l, c in zip(labels, counts)},
        "missing_rate": partial.missing_rate,
        "config_digest": config_digest(config),
        "version": __version__,
    }
    emit_json(payload, args.out)
    print(f"p_hat={result.p_hat:.6g} (k={result.k}, seed={seed})")


def _parse_tau_grid(text):
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        count = int(round((hi - lo) / step)) + 1
        return [round(lo + i * step, 10) for i in range(count)]
    return [float(x) for x in text.split(",")]


def cmd_simulate(args):
    seed = _resolve_seed(args.seed)
    n_datasets = args.datasets
    n_experiments = args.experiments
    if args.fast:
        n_datasets = min(n_datasets, 5)
        n_experiments = min(n_experiments, 200)
    method_names = args.methods.split(",")
    all_rows = []
    for tau in _parse_tau_grid(args.tau_grid):
        if args.scenario == "clustered":
            scenario = gen_clustered(
                args.K, tau, base_law=args.base_law, n_units=args.N or 300
            )
            scenario_id = f"clustered_K{args.K}"
        elif args.scenario == "spatial":
            scenario = gen_spatial(
                args.radius,
                args.p,
                tau,
                base_law=args.base_law,
                n_units=args.N or 1000,
            )
            scenario_id = f"spatial_r{args.radius}_p{args.p}"
        else:
            raise ValidationError(f"unknown scenario: {args.scenario!r}")
        methods = {
            name: factory
            for name, factory in default_methods(args.base_law).items()
            if name in method_names
        }
        missing = set(method_names) - set(methods)
        if missing:
            raise ValidationError(f"unknown methods: {sorted(missing)}")
        rows = run_rejection_study(
            scenario,
            methods,
            alpha=args.alpha,
            n_datasets=n_datasets,
            n_experiments=n_experiments,
            k=args.k,
            rng=np.random.SeedSequence([seed, int(round(tau * 1000))]),
            scenario_id=scenario_id,
        )
        all_rows.extend(rows)
    write_rejection_csv(all_rows, args.out)
    print(f"wrote {len(all_rows)} rows to {args.out}")


def cmd_verify(args):
    seed = _resolve_seed(args.seed)
    reps = 100 if args.fast else args.reps
    rates = [float(x) for x in args.rates.split(",")]
    n_grid = [int(x) for x in args.n_grid.split(",")]
    points = lr_expectation_curve(
        args.scenario, n_grid=n_grid, rates=rates, reps=reps, rng=seed
    )
    write_curve_csv(points, args.out)
    print(f"wrote {len(points)} curve points to {args.out}")


def emit_json(payload: dict, path):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irt",
        description="Imputation-based randomization tests for experiments "
        "with interference",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count(),
        help="cap on worker parallelism (computation is vectorized "
        "in-process; results never depend on this value)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="p-value for one experiment")
    p_test.add_argument("--config", required=True)
    p_test.add_argument("--seed", type=int, default=None)
    p_test.add_argument("--k", type=int, default=None)
    p_test.add_argument("--out", default=None)
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="rejection-rate study")
    p_sim.add_argument(
        "--scenario", required=True, choices=["clustered", "spatial"]
    )
    p_sim.add_argument("--K", type=int, default=75, help="cluster count")
    p_sim.add_argument("--N", type=int, default=None, help="unit count")
    p_sim.add_argument("--radius", type=float, default=0.01)
    p_sim.add_argument("--p", type=float, default=0.5)
    p_sim.add_argument("--tau-grid", default="0:1:0.1")
    p_sim.add_argument(
        "--methods", default="oracle,empirical,parametric,kernel"
    )
    p_sim.add_argument(
        "--base-law", default="normal", choices=["normal", "chi2_4", "t_4"]
    )
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--datasets", type=int, default=10)
    p_sim.add_argument("--experiments", type=int, default=1000)
    p_sim.add_argument("--k", type=int, default=2000)
    p_sim.add_argument("--fast", action="store_true")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="likelihood-ratio product curves")
    p_ver.add_argument(
        "--scenario",
        required=True,
        choices=["nig_normal", "kernel_normal", "beta_binomial", "empirical_binomial"],
    )
    p_ver.add_argument("--rates", default="0.5,0.6,0.7")
    p_ver.add_argument("--n-grid", default="100,1000,10000,100000")
    p_ver.add_argument("--reps", type=int, default=1000)
    p_ver.add_argument("--fast", action="store_true")
    p_ver.add_argument("--seed", type=int, default=None)
    p_ver.add_argument("--out", required=True)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
