"""Command-line frontend: dataset generation, single tests, full sweeps.

Every artifact file is paired with a ``<file>.manifest.json`` recording the
resolved configuration, seed, tool version and output hashes, which is
sufficient to reproduce the artifact bit for bit (the manifest itself carries
a timestamp and is the one file that differs between identical reruns).

Exit codes: 0 success, 1 runtime failure, 2 usage/validation error. All
numbers in CSV tables are written with 17 significant digits so re-parsing
round-trips exactly.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classical import bp_test, f_test_slope
from .dataset import LossKind, standardize
from .errors import SarError
from .generators import load_csv
from .harness import (
    REGIMES,
    SweepConfig,
    fold_variability,
    parse_method,
    power_table,
    run_sweep,
    sample_regime,
)
from .regressors import SvrConfig, ols_fit, predict, svr_fit
from .risk import PacBayesParams, sar_test

_GEN_REGIMES = ("gaussian2d", "transformed", "cluster", "hetero")
_REGIME_MAP = {
    "gaussian2d": "gaussian",
    "transformed": "transformed",
    "cluster": "cluster_pruned",
    "hetero": "heteroscedastic",
}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_manifest(command: str, config: dict, master_seed: int,
                    outputs: list[Path], manifest_path: Path) -> dict:
    manifest = {
        "schema_version": 1,
        "command": command,
        "tool_version": __version__,
        "master_seed": master_seed,
        "config": config,
        "timestamp": _utc_now(),
        "outputs": [
            {"path": str(p), "sha256": _sha256(p)} for p in outputs
        ],
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _write_dataset_csv(path: Path, dataset) -> None:
    names = dataset.column_names or tuple(f"x{j + 1}" for j in range(dataset.p))
    lines = [",".join(list(names) + ["y"])]
    for i in range(dataset.n):
        row = [_fmt(v) for v in dataset.predictors[i]] + [_fmt(dataset.response[i])]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def cmd_gen(args) -> int:
    regime = _REGIME_MAP[args.regime]
    config = {
        "regime": args.regime, "n": args.n, "tau": args.tau, "theta": args.theta,
        "p": args.p, "seed": args.seed, "n_clusters": args.n_clusters,
        "n_keep": args.n_keep, "out": str(args.out),
    }
    dataset = sample_regime(
        regime, args.n, args.tau, args.seed, theta=args.theta, p=args.p,
        n_clusters=args.n_clusters, n_keep=args.n_keep,
    )
    out = Path(args.out)
    _write_dataset_csv(out, dataset)
    manifest = _write_manifest("gen", config, args.seed, [out],
                               out.with_suffix(out.suffix + ".manifest.json"))
    print(json.dumps(manifest, indent=2))
    return 0


def cmd_test(args) -> int:
    loaded = load_csv(args.input, args.response,
                      args.predictors.split(",") if args.predictors else None)
    d = standardize(loaded.dataset)
    kind = LossKind.l1(0.0) if args.loss == "l1" else LossKind.l2()

    if args.method == "ols":
        model = ols_fit(d)
        fit_info = {"slope": list(model.slope), "intercept": model.intercept}
    else:
        cfg = SvrConfig(loss=LossKind.l1(0.0) if args.method == "svr_l1"
                        else LossKind.l2(), c=args.c)
        fit = svr_fit(d, cfg)
        model = fit.model
        fit_info = {
            "slope": list(model.slope), "intercept": model.intercept,
            "converged": fit.converged, "iterations": fit.iterations,
        }

    decision = sar_test(model, d, kind, PacBayesParams(eta=args.eta),
                        threshold_mode=args.threshold_mode)
    resid = d.response - predict(model, d.predictors)
    ftr = f_test_slope(resid, d.response, d.p)
    bpr = bp_test(resid, d)

    report = {
        "schema_version": 1,
        "method": args.method,
        "loss": args.loss,
        "n": d.n,
        "p": d.p,
        "dropped_rows": loaded.dropped_rows,
        "fit": fit_info,
        "R_N": decision.risk.empirical_risk,
        "Delta": decision.risk.delta,
        "R_corrected": decision.risk.corrected_risk,
        "R_u": decision.threshold,
        "sar": {
            "reject_null": decision.reject_null,
            "eta": decision.eta,
            "a": decision.a,
            "b": decision.b,
            "threshold_mode": decision.threshold_mode,
            "mesh_fallback": decision.mesh_fallback,
        },
        "f_test": {
            "F_star": ftr.statistic if math.isfinite(ftr.statistic) else "inf",
            "dof_num": ftr.dof_num,
            "dof_den": ftr.dof_den,
            "p_value": ftr.p_value,
            "degenerate": ftr.degenerate,
        },
        "bp_test": {
            "T": bpr.statistic,
            "dof": bpr.dof_num,
            "p_value": bpr.p_value,
        },
    }
    text = json.dumps(report, indent=2)
    if args.out:
        out = Path(args.out)
        out.write_text(text + "\n")
        _write_manifest("test", vars(args) | {"input": str(args.input)},
                        0, [out], out.with_suffix(out.suffix + ".manifest.json"))
    print(text)
    return 0


def _parse_sweep_config(path: str | None, overrides: dict) -> SweepConfig:
    raw: dict = {}
    if path:
        text = Path(path).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            raw = json.loads(text)
        else:
            for line in text.splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                raw[key.strip()] = value.strip()
    raw.update({k: v for k, v in overrides.items() if v is not None})

    def as_list(v, cast):
        if isinstance(v, str):
            return tuple(cast(s) for s in v.split(",") if s.strip())
        return tuple(cast(s) for s in v)

    known = {
        "taus": lambda v: as_list(v, float),
        "sample_sizes": lambda v: as_list(v, int),
        "realizations": int,
        "methods": lambda v: as_list(v, str),
        "regime": str,
        "alpha": float,
        "master_seed": int,
        "kfold_k": int,
        "eta": float,
        "svr_c": float,
        "theta": float,
        "n_clusters": int,
        "n_keep": int,
        "csv_path": str,
        "csv_response": str,
        "cv_residuals": str,
    }
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"unknown sweep config key {key!r}")
        kwargs[key] = known[key](value)
    for required in ("taus", "sample_sizes", "realizations", "methods"):
        if required not in kwargs:
            raise ValueError(f"sweep config is missing {required!r}")
    return SweepConfig(**kwargs)


def _write_table(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def cmd_sweep(args) -> int:
    overrides = {
        "taus": args.taus, "sample_sizes": args.sample_sizes,
        "realizations": args.realizations, "methods": args.methods,
        "regime": args.regime, "alpha": args.alpha,
        "master_seed": args.master_seed, "eta": args.eta,
    }
    cfg = _parse_sweep_config(args.config, overrides)
    result = run_sweep(cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    risk_rows = []
    for tau in cfg.taus:
        for n in cfg.sample_sizes:
            for m in cfg.methods:
                cell = result.records.get((tau, n, m))
                if cell is None:
                    continue
                risk_rows.append([
                    tau, n, m, cell.realizations, cell.mean_risk,
                    cell.mean_corrected_risk, cell.fold_std, cell.mean_f_pvalue,
                    cell.f_rejection_freq, cell.sar_threshold,
                    cell.sar_rejection_freq,
                ])
    risks_path = out_dir / "risks.csv"
    _write_table(
        risks_path,
        ["tau", "n", "method", "realizations", "mean_risk",
         "mean_corrected_risk", "fold_std", "mean_f_pvalue",
         "f_rejection_freq", "sar_threshold", "sar_rejection_freq"],
        risk_rows,
    )

    power_rows = [
        [r["tau"], r["n"], r["method"], r["power"], r["realizations"]]
        for r in power_table(result)
    ] if not result.failures else []
    if result.failures:
        # a failed cell would make power_table raise; emit the complete cells
        for tau in cfg.taus:
            for n in cfg.sample_sizes:
                for m in cfg.methods:
                    cell = result.records.get((tau, n, m))
                    if cell is None:
                        continue
                    _, scheme = parse_method(m)
                    power = (cell.sar_rejection_freq if scheme == "sar"
                             else cell.f_rejection_freq)
                    power_rows.append([tau, n, m, power, cell.realizations])
    power_path = out_dir / "power.csv"
    _write_table(power_path, ["tau", "n", "method", "power", "realizations"],
                 power_rows)

    fold_rows = [
        [key[0], key[1], key[2], value]
        for key, value in sorted(fold_variability(result).items(),
                                 key=lambda kv: (kv[0][0], kv[0][1], kv[0][2]))
    ]
    fold_path = out_dir / "fold_variance.csv"
    _write_table(fold_path, ["tau", "n", "method", "fold_std"], fold_rows)

    outputs = [risks_path, power_path, fold_path]
    manifest = _write_manifest(
        "sweep",
        {"config_file": args.config, "resolved": {
            "taus": list(cfg.taus), "sample_sizes": list(cfg.sample_sizes),
            "realizations": cfg.realizations, "methods": list(cfg.methods),
            "regime": cfg.regime, "alpha": cfg.alpha,
            "master_seed": cfg.master_seed, "kfold_k": cfg.kfold_k,
            "eta": cfg.eta, "svr_c": cfg.svr_c, "theta": cfg.theta,
            "n_clusters": cfg.n_clusters, "n_keep": cfg.n_keep,
            "csv_path": cfg.csv_path, "csv_response": cfg.csv_response,
            "cv_residuals": cfg.cv_residuals,
        }},
        cfg.master_seed, outputs, out_dir / "sweep.manifest.json",
    )
    print(json.dumps(manifest, indent=2))

    if result.failures:
        print(f"{len(result.failures)} cell(s) had failures:", file=sys.stderr)
        for key, msg in result.failures:
            print(f"  {key}: {msg}", file=sys.stderr)
    return 0 if result.records else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sar",
        description="Linear-regression significance via risk bounds, plus "
                    "classical tests, generators and Monte Carlo sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    g.add_argument("--regime", choices=_GEN_REGIMES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--tau", type=float, default=0.0)
    g.add_argument("--theta", type=float, default=math.pi / 4)
    g.add_argument("--p", type=int, default=1, help="predictors (transformed regime)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-clusters", type=int, default=8)
    g.add_argument("--n-keep", type=int, default=3)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("test", help="run significance tests on a CSV dataset")
    t.add_argument("--input", required=True)
    t.add_argument("--response", default="y")
    t.add_argument("--predictors", default=None,
                   help="comma-separated predictor columns (default: all others)")
    t.add_argument("--method", choices=("ols", "svr_l1", "svr_l2"), default="ols")
    t.add_argument("--loss", choices=("l1", "l2"), default="l2")
    t.add_argument("--eta", type=float, default=0.5)
    t.add_argument("--c", type=float, default=10.0)
    t.add_argument("--threshold-mode", choices=("analytic", "mesh"),
                   default="analytic")
    t.add_argument("--out", default=None, help="also write the JSON report here")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep and emit tables")
    s.add_argument("--config", default=None,
                   help="JSON or key=value config file")
    s.add_argument("--taus", default=None)
    s.add_argument("--sample-sizes", dest="sample_sizes", default=None)
    s.add_argument("--realizations", type=int, default=None)
    s.add_argument("--methods", default=None)
    s.add_argument("--regime", choices=REGIMES, default=None)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--master-seed", dest="master_seed", type=int, default=None)
    s.add_argument("--eta", type=float, default=None)
    s.add_argument("--out-dir", default="sweep_out")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SarError, ValueError) as exc:
        kind = type(exc).__name__
        if args.command == "test":
            print(json.dumps({"error": {"type": kind, "message": str(exc)}}))
        else:
            print(f"error: {kind}: {exc}", file=sys.stderr)
        # validation problems are usage errors; IO/numeric ones are runtime
        from .errors import (
            BadFoldCount, DomainError, MissingColumn, ParseError, TooFewRows,
        )

        if isinstance(exc, (DomainError, BadFoldCount, ValueError)) and not isinstance(
            exc, (ParseError, MissingColumn, TooFewRows)
        ):
            return 2
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
