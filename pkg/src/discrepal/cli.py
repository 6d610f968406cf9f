"""Command-line front end: tune, run, divergence, decompose, summarize.

Config values come from a flat-key JSON file; ``--set key=value`` and the
dedicated flags override the file, and the DISCREPAL_SEED environment
variable overrides the file's seed (explicit flags still win). Exit codes:
0 success, 2 usage or config problems, 1 runtime or numerical failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .data import load_csv
from .divergence import (build_d, discrepancy, mmd_spectral,
                         nuclear_discrepancy, spectrum_of_mk)
from .errors import ConfigError
from .harness import (ExperimentConfig, config_from_mapping, load_preprocessed,
                      read_curves_csv, run_decomposition, run_experiment,
                      tune_hyperparameters, write_curves_csv, write_summary_csv,
                      write_wtl_csv)
from .kernels import gaussian, gram, linear

ENV_SEED = "DISCREPAL_SEED"


def _fmt(x) -> str:
    return repr(float(x))


def _parse_set_value(key: str, raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        if key == "criteria":
            return [part.strip() for part in raw.split(",") if part.strip()]
        return raw


def _load_mapping(args) -> dict:
    mapping = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        mapping.update(loaded)
    if ENV_SEED in os.environ:
        try:
            mapping["seed"] = int(os.environ[ENV_SEED])
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, "
                              f"got {os.environ[ENV_SEED]!r}") from None
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        mapping[key.strip()] = _parse_set_value(key.strip(), raw)
    if getattr(args, "label_col", None):
        mapping["label_col"] = args.label_col
    if getattr(args, "parallel", None):
        mapping["parallel"] = args.parallel
    return mapping


def _load_config(args) -> ExperimentConfig:
    return config_from_mapping(_load_mapping(args))


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    curves = run_experiment(cfg)
    write_curves_csv(out / "curves.csv", curves)
    write_summary_csv(out / "summary.csv", curves)
    write_wtl_csv(out / "wtl.csv", curves, stride=cfg.stride,
                  p_threshold=cfg.p_threshold, method=cfg.ttest)
    return 0


def cmd_tune(args) -> int:
    cfg = _load_config(args)
    if not cfg.sigma_grid or not cfg.lambda_grid:
        raise ConfigError("tuning needs config keys 'sigma_grid' and 'lambda_grid'")
    data = load_preprocessed(cfg)
    sigma, lam = tune_hyperparameters(data, cfg.sigma_grid, cfg.lambda_grid,
                                      reps=cfg.tune_reps, seed=cfg.seed)
    print("sigma,lambda")
    print(f"{_fmt(sigma)},{_fmt(lam)}")
    return 0


def _parse_indices(raw: str, n: int) -> list:
    try:
        indices = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--labeled expects comma-separated integers, got {raw!r}") from None
    if not indices:
        raise ConfigError("--labeled must name at least one row")
    if len(set(indices)) != len(indices):
        raise ConfigError(f"--labeled has duplicate indices: {raw!r}")
    bad = [i for i in indices if not 0 <= i < n]
    if bad:
        raise ConfigError(f"--labeled indices out of range 0..{n - 1}: {bad}")
    return indices


def cmd_divergence(args) -> int:
    mapping = _load_mapping(args)
    label_col = mapping.get("label_col", "label")
    family = args.kernel or mapping.get("kernel.family", "gaussian")
    sigma = args.sigma if args.sigma is not None else float(mapping.get("kernel.sigma", 1.0))
    if family == "gaussian":
        kernel = gaussian(sigma)
    elif family == "linear":
        kernel = linear()
    else:
        raise ConfigError(f"--kernel must be gaussian or linear, got {family!r}")

    data = load_csv(args.dataset, label_col)
    labeled = _parse_indices(args.labeled, data.n)
    rest = np.setdiff1d(np.arange(data.n), np.asarray(labeled, dtype=np.intp))
    order = np.concatenate([np.asarray(labeled, dtype=np.intp), rest])
    x = data.features[order]
    k_pool = gram(kernel, x, x)
    spec = spectrum_of_mk(k_pool, build_d(data.n, len(labeled)))
    cap = args.lambda_cap
    print(f"{_fmt(discrepancy(spec, cap))},{_fmt(mmd_spectral(spec, cap))},"
          f"{_fmt(nuclear_discrepancy(spec, cap))}")
    return 0


def cmd_decompose(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    queries, bins, lq, lp = run_decomposition(cfg)
    with open(out / "decomp.csv", "w", newline="", encoding="utf-8") as handle:
        handle.write("query," + ",".join(bins) + ",LQ,LP\n")
        for i, q in enumerate(queries):
            cells = [str(int(q))]
            cells += [_fmt(bins[name][i]) for name in bins]
            cells += [_fmt(lq[i]), _fmt(lp[i])]
            handle.write(",".join(cells) + "\n")
    return 0


def cmd_summarize(args) -> int:
    mapping = _load_mapping(args)
    mapping.setdefault("dataset", "unused")
    cfg = config_from_mapping(mapping)
    out = _out_dir(args)
    curves_path = Path(args.curves) if args.curves else out / "curves.csv"
    if not curves_path.is_file():
        raise ConfigError(f"curves file not found: {curves_path}")
    curves = read_curves_csv(curves_path)
    write_summary_csv(out / "summary.csv", curves)
    write_wtl_csv(out / "wtl.csv", curves, stride=cfg.stride,
                  p_threshold=cfg.p_threshold, method=cfg.ttest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrepal",
                                     description="Pool-based active learning with "
                                                 "spectral divergence criteria")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat-key JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--out", help="output directory (created if absent)")
        p.add_argument("--label-col", help="label column name in the dataset CSV")
        p.add_argument("--parallel", type=int, help="worker processes for runs")

    p_run = sub.add_parser("run", help="run the benchmark and write curves/summary/wtl CSVs")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_tune = sub.add_parser("tune", help="grid-search sigma and lambda")
    common(p_tune)
    p_tune.set_defaults(func=cmd_tune)

    p_div = sub.add_parser("divergence", help="print discrepancy,mmd,nuclear for a labeled subset")
    common(p_div)
    p_div.add_argument("dataset", help="dataset CSV path")
    p_div.add_argument("--labeled", required=True, help="comma-separated labeled row indices")
    p_div.add_argument("--kernel", choices=["gaussian", "linear"], help="kernel family")
    p_div.add_argument("--sigma", type=float, help="gaussian bandwidth")
    p_div.add_argument("--lambda-cap", type=float, default=1.0,
                       help="hypothesis-ball radius scaling the printed values")
    p_div.set_defaults(func=cmd_divergence)

    p_dec = sub.add_parser("decompose", help="write per-query error-decomposition bins")
    common(p_dec)
    p_dec.set_defaults(func=cmd_decompose)

    p_sum = sub.add_parser("summarize", help="recompute summary.csv and wtl.csv from curves.csv")
    common(p_sum)
    p_sum.add_argument("--curves", help="input curves.csv (default: <out>/curves.csv)")
    p_sum.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical and runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
