"""Command-line recipes: simulate, identify, validate, pareto, dmd.

Every command reads an experiment config (JSON or TOML), lets flags
override it, and writes its outputs plus the resolved config into one
output directory. Exit codes: 0 success, 2 usage/config error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .differentiation import differentiate
from .dmd import dmd, dmdc, save_dmd
from .errors import DivergenceError, ParamError, RankError, SindycError
from .library import build_spec, evaluate
from .regression import pareto_sweep, rms
from .sindy import (identify, load_model, model_to_equations, save_model, simulate)
from .systems import Signal, exact_derivatives, make_system, rk4_integrate
from .timeseries import TimeSeries, load_timeseries, save_timeseries, to_snapshot_pair

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

OUTPUT_ROOT_ENV = "SINDYC_OUTPUT_ROOT"
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class ConfigError(ParamError):
    """Unusable configuration file or option combination."""


def load_config(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            return tomllib.loads(raw.decode("utf-8"))
        return json.loads(raw)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def _out_dir(args, command):
    if args.out:
        out = Path(args.out)
    else:
        out = Path(os.environ.get(OUTPUT_ROOT_ENV, "sindyc-out")) / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _finish(out, command, config, extra=None):
    _write_json(out / "config.json", config)
    meta = {"command": command, "version": __version__,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
    meta.update(extra or {})
    _write_json(out / "metadata.json", meta)


def _signal(cfg, seed):
    s = cfg.get("signal")
    if s is None:
        return None
    s = dict(s)
    s.setdefault("seed", seed)
    return Signal.from_dict(s)


def _system(cfg):
    if "system" not in cfg:
        raise ConfigError("config names no system")
    return make_system(cfg["system"], cfg.get("params"), cfg.get("input_map"))


def simulate_from_config(cfg):
    rhs, _, default_x0 = _system(cfg)
    seed = cfg.get("seed", 0)
    x0 = cfg.get("x0", default_x0)
    series = rk4_integrate(rhs, x0, _signal(cfg, seed), float(cfg.get("t_span", 10.0)),
                           float(cfg.get("dt", 0.001)), float(cfg.get("t0", 0.0)),
                           input_names=("u1",) if cfg.get("signal") else ())
    noise = cfg.get("measurement_noise")
    if noise:
        rng = np.random.default_rng(noise.get("seed", seed))
        scale = float(noise.get("fraction", 0.0)) * series.states.std(axis=1, keepdims=True)
        states = series.states + scale * rng.standard_normal(series.states.shape)
        series = TimeSeries(series.times, states, series.inputs, series.state_names,
                            series.input_names)
    return series


def _library_from(cfg, n, q):
    lib = cfg.get("library", {})
    return build_spec(n, q, int(lib.get("degree", 2)), tuple(lib.get("trig_frequencies", ())),
                      bool(lib.get("constant", True)))


def _derivatives(cfg, series):
    d = cfg.get("diff", {})
    method = d.get("method", "central")
    if method == "exact":
        rhs, _, _ = _system(cfg)
        return exact_derivatives(series, rhs)
    params = {}
    if method == "tv":
        params = {"reg": float(d.get("tv_lambda", 1e-2)), "iterations": int(d.get("tv_iters", 200))}
    return differentiate(series, method, **params)


def _train_slice(cfg, series):
    tr = cfg.get("train", {})
    t = series.times
    lo = tr.get("t_start", t[0])
    hi = tr.get("t_end", t[-1])
    keep = np.flatnonzero((t >= lo - 1e-9) & (t <= hi + 1e-9))
    if keep.size < 3:
        raise ConfigError("training window holds fewer than 3 samples")
    return series.slice(keep[0], keep[-1] + 1)


def _apply_overrides(cfg, args):
    cfg = copy.deepcopy(cfg)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "t_span", None) is not None:
        cfg["t_span"] = args.t_span
    if getattr(args, "dt", None) is not None:
        cfg["dt"] = args.dt
    if getattr(args, "diff", None):
        cfg.setdefault("diff", {})["method"] = args.diff
    if getattr(args, "tv_lambda", None) is not None:
        cfg.setdefault("diff", {})["tv_lambda"] = args.tv_lambda
    if getattr(args, "tv_iters", None) is not None:
        cfg.setdefault("diff", {})["tv_iters"] = args.tv_iters
    if getattr(args, "degree", None) is not None:
        cfg.setdefault("library", {})["degree"] = args.degree
    if getattr(args, "threshold", None) is not None:
        cfg.setdefault("solver", {})["threshold"] = args.threshold
    if getattr(args, "solver", None):
        cfg.setdefault("solver", {})["name"] = args.solver
    return cfg


def cmd_simulate(args):
    cfg = _apply_overrides(load_config(args.config), args)
    out = _out_dir(args, "simulate")
    series = simulate_from_config(cfg)
    save_timeseries(series, out / "trajectory.csv")
    _finish(out, "simulate", cfg, {"samples": series.n_samples})
    print(out / "trajectory.csv")
    return 0


def _identify_series(cfg, data_path, no_input):
    series = _train_slice(cfg, load_timeseries(data_path))
    deriv = _derivatives(cfg, series)
    if no_input:
        series = series.without_inputs()
    return series, deriv


def cmd_identify(args):
    cfg = _apply_overrides(load_config(args.config), args)
    if args.no_input:
        cfg["no_input"] = True
    out = _out_dir(args, "identify")
    series, deriv = _identify_series(cfg, args.data, cfg.get("no_input", False))
    lib = _library_from(cfg, series.n_states, series.n_inputs)
    solver = cfg.get("solver", {})
    model = identify(series, lib, derivatives=deriv, solver=solver.get("name", "stlsq"),
                     sparsity=float(solver.get("threshold", solver.get("alpha", 0.1))),
                     normalize=bool(solver.get("normalize", True)))
    model.metadata["seed"] = cfg.get("seed")
    save_model(model, out / "model.json")
    eqs = model_to_equations(model)
    (out / "equations.txt").write_text(eqs + "\n", encoding="utf-8")
    _finish(out, "identify", cfg, {"active_terms": model.coefficients.nnz})
    print(eqs)
    return 0


def _validation_config(cfg):
    val = dict(cfg)
    val.update(cfg.get("validation", {}))
    return val


def cmd_validate(args):
    cfg = _apply_overrides(load_config(args.config), args)
    vcfg = _validation_config(cfg)
    for key in ("t_span", "dt"):
        if getattr(args, key) is not None:
            vcfg[key] = getattr(args, key)
    out = _out_dir(args, "validate")
    t_span = float(vcfg.get("t_span", 0.0))
    dt = float(vcfg.get("dt", 0.001))
    if not t_span > 0:
        raise ConfigError("validation span must be positive")
    rhs, _, default_x0 = _system(vcfg)
    x0, t0 = vcfg.get("x0", default_x0), float(vcfg.get("t0", 0.0))
    if args.start:
        start = load_timeseries(args.start)
        x0, t0 = start.states[:, -1], float(start.times[-1])
    signal = _signal(vcfg, vcfg.get("seed", 0))
    truth = rk4_integrate(rhs, x0, signal, t_span, dt, t0)

    columns = {"t": truth.times}
    for i in range(truth.n_states):
        columns[f"x{i + 1}_true"] = truth.states[i]
    if truth.inputs is not None:
        columns["u1"] = truth.inputs[0]
    summary = []
    amp = rms(truth.states - truth.states.mean(axis=1, keepdims=True))
    for path in args.model:
        model = load_model(path)
        label = Path(path).stem if len(args.model) > 1 or Path(path).stem != "model" else "model"
        if model.state_dim != truth.n_states:
            raise ConfigError(f"{path}: model has {model.state_dim} states, "
                              f"validation system has {truth.n_states}")
        if model.input_dim not in (0, truth.n_inputs):
            raise ConfigError(f"{path}: model expects {model.input_dim} inputs")
        pred = np.full(truth.states.shape, np.nan)
        blow_up = None
        try:
            sim = simulate(model, x0, signal if model.input_dim else None, t_span, dt, t0)
            pred = sim.states
        except DivergenceError as exc:
            blow_up = exc.time
        diverged = np.zeros(truth.n_samples, dtype=int)
        if blow_up is not None:
            diverged[truth.times >= blow_up - 1e-12] = 1
        for i in range(truth.n_states):
            columns[f"x{i + 1}_{label}"] = pred[i]
        columns[f"diverged_{label}"] = diverged
        err = pred - truth.states
        per_channel = [float("nan") if blow_up is not None else rms(e) for e in err]
        summary.append({
            "model": label,
            **{f"rms_x{i + 1}": v for i, v in enumerate(per_channel)},
            "rms_total": float("nan") if blow_up is not None else rms(err),
            "relative_rms": float("nan") if blow_up is not None else rms(err) / amp,
            "diverged": int(blow_up is not None),
            "divergence_time": "" if blow_up is None else blow_up,
        })

    _write_columns(out / "validation.csv", columns)
    with (out / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary[0]))
        w.writeheader()
        w.writerows(summary)
    _finish(out, "validate", cfg, {"models": [str(p) for p in args.model]})
    for row in summary:
        print(row)
    return 0


def _write_columns(path, columns):
    names = list(columns)
    table = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, table, fmt="%.17g", delimiter=",")


def parse_alphas(text):
    """``lo:hi:n`` gives ``n`` log-spaced values; otherwise a comma list."""
    if ":" in text:
        lo, hi, n = text.split(":")
        return np.geomspace(float(lo), float(hi), int(n))
    return np.array([float(v) for v in text.split(",") if v.strip()])


def cmd_pareto(args):
    cfg = _apply_overrides(load_config(args.config), args)
    if args.alphas:
        cfg["alphas"] = args.alphas
    out = _out_dir(args, "pareto")
    series, deriv = _identify_series(cfg, args.data, cfg.get("no_input", False))
    lib = _library_from(cfg, series.n_states, series.n_inputs)
    theta = evaluate(lib, series.states[:, 1:-1],
                     None if series.inputs is None else series.inputs[:, 1:-1]).values
    target = deriv.values[:, 1:-1]
    alphas = cfg.get("alphas", "1e-6:1e2:25")
    grid = parse_alphas(alphas) if isinstance(alphas, str) else np.asarray(alphas, float)
    solver = cfg.get("solver", {}).get("name", "stlsq")
    curve = pareto_sweep(theta, target, grid, solver=solver, refine=not args.no_refine,
                         library=lib)
    curve.to_csv(out / "pareto.csv")
    best = curve.best
    _finish(out, "pareto", cfg, {"selected_alpha": best.alpha, "selected_nnz": best.nnz})
    print(f"selected alpha={best.alpha:.6g} nnz={best.nnz} "
          f"validation_error={best.validation_error:.6g}")
    return 0


def cmd_dmd(args):
    out = _out_dir(args, "dmd")
    series = load_timeseries(args.data)
    pair = to_snapshot_pair(series)
    if args.control:
        if series.inputs is None:
            raise ConfigError("--control needs input columns in the data")
        result = dmdc(pair, args.rank)
    else:
        result = dmd(pair, args.rank)
    save_dmd(result, out / "dmd.json")
    _finish(out, "dmd", {"data": str(args.data), "control": args.control, "rank": args.rank})
    print(out / "dmd.json")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="sindyc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ROOT_ENV}/<command>)")
        sp.add_argument("--seed", type=int)

    def ident_flags(sp):
        sp.add_argument("--diff", choices=["central", "tv", "exact"])
        sp.add_argument("--tv-lambda", type=float)
        sp.add_argument("--tv-iters", type=int)
        sp.add_argument("--degree", type=int)
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--solver", choices=["stlsq", "lasso"])
        sp.add_argument("--no-input", action="store_true",
                        help="ignore recorded inputs (plain SINDy)")

    s = sub.add_parser("simulate", help="integrate a benchmark system")
    s.add_argument("config")
    s.add_argument("--t-span", type=float)
    s.add_argument("--dt", type=float)
    common(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("identify", help="fit a sparse model to a trajectory CSV")
    s.add_argument("config")
    s.add_argument("data")
    ident_flags(s)
    common(s)
    s.set_defaults(func=cmd_identify)

    s = sub.add_parser("validate", help="compare model predictions with the true system")
    s.add_argument("config")
    s.add_argument("--model", action="append", required=True)
    s.add_argument("--start", help="CSV whose last row gives the initial state and time")
    s.add_argument("--t-span", type=float)
    s.add_argument("--dt", type=float)
    common(s)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("pareto", help="sweep the sparsity threshold")
    s.add_argument("config")
    s.add_argument("data")
    s.add_argument("--alphas", help="lo:hi:n (log spaced) or comma list")
    s.add_argument("--no-refine", action="store_true")
    ident_flags(s)
    common(s)
    s.set_defaults(func=cmd_pareto)

    s = sub.add_parser("dmd", help="DMD / DMDc of a trajectory CSV")
    s.add_argument("data")
    s.add_argument("--control", action="store_true")
    s.add_argument("--rank", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_dmd)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DivergenceError, RankError) as exc:
        print(f"sindyc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SindycError, OSError) as exc:
        print(f"sindyc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
