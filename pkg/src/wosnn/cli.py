"""Command-line driver: ``wosnn {sample,train,eval,wos,wos-nn-baseline,fdm}``.

Every command reads the effective :class:`RunConfig` and writes its artifacts
into ``cfg.out``.  Result files (datasets, checkpoints, fields, metrics) are
deterministic; wall-clock timings only go into ``*_manifest.json``.
"""

import argparse
import json
import os
import sys
import time

import numpy as np
import yaml

from .config import PRESETS, evaluation_grid, load_config, wos_settings
from .errors import ConfigError, EstimationError, NumericalError
from .fdm import solve_fdm
from .fields import FieldGrid, export_field, mean_error, mse, rrmse
from .nn import YzNet, load_checkpoint, save_checkpoint
from .rng import STARTS_STREAM, RngStream
from .trainer import predict_field, predict_scalar_field, train, train_wos_driven, vectorize
from .wos import load_paths, sample_dataset, save_paths, wos_field

DATASET = "paths.bin"
CHECKPOINT = "model.ckpt"


def _out(cfg, name):
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _write_json(file, data):
    with open(file, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _read_json(file):
    try:
        with open(file) as fh:
            return json.load(fh)
    except FileNotFoundError:
        return None


def _write_history(file, history):
    with open(file, "w") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in enumerate(history, 1):
            fh.write(f"{epoch},{loss:.17g}\n")


def _reference(cfg, problem, grid):
    """Exact solution on ``grid`` if known, else the FDM field."""
    if problem.exact_u is not None:
        u = grid.with_values(problem.exact_u(grid.coords))
        return u, grid.with_values(problem.exact_grad(grid.coords)), "exact"
    if problem.dim != 2:
        raise ConfigError("no exact solution and FDM references are 2D only", key="problem.name")
    fdm = solve_fdm(problem, cfg.fdm_h, cfg.fdm_tol, cfg.fdm_max_iters, cfg.fdm_omega)
    if not fdm.aligned(grid):
        raise ConfigError("fdm.h must match grid.spacing for FDM comparisons", key="fdm.h")
    return fdm, None, "fdm"


def _solution_metrics(cfg, problem, u_field, grad_field=None):
    grid = FieldGrid(u_field.spacing, u_field.indices)
    ref_u, ref_grad, kind = _reference(cfg, problem, grid)
    metrics = {
        "reference": kind,
        "n_nodes": len(grid),
        "mean_error_u": mean_error(u_field, ref_u),
        "mse_u": mse(u_field, ref_u),
    }
    if np.any(ref_u.values != 0):
        metrics["rrmse_u"] = rrmse(u_field, ref_u)
    if grad_field is not None and ref_grad is not None:
        metrics["mean_error_grad"] = mean_error(grad_field, ref_grad)
    return metrics


# --- commands ----------------------------------------------------------------


def sample_starts(cfg, problem):
    return problem.domain.sample_interior(RngStream(cfg.seed, STARTS_STREAM).generator, cfg.n_starts)


def cmd_sample(cfg):
    """Sample one walk per uniform start and write the dataset file."""
    problem = cfg.problem()
    t0 = time.perf_counter()
    starts = sample_starts(cfg, problem)
    paths = sample_dataset(problem, starts, cfg.eps, cfg.max_steps, cfg.seed, cfg.workers)
    elapsed = time.perf_counter() - t0
    if not paths:
        raise EstimationError("no valid paths were sampled")
    header = {
        "dimension": problem.dim,
        "eps": cfg.eps,
        "max_steps": cfg.max_steps,
        "problem": problem.name,
        "seed": cfg.seed,
        "n_starts": cfg.n_starts,
        "has_source": problem.has_source,
    }
    save_paths(_out(cfg, DATASET), paths, header)
    manifest = {"n_starts": cfg.n_starts, "n_valid": len(paths), "seed": cfg.seed,
                "mean_steps": float(np.mean([p.k for p in paths])),
                "time_sampling": elapsed, "config": cfg.to_mapping()}
    _write_json(_out(cfg, "sample_manifest.json"), manifest)
    return manifest


def cmd_train(cfg, dataset=None):
    """Train a YzNet on the dataset file; writes checkpoint and loss history."""
    dataset = dataset or os.path.join(cfg.out, DATASET)
    if not os.path.exists(dataset):
        raise ConfigError(f"dataset file {dataset} not found (run `sample` first)", key="dataset")
    header, paths = load_paths(dataset)
    data = vectorize(paths)
    net = YzNet(data.dim, cfg.hidden, cfg.seed, cfg.init)
    t0 = time.perf_counter()
    net, history = train(net, data, cfg.train_config())
    elapsed = time.perf_counter() - t0
    meta = {"dataset": header, "epochs": cfg.epochs, "lr": cfg.lr, "batch_size": cfg.batch_size,
            "final_loss": history[-1]}
    save_checkpoint(net, _out(cfg, CHECKPOINT), meta)
    _write_history(_out(cfg, "loss_history.csv"), history)
    manifest = {"n_paths": len(paths), "final_loss": history[-1], "time_training": elapsed,
                "config": cfg.to_mapping()}
    _write_json(_out(cfg, "train_manifest.json"), manifest)
    return manifest


def cmd_eval(cfg, checkpoint=None, stream=None):
    """Evaluate a checkpoint on the evaluation grid; writes fields and metrics."""
    checkpoint = checkpoint or os.path.join(cfg.out, CHECKPOINT)
    if not os.path.exists(checkpoint):
        raise ConfigError(f"checkpoint {checkpoint} not found (run `train` first)", key="checkpoint")
    problem = cfg.problem()
    net, meta = load_checkpoint(checkpoint)
    grid = evaluation_grid(cfg, problem.domain)
    t0 = time.perf_counter()
    u_field, grad_field = predict_field(net, grid)
    elapsed = time.perf_counter() - t0
    export_field(u_field, _out(cfg, "field_u.csv"))
    export_field(grad_field, _out(cfg, "field_grad.csv"))
    metrics = _solution_metrics(cfg, problem, u_field, grad_field)
    metrics["training_loss"] = meta.get("final_loss")
    _write_json(_out(cfg, "metrics.json"), metrics)
    sample = _read_json(os.path.join(cfg.out, "sample_manifest.json")) or {}
    trained = _read_json(os.path.join(cfg.out, "train_manifest.json")) or {}
    summary = {
        "method": "WoS-NN",
        "valid_paths": sample.get("n_valid", meta.get("dataset", {}).get("n_paths")),
        "time_sampling": sample.get("time_sampling"),
        "time_training": trained.get("time_training"),
        "time_testing": elapsed,
        **metrics,
    }
    _write_json(_out(cfg, "eval_manifest.json"), summary)
    print_summary([summary], stream)
    return summary


def run_wos(cfg, problem, grid):
    eps, max_steps = wos_settings(cfg)
    est, stderr, n_valid = wos_field(problem, grid.coords, cfg.wos_n_paths, eps, max_steps, cfg.seed, cfg.workers)
    return grid.with_values(est), stderr, n_valid


def cmd_wos(cfg, stream=None):
    """Classic WoS estimate at every evaluation node."""
    problem = cfg.problem()
    grid = evaluation_grid(cfg, problem.domain)
    t0 = time.perf_counter()
    field, stderr, n_valid = run_wos(cfg, problem, grid)
    elapsed = time.perf_counter() - t0
    export_field(field, _out(cfg, "wos_field.csv"))
    metrics = _solution_metrics(cfg, problem, field)
    metrics.update(valid_paths=int(n_valid.sum()), mean_stderr=float(np.mean(stderr)))
    _write_json(_out(cfg, "wos_metrics.json"), metrics)
    summary = {"method": "WoS", "time_sampling": elapsed, **metrics}
    _write_json(_out(cfg, "wos_manifest.json"), summary)
    print_summary([summary], stream)
    return summary


def cmd_wos_nn_baseline(cfg, stream=None):
    """Regression network trained on the classic WoS grid estimates."""
    problem = cfg.problem()
    grid = evaluation_grid(cfg, problem.domain)
    t0 = time.perf_counter()
    field, _, n_valid = run_wos(cfg, problem, grid)
    t1 = time.perf_counter()
    net, history = train_wos_driven(grid.coords, field.values, cfg.baseline_config(), cfg.hidden, init=cfg.init)
    t2 = time.perf_counter()
    pred = predict_scalar_field(net, grid)
    t3 = time.perf_counter()
    export_field(pred, _out(cfg, "baseline_field.csv"))
    _write_history(_out(cfg, "baseline_loss_history.csv"), history)
    save_checkpoint(net, _out(cfg, "baseline.ckpt"), {"final_loss": history[-1]})
    metrics = _solution_metrics(cfg, problem, pred)
    metrics.update(valid_paths=int(n_valid.sum()), training_loss=history[-1])
    _write_json(_out(cfg, "baseline_metrics.json"), metrics)
    summary = {"method": "WoS-driven NN", "time_sampling": t1 - t0, "time_training": t2 - t1,
               "time_testing": t3 - t2, **metrics}
    _write_json(_out(cfg, "baseline_manifest.json"), summary)
    print_summary([summary], stream)
    return summary


def cmd_fdm(cfg):
    """Finite-difference reference field on the interior lattice of spacing ``fdm.h``."""
    problem = cfg.problem()
    t0 = time.perf_counter()
    field = solve_fdm(problem, cfg.fdm_h, cfg.fdm_tol, cfg.fdm_max_iters, cfg.fdm_omega)
    elapsed = time.perf_counter() - t0
    export_field(field, _out(cfg, "fdm_field.csv"))
    manifest = {"n_nodes": len(field), "time_solve": elapsed, "config": cfg.to_mapping()}
    _write_json(_out(cfg, "fdm_manifest.json"), manifest)
    return manifest


def print_summary(rows, stream=None):
    stream = stream or sys.stdout
    cols = [("method", "method", "{}"), ("valid_paths", "paths", "{}"), ("time_sampling", "t_sample", "{:.2f}"),
            ("time_training", "t_train", "{:.2f}"), ("time_testing", "t_test", "{:.2f}"),
            ("training_loss", "train_loss", "{:.5f}"), ("mean_error_u", "err_u", "{:.6f}"),
            ("mean_error_grad", "err_grad", "{:.6f}"), ("mse_u", "mse_u", "{:.3e}")]
    cells = [[title for _, title, _ in cols]]
    for row in rows:
        cells.append([fmt.format(row[key]) if row.get(key) is not None else "-" for key, _, fmt in cols])
    widths = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    for r in cells:
        stream.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


# --- entry point -------------------------------------------------------------

COMMANDS = {
    "sample": cmd_sample,
    "train": cmd_train,
    "eval": cmd_eval,
    "wos": cmd_wos,
    "wos-nn-baseline": cmd_wos_nn_baseline,
    "fdm": cmd_fdm,
}


def build_parser():
    presets = "\n".join(f"  {name:<10} {', '.join(f'{k}={v}' for k, v in spec.items())}"
                        for name, spec in PRESETS.items())
    parser = argparse.ArgumentParser(
        prog="wosnn",
        description="Walk-on-Spheres neural solver for Laplace/Poisson Dirichlet problems.",
        epilog=f"presets:\n{presets}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", help="YAML file of flat dotted keys")
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="worker processes for path sampling")
    parser.add_argument("--dataset", help="dataset file for `train` (default: OUT/paths.bin)")
    parser.add_argument("--checkpoint", help="checkpoint for `eval` (default: OUT/model.ckpt)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    return parser


def _overrides(args):
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}", key="--set")
        overrides[key.strip()] = yaml.safe_load(value)
    for key in ("seed", "out", "workers"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    return overrides


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.preset, _overrides(args))
        if args.command == "train":
            cmd_train(cfg, args.dataset)
        elif args.command == "eval":
            cmd_eval(cfg, args.checkpoint)
        else:
            result = COMMANDS[args.command](cfg)
            if args.command in ("sample", "fdm"):
                print(json.dumps({k: v for k, v in result.items() if k != "config"}, sort_keys=True))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, EstimationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
