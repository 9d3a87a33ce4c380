"""Command-line entry points.

Subcommands: ``generate`` (datasets), ``train`` (one variant x
regularization cell), ``sweep`` (grid of cells), ``evaluate`` (metrics
and tables from checkpoints), ``compress`` (a-posteriori kernel
decomposition of a trained cell), ``tables`` (re-emit tables from result
files).  Shared flags: ``--config``, ``--seed``, ``--out``.  Exit codes:
0 success, 1 usage or configuration error, 2 runtime failure.

Determinism contract: ``generate`` and ``train`` write byte-identical
primary outputs (datasets, checkpoint, history, config snapshot) for a
fixed config and seed; wall-clock timings go to a separate
``timing.csv`` that is excluded from that contract.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..kernel_decomp import decompose_2d, decompose_3d, reconstruct, residual_norm
from ..nn import Conv, count_params
from ..nn.checkpoint import load_model, save_model
from ..wave import Scaler, generate_dataset, load_dataset, save_dataset
from .config import ExperimentConfig
from .evaluation import error_indicator, predict_fields, zoom_evaluate
from .tables import ResultCell, emit_tables, parse_results_csv, results_to_csv
from .training import (
    ParamScaler,
    TrainSettings,
    euler_spec_for,
    prepare_inputs,
    prepare_targets,
    train,
)
from .variants import VariantSpec, format_regularization, parse_regularization
from .zoo import build_model

HISTORY_HEADER = "epoch,loss,mse_u,mse_v,euler,lr"


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="sepconvwave",
        description="separable-convolution wave surrogates: data, training, evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("generate", "simulate train/test datasets from the config"),
        ("train", "train one variant x regularization cell"),
        ("sweep", "train and evaluate a grid of cells"),
        ("evaluate", "compute error tables from existing checkpoints"),
        ("compress", "a-posteriori decompose a trained cell's kernels"),
        ("tables", "re-emit classified tables from results.csv"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
    return parser.parse_args(argv)


def _load_setup(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.outdir = args.out
    return cfg


def _dataset_paths(cfg):
    out = Path(cfg.outdir)
    return out / "train.wds", out / "test.wds"


def _load_datasets(cfg):
    train_path, test_path = _dataset_paths(cfg)
    for p in (train_path, test_path):
        if not p.exists():
            raise FileNotFoundError(f"{p} not found; run `generate` first")
    return load_dataset(train_path), load_dataset(test_path)


def cmd_generate(cfg) -> None:
    grid = cfg.grid()
    train_path, test_path = _dataset_paths(cfg)
    train_path.parent.mkdir(parents=True, exist_ok=True)
    train_ds = generate_dataset(grid, cfg.train_samples, seed=cfg.seed, bounds=cfg.bounds())
    test_ds = generate_dataset(grid, cfg.test_samples, seed=cfg.seed + 1, bounds=cfg.bounds())
    save_dataset(train_path, train_ds)
    save_dataset(test_path, test_ds)
    print(f"wrote {train_path} ({len(train_ds)} samples) and {test_path} ({len(test_ds)})")


def _history_csv(history) -> str:
    lines = [HISTORY_HEADER]
    for rec in history:
        lines.append(
            f"{rec['epoch']},{rec['loss']!r},{rec['mse_u']!r},{rec['mse_v']!r},"
            f"{rec['euler']!r},{rec['lr']!r}"
        )
    return "\n".join(lines) + "\n"


def _train_cell(cfg, spec, train_ds, test_ds, scaler, pscaler) -> Path:
    cell_dir = Path(cfg.outdir) / spec.cell_key()
    cell_dir.mkdir(parents=True, exist_ok=True)
    model = build_model(spec, train_ds.grid, cfg.zoo_widths, seed=cfg.seed)
    inputs = prepare_inputs(spec, train_ds, pscaler)
    targets = prepare_targets(spec, train_ds, scaler)
    settings = TrainSettings(
        epochs=cfg.epochs, lr0=cfg.lr0, lr_final=cfg.lr_final, decay=cfg.decay,
        batch_size=cfg.batch_size, lambda_euler=cfg.lambda_euler, seed=cfg.seed,
    )
    euler = euler_spec_for(spec, train_ds, scaler) if spec.euler else None
    result = train(model, inputs, targets, settings, euler=euler)
    save_model(cell_dir / "checkpoint.scnn", model)
    (cell_dir / "history.csv").write_text(_history_csv(result.history))
    (cell_dir / "run_config.cfg").write_text(cfg.to_text())
    timing = ["epoch,seconds"] + [f"{i},{s!r}" for i, s in enumerate(result.epoch_seconds)]
    (cell_dir / "timing.csv").write_text("\n".join(timing) + "\n")
    if result.history:
        print(f"{spec.label()}: final loss {result.final_loss:.6f} ({cfg.epochs} epochs)")
    else:
        print(f"{spec.label()}: 0 epochs, model saved untrained")
    return cell_dir


def cmd_train(cfg) -> None:
    spec = VariantSpec(cfg.variant, parse_regularization(cfg.regularization))
    train_ds, test_ds = _load_datasets(cfg)
    scaler = Scaler().fit(train_ds)
    pscaler = ParamScaler().fit(train_ds.param_matrix())
    _train_cell(cfg, spec, train_ds, test_ds, scaler, pscaler)


def _sweep_specs(cfg):
    return [
        VariantSpec(name, parse_regularization(reg))
        for name in cfg.sweep_variants
        for reg in cfg.sweep_regularizations
    ]


def cmd_sweep(cfg) -> None:
    specs = _sweep_specs(cfg)
    train_ds, test_ds = _load_datasets(cfg)
    scaler = Scaler().fit(train_ds)
    pscaler = ParamScaler().fit(train_ds.param_matrix())
    for spec in specs:
        _train_cell(cfg, spec, train_ds, test_ds, scaler, pscaler)
    cells = _evaluate_cells(cfg, specs, train_ds, test_ds, scaler, pscaler)
    paths = emit_tables(cells, cfg.threshold, cfg.outdir)
    print(f"wrote {paths['csv']} and {paths['text']}")


def _mean_epoch_seconds(cell_dir: Path) -> float | None:
    timing = cell_dir / "timing.csv"
    if not timing.exists():
        return None
    rows = timing.read_text().splitlines()[1:]
    seconds = [float(r.split(",")[1]) for r in rows]
    if len(seconds) < 2:
        return float(np.mean(seconds)) if seconds else None
    return float(np.mean(seconds[1:]))  # epoch 1 excluded as warm-up


def _evaluate_cells(cfg, specs, train_ds, test_ds, scaler, pscaler, require_all=True):
    cells = []
    grid = train_ds.grid
    if not require_all:
        specs = [s for s in specs if (Path(cfg.outdir) / s.cell_key() / "checkpoint.scnn").exists()]
        if not specs:
            raise FileNotFoundError(f"no trained cells under {cfg.outdir}; run `train` or `sweep`")
    for spec in specs:
        cell_dir = Path(cfg.outdir) / spec.cell_key()
        ckpt = cell_dir / "checkpoint.scnn"
        if not ckpt.exists():
            raise FileNotFoundError(f"{ckpt} not found; run `train` or `sweep` first")
        model = build_model(spec, grid, cfg.zoo_widths, seed=cfg.seed)
        load_model(ckpt, model)
        reg = format_regularization(spec.regularization)

        def add(metric, value):
            cells.append(ResultCell(spec.name, reg, metric, value))

        add("params", float(count_params(model).decomposed_count))
        for split, ds in (("train", train_ds), ("test", test_ds)):
            preds = predict_fields(model, spec, ds, scaler, pscaler)
            ref_u = ds.stack("boundary_u") if spec.boundary else ds.stack("u")
            ref_v = ds.stack("boundary_v") if spec.boundary else ds.stack("v")
            add(f"{split}_eps_u", error_indicator(preds["u"], ref_u).scalar)
            add(f"{split}_eps_v", error_indicator(preds["v"], ref_v).scalar)
            zoom = zoom_evaluate(spec, preds, ds)
            add(f"{split}_zoom_eps_u", zoom.eps_u.scalar)
            add(f"{split}_zoom_eps_v", zoom.eps_v.scalar)
        secs = _mean_epoch_seconds(cell_dir)
        if secs is not None:
            add("epoch_seconds", secs)
    return cells


def cmd_evaluate(cfg) -> None:
    specs = _sweep_specs(cfg)
    training_cell = VariantSpec(cfg.variant, parse_regularization(cfg.regularization))
    if training_cell not in specs:
        specs = specs + [training_cell]
    train_ds, test_ds = _load_datasets(cfg)
    scaler = Scaler().fit(train_ds)
    pscaler = ParamScaler().fit(train_ds.param_matrix())
    cells = _evaluate_cells(cfg, specs, train_ds, test_ds, scaler, pscaler, require_all=False)
    paths = emit_tables(cells, cfg.threshold, cfg.outdir)
    print(f"wrote {paths['csv']} and {paths['text']}")


def cmd_compress(cfg) -> None:
    if cfg.compress_cell:
        name, _, reg = cfg.compress_cell.partition(":")
        spec = VariantSpec(name.strip(), parse_regularization(reg or "Basic"))
    else:
        spec = VariantSpec(cfg.variant, parse_regularization(cfg.regularization))
    train_ds, test_ds = _load_datasets(cfg)
    scaler = Scaler().fit(train_ds)
    pscaler = ParamScaler().fit(train_ds.param_matrix())
    grid = train_ds.grid
    cell_dir = Path(cfg.outdir) / spec.cell_key()
    ckpt = cell_dir / "checkpoint.scnn"
    if not ckpt.exists():
        raise FileNotFoundError(f"{ckpt} not found; train the cell first")
    model = build_model(spec, grid, cfg.zoo_widths, seed=cfg.seed)
    load_model(ckpt, model)

    before = error_indicator(
        predict_fields(model, spec, test_ds, scaler, pscaler)["u"],
        test_ds.stack("boundary_u") if spec.boundary else test_ds.stack("u"),
    ).scalar

    r = cfg.compress_rank
    lines = ["layer,filter,residual,kernel_norm"]
    eligible = 0
    for idx, layer in enumerate(model.all_layers()):
        if not isinstance(layer, Conv) or len(layer.extents) < 2:
            continue
        eligible += 1
        kernels = layer.kernel.value
        for j in range(kernels.shape[0]):
            k = kernels[j]
            rank = min(r, min(k.shape[0], k.shape[1]))
            decomp = decompose_2d(k, rank) if k.ndim == 2 else decompose_3d(k, rank)
            res = residual_norm(k, decomp)
            lines.append(f"{idx},{j},{res!r},{float(np.sqrt(np.sum(k * k)))!r}")
            layer.kernel.value[j] = reconstruct(decomp)
    after = error_indicator(
        predict_fields(model, spec, test_ds, scaler, pscaler)["u"],
        test_ds.stack("boundary_u") if spec.boundary else test_ds.stack("u"),
    ).scalar

    lines.append(f"eps_before,,{before!r},")
    lines.append(f"eps_after,,{after!r},")
    report = cell_dir / "compress.csv"
    report.write_text("\n".join(lines) + "\n")
    if eligible == 0:
        print(f"{spec.label()}: no full 2D/3D convolution layers to compress")
    print(
        f"{spec.label()}: rank-{r} truncation, test eps {before:.6f} -> {after:.6f}; "
        f"report at {report}"
    )


def cmd_tables(cfg) -> None:
    path = Path(cfg.outdir) / "results.csv"
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run `evaluate` or `sweep` first")
    cells = parse_results_csv(path.read_text())
    paths = emit_tables(cells, cfg.threshold, cfg.outdir)
    print(f"re-emitted {paths['csv']} and {paths['text']}")


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "evaluate": cmd_evaluate,
    "compress": cmd_compress,
    "tables": cmd_tables,
}


def main(argv=None) -> int:
    try:
        args = _parse_args(argv if argv is not None else sys.argv[1:])
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = _load_setup(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        _COMMANDS[args.command](cfg)
    except Exception as exc:  # runtime failure contract: exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
