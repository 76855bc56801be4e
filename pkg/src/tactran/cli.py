"""Command-line entry point: gen / train / eval / interp / render.

Exit codes: 0 success, 2 configuration problems, 3 file or format problems,
4 numeric failures (divergence, unreachable force), 5 model/corpus shape
mismatches. Logs go to stderr; machine-readable outputs only to files.
The env var T2T_THREADS caps generation parallelism (0 = one per CPU).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset, formats, metrics, translate
from .errors import (
    ConfigError,
    Diverged,
    ForceUnreachable,
    FormatError,
    LengthMismatch,
    OutOfBounds,
    ShapeMismatch,
    SingularSystem,
    TactranError,
)
from .geometry import build_default_layout, default_tactile_grid, load_layout, save_layout
from .interp import FULLSCALE, ArraySample, TactileImage, phi, phi_inv
from .translate import load_model, predict_array, save_model

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_SHAPE = 5


def _log(msg):
    print(msg, file=sys.stderr)


def _fail(code, msg):
    print(f"error: {code}: {msg}", file=sys.stderr)
    return code


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        n = args.threads
    else:
        n = int(os.environ.get("T2T_THREADS", "1"))
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, n)


def _load_json_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        with open(p) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    doc = {}
    if args.config:
        doc = _load_json_config(args.config)
        if "config" in doc:  # allow reusing a corpus manifest as config
            doc = doc["config"]
    if args.corpus:
        doc["corpus"] = args.corpus
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.downsample is not None:
        doc["downsample"] = args.downsample
    corpus = doc.get("corpus", "primitives")
    doc.pop("corpus", None)
    if corpus == "objects":
        cfg = dataset.DatasetConfig.objects_default(**_known_cfg(doc))
    else:
        cfg = dataset.DatasetConfig.primitives_default(**_known_cfg(doc))
    layout = load_layout(args.layout) if args.layout else None
    _log(f"generating {corpus} corpus into {args.out} "
         f"(seed {cfg.seed}, downsample {cfg.downsample})")

    done = {"n": 0}

    def progress(i, total):
        if i % 500 == 0 or i == total:
            _log(f"  {i}/{total} samples")
        done["n"] = i

    manifest = dataset.generate_corpus(
        cfg, args.out, layout=layout, threads=_threads(args), progress=progress
    )
    _log(f"wrote {manifest['counts']['total']} samples")
    return 0


def _known_cfg(doc: dict) -> dict:
    import dataclasses

    allowed = {f.name for f in dataclasses.fields(dataset.DatasetConfig)} - {"corpus"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return doc


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

_MODEL_FLAGS = {"linear": "linear_baseline", "array": "array_space",
                "image": "image_space"}


def cmd_train(args) -> int:
    kind = _MODEL_FLAGS[args.model]
    manifest = dataset.load_manifest(args.corpus)
    layout = dataset.corpus_layout(manifest)
    samples = list(dataset.iter_samples(args.corpus, manifest))
    if any(s.split == "test" for s in samples):
        raise ConfigError("corpus contains test samples; train on a primitives corpus")
    train_set, val_set = dataset.split_by_version(samples)
    _log(f"training {kind} on {len(train_set)} train / {len(val_set)} val samples")

    overrides = {}
    if args.train_config:
        overrides = _load_json_config(args.train_config)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.max_epochs is not None:
        overrides["max_epochs"] = args.max_epochs
    try:
        cfg = translate.default_train_config(kind, **overrides)
    except TypeError as e:
        raise ConfigError(f"bad train config: {e}")

    ds = manifest["config"]["downsample"]
    tactile_grid = default_tactile_grid(layout, downsample=ds)
    log_lines = []

    def on_epoch(epoch, train_l3, val_l3):
        log_lines.append(f"{epoch}\t{train_l3:.6g}\t{val_l3:.6g}")
        _log(f"  epoch {epoch}: train {train_l3:.6g}  val L3 {val_l3:.6g}")

    model = translate.train(kind, cfg, train_set, val_set, layout=layout,
                            tactile_grid=tactile_grid, on_epoch=on_epoch)
    save_model(model, args.out)
    log_path = Path(args.out).with_suffix(".log")
    with open(log_path, "w") as f:
        f.write("# epoch\ttrain_loss\tval_l3\n")
        f.write("\n".join(log_lines) + "\n")
    runmeta = {
        "kind": kind,
        "train_config": json.loads(cfg.canonical_json(kind)),
        "corpus": str(args.corpus),
        "corpus_manifest_sha256": _file_sha(Path(args.corpus) / "manifest.json"),
        "best_val_l3": model.training_meta.best_val_l3,
        "epochs_run": model.training_meta.epochs_run,
    }
    with open(Path(args.out).with_suffix(".runmeta.json"), "w") as f:
        json.dump(runmeta, f, indent=2, sort_keys=True)
        f.write("\n")
    _log(f"saved {args.out} (best val L3 {model.training_meta.best_val_l3:.6g})")
    return 0


def _file_sha(path) -> str:
    import hashlib

    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    manifest = dataset.load_manifest(args.corpus)
    layout = dataset.corpus_layout(manifest)
    ds = manifest["config"]["downsample"]
    tactile_grid = default_tactile_grid(layout, downsample=ds)
    report = metrics.EvalReport()
    report.header["corpus"] = str(args.corpus)
    report.header["corpus_manifest_sha256"] = _file_sha(
        Path(args.corpus) / "manifest.json"
    )
    render_dir = Path(args.render) if args.render else None
    if render_dir:
        render_dir.mkdir(parents=True, exist_ok=True)

    models = []
    for path in args.model:
        m = load_model(path)
        name = Path(path).stem
        models.append((name, m))
        report.header.setdefault("models", {})[name] = {
            "kind": m.kind,
            "best_val_l3": m.training_meta.best_val_l3,
        }

    n = 0
    for sample in dataset.iter_samples(args.corpus, manifest, split=args.split):
        truth_img = phi(sample.y, grid=tactile_grid)
        for name, model in models:
            if (sample.x.rows, sample.x.cols) != tuple(model.input_shape):
                raise ShapeMismatch(
                    f"model {name} expects {model.input_shape}, corpus has "
                    f"{(sample.x.rows, sample.x.cols)}"
                )
            y_hat = predict_array(model, sample.x, layout)
            pred_img = phi(y_hat, grid=tactile_grid)
            r = metrics.rmse(sample.y, y_hat)
            report.add(metrics.SampleMetrics(
                sample_id=sample.sample_id,
                model=name,
                split=sample.split,
                rmse=r,
                percent_fullscale=metrics.percent_fullscale(r),
                ssim=metrics.ssim(truth_img, pred_img, dynamic_range=FULLSCALE),
                contact_iou=metrics.contact_iou(truth_img, pred_img,
                                                args.iou_threshold),
            ))
            if render_dir:
                gen_img = (forward_image(model, sample.x)
                           if model.kind == "image_space" else None)
                strip = render_strip(sample.x, gen_img, pred_img, truth_img)
                lo, hi = formats.write_pgm(
                    render_dir / f"{sample.sample_id}.{name}.pgm", strip
                )
                _log(f"  render {sample.sample_id}.{name}: scale [{lo:.3g}, {hi:.3g}]")
        n += 1
    _log(f"evaluated {len(models)} model(s) on {n} samples")

    with open(args.out, "w") as f:
        f.write(report.to_json())
        f.write("\n")
    table = report.table_text()
    if args.table:
        with open(args.table, "w") as f:
            f.write(table)
    _log(table.rstrip())
    return 0


def forward_image(model, x) -> TactileImage:
    from .translate import forward

    return forward(model, x)


GUTTER = 4


def render_strip(x: TactileImage, gen_img, pred_img: TactileImage,
                 truth_img: TactileImage) -> np.ndarray:
    """Four panels side by side: input X, generated image, phi of the
    predicted array, phi of the ground truth. Panels are resampled to the
    truth image's shape; width = 4 * panel + 3 * gutter."""
    rows, cols = truth_img.data.shape

    def unit(img, scale):
        if img is None:
            return np.zeros((rows, cols))
        d = np.asarray(img.data, dtype=np.float64) / scale
        return _resample_nearest(d, rows, cols)

    panels = [
        unit(x, max(float(x.data.max()), 1e-9)),
        unit(gen_img, FULLSCALE),
        unit(pred_img, FULLSCALE),
        unit(truth_img, FULLSCALE),
    ]
    strip = np.zeros((rows, 4 * cols + 3 * GUTTER))
    for i, p in enumerate(panels):
        c0 = i * (cols + GUTTER)
        strip[:, c0:c0 + cols] = p
    return strip


def _resample_nearest(img: np.ndarray, rows: int, cols: int) -> np.ndarray:
    ri = np.minimum((np.arange(rows) * img.shape[0]) // rows, img.shape[0] - 1)
    ci = np.minimum((np.arange(cols) * img.shape[1]) // cols, img.shape[1] - 1)
    return img[ri][:, ci]


# ---------------------------------------------------------------------------
# interp / render
# ---------------------------------------------------------------------------

def cmd_interp(args) -> int:
    layout = load_layout(args.layout) if args.layout else build_default_layout()
    if bool(args.array) == bool(args.image):
        raise ConfigError("pass exactly one of --array or --image")
    if args.array:
        values = formats.read_txl(args.array)
        y = ArraySample(values=np.asarray(values, np.float64), layout=layout)
        grid = default_tactile_grid(layout, downsample=args.downsample or 1)
        img = phi(y, grid=grid)
        out = Path(args.out)
        if out.suffix == ".pgm":
            lo, hi = formats.write_pgm(out, img.data)
            _log(f"pgm scale [{lo:.6g}, {hi:.6g}]")
        else:
            formats.write_pfm(out, img.data)
        _log(f"wrote image {out} ({img.rows}x{img.cols})")
    else:
        data = formats.read_pfm(args.image)
        grid = default_tactile_grid(layout, downsample=args.downsample or 1)
        if data.shape != (grid.rows, grid.cols):
            raise ShapeMismatch(
                f"image {data.shape} does not match the layout grid {grid.shape}"
            )
        sample = phi_inv(TactileImage(data=data, grid=grid), layout)
        formats.write_txl(args.out, sample.values)
        _log(f"wrote array {args.out} ({layout.n_taxels} channels)")
    return 0


def cmd_render(args) -> int:
    if bool(args.array) == bool(args.image):
        raise ConfigError("pass exactly one of --array or --image")
    if args.image:
        data = formats.read_pfm(args.image)
    else:
        layout = load_layout(args.layout) if args.layout else build_default_layout()
        values = formats.read_txl(args.array)
        y = ArraySample(values=np.asarray(values, np.float64), layout=layout)
        grid = default_tactile_grid(layout, downsample=args.downsample or 1)
        data = phi(y, grid=grid).data
    lo, hi = formats.write_pgm(args.out, data)
    _log(f"wrote {args.out}, scale [{lo:.6g}, {hi:.6g}]")
    return 0


def cmd_layout(args) -> int:
    save_layout(build_default_layout(), args.out)
    _log(f"wrote default layout to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tactran",
        description="Tactile cross-sensor translation toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a paired corpus")
    g.add_argument("--config", help="JSON config file")
    g.add_argument("--corpus", choices=["primitives", "objects"])
    g.add_argument("--seed", type=int)
    g.add_argument("--downsample", type=int)
    g.add_argument("--layout", help="layout JSON manifest")
    g.add_argument("--threads", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a translator on a corpus")
    t.add_argument("--model", choices=sorted(_MODEL_FLAGS), required=True)
    t.add_argument("--corpus", required=True)
    t.add_argument("--train-config", help="JSON file of TrainConfig overrides")
    t.add_argument("--seed", type=int)
    t.add_argument("--max-epochs", type=int)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate models on a corpus")
    e.add_argument("--model", action="append", required=True,
                   help="T2TM file; repeatable")
    e.add_argument("--corpus", required=True)
    e.add_argument("--split", default=None, help="restrict to one split")
    e.add_argument("--iou-threshold", type=float,
                   default=metrics.DEFAULT_IOU_THRESHOLD)
    e.add_argument("--render", help="write per-sample comparison strips here")
    e.add_argument("--table", help="write the plain-text summary table here")
    e.add_argument("--out", required=True, help="JSON report path")
    e.set_defaults(func=cmd_eval)

    i = sub.add_parser("interp", help="convert arrays to images and back")
    i.add_argument("--array", help="TXL1 input -> image output")
    i.add_argument("--image", help="PFM input -> array output")
    i.add_argument("--layout")
    i.add_argument("--downsample", type=int)
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_interp)

    r = sub.add_parser("render", help="write an 8-bit PGM preview")
    r.add_argument("--array")
    r.add_argument("--image")
    r.add_argument("--layout")
    r.add_argument("--downsample", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_render)

    d = sub.add_parser("layout", help="write the default layout manifest")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_layout)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, e)
    except (FormatError, FileNotFoundError, IsADirectoryError, PermissionError) as e:
        return _fail(EXIT_IO, e)
    except (Diverged, ForceUnreachable, SingularSystem) as e:
        return _fail(EXIT_NUMERIC, e)
    except (ShapeMismatch, LengthMismatch, OutOfBounds) as e:
        return _fail(EXIT_SHAPE, e)
    except TactranError as e:
        return _fail(EXIT_NUMERIC, e)


if __name__ == "__main__":
    sys.exit(main())
