"""Translator models and their training loop.

Three families share one serialized container:

* ``image_space``: encoder-decoder generator producing a tactile image;
  the taxel array is read off the image, and that sampling is part of the
  differentiated graph.
* ``array_space``: convolutional regressor with a global-pooling head of
  size N emitting the array directly.
* ``linear_baseline``: ridge regression on the downsampled input pixels,
  fitted in closed form; serves as the sanity oracle for the learned kinds.

Arrays are normalized by the 40000-count fullscale inside training and
denormalized at the interface; all public contracts speak raw counts.
Training is plain minibatch first-order descent (Adam updates) on the
squared-error objective, early-stopped on validation L3.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import nn
from .errors import (
    Diverged,
    FormatError,
    LengthMismatch,
    NonDifferentiableKind,
    ShapeMismatch,
    SingularSystem,
)
from .geometry import PixelGrid, TaxelLayout, default_tactile_grid
from .interp import FULLSCALE, ArraySample, TactileImage, get_rasterizer, phi_inv

KINDS = ("linear_baseline", "array_space", "image_space")
_KIND_CODES = {"linear_baseline": 0, "array_space": 1, "image_space": 2}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

ARRAY_WIDTHS = (16, 48, 96)
IMAGE_WIDTHS = (8, 16, 32, 48)
# intensity plus two fixed coordinate planes
NET_IN_CH = 3

T2TM_MAGIC = b"T2TM"
T2TM_VERSION = 1


@dataclass(frozen=True)
class TrainingMeta:
    epochs_run: int = 0
    best_val_l3: float = 0.0
    seed: int = 0
    config_hash: bytes = b"\x00" * 32


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 8
    max_epochs: int = 40
    patience: int = 5
    seed: int = 0
    downsample: int = 1  # extra factor applied to the stored input images
    ridge: float = 10.0  # linear baseline only

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.patience < 1 or self.max_epochs < 1:
            raise ValueError("batch_size, patience, max_epochs must be >= 1")
        if self.downsample < 1:
            raise ValueError("downsample must be >= 1")

    def canonical_json(self, kind: str) -> str:
        doc = {
            "kind": kind,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "seed": self.seed,
            "downsample": self.downsample,
            "ridge": self.ridge,
        }
        return json.dumps(doc, sort_keys=True)

    def content_hash(self, kind: str) -> bytes:
        return hashlib.sha256(self.canonical_json(kind).encode()).digest()


def default_train_config(kind: str, **overrides) -> TrainConfig:
    """Per-family defaults: lr 1e-3 / batch 8 for the regressor, lr 2e-4 /
    batch 32 for the generator (its reference pipeline's optimizer scale)."""
    base = {
        "array_space": dict(learning_rate=1e-3, batch_size=8),
        "image_space": dict(learning_rate=2e-4, batch_size=32),
        "linear_baseline": dict(),
    }[kind]
    base.update(overrides)
    return TrainConfig(**base)


@dataclass(frozen=True)
class TranslatorModel:
    """Serialized translator: kind, shapes, flat parameters, training meta."""

    kind: str
    input_shape: tuple[int, int]  # raw input image (rows, cols) before downsample
    output_shape: tuple  # (rows, cols) for image kind, (n,) otherwise
    descriptor: tuple  # u32 layer-structure words, see _descriptor_* below
    parameters: np.ndarray  # flat float32, layout fixed by the descriptor
    training_meta: TrainingMeta = field(default_factory=TrainingMeta)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        p = np.ascontiguousarray(self.parameters, dtype=np.float32)
        if not np.all(np.isfinite(p)):
            raise ValueError("parameters must be finite")
        expected = _param_count(self.kind, self.descriptor)
        if p.size != expected:
            raise ValueError(f"{p.size} parameters, descriptor wants {expected}")
        p.setflags(write=False)
        object.__setattr__(self, "parameters", p)
        object.__setattr__(self, "descriptor", tuple(int(v) for v in self.descriptor))


# Descriptor layouts (all little-endian u32 on disk):
#   linear_baseline: [down, in_rows, in_cols, n_out]
#   array_space:     [down, in_rows, in_cols, w0, w1, w2, n_out, in_ch]
#   image_space:     [down, in_rows, in_cols, w0, w1, w2, w3,
#                     out_rows, out_cols, n_taxels, in_ch]
# image_space parameters end with a frozen buffer of 6 + 2 * n_taxels floats:
# output-grid origin/spacing (3), effective input-grid origin/spacing (3),
# then taxel u then v pixel coordinates on the output grid.


def _net_input_hw(kind, desc):
    down = desc[0]
    return (desc[1] // down, desc[2] // down)


def _build_net(kind, desc, dtype=np.float32):
    hw = _net_input_hw(kind, desc)
    if kind == "array_space":
        return nn.ArrayRegressor(hw, widths=desc[3:6], n_out=desc[6],
                                 in_ch=desc[7], dtype=dtype)
    if kind == "image_space":
        # taxel coords and warp tables are bound later from the frozen buffer
        return nn.ImageGenerator(hw, widths=desc[3:7], out_hw=(desc[7], desc[8]),
                                 taxel_uv=(np.zeros(desc[9]), np.zeros(desc[9])),
                                 in_ch=desc[10], dtype=dtype)
    raise ValueError(kind)


def _image_buffer_len(desc) -> int:
    return 6 + 2 * desc[9]


def _param_count(kind, desc) -> int:
    if kind == "linear_baseline":
        down, r, c, n_out = desc
        return n_out * ((r // down) * (c // down)) + n_out
    if kind == "array_space":
        net = _build_net(kind, desc)
        return sum(int(np.prod(s)) for s in net.shapes.values())
    if kind == "image_space":
        net = _build_net(kind, desc)
        core = sum(int(np.prod(s)) for s in net.shapes.values())
        return core + _image_buffer_len(desc)
    raise ValueError(kind)


def _split_image_params(model: TranslatorModel):
    """Net weights, grids and taxel pixel coordinates of an image model."""
    desc = model.descriptor
    n_tax = desc[9]
    blen = _image_buffer_len(desc)
    buf = model.parameters[-blen:]
    core = model.parameters[:-blen]
    out_grid = PixelGrid(rows=desc[7], cols=desc[8],
                         origin=(float(buf[0]), float(buf[1])),
                         spacing=float(buf[2]))
    hw = _net_input_hw("image_space", desc)
    in_grid = PixelGrid(rows=hw[0], cols=hw[1],
                        origin=(float(buf[3]), float(buf[4])),
                        spacing=float(buf[5]))
    u = buf[6:6 + n_tax].astype(np.float64)
    v = buf[6 + n_tax:].astype(np.float64)
    return core, out_grid, in_grid, u, v


def _image_net(model: TranslatorModel, dtype=np.float32):
    core, out_grid, in_grid, u, v = _split_image_params(model)
    net = _build_net("image_space", model.descriptor, dtype)
    net.u, net.v = u, v
    net.warp_tables = nn.grid_warp_tables(
        in_grid.origin, in_grid.spacing, (in_grid.rows, in_grid.cols),
        out_grid.origin, out_grid.spacing, (out_grid.rows, out_grid.cols),
    )
    params = nn.unpack(core.astype(dtype), net.order, net.shapes, dtype)
    return net, params, out_grid, in_grid


def _downsampled_grid(grid: PixelGrid, f: int) -> PixelGrid:
    """Geometry of a grid after f x f block averaging."""
    if f == 1:
        return grid
    return PixelGrid(
        rows=grid.rows // f, cols=grid.cols // f,
        origin=(grid.origin[0] + (f - 1) / 2.0 * grid.spacing,
                grid.origin[1] + (f - 1) / 2.0 * grid.spacing),
        spacing=grid.spacing * f,
    )


def trainable_mask(model: TranslatorModel) -> np.ndarray:
    """Boolean mask over the flat parameter vector; frozen buffers are False."""
    mask = np.ones(model.parameters.size, dtype=bool)
    if model.kind == "image_space":
        mask[-_image_buffer_len(model.descriptor):] = False
    return mask


# ---------------------------------------------------------------------------
# Forward / loss / gradient
# ---------------------------------------------------------------------------

def _prepare_input(model: TranslatorModel, x: TactileImage) -> np.ndarray:
    if (x.rows, x.cols) != tuple(model.input_shape):
        raise ShapeMismatch(
            f"input {x.rows}x{x.cols}, model expects "
            f"{model.input_shape[0]}x{model.input_shape[1]}"
        )
    t = x.data[None, :, :, None].astype(np.float32)
    return nn.downsample_mean(t, model.descriptor[0])


def forward(model: TranslatorModel, x: TactileImage,
            layout: Optional[TaxelLayout] = None):
    """Run the translator. Image kind returns a TactileImage on its output
    grid; array kinds return an ArraySample clamped to [0, 40000]."""
    xd = _prepare_input(model, x)
    if model.kind == "linear_baseline":
        down, r, c, n_out = model.descriptor
        d = (r // down) * (c // down)
        w = model.parameters[:n_out * d].reshape(n_out, d).astype(np.float64)
        b = model.parameters[n_out * d:].astype(np.float64)
        y = w @ xd.reshape(-1).astype(np.float64) + b
        return _as_sample(y * FULLSCALE, n_out, layout)
    if model.kind == "array_space":
        net = _build_net(model.kind, model.descriptor)
        params = nn.unpack(model.parameters, net.order, net.shapes, np.float32)
        y, _ = net.forward(params, nn.with_coords(xd))
        return _as_sample(y[0].astype(np.float64) * FULLSCALE,
                          model.descriptor[6], layout)
    net, params, out_grid, in_grid = _image_net(model)
    eff = _downsampled_grid(x.grid, model.descriptor[0])
    if (abs(eff.origin[0] - in_grid.origin[0]) > 1e-3
            or abs(eff.origin[1] - in_grid.origin[1]) > 1e-3
            or abs(eff.spacing - in_grid.spacing) > 1e-4):
        raise ShapeMismatch("input grid geometry differs from the training grid")
    (img, _yhat), _ = net.forward(params, nn.with_coords(xd))
    data = np.clip(img[0, :, :, 0].astype(np.float64) * FULLSCALE, 0.0, FULLSCALE)
    return TactileImage(data=data.astype(np.float32), grid=out_grid)


def _as_sample(raw: np.ndarray, n_out: int, layout: Optional[TaxelLayout]) -> ArraySample:
    vals = np.clip(raw, 0.0, FULLSCALE)
    if layout is None:
        from .geometry import build_default_layout

        layout = build_default_layout()
    if layout.n_taxels != n_out:
        raise ShapeMismatch(f"model emits {n_out} channels, layout has {layout.n_taxels}")
    return ArraySample(values=vals, layout=layout)


def predict_array(model: TranslatorModel, x: TactileImage,
                  layout: Optional[TaxelLayout] = None) -> ArraySample:
    """The one prediction path used in evaluation: image models go through
    forward() then the image-to-array sampling operator."""
    if model.kind == "image_space":
        if layout is None:
            from .geometry import build_default_layout

            layout = build_default_layout()
        return phi_inv(forward(model, x), layout)
    return forward(model, x, layout)


def l3_loss(y, y_hat) -> float:
    """Summed squared error (Y - Yhat)^T (Y - Yhat) in raw counts."""
    a = y.values if isinstance(y, ArraySample) else np.asarray(y, dtype=np.float64)
    b = y_hat.values if isinstance(y_hat, ArraySample) else np.asarray(y_hat, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"shapes {a.shape} vs {b.shape}")
    d = a - b
    return float(d @ d)


def backward(model: TranslatorModel, x: TactileImage, y,
             dtype=np.float32) -> np.ndarray:
    """Gradient of L3(y, prediction) with respect to the flat parameters.

    The prediction is the unclamped network output (denormalized); for the
    image kind the gradient flows through the in-graph taxel sampling, so
    the image-to-array conversion is differentiated. Frozen buffer entries
    come back as exact zeros.
    """
    if model.kind == "linear_baseline":
        raise NonDifferentiableKind("linear_baseline is fitted in closed form")
    yv = (y.values if isinstance(y, ArraySample) else np.asarray(y, np.float64))
    y_norm = (yv / FULLSCALE).astype(dtype)[None, :]
    xd = nn.with_coords(_prepare_input(model, x).astype(dtype))
    if model.kind == "array_space":
        net = _build_net(model.kind, model.descriptor, dtype)
        params = nn.unpack(model.parameters.astype(dtype), net.order, net.shapes, dtype)
        yhat, cache = net.forward(params, xd)
        # L3 = FULLSCALE^2 * sum((yhat_norm - y_norm)^2)
        dy = (2.0 * FULLSCALE * FULLSCALE) * (yhat - y_norm)
        grads = net.backward(params, cache, dy.astype(dtype))
        return nn.pack(grads, net.order).astype(np.float64)
    net, params, _out_grid, _in_grid = _image_net(model, dtype)
    params = {k: v.astype(dtype) for k, v in params.items()}
    (img, yhat), cache = net.forward(params, xd)
    dy = (2.0 * FULLSCALE * FULLSCALE) * (yhat - y_norm)
    grads = net.backward(params, cache, np.zeros_like(img), dy.astype(dtype))
    flat = nn.pack(grads, net.order).astype(np.float64)
    return np.concatenate([flat, np.zeros(_image_buffer_len(model.descriptor))])


# ---------------------------------------------------------------------------
# Closed-form linear baseline
# ---------------------------------------------------------------------------

def fit_linear_baseline(train_pairs, ridge: float = 10.0,
                        downsample: int = 1) -> TranslatorModel:
    """Ridge regression from downsampled input pixels to array channels.

    Solved by the centered normal equations; with ridge = 0 a rank-deficient
    design raises SingularSystem.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    xs, ys = _stack_pairs(train_pairs)
    n_out = ys.shape[1]
    in_shape = xs.shape[1:3]
    xd = nn.downsample_mean(xs, downsample)
    n = xd.shape[0]
    d = xd.shape[1] * xd.shape[2]
    if n < n_out:
        raise ValueError(f"need at least {n_out} training pairs, got {n}")
    X = xd.reshape(n, d).astype(np.float64)
    Y = (ys / FULLSCALE).astype(np.float64)
    x_mean = X.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    Yc = Y - y_mean
    gram = Xc.T @ Xc
    if ridge > 0:
        gram[np.diag_indices_from(gram)] += ridge
    from scipy.linalg import LinAlgError, cho_factor, cho_solve

    try:
        w = cho_solve(cho_factor(gram), Xc.T @ Yc).T  # (n_out, d)
    except (LinAlgError, np.linalg.LinAlgError):
        if ridge == 0:
            raise SingularSystem("design matrix is rank-deficient and ridge is 0")
        raise
    b = y_mean - w @ x_mean
    desc = (downsample, in_shape[0], in_shape[1], n_out)
    params = np.concatenate([w.ravel(), b]).astype(np.float32)
    return TranslatorModel(
        kind="linear_baseline",
        input_shape=in_shape,
        output_shape=(n_out,),
        descriptor=desc,
        parameters=params,
    )


def _stack_pairs(pairs):
    xs, ys = [], []
    for p in pairs:
        x = p[0] if isinstance(p, tuple) else p.x
        y = p[1] if isinstance(p, tuple) else p.y
        xs.append(x.data if isinstance(x, TactileImage) else np.asarray(x, np.float32))
        ys.append(y.values if isinstance(y, ArraySample) else np.asarray(y, np.float64))
    if not xs:
        raise ValueError("empty pair list")
    return (np.stack(xs)[..., None].astype(np.float32), np.stack(ys).astype(np.float64))


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train(kind: str, cfg: TrainConfig, train_pairs, val_pairs,
          layout: Optional[TaxelLayout] = None,
          tactile_grid: Optional[PixelGrid] = None,
          on_epoch: Optional[Callable] = None) -> TranslatorModel:
    """Minibatch training with early stopping on validation L3.

    Deterministic given cfg.seed: fixed init, fixed shuffle sequence. The
    returned model carries the parameters of the best validation epoch.
    image_space optimizes pixel reconstruction of the interpolated target
    image plus the L3 term through the in-graph taxel sampling; array_space
    optimizes L3 alone.
    """
    if kind == "linear_baseline":
        model = fit_linear_baseline(train_pairs, ridge=cfg.ridge,
                                    downsample=cfg.downsample)
        vx, vy = _stack_pairs(val_pairs)
        val_l3 = _mean_l3_linear(model, vx, vy)
        if on_epoch is not None:
            on_epoch(0, float("nan"), val_l3)
        meta = TrainingMeta(epochs_run=0, best_val_l3=val_l3, seed=cfg.seed,
                            config_hash=cfg.content_hash(kind))
        return replace(model, training_meta=meta)
    if kind not in ("array_space", "image_space"):
        raise ValueError(f"unknown kind {kind!r}")
    if not train_pairs or not val_pairs:
        raise ValueError("training and validation splits must be non-empty")

    if layout is None:
        from .geometry import build_default_layout

        layout = build_default_layout()

    first_x = train_pairs[0][0] if isinstance(train_pairs[0], tuple) else train_pairs[0].x
    if not isinstance(first_x, TactileImage):
        raise ValueError("training inputs must be TactileImage instances")
    xs, ys = _stack_pairs(train_pairs)
    vx, vy = _stack_pairs(val_pairs)
    in_shape = xs.shape[1:3]
    xs = nn.with_coords(nn.downsample_mean(xs, cfg.downsample))
    vx = nn.with_coords(nn.downsample_mean(vx, cfg.downsample))
    y_norm = (ys / FULLSCALE).astype(np.float32)
    vy_norm = (vy / FULLSCALE).astype(np.float32)
    n = xs.shape[0]
    n_tax = ys.shape[1]

    if kind == "array_space":
        desc = (cfg.downsample, in_shape[0], in_shape[1], *ARRAY_WIDTHS, n_tax,
                NET_IN_CH)
        net = _build_net(kind, desc)
        params = nn.init_params(net.specs, cfg.seed)
        frozen = np.zeros(0, dtype=np.float32)
        img_target_batch = None
    else:
        if tactile_grid is None:
            tactile_grid = default_tactile_grid(layout)
        desc = (cfg.downsample, in_shape[0], in_shape[1], *IMAGE_WIDTHS,
                tactile_grid.rows, tactile_grid.cols, n_tax, NET_IN_CH)
        net = _build_net(kind, desc)
        plan = get_rasterizer(layout, tactile_grid)
        net.u, net.v = plan.taxel_pixel_coords()
        in_grid = _downsampled_grid(first_x.grid, cfg.downsample)
        net.warp_tables = nn.grid_warp_tables(
            in_grid.origin, in_grid.spacing, (in_grid.rows, in_grid.cols),
            tactile_grid.origin, tactile_grid.spacing,
            (tactile_grid.rows, tactile_grid.cols),
        )
        params = nn.init_params(net.specs, cfg.seed)
        frozen = np.concatenate([
            [tactile_grid.origin[0], tactile_grid.origin[1], tactile_grid.spacing],
            [in_grid.origin[0], in_grid.origin[1], in_grid.spacing],
            net.u, net.v,
        ]).astype(np.float32)

        def img_target_batch(sel):
            # phi of the raw counts, renormalized; built per batch to keep
            # full-resolution corpora out of memory
            return np.stack(
                [plan.phi(ys[i]) for i in sel]
            ).astype(np.float32)[..., None] / FULLSCALE

    opt = nn.Adam(params, lr=cfg.learning_rate)
    best_val = np.inf
    best_params = nn.pack(params, net.order).copy()
    best_epoch = 0
    epochs_without = 0
    n_batches = (n + cfg.batch_size - 1) // cfg.batch_size

    for epoch in range(1, cfg.max_epochs + 1):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1, epoch]))
        order = rng.permutation(n)
        train_loss = 0.0
        for bi in range(n_batches):
            sel = order[bi * cfg.batch_size:(bi + 1) * cfg.batch_size]
            xb, yb = xs[sel], y_norm[sel]
            if kind == "array_space":
                yhat, cache = net.forward(params, xb)
                diff = yhat - yb
                loss = float(np.mean(np.sum(diff * diff, axis=1)))
                dy = (2.0 / len(sel)) * diff
                grads = net.backward(params, cache, dy.astype(np.float32))
            else:
                (img, yhat), cache = net.forward(params, xb)
                tgt = img_target_batch(sel)
                diff_i = img - tgt
                diff_y = yhat - yb
                loss = float(np.mean(diff_i * diff_i)
                             + np.mean(np.sum(diff_y * diff_y, axis=1)) / n_tax)
                dimg = (2.0 / diff_i.size) * diff_i
                dy = (2.0 / (len(sel) * n_tax)) * diff_y
                grads = net.backward(params, cache, dimg.astype(np.float32),
                                     dy.astype(np.float32))
            if not np.isfinite(loss):
                raise Diverged(f"train loss became {loss} at epoch {epoch}")
            opt.step(params, grads)
            train_loss += loss
        train_loss /= n_batches

        val_l3 = _mean_l3_net(kind, net, params, vx, vy_norm)
        if not np.isfinite(val_l3):
            raise Diverged(f"validation loss became {val_l3} at epoch {epoch}")
        if on_epoch is not None:
            on_epoch(epoch, train_loss, val_l3)
        if val_l3 < best_val:
            best_val = val_l3
            best_params = nn.pack(params, net.order).copy()
            best_epoch = epoch
            epochs_without = 0
        else:
            epochs_without += 1
            if epochs_without >= cfg.patience:
                break

    meta = TrainingMeta(epochs_run=best_epoch, best_val_l3=float(best_val),
                        seed=cfg.seed, config_hash=cfg.content_hash(kind))
    flat = np.concatenate([best_params.astype(np.float32), frozen])
    out_shape = (desc[7], desc[8]) if kind == "image_space" else (n_tax,)
    return TranslatorModel(kind=kind, input_shape=in_shape, output_shape=out_shape,
                           descriptor=desc, parameters=flat, training_meta=meta)


def _mean_l3_net(kind, net, params, vx, vy_norm, chunk=64) -> float:
    total = 0.0
    n = vx.shape[0]
    for i in range(0, n, chunk):
        xb = vx[i:i + chunk]
        if kind == "array_space":
            yhat, _ = net.forward(params, xb)
        else:
            (_, yhat), _ = net.forward(params, xb)
        diff = (yhat - vy_norm[i:i + chunk]).astype(np.float64) * FULLSCALE
        total += float(np.sum(diff * diff))
    return total / n


def _mean_l3_linear(model, vx, vy) -> float:
    desc = model.descriptor
    down, r, c, n_out = desc
    d = (r // down) * (c // down)
    w = model.parameters[:n_out * d].reshape(n_out, d).astype(np.float64)
    b = model.parameters[n_out * d:].astype(np.float64)
    xd = nn.downsample_mean(vx, down).reshape(vx.shape[0], d).astype(np.float64)
    pred = xd @ w.T + b
    diff = pred * FULLSCALE - vy
    return float(np.mean(np.sum(diff * diff, axis=1)))


# ---------------------------------------------------------------------------
# T2TM file format
# ---------------------------------------------------------------------------

def save_model(model: TranslatorModel, path):
    meta = model.training_meta
    with open(path, "wb") as f:
        f.write(T2TM_MAGIC)
        f.write(struct.pack("<I", T2TM_VERSION))
        f.write(struct.pack("<B", _KIND_CODES[model.kind]))
        f.write(struct.pack("<I", 4 + len(model.descriptor)))
        f.write(struct.pack("<4I", model.input_shape[0], model.input_shape[1],
                            *_shape2(model.output_shape)))
        f.write(struct.pack(f"<{len(model.descriptor)}I", *model.descriptor))
        f.write(np.ascontiguousarray(model.parameters, dtype="<f4").tobytes())
        f.write(struct.pack("<I", meta.epochs_run))
        f.write(struct.pack("<d", meta.best_val_l3))
        f.write(struct.pack("<Q", meta.seed))
        f.write(meta.config_hash[:32].ljust(32, b"\x00"))


def _shape2(shape):
    return (shape[0], shape[1]) if len(shape) == 2 else (shape[0], 0)


def load_model(path) -> TranslatorModel:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != T2TM_MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}", offset=0)
    if len(raw) < 13:
        raise FormatError("truncated header", offset=len(raw))
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != T2TM_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    (kind_code,) = struct.unpack_from("<B", raw, 8)
    if kind_code not in _CODE_KINDS:
        raise FormatError(f"unknown kind code {kind_code}", offset=8)
    kind = _CODE_KINDS[kind_code]
    (desc_len,) = struct.unpack_from("<I", raw, 9)
    pos = 13
    if len(raw) < pos + 4 * desc_len:
        raise FormatError("truncated descriptor", offset=len(raw))
    words = struct.unpack_from(f"<{desc_len}I", raw, pos)
    pos += 4 * desc_len
    in_shape = (words[0], words[1])
    out_shape = (words[2], words[3]) if words[3] != 0 else (words[2],)
    desc = tuple(words[4:])
    count = _param_count(kind, desc)
    need = count * 4
    if len(raw) < pos + need:
        raise FormatError("truncated parameter block", offset=len(raw))
    params = np.frombuffer(raw[pos:pos + need], dtype="<f4").copy()
    pos += need
    if len(raw) < pos + 4 + 8 + 8 + 32:
        raise FormatError("truncated training_meta block", offset=len(raw))
    (epochs_run,) = struct.unpack_from("<I", raw, pos)
    (best_val,) = struct.unpack_from("<d", raw, pos + 4)
    (seed,) = struct.unpack_from("<Q", raw, pos + 12)
    config_hash = raw[pos + 20:pos + 52]
    meta = TrainingMeta(epochs_run=epochs_run, best_val_l3=best_val, seed=seed,
                        config_hash=config_hash)
    return TranslatorModel(kind=kind, input_shape=in_shape, output_shape=out_shape,
                           descriptor=desc, parameters=params, training_meta=meta)
