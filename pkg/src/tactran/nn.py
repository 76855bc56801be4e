"""Small convolutional nets with hand-written reverse-mode gradients.

Activations are channels-last numpy arrays shaped (batch, rows, cols,
channels), which lets every convolution run as nine well-shaped GEMMs (one
per kernel tap) instead of an im2col blowup. Parameters live in per-net
dicts of named arrays; `pack`/`unpack` move them to and from a single flat
vector for optimization, serialization and finite-difference checking.
Only what the two translator families need is implemented: 3x3
same-padding convolutions, ReLU, 2x2 average pooling with count-aware
edges, nearest-neighbor upsampling, channel concat, global average
pooling, an affine head, and bilinear point sampling.
"""

from __future__ import annotations

import numpy as np


# ---------------------------------------------------------------------------
# Primitive ops: forward returns (out, cache); backward consumes cache.
# ---------------------------------------------------------------------------

def conv2d_forward(x, w, b):
    """3x3 convolution, stride 1, zero 'same' padding.

    x is (B, H, W, C); w is (3, 3, C, O); b is (O,).
    """
    bsz, h, wd, c = x.shape
    o = w.shape[3]
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    out = np.empty((bsz, h, wd, o), dtype=x.dtype)
    out[:] = b
    outf = out.reshape(-1, o)
    for i in range(3):
        for j in range(3):
            xs = xp[:, i:i + h, j:j + wd, :].reshape(-1, c)
            outf += xs @ w[i, j]
    return out, (xp, x.shape)


def conv2d_backward(dy, w, cache):
    xp, x_shape = cache
    bsz, h, wd, c = x_shape
    o = w.shape[3]
    dyf = dy.reshape(-1, o)
    dw = np.empty_like(w)
    db = dyf.sum(axis=0)
    dxp = np.zeros_like(xp)
    for i in range(3):
        for j in range(3):
            xs = xp[:, i:i + h, j:j + wd, :].reshape(-1, c)
            dw[i, j] = xs.T @ dyf
            dxp[:, i:i + h, j:j + wd, :] += (dyf @ w[i, j].T).reshape(bsz, h, wd, c)
    return dxp[:, 1:h + 1, 1:wd + 1, :], dw, db


def relu_forward(x):
    mask = x > 0
    return x * mask, mask


def relu_backward(dy, mask):
    return dy * mask


def avgpool2_forward(x):
    """2x2 average pooling, stride 2; ragged edges average the valid cells."""
    bsz, h, w, c = x.shape
    h2, w2 = (h + 1) // 2, (w + 1) // 2
    xp = np.zeros((bsz, h2 * 2, w2 * 2, c), dtype=x.dtype)
    xp[:, :h, :w] = x
    s = xp.reshape(bsz, h2, 2, w2, 2, c).sum(axis=(2, 4))
    rows_valid = np.minimum(2, h - 2 * np.arange(h2))
    cols_valid = np.minimum(2, w - 2 * np.arange(w2))
    cnt = (rows_valid[:, None] * cols_valid[None, :]).astype(x.dtype)
    return s / cnt[None, :, :, None], (x.shape, cnt)


def avgpool2_backward(dy, cache):
    x_shape, cnt = cache
    bsz, h, w, c = x_shape
    g = dy / cnt[None, :, :, None]
    up = np.repeat(np.repeat(g, 2, axis=1), 2, axis=2)
    return up[:, :h, :w]


def resize_nearest_forward(x, out_hw):
    """Nearest-neighbor resize; only same-or-larger targets are supported,
    which keeps every source cell backed by a contiguous output run."""
    bsz, h, w, c = x.shape
    ho, wo = out_hw
    if ho < h or wo < w:
        raise ValueError("resize_nearest only upsamples")
    ri = (np.arange(ho) * h) // ho
    ci = (np.arange(wo) * w) // wo
    return x[:, ri][:, :, ci], (x.shape, ri, ci)


def resize_nearest_backward(dy, cache):
    x_shape, ri, ci = cache
    bsz, h, w, c = x_shape
    row_starts = np.searchsorted(ri, np.arange(h))
    col_starts = np.searchsorted(ci, np.arange(w))
    tmp = np.add.reduceat(dy, row_starts, axis=1)
    return np.add.reduceat(tmp, col_starts, axis=2)


def concat_forward(a, b):
    return np.concatenate([a, b], axis=3), a.shape[3]


def concat_backward(dy, ca):
    return dy[..., :ca], dy[..., ca:]


def gap_forward(x):
    return x.mean(axis=(1, 2)), x.shape


def gap_backward(dy, x_shape):
    bsz, h, w, c = x_shape
    return np.broadcast_to(dy[:, None, None, :], x_shape) / (h * w)


def _segment_bounds(n, parts):
    return (np.arange(parts) * n) // parts


def adaptive_avgpool_forward(x, out_hw):
    """Average-pool to a fixed (ph, pw) cell grid of near-equal segments."""
    bsz, h, w, c = x.shape
    ph, pw = out_hw
    rb = _segment_bounds(h, ph)
    cb = _segment_bounds(w, pw)
    rs = np.diff(np.append(rb, h)).astype(x.dtype)
    cs = np.diff(np.append(cb, w)).astype(x.dtype)
    s = np.add.reduceat(np.add.reduceat(x, rb, axis=1), cb, axis=2)
    out = s / (rs[:, None] * cs[None, :])[None, :, :, None]
    return out, (x.shape, rb, cb, rs, cs)


def adaptive_avgpool_backward(dy, cache):
    x_shape, rb, cb, rs, cs = cache
    bsz, h, w, c = x_shape
    g = dy / (rs[:, None] * cs[None, :])[None, :, :, None]
    g = np.repeat(g, rs.astype(np.int64), axis=1)
    return np.repeat(g, cs.astype(np.int64), axis=2)


def affine_forward(x, w, b):
    return x @ w.T + b, x


def affine_backward(dy, w, x):
    return dy @ w, dy.T @ x, dy.sum(axis=0)


def sample_points_forward(img, u, v):
    """Bilinear sample of (B, H, W, 1) images at fractional pixel coords (T,)."""
    bsz, h, w, _ = img.shape
    i0 = np.minimum(np.floor(u).astype(np.int64), w - 1)
    j0 = np.minimum(np.floor(v).astype(np.int64), h - 1)
    i1 = np.minimum(i0 + 1, w - 1)
    j1 = np.minimum(j0 + 1, h - 1)
    fu = (u - i0).astype(img.dtype)
    fv = (v - j0).astype(img.dtype)
    w00 = (1 - fu) * (1 - fv)
    w01 = fu * (1 - fv)
    w10 = (1 - fu) * fv
    w11 = fu * fv
    flat = img.reshape(bsz, h * w)
    out = (
        flat[:, j0 * w + i0] * w00
        + flat[:, j0 * w + i1] * w01
        + flat[:, j1 * w + i0] * w10
        + flat[:, j1 * w + i1] * w11
    )
    cache = (img.shape, (j0 * w + i0, j0 * w + i1, j1 * w + i0, j1 * w + i1),
             (w00, w01, w10, w11))
    return out, cache


def sample_points_backward(dy, cache):
    img_shape, idxs, wts = cache
    bsz, h, w, _ = img_shape
    dflat = np.zeros((bsz, h * w), dtype=dy.dtype)
    for idx, wt in zip(idxs, wts):
        np.add.at(dflat, (slice(None), idx), dy * wt)
    return dflat.reshape(img_shape)


def grid_warp_tables(src_origin, src_spacing, src_hw, dst_origin, dst_spacing,
                     dst_hw):
    """Bilinear resampling tables mapping one physical pixel grid to another.

    For each destination pixel center, the four source indices and weights
    that bilinearly interpolate the source grid at the same physical
    location. Destination pixels outside the source lattice get zero weight.
    """
    hs, ws = src_hw
    hd, wd = dst_hw
    xs = dst_origin[0] + dst_spacing * np.arange(wd)
    ys = dst_origin[1] + dst_spacing * np.arange(hd)
    u = (xs - src_origin[0]) / src_spacing
    v = (ys - src_origin[1]) / src_spacing
    uu, vv = np.meshgrid(u, v)
    valid = (uu >= 0) & (uu <= ws - 1) & (vv >= 0) & (vv <= hs - 1)
    uu = np.clip(uu, 0, ws - 1)
    vv = np.clip(vv, 0, hs - 1)
    i0 = np.minimum(uu.astype(np.int64), ws - 1)
    j0 = np.minimum(vv.astype(np.int64), hs - 1)
    i1 = np.minimum(i0 + 1, ws - 1)
    j1 = np.minimum(j0 + 1, hs - 1)
    fu = (uu - i0) * valid
    fv = (vv - j0) * valid
    base = valid.astype(np.float64)
    idxs = np.stack([
        (j0 * ws + i0).ravel(), (j0 * ws + i1).ravel(),
        (j1 * ws + i0).ravel(), (j1 * ws + i1).ravel(),
    ])
    wts = np.stack([
        (base * (1 - fu) * (1 - fv)).ravel(), (base * fu * (1 - fv)).ravel(),
        (base * (1 - fu) * fv).ravel(), (base * fu * fv).ravel(),
    ])
    return idxs, wts


def grid_warp_forward(x, tables, out_hw):
    """Apply precomputed bilinear warp tables to (B, Hs, Ws, 1) maps."""
    idxs, wts = tables
    bsz, hs, ws, _ = x.shape
    flat = x.reshape(bsz, hs * ws)
    out = np.zeros((bsz, idxs.shape[1]), dtype=x.dtype)
    for k in range(4):
        out += flat[:, idxs[k]] * wts[k].astype(x.dtype)
    return out.reshape(bsz, out_hw[0], out_hw[1], 1), (x.shape, tables)


def grid_warp_backward(dy, cache):
    x_shape, (idxs, wts) = cache
    bsz, hs, ws, _ = x_shape
    dyf = dy.reshape(bsz, -1)
    dflat = np.zeros((bsz, hs * ws), dtype=dy.dtype)
    for k in range(4):
        np.add.at(dflat, (slice(None), idxs[k]), dyf * wts[k].astype(dy.dtype))
    return dflat.reshape(x_shape)


def downsample_mean(x, factor):
    """Average-pool by an integer factor (fixed input preprocessing)."""
    if factor == 1:
        return x
    bsz, h, w, c = x.shape
    h2, w2 = h // factor, w // factor
    x = x[:, :h2 * factor, :w2 * factor]
    return x.reshape(bsz, h2, factor, w2, factor, c).mean(axis=(2, 4))


def coord_channels(h, w, dtype=np.float32):
    """Two constant feature planes holding normalized pixel coordinates."""
    ys = np.linspace(-1.0, 1.0, h, dtype=dtype)
    xs = np.linspace(-1.0, 1.0, w, dtype=dtype)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.stack([xx, yy], axis=-1)  # (H, W, 2)


def with_coords(x):
    """Append coordinate channels to a (B, H, W, C) batch."""
    bsz, h, w, _ = x.shape
    cc = np.broadcast_to(coord_channels(h, w, x.dtype), (bsz, h, w, 2))
    return np.concatenate([x, cc], axis=3)


# ---------------------------------------------------------------------------
# Parameter bookkeeping
# ---------------------------------------------------------------------------

def init_params(specs, seed, dtype=np.float32):
    """Uniform [-s, s] with s = 1/sqrt(fan_in) per array, from one seeded rng."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    params = {}
    for name, shape, fan_in in specs:
        s = 1.0 / np.sqrt(max(fan_in, 1))
        params[name] = rng.uniform(-s, s, size=shape).astype(dtype)
    return params


def pack(params, order):
    return np.concatenate([np.asarray(params[n]).ravel() for n in order])


def unpack(flat, order, shapes, dtype):
    out = {}
    pos = 0
    for name in order:
        size = int(np.prod(shapes[name]))
        out[name] = flat[pos:pos + size].reshape(shapes[name]).astype(dtype, copy=True)
        pos += size
    if pos != flat.size:
        raise ValueError(f"flat vector has {flat.size} values, expected {pos}")
    return out


class Adam:
    """Standard Adam updates over a dict of parameter arrays."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1t = 1.0 - self.b1 ** self.t
        b2t = 1.0 - self.b2 ** self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            params[k] -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


# ---------------------------------------------------------------------------
# The two translator networks
# ---------------------------------------------------------------------------

class ArrayRegressor:
    """Three conv-relu-pool blocks, global average pooling, affine head.

    The input may carry fixed coordinate planes next to the intensity
    channel so globally pooled features can encode position.
    """

    def __init__(self, in_hw, widths, n_out, in_ch=3, dtype=np.float32):
        self.in_hw = tuple(in_hw)
        self.widths = tuple(widths)
        self.n_out = n_out
        self.in_ch = in_ch
        self.dtype = dtype
        w0, w1, w2 = widths
        self.specs = [
            ("conv1_w", (3, 3, in_ch, w0), in_ch * 9),
            ("conv1_b", (w0,), 9),
            ("conv2_w", (3, 3, w0, w1), w0 * 9),
            ("conv2_b", (w1,), w0 * 9),
            ("conv3_w", (3, 3, w1, w2), w1 * 9),
            ("conv3_b", (w2,), w1 * 9),
            ("fc_w", (n_out, w2), w2),
            ("fc_b", (n_out,), w2),
        ]
        self.order = [n for n, _, _ in self.specs]
        self.shapes = {n: s for n, s, _ in self.specs}

    def forward(self, params, x):
        cache = {}
        h = x
        for i in (1, 2, 3):
            h, cache[f"conv{i}"] = conv2d_forward(h, params[f"conv{i}_w"], params[f"conv{i}_b"])
            h, cache[f"relu{i}"] = relu_forward(h)
            h, cache[f"pool{i}"] = avgpool2_forward(h)
        h, cache["gap"] = gap_forward(h)
        y, cache["fc"] = affine_forward(h, params["fc_w"], params["fc_b"])
        return y, cache

    def backward(self, params, cache, dy):
        grads = {}
        dh, grads["fc_w"], grads["fc_b"] = affine_backward(dy, params["fc_w"], cache["fc"])
        dh = gap_backward(dh, cache["gap"])
        for i in (3, 2, 1):
            dh = avgpool2_backward(dh, cache[f"pool{i}"])
            dh = relu_backward(dh, cache[f"relu{i}"])
            dh, grads[f"conv{i}_w"], grads[f"conv{i}_b"] = conv2d_backward(
                dh, params[f"conv{i}_w"], cache[f"conv{i}"]
            )
        return grads


class ImageGenerator:
    """Four-level encoder-decoder with skip connections and a taxel sampler.

    The decoder output lives on the (downsampled) camera grid; a fixed
    bilinear warp resamples it onto the physical tactile grid, where taxel
    values are read off by bilinear sampling, tying the L3 term into the
    differentiated graph. The warp tables and taxel coordinates are bound
    externally (`warp_tables`, `u`, `v`).
    """

    def __init__(self, in_hw, widths, out_hw, taxel_uv, in_ch=3, dtype=np.float32):
        self.in_hw = tuple(in_hw)
        self.widths = tuple(widths)
        self.out_hw = tuple(out_hw)
        self.in_ch = in_ch
        self.dtype = dtype
        self.u = np.asarray(taxel_uv[0], dtype=np.float64)
        self.v = np.asarray(taxel_uv[1], dtype=np.float64)
        self.warp_tables = None
        w0, w1, w2, w3 = widths
        self.specs = [
            ("enc1_w", (3, 3, in_ch, w0), in_ch * 9),
            ("enc1_b", (w0,), in_ch * 9),
            ("enc2_w", (3, 3, w0, w1), w0 * 9),
            ("enc2_b", (w1,), w0 * 9),
            ("enc3_w", (3, 3, w1, w2), w1 * 9),
            ("enc3_b", (w2,), w1 * 9),
            ("mid_w", (3, 3, w2, w3), w2 * 9),
            ("mid_b", (w3,), w2 * 9),
            ("dec3_w", (3, 3, w3 + w2, w2), (w3 + w2) * 9),
            ("dec3_b", (w2,), (w3 + w2) * 9),
            ("dec2_w", (3, 3, w2 + w1, w1), (w2 + w1) * 9),
            ("dec2_b", (w1,), (w2 + w1) * 9),
            ("dec1_w", (3, 3, w1 + w0, w0), (w1 + w0) * 9),
            ("dec1_b", (w0,), (w1 + w0) * 9),
            ("out_w", (3, 3, w0, 1), w0 * 9),
            ("out_b", (1,), w0 * 9),
        ]
        self.order = [n for n, _, _ in self.specs]
        self.shapes = {n: s for n, s, _ in self.specs}

    def forward(self, params, x):
        cache = {}
        e1, cache["enc1"] = conv2d_forward(x, params["enc1_w"], params["enc1_b"])
        e1, cache["renc1"] = relu_forward(e1)
        p1, cache["pool1"] = avgpool2_forward(e1)
        e2, cache["enc2"] = conv2d_forward(p1, params["enc2_w"], params["enc2_b"])
        e2, cache["renc2"] = relu_forward(e2)
        p2, cache["pool2"] = avgpool2_forward(e2)
        e3, cache["enc3"] = conv2d_forward(p2, params["enc3_w"], params["enc3_b"])
        e3, cache["renc3"] = relu_forward(e3)
        p3, cache["pool3"] = avgpool2_forward(e3)
        m, cache["mid"] = conv2d_forward(p3, params["mid_w"], params["mid_b"])
        m, cache["rmid"] = relu_forward(m)

        u3, cache["up3"] = resize_nearest_forward(m, e3.shape[1:3])
        c3, cache["cat3"] = concat_forward(u3, e3)
        d3, cache["dec3"] = conv2d_forward(c3, params["dec3_w"], params["dec3_b"])
        d3, cache["rdec3"] = relu_forward(d3)
        u2, cache["up2"] = resize_nearest_forward(d3, e2.shape[1:3])
        c2, cache["cat2"] = concat_forward(u2, e2)
        d2, cache["dec2"] = conv2d_forward(c2, params["dec2_w"], params["dec2_b"])
        d2, cache["rdec2"] = relu_forward(d2)
        u1, cache["up1"] = resize_nearest_forward(d2, e1.shape[1:3])
        c1, cache["cat1"] = concat_forward(u1, e1)
        d1, cache["dec1"] = conv2d_forward(c1, params["dec1_w"], params["dec1_b"])
        d1, cache["rdec1"] = relu_forward(d1)
        feat, cache["out"] = conv2d_forward(d1, params["out_w"], params["out_b"])
        img, cache["warp"] = grid_warp_forward(feat, self.warp_tables, self.out_hw)
        yhat, cache["sample"] = sample_points_forward(img, self.u, self.v)
        return (img, yhat), cache

    def backward(self, params, cache, dimg, dy):
        grads = {}
        dimg = dimg + sample_points_backward(dy, cache["sample"])
        dfeat = grid_warp_backward(dimg, cache["warp"])
        dd1, grads["out_w"], grads["out_b"] = conv2d_backward(dfeat, params["out_w"], cache["out"])
        dd1 = relu_backward(dd1, cache["rdec1"])
        dc1, grads["dec1_w"], grads["dec1_b"] = conv2d_backward(dd1, params["dec1_w"], cache["dec1"])
        du1, de1_skip = concat_backward(dc1, cache["cat1"])
        dd2 = resize_nearest_backward(du1, cache["up1"])
        dd2 = relu_backward(dd2, cache["rdec2"])
        dc2, grads["dec2_w"], grads["dec2_b"] = conv2d_backward(dd2, params["dec2_w"], cache["dec2"])
        du2, de2_skip = concat_backward(dc2, cache["cat2"])
        dd3 = resize_nearest_backward(du2, cache["up2"])
        dd3 = relu_backward(dd3, cache["rdec3"])
        dc3, grads["dec3_w"], grads["dec3_b"] = conv2d_backward(dd3, params["dec3_w"], cache["dec3"])
        du3, de3_skip = concat_backward(dc3, cache["cat3"])
        dm = resize_nearest_backward(du3, cache["up3"])
        dm = relu_backward(dm, cache["rmid"])
        dp3, grads["mid_w"], grads["mid_b"] = conv2d_backward(dm, params["mid_w"], cache["mid"])

        de3 = avgpool2_backward(dp3, cache["pool3"]) + de3_skip
        de3 = relu_backward(de3, cache["renc3"])
        dp2, grads["enc3_w"], grads["enc3_b"] = conv2d_backward(de3, params["enc3_w"], cache["enc3"])
        de2 = avgpool2_backward(dp2, cache["pool2"]) + de2_skip
        de2 = relu_backward(de2, cache["renc2"])
        dp1, grads["enc2_w"], grads["enc2_b"] = conv2d_backward(de2, params["enc2_w"], cache["enc2"])
        de1 = avgpool2_backward(dp1, cache["pool1"]) + de1_skip
        de1 = relu_backward(de1, cache["renc1"])
        _, grads["enc1_w"], grads["enc1_b"] = conv2d_backward(de1, params["enc1_w"], cache["enc1"])
        return grads
