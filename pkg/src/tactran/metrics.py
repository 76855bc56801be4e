"""Evaluation measures: RMSE, percent-of-fullscale, SSIM, contact IoU.

RMSE uses the per-channel mean (sqrt(mean((y - y_hat)^2))) so that dividing
by the 40000-count fullscale reproduces the percentage arithmetic of the
reference results exactly. Aggregates are per-sample values averaged over
each split, which the report header records explicitly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, ShapeMismatch
from .interp import FULLSCALE, ArraySample, TactileImage

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DEFAULT_IOU_THRESHOLD = 0.25

AGGREGATION_NOTE = "per-sample RMSE averaged over each split"


def _as_values(y) -> np.ndarray:
    if isinstance(y, ArraySample):
        return y.values
    return np.asarray(y, dtype=np.float64)


def rmse(y, y_hat) -> float:
    """Root of the per-channel mean squared error between two arrays."""
    a, b = _as_values(y), _as_values(y_hat)
    if a.shape != b.shape:
        raise LengthMismatch(f"shapes {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def percent_fullscale(rmse_value: float) -> float:
    """RMSE as a percentage of the 40000-count sensor fullscale."""
    if rmse_value < 0:
        raise ValueError("rmse must be non-negative")
    return 100.0 * rmse_value / FULLSCALE


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-0.5 * (r / sigma) ** 2)
    return k / k.sum()


def _windowed(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation: every window fully inside the image."""
    from scipy.ndimage import correlate1d

    out = correlate1d(img, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    h = len(kernel) // 2
    return out[h:-h or None, h:-h or None]


def ssim(a, b, dynamic_range: float = FULLSCALE) -> float:
    """Single-scale structural similarity with the standard 11x11 window."""
    x = (a.data if isinstance(a, TactileImage) else np.asarray(a)).astype(np.float64)
    y = (b.data if isinstance(b, TactileImage) else np.asarray(b)).astype(np.float64)
    if x.shape != y.shape:
        raise ShapeMismatch(f"shapes {x.shape} vs {y.shape}")
    if x.shape[0] < SSIM_WINDOW or x.shape[1] < SSIM_WINDOW:
        raise ShapeMismatch("image smaller than the SSIM window")
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2
    mu_x = _windowed(x, kernel)
    mu_y = _windowed(y, kernel)
    xx = _windowed(x * x, kernel) - mu_x * mu_x
    yy = _windowed(y * y, kernel) - mu_y * mu_y
    xy = _windowed(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def contact_iou(a, b, threshold_fraction: float = DEFAULT_IOU_THRESHOLD) -> float:
    """IoU of the two contact masks, each thresholded at a fraction of its own max."""
    if not 0.0 < threshold_fraction < 1.0:
        raise ValueError("threshold_fraction must be in (0, 1)")
    x = (a.data if isinstance(a, TactileImage) else np.asarray(a)).astype(np.float64)
    y = (b.data if isinstance(b, TactileImage) else np.asarray(b)).astype(np.float64)
    if x.shape != y.shape:
        raise ShapeMismatch(f"shapes {x.shape} vs {y.shape}")
    ma = x > threshold_fraction * x.max() if x.max() > 0 else np.zeros_like(x, bool)
    mb = y > threshold_fraction * y.max() if y.max() > 0 else np.zeros_like(y, bool)
    union = np.count_nonzero(ma | mb)
    if union == 0:
        return 1.0
    return float(np.count_nonzero(ma & mb) / union)


@dataclass
class SampleMetrics:
    sample_id: str
    model: str
    split: str
    rmse: float
    percent_fullscale: float
    ssim: float
    contact_iou: float


@dataclass
class EvalReport:
    """Per-sample metric rows plus per (model, split) aggregate means."""

    per_sample: list = field(default_factory=list)
    header: dict = field(default_factory=lambda: {"aggregation": AGGREGATION_NOTE})

    def add(self, row: SampleMetrics):
        self.per_sample.append(row)

    def aggregate(self) -> dict:
        groups: dict[tuple, list] = {}
        for r in self.per_sample:
            groups.setdefault((r.model, r.split), []).append(r)
        out: dict[str, dict] = {}
        for (model, split), rows in sorted(groups.items()):
            agg = out.setdefault(model, {})
            agg[split] = {
                "count": len(rows),
                "rmse": float(np.mean([r.rmse for r in rows])),
                "percent_fullscale": float(np.mean([r.percent_fullscale for r in rows])),
                "ssim": float(np.mean([r.ssim for r in rows])),
                "contact_iou": float(np.mean([r.contact_iou for r in rows])),
            }
        return out

    def to_json(self) -> str:
        doc = {
            "header": self.header,
            "aggregate": self.aggregate(),
            "per_sample": [
                {
                    "id": r.sample_id,
                    "model": r.model,
                    "split": r.split,
                    "rmse": r.rmse,
                    "percent_fullscale": r.percent_fullscale,
                    "ssim": r.ssim,
                    "contact_iou": r.contact_iou,
                }
                for r in self.per_sample
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def table_text(self) -> str:
        """Plain-text summary shaped like the two-model results table."""
        agg = self.aggregate()
        lines = [
            f"{'model':<14} {'split':<6} {'sqrtL3':>10} {'sqrtL3 %':>9} "
            f"{'SSIM':>6} {'IoU':>6} {'n':>6}"
        ]
        for model in sorted(agg):
            for split in sorted(agg[model]):
                row = agg[model][split]
                lines.append(
                    f"{model:<14} {split:<6} {row['rmse']:>10.1f} "
                    f"{row['percent_fullscale']:>8.2f}% {row['ssim']:>6.3f} "
                    f"{row['contact_iou']:>6.3f} {row['count']:>6d}"
                )
        return "\n".join(lines) + "\n"
