"""Array <-> image conversion: barycentric rasterization and its inverse.

`phi` turns an N-channel taxel array into a tactile image by barycentric
interpolation over the layout's Delaunay triangulation; `phi_inv` samples an
image back at the taxel locations. To keep the round trip exact to the
count quantum, `phi` writes each taxel's exact value into the 2x2 pixel
block bracketing the taxel center: bilinear resampling at the taxel
coordinate then returns that value bit-exactly. The block is within half a
pixel of the taxel, so the image is visually indistinguishable from plain
center-sampled rasterization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, LengthMismatch, OutOfBounds, ShapeMismatch
from .geometry import PixelGrid, TaxelLayout, Triangulation, delaunay, locate_batch

# Raw-count saturation of the taxel sensor; also the image dynamic range
# for interpolated tactile images.
FULLSCALE = 40000.0


@dataclass(frozen=True)
class ArraySample:
    """One taxel-array reading: N counts in [0, FULLSCALE]."""

    values: np.ndarray
    layout: TaxelLayout

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("values must be 1-D")
        if vals.shape[0] != self.layout.n_taxels:
            raise LengthMismatch(
                f"{vals.shape[0]} values for {self.layout.n_taxels} taxels"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if vals.min() < 0.0 or vals.max() > FULLSCALE:
            raise ValueError("values outside [0, 40000]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class TactileImage:
    """Single-channel float32 image on a physical pixel grid."""

    data: np.ndarray
    grid: PixelGrid

    def __post_init__(self):
        img = np.asarray(self.data, dtype=np.float32)
        if img.ndim != 2:
            raise ValueError("image data must be 2-D")
        if img.shape != (self.grid.rows, self.grid.cols):
            raise ShapeMismatch(f"data {img.shape} vs grid {self.grid.shape}")
        if not np.all(np.isfinite(img)):
            raise ValueError("image values must be finite")
        img.setflags(write=False)
        object.__setattr__(self, "data", img)

    @property
    def rows(self) -> int:
        return self.grid.rows

    @property
    def cols(self) -> int:
        return self.grid.cols


class Rasterizer:
    """Precomputed phi/phi_inv plan for one (layout, grid) pair."""

    def __init__(self, layout: TaxelLayout, grid: PixelGrid,
                 tri: Triangulation | None = None):
        self.layout = layout
        self.grid = grid
        xmin, xmax, ymin, ymax = grid.extent()
        lo = layout.positions.min(axis=0)
        hi = layout.positions.max(axis=0)
        if lo[0] < xmin or lo[1] < ymin or hi[0] > xmax or hi[1] > ymax:
            raise GridMismatch("taxel hull exceeds the grid extent")
        self.tri = delaunay(layout) if tri is None else tri

        idx, lam = locate_batch(self.tri, layout, grid.pixel_points())
        inside = idx >= 0
        self._inside_flat = np.flatnonzero(inside)
        self._verts = self.tri.triangles[idx[inside]]  # (K, 3) taxel ids
        self._weights = lam[inside]

        # Taxel -> fractional pixel coordinates, and the 2x2 stamp blocks.
        uv = grid.to_pixel(layout.positions)
        self._u = uv[:, 0]
        self._v = uv[:, 1]
        if (self._u < 0).any() or (self._u > grid.cols - 1).any() \
                or (self._v < 0).any() or (self._v > grid.rows - 1).any():
            raise GridMismatch("a taxel maps outside the pixel-center lattice")
        self._i0 = np.minimum(np.floor(self._u).astype(np.int64), grid.cols - 1)
        self._j0 = np.minimum(np.floor(self._v).astype(np.int64), grid.rows - 1)
        self._i1 = np.minimum(self._i0 + 1, grid.cols - 1)
        self._j1 = np.minimum(self._j0 + 1, grid.rows - 1)
        self._fu = self._u - self._i0
        self._fv = self._v - self._j0
        stamp_rows = np.concatenate([self._j0, self._j0, self._j1, self._j1])
        stamp_cols = np.concatenate([self._i0, self._i1, self._i0, self._i1])
        self.stamp_pixels = np.unique(
            np.stack([stamp_rows, stamp_cols], axis=1), axis=0
        )

    def taxel_pixel_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Fractional (u, v) pixel coordinates of each taxel center."""
        return self._u.copy(), self._v.copy()

    def phi(self, values: np.ndarray) -> np.ndarray:
        vals = np.asarray(values, dtype=np.float64)
        out = np.zeros(self.grid.rows * self.grid.cols, dtype=np.float64)
        out[self._inside_flat] = np.einsum(
            "kj,kj->k", self._weights, vals[self._verts]
        )
        img = out.reshape(self.grid.rows, self.grid.cols)
        img[self._j0, self._i0] = vals
        img[self._j0, self._i1] = vals
        img[self._j1, self._i0] = vals
        img[self._j1, self._i1] = vals
        return img.astype(np.float32)

    def phi_inv(self, img: np.ndarray) -> np.ndarray:
        a = np.asarray(img)
        # Nested lerps: exact when the four bracketing pixels hold one value.
        top = a[self._j0, self._i0] + self._fu * (a[self._j0, self._i1] - a[self._j0, self._i0])
        bot = a[self._j1, self._i0] + self._fu * (a[self._j1, self._i1] - a[self._j1, self._i0])
        sampled = top + self._fv * (bot - top)
        return np.clip(sampled.astype(np.float64), 0.0, FULLSCALE)


_PLAN_CACHE: dict[tuple, Rasterizer] = {}


def get_rasterizer(layout: TaxelLayout, grid: PixelGrid) -> Rasterizer:
    key = (layout, grid)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = Rasterizer(layout, grid)
        _PLAN_CACHE[key] = plan
    return plan


def phi(y: ArraySample, layout: TaxelLayout | None = None,
        grid: PixelGrid | None = None) -> TactileImage:
    """Rasterize a taxel array into a tactile image (0 beyond the hull)."""
    layout = y.layout if layout is None else layout
    if grid is None:
        from .geometry import default_tactile_grid
        grid = default_tactile_grid(layout)
    plan = get_rasterizer(layout, grid)
    return TactileImage(data=plan.phi(y.values), grid=grid)


def phi_inv(img: TactileImage, layout: TaxelLayout) -> ArraySample:
    """Sample an image back to an array at the taxel coordinates."""
    try:
        plan = get_rasterizer(layout, img.grid)
    except GridMismatch as e:
        raise OutOfBounds(str(e))
    return ArraySample(values=plan.phi_inv(img.data), layout=layout)
