"""Sensor geometries: taxel layouts, pixel grids and their triangulation.

The taxel array is modelled as a planar set of sensing element centers.
A Delaunay triangulation of the centers supports barycentric rasterization
(see `tactran.interp`). The triangulation here is computed by an exact
candidate-filter algorithm rather than an incremental library routine so
that cocircular point sets resolve by a documented, deterministic rule:
cocircular groups are fan-triangulated from their lowest vertex index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DegenerateInput

# Default array-sensor parameters: 20 taxels at 7.5 mm pitch.
DEFAULT_N_TAXELS = 20
DEFAULT_PITCH_MM = 7.5
DEFAULT_SENSING_RADIUS_MM = 2.5

# Default image sizes: (rows, cols) = (height, width).
TACTILE_IMAGE_SHAPE = (240, 396)
CAMERA_IMAGE_SHAPE = (240, 320)


@dataclass(frozen=True, eq=False)
class TaxelLayout:
    """Positions (mm, sensor frame) and sensing radii of the taxel centers."""

    positions: np.ndarray  # (N, 2) float64
    sensing_radius: float = DEFAULT_SENSING_RADIUS_MM
    pitch: float = DEFAULT_PITCH_MM

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must be an (N, 2) array")
        if pos.shape[0] < 3:
            raise ValueError("a layout needs at least 3 taxels")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        diffs = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(diffs[..., 0], diffs[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < 0.5 * self.pitch:
            raise ValueError("taxel centers closer than half a pitch")
        if _all_collinear(pos):
            raise ValueError("taxel centers are collinear")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_taxels(self) -> int:
        return self.positions.shape[0]

    def __hash__(self):
        return hash((self.positions.tobytes(), self.sensing_radius, self.pitch))

    def __eq__(self, other):
        if not isinstance(other, TaxelLayout):
            return NotImplemented
        return (
            np.array_equal(self.positions, other.positions)
            and self.sensing_radius == other.sensing_radius
            and self.pitch == other.pitch
        )


@dataclass(frozen=True)
class PixelGrid:
    """Uniform square-pixel grid on the sensor plane.

    `origin` is the physical location (mm) of the center of pixel
    (row 0, col 0); pixel (r, c) is centered at origin + spacing * (c, r).
    """

    rows: int
    cols: int
    origin: tuple[float, float]
    spacing: float

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("grid must have positive dimensions")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def x_centers(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.cols)

    def y_centers(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.rows)

    def pixel_points(self) -> np.ndarray:
        """Physical coordinates of all pixel centers, shape (rows*cols, 2)."""
        xx, yy = np.meshgrid(self.x_centers(), self.y_centers())
        return np.column_stack([xx.ravel(), yy.ravel()])

    def to_pixel(self, points: np.ndarray) -> np.ndarray:
        """Map physical points (..., 2) to fractional (col, row) coordinates."""
        p = np.asarray(points, dtype=np.float64)
        out = np.empty_like(p)
        out[..., 0] = (p[..., 0] - self.origin[0]) / self.spacing
        out[..., 1] = (p[..., 1] - self.origin[1]) / self.spacing
        return out

    def extent(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the covered area, including pixel boxes."""
        h = 0.5 * self.spacing
        return (
            self.origin[0] - h,
            self.origin[0] + self.spacing * (self.cols - 1) + h,
            self.origin[1] - h,
            self.origin[1] + self.spacing * (self.rows - 1) + h,
        )


@dataclass(frozen=True)
class Triangulation:
    """Delaunay triangulation of a layout; triangles are CCW vertex triples."""

    vertices: np.ndarray  # indices into the layout positions that are used
    triangles: np.ndarray  # (M, 3) int

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.int64))
        object.__setattr__(self, "triangles", np.asarray(self.triangles, dtype=np.int64))


def build_default_layout() -> TaxelLayout:
    """The 20-taxel layout: staggered rows of 4/5/6/5 at 7.5 mm pitch.

    Row spacing is pitch * sqrt(3)/2 so nearest-neighbor distance equals the
    pitch exactly; the whole pattern is shifted to put its centroid at the
    origin.
    """
    pitch = DEFAULT_PITCH_MM
    dy = pitch * math.sqrt(3.0) / 2.0
    rows = (4, 5, 6, 5)
    pts = []
    for r, count in enumerate(rows):
        y = (1.5 - r) * dy
        for i in range(count):
            x = (i - (count - 1) / 2.0) * pitch
            pts.append((x, y))
    pos = np.array(pts, dtype=np.float64)
    pos -= pos.mean(axis=0)
    return TaxelLayout(positions=pos)


def make_grid(layout: TaxelLayout, rows: int, cols: int,
              margin: Optional[float] = None) -> PixelGrid:
    """Square-pixel grid covering the layout hull plus a margin (default: one pitch).

    The spacing is the smallest value placing the padded bounding box inside
    rows x cols pixels; the box is centered on the grid.
    """
    if margin is None:
        margin = layout.pitch
    lo = layout.positions.min(axis=0) - margin
    hi = layout.positions.max(axis=0) + margin
    span = hi - lo
    spacing = max(span[0] / cols, span[1] / rows)
    cx, cy = (lo + hi) / 2.0
    origin = (cx - spacing * (cols - 1) / 2.0, cy - spacing * (rows - 1) / 2.0)
    return PixelGrid(rows=rows, cols=cols, origin=origin, spacing=spacing)


def default_tactile_grid(layout: TaxelLayout, downsample: int = 1) -> PixelGrid:
    """The grid the interpolated tactile image lives on (396 x 240 at full scale)."""
    r, c = TACTILE_IMAGE_SHAPE
    return make_grid(layout, rows=r // downsample, cols=c // downsample)


def default_camera_grid(layout: TaxelLayout, downsample: int = 1) -> PixelGrid:
    """The camera sensor grid (320 x 240 at full scale) over the same patch."""
    r, c = CAMERA_IMAGE_SHAPE
    return make_grid(layout, rows=r // downsample, cols=c // downsample)


# ---------------------------------------------------------------------------
# Exact predicates.  Float filters handle the generic case; near-degenerate
# configurations fall back to rational arithmetic so ties are decided
# exactly, never by rounding.
# ---------------------------------------------------------------------------

def _orient_float(ax, ay, bx, by, cx, cy):
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    mag = abs((bx - ax) * (cy - ay)) + abs((by - ay) * (cx - ax))
    return det, mag


def orient(a, b, c) -> int:
    """Sign of the signed area of triangle (a, b, c): +1 CCW, -1 CW, 0 collinear."""
    det, mag = _orient_float(a[0], a[1], b[0], b[1], c[0], c[1])
    if abs(det) > 1e-12 * mag:
        return 1 if det > 0 else -1
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def incircle(a, b, c, d) -> int:
    """+1 if d is strictly inside the circumcircle of CCW triangle (a, b, c),
    -1 if strictly outside, 0 if cocircular."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad2, bd2, cd2 = adx * adx + ady * ady, bdx * bdx + bdy * bdy, cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd2 - bd2 * cdy)
        - ady * (bdx * cd2 - bd2 * cdx)
        + ad2 * (bdx * cdy - bdy * cdx)
    )
    mag = (
        abs(adx) * (abs(bdy * cd2) + abs(bd2 * cdy))
        + abs(ady) * (abs(bdx * cd2) + abs(bd2 * cdx))
        + abs(ad2) * (abs(bdx * cdy) + abs(bdy * cdx))
    )
    if abs(det) > 1e-12 * mag:
        return 1 if det > 0 else -1
    fa = [Fraction(float(v)) for v in (a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])]
    adx, ady = fa[0] - fa[6], fa[1] - fa[7]
    bdx, bdy = fa[2] - fa[6], fa[3] - fa[7]
    cdx, cdy = fa[4] - fa[6], fa[5] - fa[7]
    ad2, bd2, cd2 = adx * adx + ady * ady, bdx * bdx + bdy * bdy, cdx * cdx + cdy * cdy
    det = (
        adx * (bdy * cd2 - bd2 * cdy)
        - ady * (bdx * cd2 - bd2 * cdx)
        + ad2 * (bdx * cdy - bdy * cdx)
    )
    return (det > 0) - (det < 0)


def _all_collinear(pos: np.ndarray) -> bool:
    a = pos[0]
    for b in pos[1:]:
        if not np.allclose(a, b):
            break
    else:
        return True
    return all(orient(a, b, p) == 0 for p in pos)


def _circumcircle_exact(a, b, c):
    """Exact circumcenter and squared radius as Fractions; key for grouping."""
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r2 = (ax - ux) ** 2 + (ay - uy) ** 2
    return ux, uy, r2


def delaunay(layout: TaxelLayout) -> Triangulation:
    """Delaunay triangulation of the taxel centers.

    Every non-degenerate triple with an empty open circumdisk is a candidate;
    candidates sharing one circumcircle (cocircular groups) are replaced by a
    fan from the group's lowest vertex index, which makes the result
    independent of input order and deterministic under cocircular ties.

    Raises DegenerateInput if all points are collinear.
    """
    return _delaunay_points(layout.positions)


def _delaunay_points(pos: np.ndarray) -> Triangulation:
    pos = np.asarray(pos, dtype=np.float64)
    n = pos.shape[0]
    if n < 3 or _all_collinear(pos):
        raise DegenerateInput("need at least 3 non-collinear points")

    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                o = orient(pos[i], pos[j], pos[k])
                if o == 0:
                    continue
                tri = (i, j, k) if o > 0 else (i, k, j)  # CCW order
                a, b, c = pos[tri[0]], pos[tri[1]], pos[tri[2]]
                empty = True
                cocircular = []
                for m in range(n):
                    if m in tri:
                        continue
                    s = incircle(a, b, c, pos[m])
                    if s > 0:
                        empty = False
                        break
                    if s == 0:
                        cocircular.append(m)
                if empty:
                    candidates.append((tri, bool(cocircular)))

    triangles = []
    fan_groups: dict[tuple, set] = {}
    for tri, tied in candidates:
        if not tied:
            triangles.append(tri)
        else:
            key = _circumcircle_exact(pos[tri[0]], pos[tri[1]], pos[tri[2]])
            fan_groups.setdefault(key, set()).update(tri)

    for (ux, uy, _r2), members in fan_groups.items():
        idx = sorted(members)
        pivot = idx[0]
        cx, cy = float(ux), float(uy)
        base = math.atan2(pos[pivot][1] - cy, pos[pivot][0] - cx)
        others = sorted(
            (m for m in idx if m != pivot),
            key=lambda m: (math.atan2(pos[m][1] - cy, pos[m][0] - cx) - base) % (2 * math.pi),
        )
        for a, b in zip(others[:-1], others[1:]):
            o = orient(pos[pivot], pos[a], pos[b])
            triangles.append((pivot, a, b) if o > 0 else (pivot, b, a))

    canon = []
    for t in triangles:
        r = min(range(3), key=lambda s: t[s])  # rotate lowest index first, keep CCW
        canon.append((t[r], t[(r + 1) % 3], t[(r + 2) % 3]))
    canon = sorted(set(canon))
    used = sorted({v for t in canon for v in t})
    return Triangulation(vertices=np.array(used), triangles=np.array(canon))


# ---------------------------------------------------------------------------
# Point location
# ---------------------------------------------------------------------------

EDGE_TOL = 1e-9  # barycentric slack; edge points go to the lowest-index triangle


def locate(tri: Triangulation, layout: TaxelLayout, p) -> Optional[tuple[int, tuple[float, float, float]]]:
    """Containing triangle and barycentric coordinates of p, or None outside the hull."""
    idx, lam = locate_batch(tri, layout, np.asarray(p, dtype=np.float64).reshape(1, 2))
    if idx[0] < 0:
        return None
    return int(idx[0]), (float(lam[0, 0]), float(lam[0, 1]), float(lam[0, 2]))


def locate_batch(tri: Triangulation, layout: TaxelLayout, points: np.ndarray):
    """Vectorized `locate` over (K, 2) points.

    Returns (triangle_index (K,) with -1 outside, lambdas (K, 3)). Triangles
    are scanned in index order, so boundary points resolve to the
    lowest-index adjacent triangle.
    """
    pts = np.asarray(points, dtype=np.float64)
    k = pts.shape[0]
    out_idx = np.full(k, -1, dtype=np.int64)
    out_lam = np.zeros((k, 3), dtype=np.float64)
    pos = layout.positions
    remaining = np.arange(k)
    for t_i, (a, b, c) in enumerate(tri.triangles):
        if remaining.size == 0:
            break
        pa, pb, pc = pos[a], pos[b], pos[c]
        v0 = pb - pa
        v1 = pc - pa
        den = v0[0] * v1[1] - v0[1] * v1[0]
        d = pts[remaining] - pa
        l1 = (d[:, 0] * v1[1] - d[:, 1] * v1[0]) / den
        l2 = (v0[0] * d[:, 1] - v0[1] * d[:, 0]) / den
        l0 = 1.0 - l1 - l2
        hit = (l0 >= -EDGE_TOL) & (l1 >= -EDGE_TOL) & (l2 >= -EDGE_TOL)
        sel = remaining[hit]
        out_idx[sel] = t_i
        lam = np.column_stack([l0[hit], l1[hit], l2[hit]])
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum(axis=1, keepdims=True)
        out_lam[sel] = lam
        remaining = remaining[~hit]
    return out_idx, out_lam


# ---------------------------------------------------------------------------
# Layout (de)serialization: JSON manifest used by the CLI --layout flag.
# ---------------------------------------------------------------------------

def save_layout(layout: TaxelLayout, path):
    doc = {
        "n_taxels": layout.n_taxels,
        "pitch_mm": layout.pitch,
        "sensing_radius_mm": layout.sensing_radius,
        "positions_mm": [[float(x), float(y)] for x, y in layout.positions],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_layout(path) -> TaxelLayout:
    with open(path) as f:
        doc = json.load(f)
    pos = np.asarray(doc["positions_mm"], dtype=np.float64)
    if len(pos) != doc["n_taxels"]:
        raise ValueError("n_taxels does not match positions_mm length")
    return TaxelLayout(
        positions=pos,
        sensing_radius=float(doc["sensing_radius_mm"]),
        pitch=float(doc["pitch_mm"]),
    )
