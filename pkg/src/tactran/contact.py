"""Synthetic contact: rigid indenters pressed into an elastic layer.

The elastic layer is a Winkler foundation (independent vertical springs):
local pressure is stiffness times local compression, so commanded normal
force inverts to penetration depth by bisection on the integrated pressure.
Indenters are analytic height fields h(x, y) >= 0 measured from the
indenter's base plane; the tallest point touches first, and pressing past
h_max engages the flat base plane around the feature, as a printed feature
mounted on a backing plate would.

Both sensor models observe the same resolved contact: the taxel array
integrates pressure over per-taxel discs and quantizes to counts, the
camera renders the indentation depth map through a saturating response
curve and a fixed Gaussian blur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np
from scipy import ndimage

from .errors import ForceUnreachable, GridMismatch
from .geometry import PixelGrid, TaxelLayout
from .interp import FULLSCALE, ArraySample, TactileImage

PRIMITIVE_KINDS = (
    "line_smooth",
    "square",
    "empty_circle",
    "circle",
    "bump",
    "empty_square",
    "hemisphere",
    "line_sharp",
)

# Plateau height of extruded footprint primitives and object parts (mm).
PLATE_THICKNESS = 2.0
# Bar length of the line primitives; only the width varies across versions.
LINE_LENGTH = 25.0

# Base dimensions (mm) of each primitive kind. The square's base side is
# 84/11 so the 7x7 sampling-grid resolution (1.1 * bbox / 6) comes out at
# exactly 1.4 mm for the base version.
BASE_PARAMS: dict[str, dict[str, float]] = {
    "line_smooth": {"width": 4.0, "edge_radius": 1.0},
    "square": {"side": 84.0 / 11.0},
    "empty_circle": {"radius": 5.0, "edge_thickness": 1.2},
    "circle": {"radius": 3.5},
    "bump": {"height": 1.4, "curvature_radius": 6.0},
    "empty_square": {"side": 8.0, "edge_thickness": 1.5},
    "hemisphere": {"radius": 3.0},
    "line_sharp": {"width": 3.0},
}

# Four published scale variants per kind.
VERSION_SCALES = (0.7, 1.0, 1.4, 2.0)

# Camera model constants (calibration choices, overridable per call).
CAMERA_RESPONSE_DEPTH_MM = 0.5
CAMERA_BLUR_MM = 1.0
NOISE_FRACTION = 0.002  # Gaussian sigma as a fraction of each sensor's fullscale

# Subpixel quadrature factor for contact integrals.
SUPERSAMPLE = 4


@dataclass(frozen=True)
class Primitive:
    """A rigid indenter: one of the 8 feature kinds at one of 4 scales."""

    kind: str
    scale_params: Mapping[str, float]
    version: int

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS:
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        if not 1 <= self.version <= 4:
            raise ValueError("version must be in 1..4")
        params = dict(self.scale_params)
        expected = set(BASE_PARAMS[self.kind])
        if set(params) != expected:
            raise ValueError(f"{self.kind} expects params {sorted(expected)}")
        for k, v in params.items():
            if not v > 0:
                raise ValueError(f"{self.kind}.{k} must be positive")
        if self.kind == "bump" and params["height"] > params["curvature_radius"]:
            raise ValueError("bump height cannot exceed its curvature radius")
        object.__setattr__(self, "scale_params", params)


def make_primitive(kind: str, version: int) -> Primitive:
    """Catalog constructor: base dimensions scaled by the version factor."""
    scale = VERSION_SCALES[version - 1]
    params = {k: v * scale for k, v in BASE_PARAMS[kind].items()}
    return Primitive(kind=kind, scale_params=params, version=version)


def all_primitives() -> list[Primitive]:
    """The full 8 x 4 = 32 primitive catalog in deterministic order."""
    return [make_primitive(k, v) for k in PRIMITIVE_KINDS for v in range(1, 5)]


@dataclass(frozen=True)
class ObjectShape:
    """A test object built as a union of plateau solids, plus 4 keypoints."""

    name: str
    parts: tuple  # of (solid_kind, params tuple, (dx, dy, angle_rad))
    keypoints: np.ndarray  # (4, 2) mm, object frame

    def __post_init__(self):
        if not self.parts:
            raise ValueError("an object needs at least one part")
        kp = np.asarray(self.keypoints, dtype=np.float64)
        if kp.shape != (4, 2):
            raise ValueError("objects carry exactly 4 keypoints")
        lo, hi = self.bounding_box()
        if (kp < lo - 1e-9).any() or (kp > hi + 1e-9).any():
            raise ValueError("keypoints must lie within the shape bounding box")
        kp.setflags(write=False)
        object.__setattr__(self, "keypoints", kp)

    def bounding_box(self):
        los, his = [], []
        for kind, params, (dx, dy, ang) in self.parts:
            r = _part_radius(kind, params)
            c, s = math.cos(ang), math.sin(ang)
            if kind == "capsule":
                x0, y0, x1, y1, rad = params
                for px, py in ((x0, y0), (x1, y1)):
                    wx, wy = dx + c * px - s * py, dy + s * px + c * py
                    los.append((wx - rad, wy - rad))
                    his.append((wx + rad, wy + rad))
            else:
                los.append((dx - r, dy - r))
                his.append((dx + r, dy + r))
        return np.min(los, axis=0), np.max(his, axis=0)


def _part_radius(kind, params) -> float:
    if kind == "disk":
        return params[0]
    if kind == "ring":
        return params[0] + params[1] / 2.0
    if kind == "box":
        return math.hypot(params[0], params[1]) / 2.0
    if kind == "capsule":
        x0, y0, x1, y1, rad = params
        return max(math.hypot(x0, y0), math.hypot(x1, y1)) + rad
    raise ValueError(f"unknown part kind {kind!r}")


@dataclass(frozen=True)
class ContactScene:
    """An indenter at a planar pose pressed with a commanded normal force."""

    primitive: Union[Primitive, ObjectShape]
    position: tuple[float, float] = (0.0, 0.0)
    orientation: float = 0.0
    force: float = 8.0

    def __post_init__(self):
        if not self.force > 0:
            raise ValueError("force must be positive")
        if not 0.0 <= self.orientation < 2.0 * math.pi:
            raise ValueError("orientation must be in [0, 2*pi)")
        object.__setattr__(
            self, "position", (float(self.position[0]), float(self.position[1]))
        )


@dataclass(frozen=True)
class ElasticLayer:
    """Winkler foundation constants plus the taxel transduction gain.

    counts_per_pressure is calibrated so the 8 N base flat disk peaks at
    around 70% of fullscale: 0.7 * 40000 * R^2 / (F * r^2) = 6860 for
    R = 3.5 mm, r = 2.5 mm, F = 8 N.
    """

    stiffness: float = 0.5  # N/mm^3
    thickness: float = 4.0  # mm
    saturation_raw: float = FULLSCALE
    counts_per_pressure: float = 6860.0  # counts * mm^2 / N

    def __post_init__(self):
        if not (self.stiffness > 0 and self.thickness > 0):
            raise ValueError("stiffness and thickness must be positive")
        if self.saturation_raw != FULLSCALE:
            raise ValueError("saturation is fixed at 40000 raw counts")
        if not self.counts_per_pressure > 0:
            raise ValueError("counts_per_pressure must be positive")


# ---------------------------------------------------------------------------
# Height fields
# ---------------------------------------------------------------------------

def height_field(prim: Union[Primitive, ObjectShape], points) -> np.ndarray:
    """Indenter surface height (mm) above its base plane at the given points.

    Vectorized over (..., 2) point arrays; zero outside the footprint.
    """
    p = np.asarray(points, dtype=np.float64)
    scalar = p.ndim == 1
    p = np.atleast_2d(p)
    if isinstance(prim, ObjectShape):
        h = np.zeros(p.shape[:-1])
        for kind, params, (dx, dy, ang) in prim.parts:
            c, s = math.cos(ang), math.sin(ang)
            qx = c * (p[..., 0] - dx) + s * (p[..., 1] - dy)
            qy = -s * (p[..., 0] - dx) + c * (p[..., 1] - dy)
            np.maximum(h, _part_height(kind, params, qx, qy), out=h)
    else:
        h = _primitive_height(prim, p[..., 0], p[..., 1])
    return h[0] if scalar else h


def _primitive_height(prim: Primitive, x, y) -> np.ndarray:
    t = PLATE_THICKNESS
    sp = prim.scale_params
    kind = prim.kind
    r = np.hypot(x, y)
    if kind == "circle":
        return np.where(r <= sp["radius"], t, 0.0)
    if kind == "hemisphere":
        rad = sp["radius"]
        return np.sqrt(np.maximum(rad * rad - r * r, 0.0))
    if kind == "bump":
        hb, rc = sp["height"], sp["curvature_radius"]
        a2 = hb * (2.0 * rc - hb)
        inside = r * r <= a2
        prof = np.sqrt(np.maximum(rc * rc - r * r, 0.0)) - (rc - hb)
        return np.where(inside, np.maximum(prof, 0.0), 0.0)
    if kind == "empty_circle":
        rad, e = sp["radius"], sp["edge_thickness"]
        return np.where(np.abs(r - rad) <= e / 2.0, t, 0.0)
    if kind == "square":
        half = sp["side"] / 2.0
        return np.where(np.maximum(np.abs(x), np.abs(y)) <= half, t, 0.0)
    if kind == "empty_square":
        half, e = sp["side"] / 2.0, sp["edge_thickness"]
        m = np.maximum(np.abs(x), np.abs(y))
        return np.where((m <= half) & (m >= half - e), t, 0.0)
    if kind == "line_sharp":
        w = sp["width"]
        inside = (np.abs(x) <= LINE_LENGTH / 2.0) & (np.abs(y) <= w / 2.0)
        return np.where(inside, t, 0.0)
    if kind == "line_smooth":
        w = sp["width"]
        rho = min(sp["edge_radius"], w / 2.0 - 1e-9, t)
        # Distance outside the plateau core (a rectangle shrunk by rho);
        # the top edge rolls off on a quarter-round of radius rho.
        dx = np.maximum(np.abs(x) - (LINE_LENGTH / 2.0 - rho), 0.0)
        dy = np.maximum(np.abs(y) - (w / 2.0 - rho), 0.0)
        q = np.hypot(dx, dy)
        prof = t - rho + np.sqrt(np.maximum(rho * rho - q * q, 0.0))
        return np.where(q < rho, prof, 0.0)
    raise ValueError(f"unknown primitive kind {kind!r}")


def _part_height(kind, params, x, y) -> np.ndarray:
    t = PLATE_THICKNESS
    if kind == "disk":
        return np.where(np.hypot(x, y) <= params[0], t, 0.0)
    if kind == "ring":
        rad, e = params
        return np.where(np.abs(np.hypot(x, y) - rad) <= e / 2.0, t, 0.0)
    if kind == "box":
        w, l = params
        inside = (np.abs(x) <= w / 2.0) & (np.abs(y) <= l / 2.0)
        return np.where(inside, t, 0.0)
    if kind == "capsule":
        x0, y0, x1, y1, rad = params
        vx, vy = x1 - x0, y1 - y0
        vv = vx * vx + vy * vy
        s = np.clip(((x - x0) * vx + (y - y0) * vy) / max(vv, 1e-12), 0.0, 1.0)
        d = np.hypot(x - (x0 + s * vx), y - (y0 + s * vy))
        return np.where(d <= rad, t, 0.0)
    raise ValueError(f"unknown part kind {kind!r}")


def footprint_bbox_side(prim: Union[Primitive, ObjectShape]) -> float:
    """Longest side of the indenter footprint bounding box (mm)."""
    if isinstance(prim, ObjectShape):
        lo, hi = prim.bounding_box()
        return float(np.max(hi - lo))
    sp = prim.scale_params
    kind = prim.kind
    if kind in ("circle",):
        return 2.0 * sp["radius"]
    if kind == "hemisphere":
        return 2.0 * sp["radius"]
    if kind == "bump":
        hb, rc = sp["height"], sp["curvature_radius"]
        return 2.0 * math.sqrt(hb * (2.0 * rc - hb))
    if kind == "empty_circle":
        return 2.0 * sp["radius"] + sp["edge_thickness"]
    if kind in ("square", "empty_square"):
        return sp["side"]
    if kind in ("line_sharp", "line_smooth"):
        return LINE_LENGTH
    raise ValueError(f"unknown primitive kind {kind!r}")


# ---------------------------------------------------------------------------
# Winkler contact solution
# ---------------------------------------------------------------------------

class _ResolvedContact:
    """Sorted supersampled gap field of one scene on one grid.

    With gaps g sorted ascending, the Winkler force at penetration delta is
    k * cell_area * (delta * m - prefix[m]) where m = #gaps below delta, so
    each bisection step costs one binary search.
    """

    def __init__(self, scene: ContactScene, grid: PixelGrid, supersample: int):
        self.grid = grid
        self.supersample = supersample
        ss = supersample
        sub = (np.arange(ss) + 0.5) / ss - 0.5  # subpixel offsets in pixel units
        xs = (grid.x_centers()[:, None] + sub[None, :] * grid.spacing).ravel()
        ys = (grid.y_centers()[:, None] + sub[None, :] * grid.spacing).ravel()
        xx, yy = np.meshgrid(xs, ys)
        c, s = math.cos(scene.orientation), math.sin(scene.orientation)
        px, py = scene.position
        qx = c * (xx - px) + s * (yy - py)
        qy = -s * (xx - px) + c * (yy - py)
        h = height_field(scene.primitive, np.stack([qx, qy], axis=-1))
        self.h_max = float(h.max())
        self.gap = (self.h_max - h).astype(np.float64)  # (rows*ss, cols*ss)
        flat = np.sort(self.gap.ravel())
        self.sorted_gaps = flat
        self.prefix = np.concatenate([[0.0], np.cumsum(flat)])
        self.cell_area = (grid.spacing / ss) ** 2

    def force_at(self, stiffness: float, delta: float) -> float:
        m = int(np.searchsorted(self.sorted_gaps, delta, side="left"))
        return stiffness * self.cell_area * (delta * m - self.prefix[m])

    def pressure_image(self, stiffness: float, delta: float) -> np.ndarray:
        ss = self.supersample
        comp = np.maximum(delta - self.gap, 0.0)
        rows, cols = self.grid.rows, self.grid.cols
        per_pixel = comp.reshape(rows, ss, cols, ss).mean(axis=(1, 3))
        return (stiffness * per_pixel).astype(np.float32)


_CONTACT_CACHE: dict[tuple, _ResolvedContact] = {}


def _scene_key(scene: ContactScene) -> tuple:
    prim = scene.primitive
    if isinstance(prim, ObjectShape):
        pk = ("object", prim.name, prim.parts)
    else:
        pk = ("primitive", prim.kind, tuple(sorted(prim.scale_params.items())),
              prim.version)
    return (pk, scene.position, scene.orientation, scene.force)


def _resolve(scene: ContactScene, grid: PixelGrid,
             supersample: int = SUPERSAMPLE) -> _ResolvedContact:
    key = (_scene_key(scene), grid, supersample)
    hit = _CONTACT_CACHE.get(key)
    if hit is None:
        if len(_CONTACT_CACHE) > 4:
            _CONTACT_CACHE.clear()
        hit = _ResolvedContact(scene, grid, supersample)
        _CONTACT_CACHE[key] = hit
    return hit


def solve_penetration(scene: ContactScene, layer: ElasticLayer,
                      grid: PixelGrid, supersample: int = SUPERSAMPLE) -> float:
    """Penetration depth (mm past first contact) balancing the commanded force.

    Bisection on [0, layer.thickness]; raises ForceUnreachable when even
    full-thickness penetration cannot carry the force.
    """
    rc = _resolve(scene, grid, supersample)
    k, target = layer.stiffness, scene.force
    if rc.force_at(k, layer.thickness) < target:
        raise ForceUnreachable(
            f"{target} N exceeds capacity at {layer.thickness} mm penetration"
        )
    lo, hi = 0.0, layer.thickness
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if rc.force_at(k, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pressure_field(scene: ContactScene, layer: ElasticLayer,
                   grid: PixelGrid, supersample: int = SUPERSAMPLE) -> TactileImage:
    """Per-pixel contact pressure (N/mm^2); integrates to the scene force."""
    delta = solve_penetration(scene, layer, grid, supersample)
    rc = _resolve(scene, grid, supersample)
    return TactileImage(data=rc.pressure_image(layer.stiffness, delta), grid=grid)


# ---------------------------------------------------------------------------
# Sensor models
# ---------------------------------------------------------------------------

_DISC_CACHE: dict[tuple, list] = {}


def _taxel_disc_weights(layout: TaxelLayout, grid: PixelGrid) -> list:
    """Per taxel: (rows, cols, coverage) of pixels touching the sensing disc.

    Coverage is the fraction of each pixel box inside the disc, estimated on
    a 4x4 subpixel lattice, so the disc integral is insensitive to how the
    disc happens to straddle the pixel grid.
    """
    key = (layout, grid)
    discs = _DISC_CACHE.get(key)
    if discs is not None:
        return discs
    xs, ys = grid.x_centers(), grid.y_centers()
    xmin, xmax, ymin, ymax = grid.extent()
    r = layout.sensing_radius
    ss = 4
    sub = ((np.arange(ss) + 0.5) / ss - 0.5) * grid.spacing
    discs = []
    for tx, ty in layout.positions:
        if tx - r < xmin or tx + r > xmax or ty - r < ymin or ty + r > ymax:
            raise GridMismatch("pressure grid does not cover every taxel disc")
        near_x = np.abs(xs - tx) <= r + grid.spacing
        near_y = np.abs(ys - ty) <= r + grid.spacing
        ci = np.flatnonzero(near_x)
        ri = np.flatnonzero(near_y)
        subx = (xs[ci][:, None] + sub[None, :]).ravel() - tx
        suby = (ys[ri][:, None] + sub[None, :]).ravel() - ty
        inside = (suby[:, None] ** 2 + subx[None, :] ** 2 <= r * r)
        cov = inside.reshape(len(ri), ss, len(ci), ss).mean(axis=(1, 3))
        rr, cc = np.nonzero(cov > 0)
        discs.append((ri[rr], ci[cc], cov[rr, cc]))
    _DISC_CACHE[key] = discs
    return discs


def sense_array(pressure: TactileImage, layout: TaxelLayout, layer: ElasticLayer,
                noise_seed: Optional[int] = None) -> ArraySample:
    """Taxel counts: disc-mean pressure times disc area times the gain,
    optionally noised, clamped to [0, 40000] and rounded to whole counts."""
    discs = _taxel_disc_weights(layout, pressure.grid)
    area = math.pi * layout.sensing_radius ** 2
    img = pressure.data.astype(np.float64)
    counts = np.array(
        [np.dot(img[rows, cols], cov) / cov.sum() * area * layer.counts_per_pressure
         for rows, cols, cov in discs]
    )
    if noise_seed is not None:
        rng = np.random.default_rng(noise_seed)
        counts = counts + rng.normal(0.0, NOISE_FRACTION * FULLSCALE, counts.shape)
    counts = np.round(np.clip(counts, 0.0, FULLSCALE))
    return ArraySample(values=counts, layout=layout)


def _bilinear_sample(img: np.ndarray, grid: PixelGrid, points: np.ndarray) -> np.ndarray:
    """Sample img at physical points; zero outside the pixel-center lattice."""
    uv = grid.to_pixel(points)
    u, v = uv[..., 0], uv[..., 1]
    valid = (u >= 0) & (u <= grid.cols - 1) & (v >= 0) & (v <= grid.rows - 1)
    uc = np.clip(u, 0, grid.cols - 1)
    vc = np.clip(v, 0, grid.rows - 1)
    i0 = np.minimum(uc.astype(np.int64), grid.cols - 1)
    j0 = np.minimum(vc.astype(np.int64), grid.rows - 1)
    i1 = np.minimum(i0 + 1, grid.cols - 1)
    j1 = np.minimum(j0 + 1, grid.rows - 1)
    fu, fv = uc - i0, vc - j0
    top = img[j0, i0] * (1 - fu) + img[j0, i1] * fu
    bot = img[j1, i0] * (1 - fu) + img[j1, i1] * fu
    return np.where(valid, top * (1 - fv) + bot * fv, 0.0)


def sense_camera(pressure: TactileImage, scene: ContactScene, camera_grid: PixelGrid,
                 noise_seed: Optional[int] = None, stiffness: float = 0.5,
                 response_depth: float = CAMERA_RESPONSE_DEPTH_MM,
                 blur_mm: float = CAMERA_BLUR_MM) -> TactileImage:
    """Normalized grayscale contact image in [0, 1] on the camera grid.

    The indentation depth map (pressure / stiffness under the Winkler model)
    passes through 1 - exp(-depth / response_depth) and a fixed Gaussian
    blur standing in for soft-layer diffusion.
    """
    depth = _bilinear_sample(
        pressure.data.astype(np.float64), pressure.grid, camera_grid.pixel_points()
    ).reshape(camera_grid.rows, camera_grid.cols) / stiffness
    intensity = 1.0 - np.exp(-depth / response_depth)
    sigma_px = blur_mm / camera_grid.spacing
    blurred = ndimage.gaussian_filter(intensity, sigma=sigma_px, mode="constant")
    if noise_seed is not None:
        rng = np.random.default_rng(noise_seed)
        blurred = blurred + rng.normal(0.0, NOISE_FRACTION, blurred.shape)
    return TactileImage(
        data=np.clip(blurred, 0.0, 1.0).astype(np.float32), grid=camera_grid
    )


# ---------------------------------------------------------------------------
# Test-object catalog: tool silhouettes as unions of plateau solids.
# Keypoints mark where sampling grids are centered.
# ---------------------------------------------------------------------------

OBJECT_NAMES = ("pliers", "clamp", "scissors", "allen_key", "wrench")


def make_object(name: str) -> ObjectShape:
    if name == "pliers":
        parts = (
            ("capsule", (0.0, -5.0, -8.0, -35.0, 2.5), (0.0, 0.0, 0.0)),
            ("capsule", (0.0, -5.0, 8.0, -35.0, 2.5), (0.0, 0.0, 0.0)),
            ("disk", (4.0,), (0.0, 0.0, 0.0)),
            ("box", (4.0, 14.0), (-2.5, 8.0, 0.2)),
            ("box", (4.0, 14.0), (2.5, 8.0, -0.2)),
        )
        keypoints = [(0.0, 14.0), (0.0, 0.0), (-5.0, -20.0), (7.0, -33.0)]
    elif name == "clamp":
        parts = (
            ("box", (6.0, 40.0), (-15.0, 0.0, 0.0)),
            ("box", (30.0, 6.0), (0.0, 18.0, 0.0)),
            ("box", (30.0, 6.0), (0.0, -18.0, 0.0)),
            ("capsule", (0.0, 0.0, 0.0, 12.0, 1.8), (10.0, -18.0, 0.0)),
            ("disk", (3.0,), (10.0, -4.0, 0.0)),
        )
        keypoints = [(0.0, 18.0), (10.0, -4.0), (-15.0, 0.0), (0.0, -18.0)]
    elif name == "scissors":
        parts = (
            ("capsule", (-12.0, -6.0, 16.0, 8.0, 1.7), (0.0, 0.0, 0.0)),
            ("capsule", (-12.0, 6.0, 16.0, -8.0, 1.7), (0.0, 0.0, 0.0)),
            ("disk", (2.5,), (0.0, 0.0, 0.0)),
            ("ring", (5.0, 2.4), (-18.0, -9.0, 0.0)),
            ("ring", (5.0, 2.4), (-18.0, 9.0, 0.0)),
        )
        keypoints = [(15.0, 7.0), (0.0, 0.0), (-18.0, -9.0), (8.0, -4.0)]
    elif name == "allen_key":
        parts = (
            ("capsule", (0.0, 0.0, 0.0, 30.0, 1.5), (0.0, 0.0, 0.0)),
            ("capsule", (0.0, 0.0, 12.0, 0.0, 1.5), (0.0, 0.0, 0.0)),
        )
        keypoints = [(0.0, 0.0), (0.0, 15.0), (0.0, 29.0), (11.0, 0.0)]
    elif name == "wrench":
        parts = (
            ("capsule", (-14.0, 0.0, 14.0, 0.0, 3.0), (0.0, 0.0, 0.0)),
            ("ring", (5.5, 2.5), (20.0, 0.0, 0.0)),
            ("capsule", (-16.0, 3.0, -24.0, 6.0, 1.8), (0.0, 0.0, 0.0)),
            ("capsule", (-16.0, -3.0, -24.0, -6.0, 1.8), (0.0, 0.0, 0.0)),
        )
        keypoints = [(20.0, 0.0), (0.0, 0.0), (-20.0, 4.5), (14.0, 0.0)]
    else:
        raise ValueError(f"unknown object {name!r}")
    return ObjectShape(name=name, parts=parts, keypoints=np.asarray(keypoints))


def all_objects() -> list[ObjectShape]:
    return [make_object(n) for n in OBJECT_NAMES]
