"""Paired-corpus generation, storage, splitting and loading.

A corpus directory holds one subdirectory per sample (``x.pfm`` camera
image, ``y.txl`` taxel counts, ``scene.json`` contact description) plus a
``manifest.json`` written last with the resolved config, counts, relative
paths and content hashes. Generation is deterministic for a fixed config:
manifests and sample files are byte-identical across runs. Per-sample noise
seeds derive from (global seed, sample index) so parallel and serial
generation agree.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from . import formats
from .contact import (
    ContactScene,
    ElasticLayer,
    ObjectShape,
    Primitive,
    all_objects,
    footprint_bbox_side,
    make_object,
    make_primitive,
    pressure_field,
    sense_array,
    sense_camera,
    PRIMITIVE_KINDS,
)
from .errors import ConfigError, FormatError, MissingVersion
from .geometry import (
    PixelGrid,
    TaxelLayout,
    build_default_layout,
    default_camera_grid,
    default_tactile_grid,
)
from .interp import ArraySample, TactileImage

# 12 orientations spanning [0, 7pi/4] for primitives, 7 for object grids.
PRIMITIVE_ORIENTATIONS = 12
OBJECT_ORIENTATIONS = 7
ORIENTATION_SPAN = 7.0 * math.pi / 4.0
GRID_COVERAGE = 1.1  # sampling grid side = 1.1 * feature bounding-box side


def _span_orientations(count: int) -> list[float]:
    return [ORIENTATION_SPAN * i / (count - 1) if count > 1 else 0.0
            for i in range(count)]


@dataclass(frozen=True)
class DatasetConfig:
    """Resolved generation parameters for one corpus."""

    corpus: str = "primitives"  # or "objects"
    grid_points_per_side: int = 7
    grid_resolution_mm: Optional[float] = None  # None: scaled per feature
    orientations: tuple = field(
        default_factory=lambda: tuple(_span_orientations(PRIMITIVE_ORIENTATIONS))
    )
    force_n: float = 8.0
    seed: int = 0
    downsample: int = 1  # pixel-grid reduction for desk-scale runs
    noise: bool = False
    stiffness: float = 0.5
    thickness_mm: float = 4.0
    counts_per_pressure: float = 6860.0

    def __post_init__(self):
        if self.corpus not in ("primitives", "objects"):
            raise ConfigError(f"unknown corpus {self.corpus!r}")
        if self.grid_points_per_side < 1:
            raise ConfigError("grid_points_per_side must be >= 1")
        if not self.orientations:
            raise ConfigError("orientations must be non-empty")
        for a in self.orientations:
            if not 0.0 <= a < 2.0 * math.pi:
                raise ConfigError("orientations must lie in [0, 2*pi)")
        if not self.force_n > 0:
            raise ConfigError("force must be positive")
        if self.downsample < 1:
            raise ConfigError("downsample must be >= 1")
        object.__setattr__(self, "orientations", tuple(float(a) for a in self.orientations))

    @classmethod
    def primitives_default(cls, **overrides) -> "DatasetConfig":
        return cls(corpus="primitives", **overrides)

    @classmethod
    def objects_default(cls, **overrides) -> "DatasetConfig":
        overrides.setdefault("grid_points_per_side", 3)
        overrides.setdefault("grid_resolution_mm", 1.5)
        overrides.setdefault(
            "orientations", tuple(_span_orientations(OBJECT_ORIENTATIONS))
        )
        return cls(corpus="objects", **overrides)

    def layer(self) -> ElasticLayer:
        return ElasticLayer(
            stiffness=self.stiffness,
            thickness=self.thickness_mm,
            counts_per_pressure=self.counts_per_pressure,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["orientations"] = list(self.orientations)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "DatasetConfig":
        doc = dict(doc)
        if "orientations" in doc:
            doc["orientations"] = tuple(doc["orientations"])
        try:
            return cls(**doc)
        except TypeError as e:
            raise ConfigError(f"bad dataset config: {e}")


@dataclass(frozen=True)
class PairedSample:
    """One aligned (camera image, taxel array) pair and its generating scene."""

    sample_id: str
    scene: ContactScene
    x: TactileImage
    y: ArraySample
    split: str  # train | val | test

    def __post_init__(self):
        if self.split not in ("train", "val", "test"):
            raise ValueError(f"bad split {self.split!r}")


# ---------------------------------------------------------------------------
# Scene enumeration
# ---------------------------------------------------------------------------

def _grid_offsets(points_per_side: int, resolution: float) -> list[tuple[float, float]]:
    c = (points_per_side - 1) / 2.0
    return [
        ((i - c) * resolution, (j - c) * resolution)
        for j in range(points_per_side)
        for i in range(points_per_side)
    ]


def primitive_grid_resolution(prim: Primitive, points_per_side: int) -> float:
    """Feature-scaled grid step: the grid side is 1.1x the footprint box."""
    side = GRID_COVERAGE * footprint_bbox_side(prim)
    return side / max(points_per_side - 1, 1)


def enumerate_primitive_scenes(cfg: DatasetConfig):
    """Yield (sample_id, scene, split) in deterministic catalog order."""
    for kind in PRIMITIVE_KINDS:
        for version in range(1, 5):
            prim = make_primitive(kind, version)
            res = (cfg.grid_resolution_mm
                   if cfg.grid_resolution_mm is not None
                   else primitive_grid_resolution(prim, cfg.grid_points_per_side))
            offsets = _grid_offsets(cfg.grid_points_per_side, res)
            split = "train" if version <= 3 else "val"
            for gi, (ox, oy) in enumerate(offsets):
                for oi, ang in enumerate(cfg.orientations):
                    sid = f"{kind}_v{version}_p{gi:02d}_o{oi:02d}"
                    scene = ContactScene(
                        primitive=prim, position=(ox, oy),
                        orientation=ang, force=cfg.force_n,
                    )
                    yield sid, scene, split


def enumerate_object_scenes(cfg: DatasetConfig):
    """Object sampling: a small grid at each keypoint, all marked test."""
    res = cfg.grid_resolution_mm if cfg.grid_resolution_mm is not None else 1.5
    offsets = _grid_offsets(cfg.grid_points_per_side, res)
    for obj in all_objects():
        for ki, kp in enumerate(obj.keypoints):
            for gi, (ox, oy) in enumerate(offsets):
                for oi, ang in enumerate(cfg.orientations):
                    # Place the object so this keypoint lands at the grid
                    # offset in the sensor frame.
                    c, s = math.cos(ang), math.sin(ang)
                    px = ox - (c * kp[0] - s * kp[1])
                    py = oy - (s * kp[0] + c * kp[1])
                    sid = f"{obj.name}_k{ki}_p{gi:02d}_o{oi:02d}"
                    scene = ContactScene(
                        primitive=obj, position=(px, py),
                        orientation=ang, force=cfg.force_n,
                    )
                    yield sid, scene, "test"


# ---------------------------------------------------------------------------
# Scene (de)serialization
# ---------------------------------------------------------------------------

def scene_to_dict(scene: ContactScene) -> dict:
    prim = scene.primitive
    if isinstance(prim, ObjectShape):
        ind = {"type": "object", "name": prim.name}
    else:
        ind = {
            "type": "primitive",
            "kind": prim.kind,
            "version": prim.version,
            "scale_params": dict(sorted(prim.scale_params.items())),
        }
    return {
        "indenter": ind,
        "position_mm": [scene.position[0], scene.position[1]],
        "orientation_rad": scene.orientation,
        "force_n": scene.force,
    }


def scene_from_dict(doc: dict) -> ContactScene:
    ind = doc["indenter"]
    if ind["type"] == "object":
        prim = make_object(ind["name"])
    else:
        prim = Primitive(kind=ind["kind"], scale_params=ind["scale_params"],
                         version=ind["version"])
    return ContactScene(
        primitive=prim,
        position=tuple(doc["position_mm"]),
        orientation=doc["orientation_rad"],
        force=doc["force_n"],
    )


# ---------------------------------------------------------------------------
# Sample IO
# ---------------------------------------------------------------------------

def save_sample(sample_dir, sample: PairedSample) -> dict:
    """Write x.pfm / y.txl / scene.json; returns relative-path -> sha256."""
    d = Path(sample_dir)
    d.mkdir(parents=True, exist_ok=True)
    formats.write_pfm(d / "x.pfm", sample.x.data)
    formats.write_txl(d / "y.txl", sample.y.values)
    scene_doc = scene_to_dict(sample.scene)
    scene_doc["id"] = sample.sample_id
    scene_doc["split"] = sample.split
    scene_doc["x_grid"] = _grid_to_dict(sample.x.grid)
    with open(d / "scene.json", "w") as f:
        json.dump(scene_doc, f, indent=2, sort_keys=True)
        f.write("\n")
    return {name: _sha256(d / name) for name in ("x.pfm", "y.txl", "scene.json")}


def load_sample(sample_dir, layout: TaxelLayout) -> PairedSample:
    d = Path(sample_dir)
    try:
        with open(d / "scene.json") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"bad scene.json in {d}: {e}")
    x_data = formats.read_pfm(d / "x.pfm")
    y_vals = formats.read_txl(d / "y.txl")
    grid = _grid_from_dict(doc["x_grid"])
    return PairedSample(
        sample_id=doc["id"],
        scene=scene_from_dict(doc),
        x=TactileImage(data=x_data, grid=grid),
        y=ArraySample(values=y_vals.astype(np.float64), layout=layout),
        split=doc["split"],
    )


def _grid_to_dict(grid: PixelGrid) -> dict:
    return {"rows": grid.rows, "cols": grid.cols,
            "origin": [grid.origin[0], grid.origin[1]], "spacing": grid.spacing}


def _grid_from_dict(doc: dict) -> PixelGrid:
    return PixelGrid(rows=doc["rows"], cols=doc["cols"],
                     origin=tuple(doc["origin"]), spacing=doc["spacing"])


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        h.update(f.read())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------

def _render_sample(args):
    sid, scene, split, cfg, layout, pgrid, cgrid, index = args
    layer = cfg.layer()
    pressure = pressure_field(scene, layer, pgrid)
    seed_y = seed_x = None
    if cfg.noise:
        root = np.random.SeedSequence([cfg.seed, index])
        seed_y, seed_x = [int(s.generate_state(1)[0]) for s in root.spawn(2)]
    y = sense_array(pressure, layout, layer, noise_seed=seed_y)
    x = sense_camera(pressure, scene, cgrid, noise_seed=seed_x,
                     stiffness=cfg.stiffness)
    return PairedSample(sample_id=sid, scene=scene, x=x, y=y, split=split)


def generate_corpus(cfg: DatasetConfig, out_dir, layout: Optional[TaxelLayout] = None,
                    threads: int = 1, progress=None) -> dict:
    """Generate all samples for cfg into out_dir; returns the manifest dict."""
    layout = build_default_layout() if layout is None else layout
    pgrid = default_tactile_grid(layout, downsample=cfg.downsample)
    cgrid = default_camera_grid(layout, downsample=cfg.downsample)
    if cfg.corpus == "primitives":
        scenes = list(enumerate_primitive_scenes(cfg))
    else:
        scenes = list(enumerate_object_scenes(cfg))
    out = Path(out_dir)
    (out / "samples").mkdir(parents=True, exist_ok=True)

    tasks = [
        (sid, scene, split, cfg, layout, pgrid, cgrid, i)
        for i, (sid, scene, split) in enumerate(scenes)
    ]
    entries = []
    if threads > 1:
        import multiprocessing as mp

        with mp.Pool(processes=threads) as pool:
            results = pool.imap(_render_sample, tasks, chunksize=16)
            for i, sample in enumerate(results):
                entries.append(_store(out, sample))
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            entries.append(_store(out, _render_sample(task)))
            if progress:
                progress(i + 1, len(tasks))

    manifest = {
        "config": cfg.to_dict(),
        "layout": {
            "n_taxels": layout.n_taxels,
            "pitch_mm": layout.pitch,
            "sensing_radius_mm": layout.sensing_radius,
            "positions_mm": [[float(a), float(b)] for a, b in layout.positions],
        },
        "counts": _count_summary(entries),
        "samples": entries,
    }
    with open(out / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def _store(out: Path, sample: PairedSample) -> dict:
    rel = f"samples/{sample.sample_id}"
    hashes = save_sample(out / rel, sample)
    return {"id": sample.sample_id, "path": rel, "split": sample.split,
            "hashes": hashes}


def _count_summary(entries) -> dict:
    by_split: dict[str, int] = {}
    by_feature: dict[str, int] = {}
    for e in entries:
        by_split[e["split"]] = by_split.get(e["split"], 0) + 1
        feature = e["id"].rsplit("_p", 1)[0]
        by_feature[feature] = by_feature.get(feature, 0) + 1
    return {"total": len(entries), "by_split": by_split, "by_feature": by_feature}


def generate_primitive_corpus(cfg: DatasetConfig, out_dir, **kw) -> dict:
    if cfg.corpus != "primitives":
        raise ConfigError("config is not a primitives config")
    return generate_corpus(cfg, out_dir, **kw)


def generate_object_corpus(cfg: DatasetConfig, out_dir, **kw) -> dict:
    if cfg.corpus != "objects":
        raise ConfigError("config is not an objects config")
    return generate_corpus(cfg, out_dir, **kw)


# ---------------------------------------------------------------------------
# Loading and splitting
# ---------------------------------------------------------------------------

def load_manifest(corpus_dir) -> dict:
    path = Path(corpus_dir) / "manifest.json"
    if not path.exists():
        raise FormatError(f"no manifest.json in {corpus_dir}")
    with open(path) as f:
        return json.load(f)


def corpus_layout(manifest: dict) -> TaxelLayout:
    doc = manifest["layout"]
    return TaxelLayout(
        positions=np.asarray(doc["positions_mm"], dtype=np.float64),
        sensing_radius=doc["sensing_radius_mm"],
        pitch=doc["pitch_mm"],
    )


def iter_samples(corpus_dir, manifest: Optional[dict] = None,
                 split: Optional[str] = None) -> Iterator[PairedSample]:
    manifest = load_manifest(corpus_dir) if manifest is None else manifest
    layout = corpus_layout(manifest)
    for e in manifest["samples"]:
        if split is not None and e["split"] != split:
            continue
        yield load_sample(Path(corpus_dir) / e["path"], layout)


def load_split(corpus_dir, split: str) -> list[PairedSample]:
    return list(iter_samples(corpus_dir, split=split))


def split_by_version(samples) -> tuple[list, list]:
    """Partition primitive samples: versions 1-3 train, version 4 val.

    Raises MissingVersion unless every kind carries all four versions.
    """
    seen: dict[str, set] = {}
    train, val = [], []
    for s in samples:
        prim = s.scene.primitive
        if isinstance(prim, ObjectShape):
            raise ConfigError("split_by_version applies to primitive corpora")
        seen.setdefault(prim.kind, set()).add(prim.version)
        (train if prim.version <= 3 else val).append(s)
    for kind, versions in seen.items():
        if versions != {1, 2, 3, 4}:
            raise MissingVersion(f"{kind} has versions {sorted(versions)}")
    return train, val
