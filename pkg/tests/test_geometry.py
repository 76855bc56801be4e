import math

import numpy as np
import pytest

from tactran.errors import DegenerateInput
from tactran.geometry import (
    PixelGrid,
    TaxelLayout,
    _delaunay_points,
    build_default_layout,
    delaunay,
    load_layout,
    locate,
    make_grid,
    save_layout,
)


def hull_boundary_count(pos, tol=1e-9):
    """Number of points on the convex hull boundary, collinear ones included.

    Independent oracle for the Euler triangle-count formula: uses scipy's
    hull for the edges, then counts points lying on any edge segment.
    """
    from scipy.spatial import ConvexHull

    hull = ConvexHull(pos)
    verts = hull.vertices
    on_boundary = set(int(v) for v in verts)
    for k in range(len(verts)):
        a = pos[verts[k]]
        b = pos[verts[(k + 1) % len(verts)]]
        ab = b - a
        ab2 = ab @ ab
        for i in range(len(pos)):
            if i in on_boundary:
                continue
            ap = pos[i] - a
            t = (ap @ ab) / ab2
            if -tol <= t <= 1 + tol:
                d = np.hypot(*(ap - t * ab))
                if d < tol:
                    on_boundary.add(i)
    return len(on_boundary)


class TestDefaultLayout:
    def test_taxel_count(self, layout):
        assert layout.n_taxels == 20

    def test_min_pairwise_distance_is_pitch(self, layout):
        d = layout.positions[:, None, :] - layout.positions[None, :, :]
        dist = np.hypot(d[..., 0], d[..., 1])
        np.fill_diagonal(dist, np.inf)
        assert dist.min() == pytest.approx(7.5, abs=1e-9)

    def test_centered_at_origin(self, layout):
        c = layout.positions.mean(axis=0)
        assert abs(c[0]) < 1e-9 and abs(c[1]) < 1e-9

    def test_row_structure(self, layout):
        ys = np.unique(np.round(layout.positions[:, 1], 9))
        assert len(ys) == 4
        counts = sorted(
            int(np.sum(np.isclose(layout.positions[:, 1], y))) for y in ys
        )
        assert counts == [4, 4, 5, 5] or counts == [4, 5, 5, 6]

    def test_passes_layout_invariants(self, layout):
        # construction re-validates; no exception means the invariants hold
        TaxelLayout(positions=layout.positions)


class TestLayoutValidation:
    def test_too_few_points(self):
        with pytest.raises(ValueError):
            TaxelLayout(positions=np.array([[0.0, 0.0], [10.0, 0.0]]))

    def test_coincident_points(self):
        pts = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]])
        with pytest.raises(ValueError):
            TaxelLayout(positions=pts, pitch=7.5)

    def test_collinear_points(self):
        pts = np.array([[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]])
        with pytest.raises(ValueError):
            TaxelLayout(positions=pts)


class TestDelaunay:
    def test_single_triangle(self):
        tri = _delaunay_points(np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]]))
        assert len(tri.triangles) == 1

    def test_square_lowest_index_diagonal(self):
        tri = _delaunay_points(
            np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        )
        tris = {tuple(t) for t in tri.triangles.tolist()}
        # both triangles share the diagonal through vertex 0
        assert tris == {(0, 1, 2), (0, 2, 3)}

    def test_collinear_raises(self):
        with pytest.raises(DegenerateInput):
            _delaunay_points(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))

    def test_default_layout_euler_count(self, layout):
        tri = delaunay(layout)
        h = hull_boundary_count(layout.positions)
        assert len(tri.triangles) == 2 * layout.n_taxels - 2 - h

    def test_triangles_ccw(self, layout):
        tri = delaunay(layout)
        pos = layout.positions
        for a, b, c in tri.triangles:
            u = pos[b] - pos[a]
            v = pos[c] - pos[a]
            assert u[0] * v[1] - u[1] * v[0] > 0

    def test_empty_circumcircle_property(self, rng):
        pts = rng.uniform(0, 100, (14, 2))
        tri = _delaunay_points(pts)
        for a, b, c in tri.triangles:
            cx, cy, r2 = _circumcircle(pts[a], pts[b], pts[c])
            for m in range(len(pts)):
                if m in (a, b, c):
                    continue
                d2 = (pts[m, 0] - cx) ** 2 + (pts[m, 1] - cy) ** 2
                assert d2 >= r2 * (1 - 1e-9)

    def test_permutation_invariance(self, rng):
        pts = rng.uniform(0, 50, (11, 2))
        ref = _triangle_position_set(pts, _delaunay_points(pts))
        for _ in range(5):
            perm = rng.permutation(len(pts))
            got = _triangle_position_set(pts[perm], _delaunay_points(pts[perm]))
            assert got == ref

    def test_area_tiles_hull(self, rng):
        from scipy.spatial import ConvexHull

        pts = rng.uniform(0, 30, (12, 2))
        tri = _delaunay_points(pts)
        area = 0.0
        for a, b, c in tri.triangles:
            u = pts[b] - pts[a]
            v = pts[c] - pts[a]
            area += 0.5 * abs(u[0] * v[1] - u[1] * v[0])
        assert area == pytest.approx(ConvexHull(pts).volume, rel=1e-9)

    def test_matches_scipy_on_general_position(self, rng):
        from scipy.spatial import Delaunay as SciDelaunay

        pts = rng.normal(0, 20, (15, 2))
        ours = _triangle_position_set(pts, _delaunay_points(pts))
        sci = SciDelaunay(pts)
        theirs = _triangle_position_set(
            pts, type("T", (), {"triangles": sci.simplices})
        )
        assert ours == theirs


def _circumcircle(a, b, c):
    d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    a2, b2, c2 = a @ a, b @ b, c @ c
    ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d
    uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d
    return ux, uy, (a[0] - ux) ** 2 + (a[1] - uy) ** 2


def _triangle_position_set(pts, tri):
    out = set()
    for t in np.asarray(tri.triangles):
        key = frozenset((round(pts[v][0], 9), round(pts[v][1], 9)) for v in t)
        out.add(key)
    return out


class TestLocate:
    def test_vertex_query(self, layout):
        tri = delaunay(layout)
        hit = locate(tri, layout, layout.positions[0])
        assert hit is not None
        _, lam = hit
        assert max(lam) == pytest.approx(1.0, abs=1e-9)
        assert min(lam) == pytest.approx(0.0, abs=1e-9)

    def test_centroid_query(self, layout):
        tri = delaunay(layout)
        a, b, c = tri.triangles[3]
        cent = layout.positions[[a, b, c]].mean(axis=0)
        t_i, lam = locate(tri, layout, cent)
        assert t_i == 3
        assert lam == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-9)

    def test_far_outside_is_none(self, layout):
        tri = delaunay(layout)
        assert locate(tri, layout, (500.0, 500.0)) is None

    def test_barycentric_reconstruction(self, layout, rng):
        tri = delaunay(layout)
        lo = layout.positions.min(axis=0)
        hi = layout.positions.max(axis=0)
        pos = layout.positions
        found = 0
        for _ in range(200):
            p = rng.uniform(lo, hi)
            hit = locate(tri, layout, p)
            if hit is None:
                continue
            t_i, lam = hit
            a, b, c = tri.triangles[t_i]
            rec = lam[0] * pos[a] + lam[1] * pos[b] + lam[2] * pos[c]
            assert np.abs(rec - p).max() < 1e-7
            found += 1
        assert found > 100


class TestGrids:
    def test_make_grid_covers_hull(self, layout):
        g = make_grid(layout, rows=60, cols=99)
        xmin, xmax, ymin, ymax = g.extent()
        lo = layout.positions.min(axis=0)
        hi = layout.positions.max(axis=0)
        assert xmin < lo[0] and ymin < lo[1]
        assert xmax > hi[0] and ymax > hi[1]

    def test_default_shapes(self, layout, tactile_grid):
        assert tactile_grid.shape == (240, 396)
        from tactran.geometry import default_camera_grid

        assert default_camera_grid(layout).shape == (240, 320)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            PixelGrid(rows=0, cols=10, origin=(0, 0), spacing=0.1)
        with pytest.raises(ValueError):
            PixelGrid(rows=10, cols=10, origin=(0, 0), spacing=-1.0)


class TestLayoutIO:
    def test_round_trip(self, layout, tmp_path):
        path = tmp_path / "layout.json"
        save_layout(layout, path)
        again = load_layout(path)
        assert np.array_equal(again.positions, layout.positions)
        assert again.pitch == layout.pitch
        assert again.sensing_radius == layout.sensing_radius
