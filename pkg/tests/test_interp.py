import numpy as np
import pytest

from tactran.errors import GridMismatch, OutOfBounds
from tactran.geometry import PixelGrid, make_grid
from tactran.interp import (
    FULLSCALE,
    ArraySample,
    TactileImage,
    get_rasterizer,
    phi,
    phi_inv,
)


def random_sample(layout, rng):
    vals = np.round(rng.uniform(0.0, FULLSCALE, layout.n_taxels))
    return ArraySample(values=vals, layout=layout)


class TestPhi:
    def test_zero_in_zero_out(self, layout, tactile_grid):
        y = ArraySample(values=np.zeros(layout.n_taxels), layout=layout)
        img = phi(y, grid=tactile_grid)
        assert not img.data.any()

    def test_constant_partition_of_unity(self, layout, tactile_grid):
        c = 777.0
        y = ArraySample(values=np.full(layout.n_taxels, c), layout=layout)
        img = phi(y, grid=tactile_grid)
        plan = get_rasterizer(layout, tactile_grid)
        inside = np.zeros(img.data.shape, dtype=bool)
        inside.flat[plan._inside_flat] = True
        assert np.allclose(img.data[inside], c, atol=1e-6)
        # outside the hull only the nodal 2x2 blocks carry values
        outside = ~inside
        outside[plan.stamp_pixels[:, 0], plan.stamp_pixels[:, 1]] = False
        assert not img.data[outside].any()

    def test_pixel_at_taxel_equals_channel(self, layout, tactile_grid, rng):
        y = random_sample(layout, rng)
        img = phi(y, grid=tactile_grid)
        uv = tactile_grid.to_pixel(layout.positions)
        for t in range(layout.n_taxels):
            i = int(round(uv[t, 0]))
            j = int(round(uv[t, 1]))
            assert img.data[j, i] == pytest.approx(y.values[t], abs=1e-6)

    def test_range_preservation(self, layout, tactile_grid, rng):
        y = random_sample(layout, rng)
        img = phi(y, grid=tactile_grid)
        plan = get_rasterizer(layout, tactile_grid)
        inside = img.data.flat[plan._inside_flat]
        assert inside.min() >= y.values.min() - 1e-6
        assert inside.max() <= y.values.max() + 1e-6

    def test_linearity(self, layout, tactile_grid, rng):
        y1 = rng.uniform(0, 15000, layout.n_taxels)
        y2 = rng.uniform(0, 15000, layout.n_taxels)
        a, b = 0.75, 1.25
        img_lin = (
            a * phi(ArraySample(values=y1, layout=layout), grid=tactile_grid).data
            + b * phi(ArraySample(values=y2, layout=layout), grid=tactile_grid).data
        )
        img_sum = phi(
            ArraySample(values=a * y1 + b * y2, layout=layout), grid=tactile_grid
        ).data
        assert np.abs(img_lin - img_sum).max() < 1e-4 * FULLSCALE / 1000 + 1e-2

    def test_hull_exceeding_grid_raises(self, layout):
        tiny = PixelGrid(rows=10, cols=10, origin=(-1.0, -1.0), spacing=0.2)
        y = ArraySample(values=np.zeros(layout.n_taxels), layout=layout)
        with pytest.raises(GridMismatch):
            phi(y, grid=tiny)


class TestPhiInv:
    def test_round_trip_exact(self, layout, tactile_grid, rng):
        worst = 0.0
        for _ in range(50):
            y = random_sample(layout, rng)
            back = phi_inv(phi(y, grid=tactile_grid), layout)
            worst = max(worst, np.abs(back.values - y.values).max())
        assert worst <= 0.5

    def test_constant_image(self, layout, tactile_grid):
        c = 4321.0
        img = TactileImage(
            data=np.full(tactile_grid.shape, c, dtype=np.float32), grid=tactile_grid
        )
        back = phi_inv(img, layout)
        assert np.allclose(back.values, c)

    def test_clamps_to_fullscale(self, layout, tactile_grid):
        img = TactileImage(
            data=np.full(tactile_grid.shape, 50000.0, dtype=np.float32),
            grid=tactile_grid,
        )
        back = phi_inv(img, layout)
        assert np.all(back.values == FULLSCALE)

    def test_taxel_outside_image_raises(self, layout):
        # a grid near the layout but too small for the full hull
        g = PixelGrid(rows=40, cols=40, origin=(-3.0, -3.0), spacing=0.15)
        img = TactileImage(data=np.zeros((40, 40), dtype=np.float32), grid=g)
        with pytest.raises(OutOfBounds):
            phi_inv(img, layout)


class TestArraySampleValidation:
    def test_length_mismatch(self, layout):
        from tactran.errors import LengthMismatch

        with pytest.raises(LengthMismatch):
            ArraySample(values=np.zeros(7), layout=layout)

    def test_range_check(self, layout):
        with pytest.raises(ValueError):
            ArraySample(values=np.full(layout.n_taxels, -1.0), layout=layout)
        with pytest.raises(ValueError):
            ArraySample(values=np.full(layout.n_taxels, 40001.0), layout=layout)

    def test_non_finite(self, layout):
        vals = np.zeros(layout.n_taxels)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            ArraySample(values=vals, layout=layout)


class TestSmallGrids:
    def test_downsampled_round_trip(self, layout, rng):
        g = make_grid(layout, rows=60, cols=99)
        for _ in range(20):
            y = random_sample(layout, rng)
            back = phi_inv(phi(y, grid=g), layout)
            assert np.abs(back.values - y.values).max() <= 0.5
