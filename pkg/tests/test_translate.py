import numpy as np
import pytest

from tactran import nn
from tactran import translate as tr
from tactran.errors import (
    Diverged,
    FormatError,
    LengthMismatch,
    NonDifferentiableKind,
    ShapeMismatch,
    SingularSystem,
)
from tactran.geometry import default_camera_grid, default_tactile_grid
from tactran.interp import FULLSCALE, ArraySample, TactileImage, phi_inv


@pytest.fixture(scope="module")
def small_grids(layout_module):
    cam = default_camera_grid(layout_module, downsample=8)  # 30 x 40
    tac = default_tactile_grid(layout_module, downsample=8)  # 30 x 49
    return cam, tac


@pytest.fixture(scope="module")
def layout_module():
    from tactran.geometry import build_default_layout

    return build_default_layout()


def linear_map(layout, cam, seed):
    """Ground-truth weights with unit L1 rows so targets can never clip."""
    rng = np.random.default_rng(seed)
    w = rng.normal(0, 1, (layout.n_taxels, cam.rows * cam.cols))
    w /= np.abs(w).sum(axis=1, keepdims=True)
    return w * 10000.0  # |w @ x| <= 10000 for x in [0, 1]


def make_pairs(layout, cam, n, seed, linear=False):
    rng = np.random.default_rng(seed)
    pairs = []
    w = linear_map(layout, cam, seed)
    for _ in range(n):
        x = rng.uniform(0, 1, (cam.rows, cam.cols)).astype(np.float32)
        if linear:
            y = w @ x.ravel().astype(np.float64) + 15000.0  # always in range
        else:
            y = np.round(rng.uniform(0, FULLSCALE, layout.n_taxels))
        pairs.append((TactileImage(data=x, grid=cam),
                      ArraySample(values=y, layout=layout)))
    return pairs


class TestL3Loss:
    def test_zero_when_equal(self, layout_module, rng):
        y = np.round(rng.uniform(0, FULLSCALE, layout_module.n_taxels))
        assert tr.l3_loss(y, y) == 0.0

    def test_hand_arithmetic(self):
        y = np.zeros(20)
        y[0] = 3.0
        assert tr.l3_loss(y, np.zeros(20)) == 9.0

    def test_consistency_with_rmse(self, rng):
        from tactran.metrics import rmse

        for _ in range(10):
            a = rng.uniform(0, FULLSCALE, 20)
            b = rng.uniform(0, FULLSCALE, 20)
            assert np.sqrt(tr.l3_loss(a, b) / 20) == pytest.approx(rmse(a, b))

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            tr.l3_loss(np.zeros(3), np.zeros(4))


class TestLinearBaseline:
    def test_zero_targets_zero_weights(self, layout_module, small_grids):
        cam, _ = small_grids
        pairs = make_pairs(layout_module, cam, 30, 0)
        pairs = [(x, ArraySample(values=np.zeros(layout_module.n_taxels),
                                 layout=layout_module)) for x, _ in pairs]
        m = tr.fit_linear_baseline(pairs, ridge=1.0)
        assert np.abs(m.parameters).max() < 1e-12

    def test_recovers_exact_linear_map(self, layout_module, small_grids):
        cam, _ = small_grids
        pairs = make_pairs(layout_module, cam, 2000, 1, linear=True)
        m = tr.fit_linear_baseline(pairs, ridge=0.0)
        w_true = linear_map(layout_module, cam, 1) / FULLSCALE
        d = cam.rows * cam.cols
        n_out = layout_module.n_taxels
        w_fit = m.parameters[:n_out * d].reshape(n_out, d).astype(np.float64)
        rel = np.abs(w_fit - w_true).max() / np.abs(w_true).max()
        assert rel < 1e-6

    def test_huge_ridge_predicts_mean(self, layout_module, small_grids):
        cam, _ = small_grids
        pairs = make_pairs(layout_module, cam, 50, 2)
        ys = np.stack([p[1].values for p in pairs])
        m = tr.fit_linear_baseline(pairs, ridge=1e12)
        pred = tr.predict_array(m, pairs[0][0], layout_module)
        assert np.abs(pred.values - ys.mean(axis=0)).max() < 1e-4 * FULLSCALE

    def test_rank_deficient_without_ridge(self, layout_module, small_grids):
        cam, _ = small_grids
        pairs = make_pairs(layout_module, cam, 30, 3)  # n << d
        with pytest.raises(SingularSystem):
            tr.fit_linear_baseline(pairs, ridge=0.0)

    def test_backward_refuses_linear(self, layout_module, small_grids):
        cam, _ = small_grids
        pairs = make_pairs(layout_module, cam, 25, 4)
        m = tr.fit_linear_baseline(pairs, ridge=1.0)
        with pytest.raises(NonDifferentiableKind):
            tr.backward(m, pairs[0][0], pairs[0][1])


def tiny_train(kind, layout, cam, tac, seed=5, max_epochs=2, n=8):
    pairs = make_pairs(layout, cam, n, seed)
    cfg = tr.default_train_config(kind, max_epochs=max_epochs, seed=seed,
                                  batch_size=4)
    return tr.train(kind, cfg, pairs, pairs, layout=layout, tactile_grid=tac), pairs


class TestForward:
    def test_zero_parameters_zero_output(self, layout_module, small_grids):
        cam, tac = small_grids
        model, pairs = tiny_train("array_space", layout_module, cam, tac)
        zeroed = tr.TranslatorModel(
            kind=model.kind, input_shape=model.input_shape,
            output_shape=model.output_shape, descriptor=model.descriptor,
            parameters=np.zeros_like(model.parameters),
            training_meta=model.training_meta,
        )
        out = tr.forward(zeroed, pairs[0][0], layout_module)
        assert not out.values.any()

    def test_repeated_calls_bit_identical(self, layout_module, small_grids):
        cam, tac = small_grids
        model, pairs = tiny_train("image_space", layout_module, cam, tac)
        a = tr.forward(model, pairs[0][0])
        b = tr.forward(model, pairs[0][0])
        assert np.array_equal(a.data, b.data)

    def test_shape_mismatch(self, layout_module, small_grids):
        cam, tac = small_grids
        model, _ = tiny_train("array_space", layout_module, cam, tac)
        bad = TactileImage(data=np.zeros((10, 12), dtype=np.float32),
                           grid=default_camera_grid(layout_module, downsample=24))
        with pytest.raises(ShapeMismatch):
            tr.forward(model, bad)

    def test_output_range_clamped(self, layout_module, small_grids, rng):
        cam, tac = small_grids
        model, pairs = tiny_train("array_space", layout_module, cam, tac)
        big = tr.TranslatorModel(
            kind=model.kind, input_shape=model.input_shape,
            output_shape=model.output_shape, descriptor=model.descriptor,
            parameters=(rng.uniform(-3, 3, model.parameters.size)
                        .astype(np.float32)),
            training_meta=model.training_meta,
        )
        out = tr.forward(big, pairs[0][0], layout_module)
        assert out.values.min() >= 0.0
        assert out.values.max() <= FULLSCALE

    def test_image_path_is_forward_then_phi_inv(self, layout_module, small_grids):
        cam, tac = small_grids
        model, pairs = tiny_train("image_space", layout_module, cam, tac)
        x = pairs[0][0]
        direct = tr.predict_array(model, x, layout_module)
        composed = phi_inv(tr.forward(model, x), layout_module)
        assert np.array_equal(direct.values, composed.values)


class TestBackward:
    def test_gradcheck_array_unit_scale(self, layout_module, small_grids):
        cam, tac = small_grids
        model, pairs = tiny_train("array_space", layout_module, cam, tac, seed=11)
        x, y = pairs[0]
        g = tr.backward(model, x, y.values, dtype=np.float64) / FULLSCALE ** 2
        rng = np.random.default_rng(0)
        idx = rng.choice(model.parameters.size, 30, replace=False)
        worst = _fd_check(model, x, y.values, g, idx)
        assert worst < 1e-4

    def test_gradcheck_image_through_sampler(self, layout_module, small_grids):
        cam, tac = small_grids
        model, pairs = tiny_train("image_space", layout_module, cam, tac, seed=11)
        x, y = pairs[0]
        g = tr.backward(model, x, y.values, dtype=np.float64) / FULLSCALE ** 2
        rng = np.random.default_rng(1)
        mask = tr.trainable_mask(model)
        idx = rng.choice(np.flatnonzero(mask), 30, replace=False)
        worst = _fd_check(model, x, y.values, g, idx)
        assert worst < 1e-4

    def test_frozen_buffer_gradient_zero(self, layout_module, small_grids):
        cam, tac = small_grids
        model, pairs = tiny_train("image_space", layout_module, cam, tac)
        g = tr.backward(model, pairs[0][0], pairs[0][1].values)
        mask = tr.trainable_mask(model)
        assert (~mask).sum() == 6 + 2 * layout_module.n_taxels
        assert not g[~mask].any()


def _unit_l3(model, x, y):
    if model.kind == "array_space":
        net = tr._build_net(model.kind, model.descriptor, np.float64)
        params = nn.unpack(model.parameters.astype(np.float64), net.order,
                           net.shapes, np.float64)
        xd = nn.with_coords(tr._prepare_input(model, x).astype(np.float64))
        yh, _ = net.forward(params, xd)
    else:
        net, params, _, _ = tr._image_net(model, np.float64)
        params = {k: v.astype(np.float64) for k, v in params.items()}
        xd = nn.with_coords(tr._prepare_input(model, x).astype(np.float64))
        (_, yh), _ = net.forward(params, xd)
    d = yh[0] - y / FULLSCALE
    return float(d @ d)


def _fd_check(model, x, y, g, idx, h=1e-3):
    base = model.parameters.astype(np.float64)
    worst = 0.0
    for i in idx:
        up, dn = base.copy(), base.copy()
        up[i] += h
        dn[i] -= h
        m_up = tr.TranslatorModel(kind=model.kind, input_shape=model.input_shape,
                                  output_shape=model.output_shape,
                                  descriptor=model.descriptor,
                                  parameters=up.astype(np.float32))
        m_dn = tr.TranslatorModel(kind=model.kind, input_shape=model.input_shape,
                                  output_shape=model.output_shape,
                                  descriptor=model.descriptor,
                                  parameters=dn.astype(np.float32))
        num = (_unit_l3(m_up, x, y) - _unit_l3(m_dn, x, y)) / (2 * h)
        worst = max(worst, abs(num - g[i]) / max(abs(num), abs(g[i]), 1e-6))
    return worst


class TestTrain:
    def test_determinism(self, layout_module, small_grids):
        cam, tac = small_grids
        m1, _ = tiny_train("array_space", layout_module, cam, tac, seed=21)
        m2, _ = tiny_train("array_space", layout_module, cam, tac, seed=21)
        assert np.array_equal(m1.parameters, m2.parameters)
        assert m1.training_meta == m2.training_meta

    def test_early_stop_on_worsening_curve(self, layout_module, small_grids):
        cam, tac = small_grids
        pairs = make_pairs(layout_module, cam, 8, 31)
        history = []
        cfg = tr.default_train_config("array_space", max_epochs=12, seed=31,
                                      batch_size=4)
        cfg = tr.TrainConfig(**{**cfg.__dict__, "patience": 1})
        model = tr.train("array_space", cfg, pairs, pairs, layout=layout_module,
                         tactile_grid=tac,
                         on_epoch=lambda e, t, v: history.append(v))
        assert model.training_meta.epochs_run < 12
        best = min(history[:model.training_meta.epochs_run + 1])
        assert model.training_meta.best_val_l3 == pytest.approx(best)

    def test_best_val_recorded_is_min_observed(self, layout_module, small_grids):
        cam, tac = small_grids
        pairs = make_pairs(layout_module, cam, 10, 32)
        history = []
        cfg = tr.default_train_config("image_space", max_epochs=3, seed=32,
                                      batch_size=4)
        model = tr.train("image_space", cfg, pairs, pairs, layout=layout_module,
                         tactile_grid=tac,
                         on_epoch=lambda e, t, v: history.append(v))
        assert model.training_meta.best_val_l3 == pytest.approx(min(history))

    def test_linear_comparison_on_linear_data(self, layout_module, small_grids):
        # on linearly generated data the trained net must land within 2x of
        # the closed-form solution's validation RMSE
        cam, tac = small_grids
        train_pairs = make_pairs(layout_module, cam, 300, 33, linear=True)
        val_pairs = make_pairs(layout_module, cam, 60, 34, linear=True)
        lin = tr.fit_linear_baseline(train_pairs, ridge=1e-6)
        cfg = tr.default_train_config("array_space", max_epochs=25, seed=33)
        net = tr.train("array_space", cfg, train_pairs, val_pairs,
                       layout=layout_module, tactile_grid=tac)
        from tactran.metrics import rmse

        def vrmse(m):
            return np.mean([rmse(y, tr.predict_array(m, x, layout_module))
                            for x, y in val_pairs])

        assert vrmse(net) <= 2.0 * max(vrmse(lin), 1.0)

    def test_diverged(self, layout_module, small_grids):
        cam, tac = small_grids
        pairs = make_pairs(layout_module, cam, 8, 35)
        cfg = tr.TrainConfig(learning_rate=1e12, batch_size=4, max_epochs=3,
                             patience=2, seed=35)
        with pytest.raises(Diverged):
            tr.train("array_space", cfg, pairs, pairs, layout=layout_module,
                     tactile_grid=tac)


class TestModelFile:
    def test_round_trip_bit_exact(self, layout_module, small_grids, tmp_path):
        cam, tac = small_grids
        for kind in ("linear_baseline", "array_space", "image_space"):
            if kind == "linear_baseline":
                pairs = make_pairs(layout_module, cam, 25, 41)
                model = tr.fit_linear_baseline(pairs, ridge=1.0)
            else:
                model, _ = tiny_train(kind, layout_module, cam, tac, seed=41)
            p1 = tmp_path / f"{kind}.t2tm"
            p2 = tmp_path / f"{kind}2.t2tm"
            tr.save_model(model, p1)
            again = tr.load_model(p1)
            tr.save_model(again, p2)
            assert p1.read_bytes() == p2.read_bytes()
            assert again.kind == model.kind
            assert np.array_equal(again.parameters, model.parameters)
            assert again.training_meta == model.training_meta

    def test_truncated_file(self, layout_module, small_grids, tmp_path):
        cam, tac = small_grids
        model, _ = tiny_train("array_space", layout_module, cam, tac)
        p = tmp_path / "m.t2tm"
        tr.save_model(model, p)
        data = p.read_bytes()
        p.write_bytes(data[: len(data) // 2])
        with pytest.raises(FormatError):
            tr.load_model(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "m.t2tm"
        p.write_bytes(b"XXXX" + b"\x00" * 64)
        with pytest.raises(FormatError):
            tr.load_model(p)

    def test_parameter_count_enforced(self, layout_module, small_grids):
        cam, tac = small_grids
        model, _ = tiny_train("array_space", layout_module, cam, tac)
        with pytest.raises(ValueError):
            tr.TranslatorModel(
                kind=model.kind, input_shape=model.input_shape,
                output_shape=model.output_shape, descriptor=model.descriptor,
                parameters=model.parameters[:-1],
            )
