"""Adaptive pooling: interpolates mean (alpha=0) to max (alpha -> inf)."""

import numpy as np
import pytest

from birdcolor.nn import AutopoolError, autopool, autopool_backward
from birdcolor.nn.loss import bce_loss, bce_loss_backward


def col(values):
    return np.asarray(values, dtype=np.float64).reshape(-1, 1)


class TestAutopoolValues:
    def test_alpha_zero_is_mean(self):
        out = autopool(col([0.2, 0.4, 0.6]), np.ones(3), 0.0)
        assert out[0] == pytest.approx(0.4, abs=1e-15)

    def test_large_alpha_is_max(self):
        out = autopool(col([0.2, 0.9]), np.ones(2), 1e6)
        assert out[0] == pytest.approx(0.9, abs=1e-6)

    def test_alpha_one_softmax_pooling(self):
        out = autopool(col([0.0, 1.0]), np.ones(2), 1.0)
        expected = (0.0 * 1.0 + 1.0 * np.e) / (1.0 + np.e)
        assert out[0] == pytest.approx(expected, rel=1e-12)
        assert out[0] == pytest.approx(0.731059, abs=1e-6)

    def test_masked_instance_ignored(self):
        for alpha in (0.0, 1.0, 37.5):
            out = autopool(col([0.3, 0.99]), np.array([1.0, 0.0]), alpha)
            assert out[0] == pytest.approx(0.3, abs=1e-15)

    def test_per_class_independence(self, rng):
        probs = rng.uniform(0, 1, (4, 3))
        mask = np.ones(4)
        joint = autopool(probs, mask, 1.7)
        for c in range(3):
            alone = autopool(probs[:, c : c + 1], mask, 1.7)
            assert joint[c] == pytest.approx(alone[0], rel=1e-15)

    def test_all_masked_rejected(self):
        with pytest.raises(AutopoolError):
            autopool(col([0.5, 0.5]), np.zeros(2), 1.0)

    def test_convex_combination_bounds(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 6))
            c = int(rng.integers(1, 4))
            probs = rng.uniform(0, 1, (n, c))
            mask = np.zeros(n)
            mask[rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)] = 1
            alpha = float(rng.uniform(-5, 50))
            out = autopool(probs, mask, alpha)
            kept = probs[mask.astype(bool)]
            assert np.all(out >= kept.min(axis=0) - 1e-12)
            assert np.all(out <= kept.max(axis=0) + 1e-12)

    def test_monotone_in_alpha(self, rng):
        probs = col(rng.uniform(0, 1, 5))
        mask = np.ones(5)
        alphas = np.linspace(0, 20, 40)
        outs = [autopool(probs, mask, a)[0] for a in alphas]
        assert np.all(np.diff(outs) >= -1e-12)

    def test_permutation_invariance(self, rng):
        probs = rng.uniform(0, 1, (5, 2))
        mask = np.array([1.0, 1.0, 0.0, 1.0, 0.0])
        perm = rng.permutation(5)
        a = autopool(probs, mask, 2.3)
        b = autopool(probs[perm], mask[perm], 2.3)
        np.testing.assert_allclose(a, b, rtol=1e-15)

    def test_extreme_alpha_stable(self):
        out = autopool(col([0.1, 0.2, 0.99]), np.ones(3), 1e9)
        assert np.isfinite(out).all()
        assert out[0] == pytest.approx(0.99, abs=1e-9)


class TestAutopoolGradients:
    def test_matches_finite_differences(self, rng):
        h = 1e-6
        for _ in range(50):
            n = int(rng.integers(2, 6))
            c = int(rng.integers(1, 3))
            probs = rng.uniform(0.05, 0.95, (n, c))
            mask = np.zeros(n)
            mask[rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)] = 1
            alpha = float(rng.uniform(-2, 8))
            gout = rng.normal(size=c)
            gp, ga = autopool_backward(probs, mask, alpha, gout)
            for i in range(n):
                for j in range(c):
                    probs[i, j] += h
                    up = float(autopool(probs, mask, alpha) @ gout)
                    probs[i, j] -= 2 * h
                    dn = float(autopool(probs, mask, alpha) @ gout)
                    probs[i, j] += h
                    fd = (up - dn) / (2 * h)
                    assert gp[i, j] == pytest.approx(fd, abs=5e-9)
            up = float(autopool(probs, mask, alpha + h) @ gout)
            dn = float(autopool(probs, mask, alpha - h) @ gout)
            assert ga == pytest.approx((up - dn) / (2 * h), abs=5e-8)

    def test_masked_rows_get_zero_gradient(self, rng):
        probs = rng.uniform(0, 1, (4, 2))
        mask = np.array([1.0, 0.0, 1.0, 0.0])
        gp, _ = autopool_backward(probs, mask, 1.5, np.ones(2))
        assert not gp[1].any()
        assert not gp[3].any()

    def test_equal_probs_make_alpha_gradient_zero(self):
        probs = np.full((4, 3), 0.37)
        _, ga = autopool_backward(probs, np.ones(4), 2.0, np.ones(3))
        assert ga == pytest.approx(0.0, abs=1e-15)


class TestBceLoss:
    def test_perfect_prediction_near_zero(self):
        target = np.array([[1.0, 0.0, 1.0]])
        assert bce_loss(target.copy(), target) <= 1.5e-7

    def test_uniform_half_is_ln2(self):
        pred = np.full((2, 4), 0.5)
        target = np.array([[1, 0, 1, 0], [0, 0, 1, 1]], dtype=np.float64)
        assert bce_loss(pred, target) == pytest.approx(np.log(2), rel=1e-12)

    def test_hand_computed_case(self):
        pred = np.array([[0.9, 0.2]])
        target = np.array([[1.0, 0.0]])
        expected = -(np.log(0.9) + np.log(0.8)) / 2
        assert bce_loss(pred, target) == pytest.approx(expected, rel=1e-12)
        assert bce_loss(pred, target) == pytest.approx(0.164252, abs=1e-6)

    def test_batch_mean_over_recordings(self, rng):
        pred = rng.uniform(0.1, 0.9, (6, 3))
        target = (rng.uniform(size=(6, 3)) < 0.5).astype(np.float64)
        per_row = [bce_loss(pred[i : i + 1], target[i : i + 1]) for i in range(6)]
        assert bce_loss(pred, target) == pytest.approx(np.mean(per_row), rel=1e-12)

    def test_non_negative(self, rng):
        for _ in range(20):
            pred = rng.uniform(0, 1, (3, 4))
            target = (rng.uniform(size=(3, 4)) < 0.5).astype(np.float64)
            assert bce_loss(pred, target) >= 0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            bce_loss(np.zeros((2, 3)), np.zeros((2, 4)))

    def test_gradient_matches_finite_differences(self, rng):
        pred = rng.uniform(0.05, 0.95, (3, 4))
        target = (rng.uniform(size=(3, 4)) < 0.5).astype(np.float64)
        g = bce_loss_backward(pred, target)
        h = 1e-7
        for i in range(3):
            for j in range(4):
                pred[i, j] += h
                up = bce_loss(pred, target)
                pred[i, j] -= 2 * h
                dn = bce_loss(pred, target)
                pred[i, j] += h
                assert g[i, j] == pytest.approx((up - dn) / (2 * h), rel=1e-5)
