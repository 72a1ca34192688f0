"""Gradient fidelity of the full chain (encoder -> pooling -> BCE) against
central finite differences, plus parity between kernel backends."""

import numpy as np
import pytest

from birdcolor.nn import EncoderConfig, MILModel, RecordingBag, compute_gradients
from birdcolor.nn.kernels import available_backends

FD_H = 1e-4


def random_bag(rng, n_classes, shape, max_instances=3):
    n_real = int(rng.integers(1, max_instances + 1))
    inst = np.zeros((max_instances, 3, *shape))
    inst[:n_real] = rng.uniform(0, 1, (n_real, 3, *shape))
    mask = np.zeros(max_instances)
    mask[:n_real] = 1
    labels = (rng.uniform(size=n_classes) < 0.5).astype(np.float64)
    return RecordingBag(instances=inst, mask=mask, labels=labels)


def tiny_setup(rng, seed):
    n_classes = int(rng.integers(1, 4))
    shape = (int(rng.integers(8, 13)), int(rng.integers(8, 13)))
    widths = tuple(int(w) for w in rng.integers(2, 4, size=2))
    cfg = EncoderConfig(n_classes=n_classes, input_shape=shape, in_channels=3,
                        widths=widths, alpha_init=float(rng.uniform(-1, 3)))
    model = MILModel.init(cfg, seed=seed)
    bags = [random_bag(rng, n_classes, shape) for _ in range(int(rng.integers(1, 3)))]
    return model, bags


def loss_of(model, bags):
    loss, _ = compute_gradients(bags, model)
    return loss


def fd_gradient(model, bags, name, arr):
    """Central finite differences for every coordinate of one parameter."""
    out = np.zeros_like(np.atleast_1d(arr), dtype=np.float64)
    if name == "alpha":
        base = model.alpha
        model.alpha = base + FD_H
        up = loss_of(model, bags)
        model.alpha = base - FD_H
        dn = loss_of(model, bags)
        model.alpha = base
        out[0] = (up - dn) / (2 * FD_H)
        return out
    flat = arr.reshape(-1)
    fd = out.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + FD_H
        up = loss_of(model, bags)
        flat[i] = orig - FD_H
        dn = loss_of(model, bags)
        flat[i] = orig
        fd[i] = (up - dn) / (2 * FD_H)
    return out


def relative_error(a, b):
    na = np.linalg.norm(a.ravel())
    nb = np.linalg.norm(b.ravel())
    return np.linalg.norm((a - b).ravel()) / max(na, nb, 1e-12)


class TestFullChainGradients:
    def test_every_parameter_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for trial in range(12):
            model, bags = tiny_setup(rng, seed=trial)
            _, grads = compute_gradients(bags, model)
            for name, arr in model.parameters():
                fd = fd_gradient(model, bags, name, arr)
                err = relative_error(np.atleast_1d(grads[name]), fd)
                assert err < 1e-3, f"trial {trial} parameter {name}: {err:.2e}"

    def test_input_gradients_match_and_padding_is_disconnected(self):
        rng = np.random.default_rng(5)
        model, bags = tiny_setup(rng, seed=3)
        _, _, input_grads = compute_gradients(bags, model, want_input_grads=True)
        bag = bags[0]
        keep = bag.mask.astype(bool)
        assert not input_grads[0][~keep].any()
        # spot-check 20 pixel coordinates of the first real instance
        coords = [tuple(np.unravel_index(i, bag.instances[0].shape))
                  for i in rng.choice(bag.instances[0].size, 20, replace=False)]
        for c in coords:
            orig = bag.instances[0][c]
            bag.instances[0][c] = orig + FD_H
            up = loss_of(model, bags)
            bag.instances[0][c] = orig - FD_H
            dn = loss_of(model, bags)
            bag.instances[0][c] = orig
            fd = (up - dn) / (2 * FD_H)
            got = input_grads[0][(0, *c)]
            assert got == pytest.approx(fd, abs=1e-6)

    def test_zero_head_makes_alpha_gradient_zero(self):
        rng = np.random.default_rng(9)
        cfg = EncoderConfig(n_classes=3, input_shape=(8, 8), in_channels=3, widths=(2, 2))
        model = MILModel.init(cfg, seed=0)
        model.encoder.set_parameter("head.w", np.zeros_like(dict(model.parameters())["head.w"]))
        model.encoder.set_parameter("head.b", np.zeros(3))
        bags = [random_bag(rng, 3, (8, 8))]
        _, grads = compute_gradients(bags, model)
        # all instance probabilities equal 0.5, so pooling weights are
        # constant and the pooled value is locally independent of alpha
        assert grads["alpha"][0] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.skipif(len(available_backends()) < 2,
                    reason="compiled kernel backend not built")
class TestBackendParity:
    def test_forward_and_gradients_agree(self):
        from birdcolor.nn.kernels import _conv_ext, _kernels_py

        rng = np.random.default_rng(2)
        for _ in range(10):
            b, c, f = (int(v) for v in rng.integers(1, 5, size=3))
            h, w = (int(v) for v in rng.integers(5, 14, size=2))
            x = rng.normal(size=(b, c, h, w))
            wgt = rng.normal(size=(f, c, 3, 3))
            bias = rng.normal(size=f)
            gy = rng.normal(size=(b, f, h, w))
            np.testing.assert_allclose(
                _kernels_py.conv2d_forward(x, wgt, bias, 1),
                _conv_ext.conv2d_forward(x, wgt, bias, 1), atol=1e-12)
            np.testing.assert_allclose(
                _kernels_py.conv2d_backward_input(gy, wgt, 1),
                _conv_ext.conv2d_backward_input(gy, wgt, 1), atol=1e-12)
            gw_py, gb_py = _kernels_py.conv2d_backward_weights(x, gy, 1, 3, 3)
            gw_ex, gb_ex = _conv_ext.conv2d_backward_weights(x, gy, 1, 3, 3)
            np.testing.assert_allclose(gw_py, gw_ex, atol=1e-11)
            np.testing.assert_allclose(gb_py, gb_ex, atol=1e-11)

    def test_backend_env_selection(self):
        import subprocess
        import sys

        code = ("import birdcolor.nn.kernels as k; print(k.backend())")
        for want in ("python", "ext"):
            out = subprocess.run(
                [sys.executable, "-c", code],
                capture_output=True, text=True,
                env={"BIRDCOLOR_KERNELS": want, "PATH": "/usr/bin:/bin"},
            )
            assert out.stdout.strip() == want, out.stderr
