"""Layers with explicit forward/backward passes, float64 throughout.

Every nonlinearity here (GELU, sigmoid, average pooling) is smooth, so
analytic gradients of the whole network can be verified against central
finite differences to tight tolerances at any point.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from . import kernels

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Conv2d:
    """3x3 same-padding convolution, stride 1."""

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator, ksize: int = 3):
        fan_in = in_channels * ksize * ksize
        self.w = rng.standard_normal((out_channels, in_channels, ksize, ksize)) * np.sqrt(2.0 / fan_in)
        self.b = np.zeros(out_channels)
        self.pad = ksize // 2
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return kernels.conv2d_forward(x, self.w, self.b, pad=self.pad)

    def backward(self, gy: np.ndarray) -> np.ndarray:
        gw, gb = kernels.conv2d_backward_weights(
            self._x, gy, pad=self.pad, kh=self.w.shape[2], kw=self.w.shape[3]
        )
        self.gw += gw
        self.gb += gb
        return kernels.conv2d_backward_input(gy, self.w, pad=self.pad)

    def params(self):
        return [("w", self), ("b", self)]


class Gelu:
    """Exact GELU: x * Phi(x) with the Gaussian CDF."""

    def __init__(self):
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))

    def backward(self, gy: np.ndarray) -> np.ndarray:
        x = self._x
        phi = 0.5 * (1.0 + erf(x * _INV_SQRT2))
        pdf = _INV_SQRT2PI * np.exp(-0.5 * x * x)
        return gy * (phi + x * pdf)


class AvgPool2:
    """2x2 average pooling with stride 2; trailing odd rows/cols dropped."""

    def __init__(self):
        self._shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        self._shape = (b, c, h, w)
        he, we = h - h % 2, w - w % 2
        v = x[:, :, :he, :we].reshape(b, c, he // 2, 2, we // 2, 2)
        return v.mean(axis=(3, 5))

    def backward(self, gy: np.ndarray) -> np.ndarray:
        b, c, h, w = self._shape
        gx = np.zeros((b, c, h, w))
        up = np.repeat(np.repeat(gy, 2, axis=2), 2, axis=3) * 0.25
        gx[:, :, : up.shape[2], : up.shape[3]] = up
        return gx


class GlobalAvgPool:
    def __init__(self):
        self._shape = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, gy: np.ndarray) -> np.ndarray:
        b, c, h, w = self._shape
        return np.broadcast_to(gy[:, :, None, None], self._shape) / (h * w)


class Linear:
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.w = rng.standard_normal((in_features, out_features)) * np.sqrt(1.0 / in_features)
        self.b = np.zeros(out_features)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.w + self.b

    def backward(self, gy: np.ndarray) -> np.ndarray:
        self.gw += self._x.T @ gy
        self.gb += gy.sum(axis=0)
        return gy @ self.w.T


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
