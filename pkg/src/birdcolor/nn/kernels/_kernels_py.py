"""Pure-numpy conv kernels (im2col windows + BLAS tensordot).

Reference implementation and import-time fallback for the compiled
extension. Stride is fixed at 1; spatial downsampling is the pooling
layer's job.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "python"


def _windows(x: np.ndarray, kh: int, kw: int, pad: int) -> np.ndarray:
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    # [B, C, Ho, Wo, kh, kw]
    return sliding_window_view(x, (kh, kw), axis=(2, 3))


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, pad: int = 1) -> np.ndarray:
    """x [B,C,H,W], w [F,C,kh,kw], b [F] -> y [B,F,Ho,Wo]."""
    win = _windows(x, w.shape[2], w.shape[3], pad)
    y = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))
    return np.ascontiguousarray(np.moveaxis(y, 3, 1)) + b[None, :, None, None]


def conv2d_backward_input(gy: np.ndarray, w: np.ndarray, pad: int = 1) -> np.ndarray:
    """Gradient wrt x: full correlation of gy with the flipped kernel."""
    kh, kw = w.shape[2], w.shape[3]
    win = _windows(gy, kh, kw, kh - 1 - pad)
    w_flip = w[:, :, ::-1, ::-1]
    gx = np.tensordot(win, w_flip, axes=([1, 4, 5], [0, 2, 3]))
    return np.ascontiguousarray(np.moveaxis(gx, 3, 1))


def conv2d_backward_weights(x: np.ndarray, gy: np.ndarray, pad: int = 1, kh: int = 3, kw: int = 3):
    """Gradients wrt w and b."""
    win = _windows(x, kh, kw, pad)
    gw = np.tensordot(gy, win, axes=([0, 2, 3], [0, 2, 3]))
    gb = gy.sum(axis=(0, 2, 3))
    return np.ascontiguousarray(gw), gb
