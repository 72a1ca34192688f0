"""Frequency colorization: each mel bin row gets a unique RGB hue.

The bin range is split into three equal regions. Within a region the hue
crossfades between two primaries as t = local_index / n_bins:

    region 0 (from f_min):  (1-t, t, 0)   red   -> green
    region 1:               (0, 1-t, t)   green -> blue
    region 2:               (t, 0, 1-t)   blue  -> red

t never reaches 1 inside a region, so all rows get pairwise-distinct
triples, and the two active components always sum to 1: per pixel,
R + G + B equals the grayscale value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .melspec import MelConfig, MelSpectrogram


class ColorizeError(Exception):
    pass


@dataclass(frozen=True)
class ColorizedSpectrogram:
    """channels: [3, total_bins, n_frames], RGB order, each in [0, 1]."""

    channels: np.ndarray
    config: MelConfig


def region_color(bin_index: int, total_bins: int) -> tuple[float, float, float]:
    """RGB triple for one mel bin row (bin 0 sits at f_min)."""
    if total_bins <= 0 or total_bins % 3 != 0:
        raise ColorizeError(f"total_bins must be a positive multiple of 3, got {total_bins}")
    if not 0 <= bin_index < total_bins:
        raise ColorizeError(f"bin_index {bin_index} out of range [0, {total_bins})")
    n_bins = total_bins // 3
    region, local = divmod(bin_index, n_bins)
    t = local / n_bins
    if region == 0:
        return (1.0 - t, t, 0.0)
    if region == 1:
        return (0.0, 1.0 - t, t)
    return (t, 0.0, 1.0 - t)


def color_matrix(total_bins: int) -> np.ndarray:
    """[total_bins, 3] of per-row hues; rows follow `region_color`."""
    return np.array([region_color(b, total_bins) for b in range(total_bins)])


def colorize(spec: MelSpectrogram) -> ColorizedSpectrogram:
    """Scale each bin row of a normalized spectrogram by its hue."""
    v = spec.values
    if v.min() < -1e-12 or v.max() > 1.0 + 1e-12:
        raise ColorizeError("spectrogram must be normalized to [0, 1] before colorizing")
    colors = color_matrix(v.shape[0])
    channels = colors.T[:, :, None] * np.clip(v, 0.0, 1.0)[None, :, :]
    return ColorizedSpectrogram(channels=channels, config=spec.config)


def grayscale(spec: MelSpectrogram) -> ColorizedSpectrogram:
    """Ablation baseline: the normalized spectrogram replicated into all
    three channels, so model architecture and parameter count match the
    colorized variant exactly."""
    v = spec.values
    if v.min() < -1e-12 or v.max() > 1.0 + 1e-12:
        raise ColorizeError("spectrogram must be normalized to [0, 1]")
    v = np.clip(v, 0.0, 1.0)
    return ColorizedSpectrogram(channels=np.stack([v, v, v]), config=spec.config)


def export_png(img: ColorizedSpectrogram, path) -> None:
    """Write an 8-bit RGB PNG with f_min at the bottom row."""
    ch = img.channels
    if ch.min() < 0.0 or ch.max() > 1.0:
        raise ColorizeError("channels must lie in [0, 1]")
    rgb = np.round(255.0 * ch).astype(np.uint8)
    # channel-first [3, bins, frames] -> image rows top-to-bottom
    rgb = np.transpose(rgb, (1, 2, 0))[::-1]
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
