"""Mel spectrograms: STFT, triangular filterbank, and the normalize ->
log -> normalize chain that produces model-ready [0, 1] images."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

LOG_BETA = 10000.0


class SpectrogramError(Exception):
    pass


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 32000
    f_min: float = 300.0
    f_max: float = 16000.0
    # Must be divisible by 3: the colorizer splits the bins into three
    # equal frequency regions.
    total_bins: int = 126
    fft_size: int = 2048
    hop: int = 512

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise SpectrogramError("sample_rate must be positive")
        if not 0.0 <= self.f_min < self.f_max <= self.sample_rate / 2:
            raise SpectrogramError(
                f"need 0 <= f_min < f_max <= sample_rate/2, got "
                f"[{self.f_min}, {self.f_max}] at {self.sample_rate} Hz"
            )
        if self.total_bins <= 0 or self.total_bins % 3 != 0:
            raise SpectrogramError(
                f"total_bins must be a positive multiple of 3, got {self.total_bins}"
            )
        if self.fft_size < 2 or self.hop < 1:
            raise SpectrogramError("fft_size must be >= 2 and hop >= 1")


@dataclass(frozen=True)
class MelSpectrogram:
    """values: [total_bins, n_frames]; raw power until normalized."""

    values: np.ndarray
    config: MelConfig
    bin_center_freqs: np.ndarray


def bin_center_frequencies(config: MelConfig) -> np.ndarray:
    mels = np.linspace(hz_to_mel(config.f_min), hz_to_mel(config.f_max), config.total_bins + 2)
    return mel_to_hz(mels[1:-1])


def mel_filterbank(config: MelConfig) -> np.ndarray:
    """Triangular unit-peak filters on the rfft bin grid, [bins, fft/2+1]."""
    n_fft_bins = config.fft_size // 2 + 1
    fft_freqs = np.arange(n_fft_bins) * config.sample_rate / config.fft_size
    mels = np.linspace(hz_to_mel(config.f_min), hz_to_mel(config.f_max), config.total_bins + 2)
    fft_mels = hz_to_mel(fft_freqs)

    lower = mels[:-2][:, None]
    center = mels[1:-1][:, None]
    upper = mels[2:][:, None]
    rising = (fft_mels[None, :] - lower) / (center - lower)
    falling = (upper - fft_mels[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def _frames(x: np.ndarray, frame: int, hop: int) -> np.ndarray:
    n_frames = 1 + (x.size - frame) // hop
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def mel_spectrogram(event, config: MelConfig) -> MelSpectrogram:
    """Raw mel power of an event (or bare sample array).

    Hann-windowed magnitude-squared STFT projected through the triangular
    filterbank. No normalization is applied here.
    """
    x = np.asarray(getattr(event, "samples", event), dtype=np.float64)
    if x.ndim != 1:
        raise SpectrogramError("expected a 1-D sample array")
    if x.size < config.fft_size:
        raise SpectrogramError(
            f"event has {x.size} samples, shorter than one {config.fft_size}-point FFT frame"
        )
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(config.fft_size) / config.fft_size)
    frames = _frames(x, config.fft_size, config.hop)
    spectrum = np.fft.rfft(frames * window, axis=1)
    power = spectrum.real**2 + spectrum.imag**2
    values = mel_filterbank(config) @ power.T
    return MelSpectrogram(
        values=values, config=config, bin_center_freqs=bin_center_frequencies(config)
    )


def normalize_log_normalize(spec: MelSpectrogram, beta: float = LOG_BETA) -> MelSpectrogram:
    """Min-max normalize, compress with log(1 + beta*v)/log(1 + beta),
    then min-max normalize again.

    The log form maps [0, 1] onto [0, 1] monotonically and is finite at
    zero; beta = 10000 gives dynamic-range compression comparable to dB
    scaling. A constant input (e.g. silence) maps to all zeros rather than
    NaN.
    """
    v = spec.values
    lo, hi = v.min(), v.max()
    if hi == lo:
        return replace(spec, values=np.zeros_like(v))
    v = (v - lo) / (hi - lo)
    v = np.log1p(beta * v) / np.log1p(beta)
    lo, hi = v.min(), v.max()
    v = (v - lo) / (hi - lo)
    return replace(spec, values=v)


def save_matrix(values: np.ndarray, path) -> None:
    """Persist a spectrogram matrix as a standard little-endian NPY file."""
    np.save(path, np.ascontiguousarray(values, dtype="<f8"))
