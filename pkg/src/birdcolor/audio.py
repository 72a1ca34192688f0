"""WAV loading, resampling, and high-pass conditioning.

All clips are mono float64 in [-1, 1]. The pipeline-wide canonical sample
rate is 32 kHz; recordings at other rates are brought there with a
band-limited polyphase resampler.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from math import gcd

import numpy as np
from scipy import signal
from scipy.io import wavfile

PIPELINE_RATE = 32000

# Polyphase anti-aliasing FIR: Kaiser-windowed sinc, 64 zero crossings per
# side at the lower rate, beta for ~140 dB stopband, rolloff keeps the
# transition band inside Nyquist.
_FIR_ZERO_CROSSINGS = 64
_FIR_BETA = 14.769656459379492
_FIR_ROLLOFF = 0.9475

HIGHPASS_ORDER = 4


class AudioError(Exception):
    """Base class for audio ingest failures."""


class UnreadableFileError(AudioError):
    """File missing, truncated, or not a RIFF/WAVE container."""


class UnsupportedCodecError(AudioError):
    """WAV container holds a non-PCM codec (e.g. MP3, ADPCM)."""


class EmptyAudioError(AudioError):
    """WAV decoded to zero samples."""


@dataclass(frozen=True)
class AudioClip:
    """Mono recording: float64 samples in [-1, 1] at `sample_rate` Hz."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise EmptyAudioError("clip must hold a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise AudioError("clip contains non-finite samples")
        if np.max(np.abs(samples)) > 1.0 + 1e-12:
            raise AudioError("clip samples exceed [-1, 1]")
        if self.sample_rate <= 0:
            raise AudioError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def load_wav(path) -> AudioClip:
    """Decode a PCM WAV file into a normalized mono clip.

    Supports 8/16/24/32-bit integer and 32/64-bit float PCM; multi-channel
    input is averaged down to mono. Raises `UnreadableFileError`,
    `UnsupportedCodecError`, or `EmptyAudioError` so callers can tell the
    failure modes apart.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(path)
    except FileNotFoundError as exc:
        raise UnreadableFileError(f"no such file: {path}") from exc
    except ValueError as exc:
        msg = str(exc)
        # scipy reports a non-RIFF or truncated file as "file format not
        # understood"; an actual WAV with a codec we cannot decode mentions
        # the wave format code or compression instead
        if "not understood" in msg.lower():
            raise UnreadableFileError(f"{path}: {msg}") from exc
        if "format" in msg.lower() or "compressed" in msg.lower():
            raise UnsupportedCodecError(f"{path}: {msg}") from exc
        raise UnreadableFileError(f"{path}: {msg}") from exc
    except OSError as exc:
        raise UnreadableFileError(f"{path}: {exc}") from exc

    if data.size == 0:
        raise EmptyAudioError(f"{path}: no audio frames")

    x = _scale_to_unit(data)
    if x.ndim == 2:
        x = x.mean(axis=1)
    return AudioClip(x, int(rate), source_id=str(path))


def _scale_to_unit(data: np.ndarray) -> np.ndarray:
    """Map integer PCM onto [-1, 1]; float PCM is clipped into range."""
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        # scipy delivers 24-bit PCM left-justified in int32, so this keeps
        # 24-bit samples exact at k / 2**23.
        return data.astype(np.float64) / 2147483648.0
    if data.dtype in (np.float32, np.float64):
        return np.clip(data.astype(np.float64), -1.0, 1.0)
    raise UnsupportedCodecError(f"unsupported sample dtype {data.dtype}")


def _resample_fir(up: int, down: int) -> np.ndarray:
    m = max(up, down)
    half = _FIR_ZERO_CROSSINGS * m
    n = np.arange(-half, half + 1)
    cutoff = _FIR_ROLLOFF / m
    # Unit DC gain; resample_poly rescales by `up` itself.
    return cutoff * np.sinc(cutoff * n) * np.kaiser(2 * half + 1, _FIR_BETA)


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Band-limited rate conversion via Kaiser-windowed polyphase sinc.

    Same-rate input is returned unchanged. Output length is
    ceil(n * up / down), so duration is preserved to within one sample
    period. Accuracy is limited near the ends of the clip: within
    `resample_edge_samples` of either end the filter sees past the signal
    boundary and the transient error can reach percent level.
    """
    if target_rate <= 0:
        raise AudioError(f"target_rate must be positive, got {target_rate}")
    if target_rate == clip.sample_rate:
        return clip
    g = gcd(clip.sample_rate, target_rate)
    up, down = target_rate // g, clip.sample_rate // g
    out = signal.resample_poly(clip.samples, up, down, window=_resample_fir(up, down))
    out = np.clip(out, -1.0, 1.0)
    return replace(clip, samples=out, sample_rate=int(target_rate))


def resample_edge_samples(rate_in: int, rate_out: int) -> int:
    """Output samples at each end inside the resampler's startup transient."""
    g = gcd(rate_in, rate_out)
    up, down = rate_out // g, rate_in // g
    if up == down:
        return 0
    return int(np.ceil(_FIR_ZERO_CROSSINGS * max(up, down) / down)) + 2


def highpass(clip: AudioClip, cutoff: float = 300.0) -> AudioClip:
    """Zero-phase 4th-order Butterworth high-pass.

    Forward-backward filtering keeps event peak timing unshifted; the
    effective magnitude response is the square of the single-pass filter.
    """
    nyquist = clip.sample_rate / 2.0
    if not 0.0 < cutoff < nyquist:
        raise AudioError(f"cutoff must lie in (0, {nyquist}), got {cutoff}")
    sos = signal.butter(HIGHPASS_ORDER, cutoff, btype="highpass", fs=clip.sample_rate, output="sos")
    out = signal.sosfiltfilt(sos, clip.samples)
    out = np.clip(out, -1.0, 1.0)
    return replace(clip, samples=out)
