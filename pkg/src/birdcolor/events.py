"""Acoustic event mining: denoise, frame energy, peak picking, windowing.

A recording yields at most five 5-second event windows centered on the
highest energy peaks above mean frame energy, greedily accepted so that no
window shares more than half its span with an already accepted one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy import signal

from .audio import AudioClip, highpass

ENERGY_FRAME = 2048
ENERGY_HOP = 512

DENOISE_FRAME = 2048
DENOISE_HOP = 512
DENOISE_QUIET_FRACTION = 0.10
DENOISE_SUBTRACT = 1.5
DENOISE_FLOOR_CLAMP = 4.0

MAX_EVENTS = 5
EVENT_WINDOW_SECONDS = 5.0
MAX_OVERLAP_FRACTION = 0.5


class EventDetectionError(Exception):
    pass


@dataclass(frozen=True)
class EnergyProfile:
    """Per-frame energies (sum of squared samples) plus their mean."""

    frame_energies: np.ndarray
    frame_length: int
    hop_length: int
    mean_energy: float


@dataclass(frozen=True)
class AcousticEvent:
    """One mined window. `clamped` marks windows shortened at a recording
    boundary (only possible when the recording is shorter than the window)."""

    start_sample: int
    end_sample: int
    peak_energy: float
    samples: np.ndarray
    clamped: bool = False

    @property
    def n_samples(self) -> int:
        return self.end_sample - self.start_sample


def denoise(
    clip: AudioClip,
    frame: int = DENOISE_FRAME,
    hop: int = DENOISE_HOP,
    quiet_fraction: float = DENOISE_QUIET_FRACTION,
    subtract: float = DENOISE_SUBTRACT,
    floor_clamp: float = DENOISE_FLOOR_CLAMP,
) -> AudioClip:
    """Spectral gating against stationary broadband background noise.

    The per-frequency noise floor is the mean STFT magnitude over the
    quietest `quiet_fraction` of frames. The floor is clamped to
    `floor_clamp` times its median across frequencies: persistent
    narrowband content (a steady bird tone) would otherwise be counted as
    its own noise floor and erased, while genuine broadband noise has a
    flat floor and is unaffected by the clamp. Magnitudes are then
    soft-thresholded (`max(mag - subtract * floor, 0)`) and the signal is
    rebuilt with the original phase.
    """
    x = clip.samples
    if x.size < frame:
        raise EventDetectionError(
            f"clip has {x.size} samples, shorter than one {frame}-sample frame"
        )
    noverlap = frame - hop
    _, _, z = signal.stft(
        x, window="hann", nperseg=frame, noverlap=noverlap, boundary="zeros", padded=True
    )
    mag = np.abs(z)

    frame_energy_ = (mag**2).sum(axis=0)
    k = max(1, int(np.ceil(quiet_fraction * mag.shape[1])))
    quiet = np.argsort(frame_energy_, kind="stable")[:k]
    floor = mag[:, quiet].mean(axis=1)
    floor = np.minimum(floor, floor_clamp * np.median(floor))

    gated = np.maximum(mag - subtract * floor[:, None], 0.0)
    phase = np.divide(z, mag, out=np.zeros_like(z), where=mag > 0)
    _, y = signal.istft(
        gated * phase, window="hann", nperseg=frame, noverlap=noverlap, boundary=True
    )
    y = y[: x.size]
    if y.size < x.size:
        y = np.pad(y, (0, x.size - y.size))
    y = np.clip(y, -1.0, 1.0)
    return replace(clip, samples=y)


def frame_energy(
    clip: AudioClip, frame_length: int = ENERGY_FRAME, hop_length: int = ENERGY_HOP
) -> EnergyProfile:
    """Energy per frame: sum of squared samples over each hop-spaced frame."""
    if frame_length < 1 or hop_length < 1:
        raise EventDetectionError("frame_length and hop_length must be >= 1")
    x = clip.samples
    if x.size < frame_length:
        raise EventDetectionError(
            f"clip has {x.size} samples, shorter than one {frame_length}-sample frame"
        )
    n_frames = 1 + (x.size - frame_length) // hop_length
    idx = np.arange(frame_length)[None, :] + hop_length * np.arange(n_frames)[:, None]
    energies = (x[idx] ** 2).sum(axis=1)
    return EnergyProfile(
        frame_energies=energies,
        frame_length=frame_length,
        hop_length=hop_length,
        mean_energy=float(energies.mean()),
    )


def find_descending_peaks(profile: EnergyProfile) -> list[tuple[int, float]]:
    """Local energy maxima above the mean, sorted by energy descending.

    A peak is strictly greater than its neighbors; plateaus count once, at
    the (floor) midpoint frame. Ties in energy are broken by earlier frame.
    """
    e = profile.frame_energies
    if e.size == 0:
        raise EventDetectionError("empty energy profile")
    peaks, _ = signal.find_peaks(e, plateau_size=1)
    peaks = peaks[e[peaks] > profile.mean_energy]
    order = np.lexsort((peaks, -e[peaks]))
    return [(int(p), float(e[p])) for p in peaks[order]]


def extract_events(
    clip: AudioClip,
    profile: EnergyProfile,
    max_events: int = MAX_EVENTS,
    window_seconds: float = EVENT_WINDOW_SECONDS,
    max_overlap: float = MAX_OVERLAP_FRACTION,
) -> list[AcousticEvent]:
    """Greedy event selection around descending energy peaks.

    Peaks are visited in descending-energy order; each gets a window of
    `window_seconds` centered on the peak frame, clamped into the
    recording (shifted inward when the recording is long enough). A
    candidate is accepted only if its sample overlap with every already
    accepted event is at most `max_overlap` of the window. Returns events
    in acceptance (non-increasing energy) order; may be fewer than
    `max_events`.
    """
    n = clip.samples.size
    window = int(round(window_seconds * clip.sample_rate))
    limit = max_overlap * window
    events: list[AcousticEvent] = []
    for frame_idx, energy in find_descending_peaks(profile):
        center = frame_idx * profile.hop_length + profile.frame_length // 2
        start = center - window // 2
        end = start + window
        if start < 0:
            start, end = 0, min(window, n)
        elif end > n:
            end, start = n, max(0, n - window)
        if all(
            min(end, ev.end_sample) - max(start, ev.start_sample) <= limit for ev in events
        ):
            events.append(
                AcousticEvent(
                    start_sample=start,
                    end_sample=end,
                    peak_energy=energy,
                    samples=clip.samples[start:end].copy(),
                    clamped=(end - start) < window,
                )
            )
            if len(events) >= max_events:
                break
    return events


def detect_events(
    clip: AudioClip,
    highpass_cutoff: float = 300.0,
    apply_denoise: bool = True,
    frame_length: int = ENERGY_FRAME,
    hop_length: int = ENERGY_HOP,
    max_events: int = MAX_EVENTS,
    window_seconds: float = EVENT_WINDOW_SECONDS,
    max_overlap: float = MAX_OVERLAP_FRACTION,
) -> list[AcousticEvent]:
    """Full mining chain: denoise -> high-pass -> frame energy -> windows.

    Event samples are cut from the conditioned (denoised, filtered) signal,
    which is what the spectrogram stage consumes.
    """
    conditioned = denoise(clip) if apply_denoise else clip
    conditioned = highpass(conditioned, highpass_cutoff)
    profile = frame_energy(conditioned, frame_length, hop_length)
    return extract_events(conditioned, profile, max_events, window_seconds, max_overlap)


def events_manifest(clip: AudioClip, events: list[AcousticEvent]) -> dict:
    """JSON-ready per-recording events document."""
    return {
        "source_id": clip.source_id,
        "sample_rate": clip.sample_rate,
        "events": [
            {
                "start_sample": ev.start_sample,
                "end_sample": ev.end_sample,
                "peak_energy": ev.peak_energy,
                "clamped": ev.clamped,
            }
            for ev in events
        ],
    }


def write_events_manifest(clip: AudioClip, events: list[AcousticEvent], path) -> None:
    with open(path, "w") as fh:
        json.dump(events_manifest(clip, events), fh, indent=2)
        fh.write("\n")
