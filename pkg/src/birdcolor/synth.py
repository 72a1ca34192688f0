"""Synthetic motif dataset generator.

Each class is a tone-sequence motif (pitch pattern x repetition style) at a
class-specific frequency band over seeded background noise. Motif shapes
are defined in mel units relative to the band center, so two classes built
from the same MotifSpec at different bands produce spectrograms that match
after a vertical shift. That shared-motif mode is the confusable-species
scenario the colorization ablation needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .audio import PIPELINE_RATE
from .melspec import MelConfig, bin_center_frequencies, hz_to_mel, mel_to_hz

PITCH_PATTERNS = ("monotone", "upslurred", "downslurred", "overslurred", "underslurred")
REPETITIONS = ("phrase", "series", "warble", "trill")

# notes per second; warble and trill must exceed 8, phrase and series must not
NOTE_RATES = {"phrase": 4.0, "series": 5.0, "warble": 12.0, "trill": 14.0}

NOTE_DUTY = 0.55  # fraction of the note period that carries tone
RAMP_SECONDS = 0.01


class SynthError(Exception):
    pass


@dataclass(frozen=True)
class MotifSpec:
    """Shape of one burst, independent of where on the frequency axis it is
    placed. Equal MotifSpecs render identical shapes at any band."""

    pitch_pattern: str
    repetition: str
    n_notes: int = 8
    span_mel: float = 200.0  # frequency sweep width within a note
    jitter_mel: float = 60.0  # per-note offset for phrase/warble styles
    motif_seed: int = 0

    def __post_init__(self):
        if self.pitch_pattern not in PITCH_PATTERNS:
            raise SynthError(f"unknown pitch pattern {self.pitch_pattern!r}")
        if self.repetition not in REPETITIONS:
            raise SynthError(f"unknown repetition style {self.repetition!r}")
        if self.n_notes < 1:
            raise SynthError("a motif needs at least one note")

    @property
    def note_rate(self) -> float:
        return NOTE_RATES[self.repetition]


@dataclass(frozen=True)
class ClassSpec:
    name: str
    motif: MotifSpec | None  # None marks a silence class
    band_hz: float = 2000.0

    @property
    def silent(self) -> bool:
        return self.motif is None


@dataclass(frozen=True)
class SynthSpec:
    classes: tuple[ClassSpec, ...]
    recordings_per_class: int = 40
    duration_range: tuple[float, float] = (30.0, 60.0)
    noise_level: float = 0.05
    bursts_range: tuple[int, int] = (6, 9)
    sample_rate: int = PIPELINE_RATE
    f_min: float = 300.0
    f_max: float = 16000.0
    seed: int = 0

    def __post_init__(self):
        if not self.classes:
            raise SynthError("spec needs at least one class")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise SynthError("class names must be unique")
        for c in self.classes:
            if not c.silent and not self.f_min <= c.band_hz <= self.f_max:
                raise SynthError(f"band {c.band_hz} Hz for {c.name!r} is outside "
                                 f"[{self.f_min}, {self.f_max}]")
        if self.recordings_per_class < 1:
            raise SynthError("recordings_per_class must be >= 1")
        if not 0 < self.duration_range[0] <= self.duration_range[1]:
            raise SynthError("invalid duration range")


def _pattern_offsets(pattern: str, u: np.ndarray, span: float) -> np.ndarray:
    """Mel offset trajectory over one note; u runs 0..1 within the note."""
    if pattern == "monotone":
        return np.zeros_like(u)
    if pattern == "upslurred":
        return span * (u - 0.5)
    if pattern == "downslurred":
        return span * (0.5 - u)
    if pattern == "overslurred":
        return 0.5 * span * np.sin(np.pi * u)
    return -0.5 * span * np.sin(np.pi * u)  # underslurred


def _note_jitters(motif: MotifSpec) -> np.ndarray:
    """Phrase and warble notes vary around the center; series and trill
    repeat one note exactly. Drawn from the motif's own seed so the shape
    is part of the motif identity."""
    if motif.repetition in ("phrase", "warble"):
        rng = np.random.default_rng([0x5EED, motif.motif_seed])
        return rng.uniform(-motif.jitter_mel, motif.jitter_mel, motif.n_notes)
    return np.zeros(motif.n_notes)


def render_motif(motif: MotifSpec, band_hz: float, sample_rate: int = PIPELINE_RATE) -> np.ndarray:
    """One burst of the motif as audio. Tones are phase-integrated chirps
    following the mel trajectory, with raised-cosine on/off ramps."""
    period = 1.0 / motif.note_rate
    center_mel = hz_to_mel(band_hz)
    jitters = _note_jitters(motif)
    burst = np.zeros(int(round(motif.n_notes * period * sample_rate)))
    note_len = int(round(NOTE_DUTY * period * sample_rate))
    ramp = min(int(RAMP_SECONDS * sample_rate), note_len // 4)
    envelope = np.ones(note_len)
    if ramp > 0:
        fade = 0.5 - 0.5 * np.cos(np.pi * (np.arange(ramp) + 0.5) / ramp)
        envelope[:ramp] = fade
        envelope[-ramp:] = fade[::-1]
    u = (np.arange(note_len) + 0.5) / note_len
    for k in range(motif.n_notes):
        mel_track = center_mel + jitters[k] + _pattern_offsets(motif.pitch_pattern, u, motif.span_mel)
        phase = 2.0 * np.pi * np.cumsum(mel_to_hz(mel_track)) / sample_rate
        start = int(round(k * period * sample_rate))
        burst[start : start + note_len] += np.sin(phase) * envelope
    return burst


def _burst_onsets(rng: np.random.Generator, n_bursts: int, n_samples: int,
                  burst_len: int, sample_rate: int) -> np.ndarray:
    """Burst start samples with >= 4 s separation where the recording allows,
    so mined windows stay distinct."""
    min_gap = 4 * sample_rate
    latest = max(n_samples - burst_len - 1, 1)
    onsets: list[int] = []
    for _ in range(200):
        if len(onsets) == n_bursts:
            break
        cand = int(rng.integers(0, latest))
        if all(abs(cand - o) >= min_gap for o in onsets):
            onsets.append(cand)
    return np.sort(np.array(onsets, dtype=int))


def synthesize_recording(spec: SynthSpec, class_idx: int, rec_idx: int) -> np.ndarray:
    """Audio for one recording, fully determined by (spec.seed, class_idx,
    rec_idx)."""
    cls = spec.classes[class_idx]
    rng = np.random.default_rng([spec.seed, class_idx, rec_idx])
    duration = rng.uniform(*spec.duration_range)
    n = int(round(duration * spec.sample_rate))
    x = rng.normal(0.0, 1.0, n) * spec.noise_level if spec.noise_level > 0 else np.zeros(n)
    if not cls.silent:
        burst = render_motif(cls.motif, cls.band_hz, spec.sample_rate)
        n_bursts = int(rng.integers(spec.bursts_range[0], spec.bursts_range[1] + 1))
        for onset in _burst_onsets(rng, n_bursts, n, burst.size, spec.sample_rate):
            amp = rng.uniform(0.25, 0.5)
            x[onset : onset + burst.size] += amp * burst[: n - onset]
    peak = np.abs(x).max()
    if peak > 0.95:
        x *= 0.95 / peak
    return x


def planted_burst_recording(seed: int, duration: float = 20.0,
                            burst_at: float = 8.0, band_hz: float = 3000.0,
                            noise_level: float = 0.02,
                            sample_rate: int = PIPELINE_RATE) -> tuple[np.ndarray, int]:
    """Noise plus one dominant burst; returns (samples, burst center sample).
    Fixture for event-mining checks."""
    rng = np.random.default_rng([seed, 0xB0B])
    n = int(round(duration * sample_rate))
    x = rng.normal(0.0, 1.0, n) * noise_level
    motif = MotifSpec("overslurred", "trill", n_notes=12, motif_seed=seed)
    burst = render_motif(motif, band_hz, sample_rate)
    onset = int(round(burst_at * sample_rate))
    x[onset : onset + burst.size] += 0.6 * burst[: n - onset]
    peak = np.abs(x).max()
    if peak > 0.95:
        x *= 0.95 / peak
    return x, onset + burst.size // 2


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    quantized = np.clip(np.round(samples * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, sample_rate, quantized)


def synthesize_dataset(spec: SynthSpec, out_dir: str | Path, k_folds: int = 5):
    """Write one 16-bit WAV per recording under out_dir/<class>/ and return
    the fold-assigned manifest for the directory."""
    from .manifest import build_manifest

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SynthError(f"cannot create output directory {out}: {exc}") from exc
    for class_idx, cls in enumerate(spec.classes):
        class_dir = out / cls.name
        class_dir.mkdir(parents=True, exist_ok=True)
        for rec_idx in range(spec.recordings_per_class):
            samples = synthesize_recording(spec, class_idx, rec_idx)
            write_wav(class_dir / f"{cls.name}_{rec_idx:03d}.wav", samples, spec.sample_rate)
    return build_manifest(out, k_folds=k_folds, seed=spec.seed)


def snap_to_bin_center(hz: float, config: MelConfig) -> float:
    """Nearest mel-bin center frequency. Bands snapped this way keep
    shared-motif pairs exactly one integer bin shift apart."""
    centers = bin_center_frequencies(config)
    return float(centers[np.argmin(np.abs(centers - hz))])


def _row_band(fraction: float, config: MelConfig) -> float:
    """Center frequency of the bin at `fraction` of the bin range."""
    centers = bin_center_frequencies(config)
    return float(centers[round(fraction * (config.total_bins - 1))])


def shared_motif_spec(recordings_per_class: int = 40, seed: int = 0,
                      duration_range: tuple[float, float] = (30.0, 60.0),
                      mel_config: MelConfig | None = None) -> SynthSpec:
    """Four classes in two shared-motif pairs: each pair uses one identical
    motif at two different bands, so grayscale spectrograms of pair members
    differ only by a vertical shift.

    Pair bands sit mirror-symmetric about the middle bin row. A frequency
    shift then never changes a member's distance to the image border, so a
    translation-invariant model gets no positional shortcut; only the
    absolute frequency encoding separates the pair."""
    cfg = mel_config if mel_config is not None else MelConfig()
    # long bursts fill most of a mined 5 s window, so bag instances carry
    # a strong class signature
    trill = MotifSpec("overslurred", "trill", n_notes=35, motif_seed=11)
    series = MotifSpec("upslurred", "series", n_notes=13, motif_seed=23)
    classes = (
        ClassSpec("trill_low", trill, _row_band(0.26, cfg)),
        ClassSpec("trill_high", trill, _row_band(0.74, cfg)),
        ClassSpec("series_low", series, _row_band(0.40, cfg)),
        ClassSpec("series_high", series, _row_band(0.60, cfg)),
    )
    return SynthSpec(classes=classes, recordings_per_class=recordings_per_class,
                     duration_range=duration_range, seed=seed)
