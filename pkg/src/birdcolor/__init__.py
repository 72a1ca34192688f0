"""Bird sound classification with frequency-position colorized spectrograms.

The pipeline: decode and resample field recordings, mine the loudest
acoustic event windows, render normalized mel spectrograms, embed each mel
bin's frequency position as a unique RGB hue, and train a per-recording
multiple-instance classifier over the colorized event images.
"""

from .audio import (
    PIPELINE_RATE,
    AudioClip,
    AudioError,
    EmptyAudioError,
    UnreadableFileError,
    UnsupportedCodecError,
    highpass,
    load_wav,
    resample,
)
from .colorize import (
    ColorizedSpectrogram,
    ColorizeError,
    color_matrix,
    colorize,
    export_png,
    grayscale,
    region_color,
)
from .events import (
    AcousticEvent,
    EnergyProfile,
    EventDetectionError,
    denoise,
    detect_events,
    extract_events,
    find_descending_peaks,
    frame_energy,
)
from .manifest import DatasetManifest, ManifestEntry, ManifestError, build_manifest
from .melspec import (
    MelConfig,
    MelSpectrogram,
    SpectrogramError,
    hz_to_mel,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    normalize_log_normalize,
)
from .metrics import EvalBatch, MetricsError, cmap, evaluate, macro_f1, macro_roc_auc
from .synth import ClassSpec, MotifSpec, SynthError, SynthSpec, synthesize_dataset

__version__ = "0.1.0"

__all__ = [
    "PIPELINE_RATE",
    "AudioClip",
    "AudioError",
    "EmptyAudioError",
    "UnreadableFileError",
    "UnsupportedCodecError",
    "highpass",
    "load_wav",
    "resample",
    "ColorizedSpectrogram",
    "ColorizeError",
    "color_matrix",
    "colorize",
    "export_png",
    "grayscale",
    "region_color",
    "AcousticEvent",
    "EnergyProfile",
    "EventDetectionError",
    "denoise",
    "detect_events",
    "extract_events",
    "find_descending_peaks",
    "frame_energy",
    "DatasetManifest",
    "ManifestEntry",
    "ManifestError",
    "build_manifest",
    "MelConfig",
    "MelSpectrogram",
    "SpectrogramError",
    "hz_to_mel",
    "mel_filterbank",
    "mel_spectrogram",
    "mel_to_hz",
    "normalize_log_normalize",
    "EvalBatch",
    "MetricsError",
    "cmap",
    "evaluate",
    "macro_f1",
    "macro_roc_auc",
    "ClassSpec",
    "MotifSpec",
    "SynthError",
    "SynthSpec",
    "synthesize_dataset",
    "__version__",
]
