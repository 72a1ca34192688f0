"""K-fold experiment harness and the colorized-vs-grayscale ablation.

Event mining and spectrogram normalization run once per recording; both
modes consume the same normalized matrices, so the only variable between
the two arms is how those matrices become 3-channel images."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import wilcoxon

from .audio import PIPELINE_RATE, AudioClip, highpass, load_wav, resample
from .colorize import colorize, grayscale
from .events import (
    EVENT_WINDOW_SECONDS,
    MAX_EVENTS,
    denoise,
    extract_events,
    frame_energy,
)
from .manifest import DatasetManifest
from .melspec import MelConfig, MelSpectrogram, mel_spectrogram, normalize_log_normalize
from .metrics import evaluate
from .nn import EncoderConfig, RecordingBag, TrainConfig, predict, train

MODES = ("colorized", "grayscale")


class ExperimentError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    mel: MelConfig = field(default_factory=MelConfig)
    max_instances: int = MAX_EVENTS
    window_seconds: float = EVENT_WINDOW_SECONDS
    widths: tuple[int, ...] = (8, 16, 32)
    threshold: float = 0.5


@dataclass(frozen=True)
class RecordingFeatures:
    source_id: str
    label: str
    fold: int
    instances: tuple[MelSpectrogram, ...]  # normalized, one per mined event


@dataclass
class FoldReport:
    fold: int
    metrics: dict
    n_train: int
    n_val: int


@dataclass
class ExperimentReport:
    mode: str
    folds: list[FoldReport]
    mean: dict

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "folds": [dataclasses.asdict(f) for f in self.folds],
            "mean": self.mean,
        }


def featurize_recording(clip: AudioClip, config: PipelineConfig) -> tuple[MelSpectrogram, ...]:
    """Mined event windows as normalized mel matrices. Clamped or missing
    events are zero-padded to the full window so every instance has the
    same frame count; a recording with no peaks falls back to its opening
    window as a single instance."""
    conditioned = highpass(denoise(clip))
    profile = frame_energy(conditioned)
    events = extract_events(conditioned, profile, config.max_instances, config.window_seconds)
    window = int(round(config.window_seconds * clip.sample_rate))
    chunks = [ev.samples for ev in events]
    if not chunks:
        chunks = [conditioned.samples[:window]]
    specs = []
    for chunk in chunks:
        if chunk.size < window:
            chunk = np.pad(chunk, (0, window - chunk.size))
        specs.append(normalize_log_normalize(mel_spectrogram(chunk, config.mel)))
    return tuple(specs)


def featurize_manifest(manifest: DatasetManifest, root: str | Path,
                       config: PipelineConfig) -> list[RecordingFeatures]:
    rootp = Path(root)
    features = []
    for entry in manifest.entries:
        clip = resample(load_wav(rootp / entry.path), PIPELINE_RATE)
        features.append(
            RecordingFeatures(
                source_id=entry.path,
                label=entry.label,
                fold=entry.fold,
                instances=featurize_recording(clip, config),
            )
        )
    return features


def _bag(feat: RecordingFeatures, label_set: tuple[str, ...], mode: str,
         config: PipelineConfig) -> RecordingBag:
    if mode not in MODES:
        raise ExperimentError(f"unknown mode {mode!r}; expected one of {MODES}")
    paint = colorize if mode == "colorized" else grayscale
    images = [paint(spec).channels for spec in feat.instances]
    bins, frames = images[0].shape[1:]
    stack = np.zeros((config.max_instances, 3, bins, frames))
    for i, img in enumerate(images):
        stack[i] = img
    mask = np.zeros(config.max_instances)
    mask[: len(images)] = 1.0
    labels = np.zeros(len(label_set))
    labels[label_set.index(feat.label)] = 1.0
    return RecordingBag(instances=stack, mask=mask, labels=labels,
                        source_id=feat.source_id)


def run_experiment(manifest: DatasetManifest, root: str | Path, mode: str,
                   config: PipelineConfig, train_config: TrainConfig,
                   features: list[RecordingFeatures] | None = None) -> ExperimentReport:
    """Train on K-1 folds and evaluate on the held-out fold, for every fold.
    Pass precomputed `features` to reuse one featurization across modes."""
    if features is None:
        features = featurize_manifest(manifest, root, config)
    bags = [_bag(f, manifest.label_set, mode, config) for f in features]
    folds = [f.fold for f in features]
    reports = []
    for fold in range(manifest.k_folds):
        train_bags = [b for b, f in zip(bags, folds) if f != fold]
        val_bags = [b for b, f in zip(bags, folds) if f == fold]
        if not val_bags:
            raise ExperimentError(f"fold {fold} has no validation recordings")
        shape = train_bags[0].instances.shape
        encoder_config = EncoderConfig(
            n_classes=len(manifest.label_set),
            input_shape=shape[2:],
            in_channels=shape[1],
            widths=config.widths,
            alpha_init=train_config.alpha_init,
        )
        result = train(train_bags, train_config, encoder_config)
        scores = predict(val_bags, result.model)
        truth = np.stack([b.labels for b in val_bags])
        reports.append(
            FoldReport(
                fold=fold,
                metrics=evaluate(scores, truth, config.threshold),
                n_train=len(train_bags),
                n_val=len(val_bags),
            )
        )
    mean = {
        key: float(np.mean([r.metrics[key] for r in reports]))
        for key in reports[0].metrics
    }
    return ExperimentReport(mode=mode, folds=reports, mean=mean)


@dataclass
class AblationReport:
    seeds: list[int]
    alpha: float
    runs: list[dict]  # one row per (seed, fold, mode)
    mean_colorized_f1: float
    mean_grayscale_f1: float
    p_value: float
    significant: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def ablate(manifest: DatasetManifest, root: str | Path, config: PipelineConfig,
           base_train: TrainConfig, seeds: list[int],
           alpha: float = 0.05) -> AblationReport:
    """Paired comparison over (seed, fold) runs: does colorization beat the
    channel-replicated grayscale baseline on macro-F1? One-tailed Wilcoxon
    signed-rank on the paired scores."""
    if not seeds:
        raise ExperimentError("ablation needs at least one seed")
    features = featurize_manifest(manifest, root, config)
    runs = []
    paired: dict[str, list[float]] = {m: [] for m in MODES}
    for seed in seeds:
        train_config = dataclasses.replace(base_train, seed=seed)
        for mode in MODES:
            report = run_experiment(manifest, root, mode, config, train_config,
                                    features=features)
            for fold_report in report.folds:
                paired[mode].append(fold_report.metrics["macro_f1"])
                runs.append({"seed": seed, "mode": mode, "fold": fold_report.fold,
                             **fold_report.metrics})
    color = np.array(paired["colorized"])
    gray = np.array(paired["grayscale"])
    if np.allclose(color, gray):
        p_value = 1.0  # no paired differences, nothing to test
    else:
        p_value = float(wilcoxon(color, gray, alternative="greater").pvalue)
    return AblationReport(
        seeds=list(seeds),
        alpha=alpha,
        runs=runs,
        mean_colorized_f1=float(color.mean()),
        mean_grayscale_f1=float(gray.mean()),
        p_value=p_value,
        significant=p_value < alpha,
    )
