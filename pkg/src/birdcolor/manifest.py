"""Dataset manifest: recording paths, primary labels, stratified K-fold
assignment. Paths are stored relative to the dataset root so a manifest
stays valid when the tree moves."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    path: str  # relative to the dataset root, posix separators
    label: str
    fold: int


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    label_set: tuple[str, ...]
    k_folds: int

    def __post_init__(self):
        labels = set(self.label_set)
        for e in self.entries:
            if e.label not in labels:
                raise ManifestError(f"entry label {e.label!r} not in label set")
            if not 0 <= e.fold < self.k_folds:
                raise ManifestError(f"fold {e.fold} outside [0, {self.k_folds})")

    def label_index(self, label: str) -> int:
        return self.label_set.index(label)

    def fold_split(self, fold: int) -> tuple[list[ManifestEntry], list[ManifestEntry]]:
        """(train entries, validation entries) for one held-out fold."""
        if not 0 <= fold < self.k_folds:
            raise ManifestError(f"fold {fold} outside [0, {self.k_folds})")
        train = [e for e in self.entries if e.fold != fold]
        val = [e for e in self.entries if e.fold == fold]
        return train, val

    def save(self, path: str | Path) -> None:
        doc = {
            "k_folds": self.k_folds,
            "label_set": list(self.label_set),
            "entries": [
                {"path": e.path, "label": e.label, "fold": e.fold} for e in self.entries
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
        entries = tuple(
            ManifestEntry(path=e["path"], label=e["label"], fold=int(e["fold"]))
            for e in doc["entries"]
        )
        return cls(entries=entries, label_set=tuple(doc["label_set"]),
                   k_folds=int(doc["k_folds"]))


def build_manifest(root: str | Path, k_folds: int, seed: int) -> DatasetManifest:
    """Scan root/<label>/*.wav and assign stratified folds: per class the
    file list is seeded-shuffled and dealt round-robin, so fold sizes within
    a class differ by at most one."""
    rootp = Path(root)
    if k_folds < 2:
        raise ManifestError("k_folds must be >= 2")
    if not rootp.is_dir():
        raise ManifestError(f"dataset root {rootp} is not a directory")
    class_dirs = sorted(p for p in rootp.iterdir() if p.is_dir())
    if not class_dirs:
        raise ManifestError(f"no class directories under {rootp}")
    rng = np.random.default_rng([seed, 0xF01D])
    entries: list[ManifestEntry] = []
    for class_dir in class_dirs:
        files = sorted(class_dir.glob("*.wav"))
        if not files:
            raise ManifestError(f"class directory {class_dir} has no WAV files")
        order = rng.permutation(len(files))
        for position, file_idx in enumerate(order):
            rel = files[file_idx].relative_to(rootp).as_posix()
            entries.append(ManifestEntry(path=rel, label=class_dir.name,
                                         fold=position % k_folds))
    entries.sort(key=lambda e: e.path)
    return DatasetManifest(entries=tuple(entries),
                           label_set=tuple(d.name for d in class_dirs),
                           k_folds=k_folds)
