"""Command-line pipeline driver.

Subcommands cover the full chain: synthesize a dataset, mine events from a
recording, featurize and colorize them, train a fold model, evaluate a
checkpoint, and run the colorization ablation. Every run is deterministic
under --seed; failures print one machine-readable line to stderr:
ERROR {"error": <type>, "message": <text>} and exit nonzero."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .audio import PIPELINE_RATE, load_wav, resample
from .colorize import colorize, export_png, grayscale
from .events import detect_events, write_events_manifest
from .experiment import (
    MODES,
    PipelineConfig,
    ablate,
    featurize_recording,
)
from .manifest import DatasetManifest, build_manifest
from .melspec import MelConfig, save_matrix
from .metrics import evaluate, write_metrics_csv, write_metrics_json
from .nn import EncoderConfig, TrainConfig, load_checkpoint, save_checkpoint, train
from .synth import ClassSpec, MotifSpec, SynthSpec, shared_motif_spec, synthesize_dataset


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a JSON object")
    return doc


def _mel_config(doc: dict) -> MelConfig:
    fields = {f.name for f in dataclasses.fields(MelConfig)}
    return MelConfig(**{k: v for k, v in doc.get("mel", {}).items() if k in fields})


def _pipeline_config(doc: dict) -> PipelineConfig:
    return PipelineConfig(
        mel=_mel_config(doc),
        max_instances=int(doc.get("max_instances", 5)),
        window_seconds=float(doc.get("window_seconds", 5.0)),
        widths=tuple(doc.get("widths", (8, 16, 32))),
        threshold=float(doc.get("threshold", 0.5)),
    )


def _train_config(doc: dict, seed: int) -> TrainConfig:
    fields = {f.name for f in dataclasses.fields(TrainConfig)}
    kwargs = {k: v for k, v in doc.get("train", {}).items() if k in fields}
    kwargs["seed"] = seed
    return TrainConfig(**kwargs)


def _synth_spec(doc: dict, seed: int, recordings: int | None) -> SynthSpec:
    if "classes" not in doc:
        return shared_motif_spec(recordings_per_class=recordings or 40, seed=seed)
    classes = []
    for c in doc["classes"]:
        motif = None
        if c.get("pitch_pattern") is not None:
            motif = MotifSpec(
                pitch_pattern=c["pitch_pattern"],
                repetition=c["repetition"],
                n_notes=int(c.get("n_notes", 8)),
                span_mel=float(c.get("span_mel", 200.0)),
                jitter_mel=float(c.get("jitter_mel", 60.0)),
                motif_seed=int(c.get("motif_seed", 0)),
            )
        classes.append(ClassSpec(name=c["name"], motif=motif,
                                 band_hz=float(c.get("band_hz", 2000.0))))
    return SynthSpec(
        classes=tuple(classes),
        recordings_per_class=recordings or int(doc.get("recordings_per_class", 40)),
        duration_range=tuple(doc.get("duration_range", (30.0, 60.0))),
        noise_level=float(doc.get("noise_level", 0.05)),
        seed=seed,
    )


def _load_clip(path: str):
    return resample(load_wav(path), PIPELINE_RATE)


def _manifest_path(args) -> Path:
    if args.manifest:
        return Path(args.manifest)
    return Path(args.data_root) / "manifest.json"


def cmd_synth(args) -> int:
    doc = _read_config(args.config)
    spec = _synth_spec(doc, args.seed, args.recordings)
    manifest = synthesize_dataset(spec, args.out, k_folds=args.folds)
    manifest.save(Path(args.out) / "manifest.json")
    print(f"wrote {len(manifest.entries)} recordings across "
          f"{len(manifest.label_set)} classes to {args.out}")
    return 0


def cmd_detect(args) -> int:
    clip = _load_clip(args.wav)
    events = detect_events(clip)
    write_events_manifest(clip, events, args.out)
    print(f"{len(events)} events -> {args.out}")
    return 0


def cmd_featurize(args) -> int:
    config = _pipeline_config(_read_config(args.config))
    clip = _load_clip(args.wav)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.wav).stem
    specs = featurize_recording(clip, config)
    for i, spec in enumerate(specs):
        save_matrix(spec.values, out / f"{stem}_event{i}.npy")
    index = {"source": stem, "n_instances": len(specs),
             "shape": list(specs[0].values.shape)}
    (out / f"{stem}_index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    print(f"{len(specs)} instances -> {out}")
    return 0


def cmd_colorize(args) -> int:
    config = _pipeline_config(_read_config(args.config))
    paint = colorize if args.mode == "colorized" else grayscale
    clip = _load_clip(args.wav)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.wav).stem
    specs = featurize_recording(clip, config)
    for i, spec in enumerate(specs):
        image = paint(spec)
        export_png(image, out / f"{stem}_event{i}.png")
        np.save(out / f"{stem}_event{i}_channels.npy", image.channels)
    print(f"{len(specs)} images -> {out}")
    return 0


def cmd_train(args) -> int:
    doc = _read_config(args.config)
    config = _pipeline_config(doc)
    train_config = _train_config(doc, args.seed)
    manifest = DatasetManifest.load(_manifest_path(args))
    from .experiment import _bag, featurize_manifest

    features = featurize_manifest(manifest, args.data_root, config)
    kept = [f for f in features if f.fold != args.fold]
    if not kept:
        raise ValueError(f"no training recordings outside fold {args.fold}")
    bags = [_bag(f, manifest.label_set, args.mode, config) for f in kept]
    shape = bags[0].instances.shape
    encoder_config = EncoderConfig(
        n_classes=len(manifest.label_set),
        input_shape=shape[2:],
        in_channels=shape[1],
        widths=config.widths,
        alpha_init=train_config.alpha_init,
    )
    result = train(bags, train_config, encoder_config)
    save_checkpoint(result.model, args.out, extra={
        "mode": args.mode,
        "fold": args.fold,
        "label_set": list(manifest.label_set),
        "pipeline": {
            "mel": dataclasses.asdict(config.mel),
            "max_instances": config.max_instances,
            "window_seconds": config.window_seconds,
            "widths": list(config.widths),
            "threshold": config.threshold,
        },
        "final_loss": result.loss_history[-1],
    })
    print(f"trained {len(bags)} bags, final loss {result.loss_history[-1]:.6f} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    model = load_checkpoint(args.checkpoint)
    meta = model.metadata or {}
    pipe = meta.get("pipeline", {})
    config = PipelineConfig(
        mel=MelConfig(**pipe.get("mel", {})),
        max_instances=int(pipe.get("max_instances", 5)),
        window_seconds=float(pipe.get("window_seconds", 5.0)),
        widths=tuple(pipe.get("widths", (8, 16, 32))),
        threshold=float(pipe.get("threshold", 0.5)),
    )
    mode = args.mode or meta.get("mode", "colorized")
    fold = args.fold if args.fold is not None else int(meta.get("fold", 0))
    manifest = DatasetManifest.load(_manifest_path(args))
    label_set = tuple(meta.get("label_set", manifest.label_set))
    from .experiment import _bag, featurize_manifest
    from .nn import predict

    features = featurize_manifest(manifest, args.data_root, config)
    val = [f for f in features if f.fold == fold]
    if not val:
        raise ValueError(f"fold {fold} has no validation recordings")
    bags = [_bag(f, label_set, mode, config) for f in val]
    scores = predict(bags, model)
    truth = np.stack([b.labels for b in bags])
    metrics = evaluate(scores, truth, config.threshold)
    rows = [(name, fold, value) for name, value in sorted(metrics.items())]
    write_metrics_csv(f"{args.out_prefix}.csv", rows)
    write_metrics_json(f"{args.out_prefix}.json",
                       {"mode": mode, "fold": fold, "metrics": metrics})
    print(" ".join(f"{k}={v:.4f}" for k, v in sorted(metrics.items())))
    return 0


def cmd_ablate(args) -> int:
    doc = _read_config(args.config)
    config = _pipeline_config(doc)
    base_train = _train_config(doc, args.seed)
    manifest_path = _manifest_path(args)
    if manifest_path.exists():
        manifest = DatasetManifest.load(manifest_path)
    else:
        manifest = build_manifest(args.data_root, k_folds=args.folds, seed=args.seed)
    seeds = [int(s) for s in args.seeds.split(",")]
    report = ablate(manifest, args.data_root, config, base_train, seeds,
                    alpha=args.alpha)
    report.save(args.out)
    rows = [(f"{run['mode']}_macro_f1", run["fold"], run["macro_f1"])
            for run in report.runs]
    write_metrics_csv(f"{Path(args.out).with_suffix('')}.csv", rows)
    verdict = "significant" if report.significant else "not significant"
    print(f"colorized {report.mean_colorized_f1:.4f} vs grayscale "
          f"{report.mean_grayscale_f1:.4f}, p={report.p_value:.5f} ({verdict})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="birdcolor",
                                     description="bird sound classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic motif dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--recordings", type=int, default=None,
                   help="recordings per class (overrides config)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="mine acoustic events from a WAV file")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("featurize", help="event windows to normalized mel matrices")
    p.add_argument("--wav", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("colorize", help="event windows to color images")
    p.add_argument("--wav", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", choices=MODES, default="colorized")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_colorize)

    p = sub.add_parser("train", help="train one fold model")
    p.add_argument("--data-root", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--fold", type=int, default=0, help="held-out fold")
    p.add_argument("--mode", choices=MODES, default="colorized")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on its held-out fold")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data-root", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--fold", type=int, default=None)
    p.add_argument("--mode", choices=MODES, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="colorized vs grayscale comparison")
    p.add_argument("--data-root", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--seed", type=int, default=0, help="manifest/config seed")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # one machine-readable line, nonzero exit
        line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
        print(f"ERROR {line}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
