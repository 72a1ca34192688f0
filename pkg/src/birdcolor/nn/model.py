"""Instance encoder and the bag-level classifier around it.

The encoder is a compact CNN: three conv blocks (3x3 kernels, GELU,
stride-2 average pooling) at widths 8/16/32, global average pooling, and a
linear head with per-class sigmoids. It sits behind a narrow interface
(`forward`/`backward`/`parameters`) so a larger encoder can be swapped in
without touching pooling or training.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autopool as ap
from .layers import AvgPool2, Conv2d, Gelu, GlobalAvgPool, Linear, sigmoid

CHECKPOINT_VERSION = 1


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    n_classes: int
    input_shape: tuple[int, int]  # (mel bins, frames)
    in_channels: int = 3
    widths: tuple[int, ...] = (8, 16, 32)
    alpha_init: float = 1.0

    def __post_init__(self):
        if self.n_classes < 1:
            raise ModelError("n_classes must be >= 1")
        h, w = self.input_shape
        if min(h, w) < 2 ** len(self.widths):
            raise ModelError(
                f"input {self.input_shape} too small for {len(self.widths)} pooling stages"
            )


class InstanceEncoder:
    """Per-instance class probabilities p(y|x), shape [batch, n_classes]."""

    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        self.config = config
        self.convs: list[Conv2d] = []
        self.acts: list[Gelu] = []
        self.pools: list[AvgPool2] = []
        c_in = config.in_channels
        for width in config.widths:
            self.convs.append(Conv2d(c_in, width, rng))
            self.acts.append(Gelu())
            self.pools.append(AvgPool2())
            c_in = width
        self.gap = GlobalAvgPool()
        self.head = Linear(c_in, config.n_classes, rng)
        self._probs = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[1:] != (self.config.in_channels, *self.config.input_shape):
            raise ModelError(
                f"expected input [batch, {self.config.in_channels}, "
                f"{self.config.input_shape[0]}, {self.config.input_shape[1]}], got {x.shape}"
            )
        h = x
        for conv, act, pool in zip(self.convs, self.acts, self.pools):
            h = pool.forward(act.forward(conv.forward(h)))
        logits = self.head.forward(self.gap.forward(h))
        self._probs = sigmoid(logits)
        return self._probs

    def backward(self, gprobs: np.ndarray) -> np.ndarray:
        glogits = gprobs * self._probs * (1.0 - self._probs)
        g = self.gap.backward(self.head.backward(glogits))
        for conv, act, pool in zip(reversed(self.convs), reversed(self.acts), reversed(self.pools)):
            g = conv.backward(act.backward(pool.backward(g)))
        return g

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, conv in enumerate(self.convs):
            out.append((f"conv{i}.w", conv.w))
            out.append((f"conv{i}.b", conv.b))
        out.append(("head.w", self.head.w))
        out.append(("head.b", self.head.b))
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out = {}
        for i, conv in enumerate(self.convs):
            out[f"conv{i}.w"] = conv.gw
            out[f"conv{i}.b"] = conv.gb
        out["head.w"] = self.head.gw
        out["head.b"] = self.head.gb
        return out

    def zero_gradients(self) -> None:
        for conv in self.convs:
            conv.gw[...] = 0.0
            conv.gb[...] = 0.0
        self.head.gw[...] = 0.0
        self.head.gb[...] = 0.0

    def set_parameter(self, name: str, value: np.ndarray) -> None:
        target = dict(self.parameters())[name]
        target[...] = value


@dataclass
class MILModel:
    """Encoder plus the shared pooling sharpness alpha (one value for all
    classes, trained jointly with the encoder weights)."""

    encoder: InstanceEncoder
    alpha: float
    train_seed: int = 0
    metadata: dict = field(default_factory=dict)

    @classmethod
    def init(cls, config: EncoderConfig, seed: int) -> "MILModel":
        rng = np.random.default_rng(seed)
        return cls(encoder=InstanceEncoder(config, rng), alpha=config.alpha_init, train_seed=seed)

    @property
    def config(self) -> EncoderConfig:
        return self.encoder.config

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        return self.encoder.parameters() + [("alpha", np.atleast_1d(np.float64(self.alpha)))]

    def instance_probabilities(self, instances: np.ndarray) -> np.ndarray:
        return self.encoder.forward(instances)

    def forward_bag(self, instances: np.ndarray, mask: np.ndarray) -> np.ndarray:
        keep = np.asarray(mask).astype(bool)
        probs = self.encoder.forward(instances[keep])
        return ap.autopool(probs, np.ones(probs.shape[0]), self.alpha)


def backbone_forward(instance: np.ndarray, model: MILModel) -> np.ndarray:
    """Class probabilities for one [channels, bins, frames] instance."""
    return model.encoder.forward(instance[None])[0]


def save_checkpoint(model: MILModel, path, extra: dict | None = None) -> None:
    """NPZ container with all weights, alpha, config, and seed; loading
    reproduces predictions bit-for-bit."""
    cfg = model.config
    arrays = {f"param/{name}": value for name, value in model.encoder.parameters()}
    arrays["alpha"] = np.float64(model.alpha)
    arrays["version"] = np.int64(CHECKPOINT_VERSION)
    arrays["n_classes"] = np.int64(cfg.n_classes)
    arrays["input_shape"] = np.asarray(cfg.input_shape, dtype=np.int64)
    arrays["in_channels"] = np.int64(cfg.in_channels)
    arrays["widths"] = np.asarray(cfg.widths, dtype=np.int64)
    arrays["alpha_init"] = np.float64(cfg.alpha_init)
    arrays["train_seed"] = np.int64(model.train_seed)
    if extra:
        import json

        arrays["extra_json"] = np.frombuffer(json.dumps(extra, sort_keys=True).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_checkpoint(path) -> MILModel:
    with np.load(path) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ModelError(f"unsupported checkpoint version {version}")
        cfg = EncoderConfig(
            n_classes=int(data["n_classes"]),
            input_shape=tuple(int(v) for v in data["input_shape"]),
            in_channels=int(data["in_channels"]),
            widths=tuple(int(v) for v in data["widths"]),
            alpha_init=float(data["alpha_init"]),
        )
        model = MILModel.init(cfg, seed=int(data["train_seed"]))
        for name, _ in model.encoder.parameters():
            model.encoder.set_parameter(name, data[f"param/{name}"])
        model.alpha = float(data["alpha"])
        if "extra_json" in data:
            import json

            model.metadata = json.loads(bytes(data["extra_json"]).decode())
    return model
