"""Bag-level training: AdamW over BCE(autopool(encoder(instances))).

Runs are deterministic under a fixed seed: parameter init, shuffling, and
batch reduction order all come from one seeded generator and a fixed
traversal order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autopool import autopool, autopool_backward
from .loss import bce_loss, bce_loss_backward
from .model import EncoderConfig, MILModel
from .optim import AdamW, CosineSchedule


class TrainingDiverged(Exception):
    def __init__(self, step: int, loss: float):
        super().__init__(f"non-finite loss {loss} at step {step}")
        self.step = step
        self.loss = loss


@dataclass(frozen=True)
class RecordingBag:
    """Up to `max_instances` colorized instances plus a validity mask and a
    multi-hot label vector. Padded slots hold all-zero images."""

    instances: np.ndarray  # [max_instances, channels, bins, frames]
    mask: np.ndarray  # [max_instances] in {0, 1}
    labels: np.ndarray  # [n_classes] in {0, 1}
    source_id: str = ""

    def __post_init__(self):
        keep = np.asarray(self.mask).astype(bool)
        if self.instances.ndim != 4 or keep.shape != (self.instances.shape[0],):
            raise ValueError("instances must be [n, c, h, w] with one mask flag per slot")
        if not keep.any():
            raise ValueError("a bag needs at least one real instance")
        if keep.size > keep.sum() and np.any(self.instances[~keep]):
            raise ValueError("padded slots must be all-zero images")


@dataclass(frozen=True)
class TrainConfig:
    lr_init: float = 3e-3
    lr_final: float = 1e-6
    batch_size: int = 16
    epochs: int = 20
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-2
    alpha_init: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr_final >= self.lr_init:
            raise ValueError("lr_final must be < lr_init")


@dataclass
class TrainResult:
    model: MILModel
    loss_history: list[float] = field(default_factory=list)  # per-epoch mean
    lr_history: list[float] = field(default_factory=list)  # per-step


def _forward_bags(model: MILModel, bags: list[RecordingBag]):
    """Encode all real instances of all bags in one batch, pool per bag."""
    keeps = [np.asarray(b.mask).astype(bool) for b in bags]
    x = np.concatenate([b.instances[k] for b, k in zip(bags, keeps)], axis=0)
    probs = model.encoder.forward(x)
    counts = [int(k.sum()) for k in keeps]
    bounds = np.cumsum([0] + counts)
    pooled = np.stack(
        [
            autopool(probs[s:e], np.ones(e - s), model.alpha)
            for s, e in zip(bounds[:-1], bounds[1:])
        ]
    )
    return probs, bounds, pooled


def compute_gradients(
    bags: list[RecordingBag] | RecordingBag,
    model: MILModel,
    want_input_grads: bool = False,
):
    """Exact reverse-mode gradients of the batch loss wrt every parameter
    and alpha. Returns (loss, grads dict); with `want_input_grads`, also the
    gradient wrt each bag's instance pixels (zero for padded slots)."""
    if isinstance(bags, RecordingBag):
        bags = [bags]
    targets = np.stack([b.labels for b in bags])
    probs, bounds, pooled = _forward_bags(model, bags)
    loss = bce_loss(pooled, targets)
    if not np.isfinite(loss):
        raise TrainingDiverged(step=-1, loss=loss)

    gpooled = bce_loss_backward(pooled, targets)
    gprobs = np.zeros_like(probs)
    galpha = 0.0
    for i, (s, e) in enumerate(zip(bounds[:-1], bounds[1:])):
        gp, ga = autopool_backward(probs[s:e], np.ones(e - s), model.alpha, gpooled[i])
        gprobs[s:e] = gp
        galpha += ga

    model.encoder.zero_gradients()
    gx = model.encoder.backward(gprobs)
    # Detach from the encoder's accumulation buffers so the returned dict
    # stays valid across subsequent backward passes.
    grads = {name: g.copy() for name, g in model.encoder.gradients().items()}
    grads["alpha"] = np.array([galpha])
    if not want_input_grads:
        return loss, grads

    input_grads = []
    for b, (s, e) in zip(bags, zip(bounds[:-1], bounds[1:])):
        g = np.zeros_like(b.instances)
        g[np.asarray(b.mask).astype(bool)] = gx[s:e]
        input_grads.append(g)
    return loss, grads, input_grads


def train(
    dataset: list[RecordingBag],
    config: TrainConfig,
    encoder_config: EncoderConfig | None = None,
) -> TrainResult:
    """AdamW with cosine-annealed lr from lr_init to lr_final over all steps."""
    if not dataset:
        raise ValueError("dataset must be non-empty")
    n_classes = dataset[0].labels.size
    if any(b.labels.size != n_classes for b in dataset):
        raise ValueError("all bags must share one label dimension")
    if encoder_config is None:
        encoder_config = EncoderConfig(
            n_classes=n_classes,
            input_shape=dataset[0].instances.shape[2:],
            in_channels=dataset[0].instances.shape[1],
            alpha_init=config.alpha_init,
        )

    model = MILModel.init(encoder_config, seed=config.seed)
    rng = np.random.default_rng([config.seed, 0xB1AD])
    steps_per_epoch = int(np.ceil(len(dataset) / config.batch_size))
    schedule = CosineSchedule(config.lr_init, config.lr_final, config.epochs * steps_per_epoch)
    optimizer = AdamW(
        [name for name, _ in model.parameters()],
        schedule,
        beta1=config.beta1,
        beta2=config.beta2,
        eps=config.eps,
        weight_decay=config.weight_decay,
    )
    alpha_arr = np.array([model.alpha])
    result = TrainResult(model=model)

    step = 0
    for _ in range(config.epochs):
        order = rng.permutation(len(dataset))
        epoch_losses = []
        for start in range(0, len(dataset), config.batch_size):
            batch = [dataset[i] for i in order[start : start + config.batch_size]]
            try:
                loss, grads = compute_gradients(batch, model)
            except TrainingDiverged as exc:
                raise TrainingDiverged(step=step, loss=exc.loss) from None
            params = dict(model.encoder.parameters())
            params["alpha"] = alpha_arr
            lr = optimizer.step(params, grads)
            model.alpha = float(alpha_arr[0])
            result.lr_history.append(lr)
            epoch_losses.append(loss)
            step += 1
        result.loss_history.append(float(np.mean(epoch_losses)))
    return result


def predict(bags: list[RecordingBag], model: MILModel) -> np.ndarray:
    """Recording-level probabilities [n_bags, n_classes] via the training
    forward path, no gradient bookkeeping."""
    if not bags:
        return np.zeros((0, model.config.n_classes))
    _, _, pooled = _forward_bags(model, bags)
    return pooled
