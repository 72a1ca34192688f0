"""Multiple-instance classifier: float64 CNN encoder, adaptive pooling
across instances, BCE training with cosine-annealed AdamW."""

from .autopool import AutopoolError, autopool, autopool_backward
from .loss import bce_loss, bce_loss_backward
from .model import (
    CHECKPOINT_VERSION,
    EncoderConfig,
    InstanceEncoder,
    MILModel,
    ModelError,
    backbone_forward,
    load_checkpoint,
    save_checkpoint,
)
from .optim import AdamW, CosineSchedule
from .trainer import (
    RecordingBag,
    TrainConfig,
    TrainResult,
    TrainingDiverged,
    compute_gradients,
    predict,
    train,
)

__all__ = [
    "AutopoolError",
    "autopool",
    "autopool_backward",
    "bce_loss",
    "bce_loss_backward",
    "CHECKPOINT_VERSION",
    "EncoderConfig",
    "InstanceEncoder",
    "MILModel",
    "ModelError",
    "backbone_forward",
    "load_checkpoint",
    "save_checkpoint",
    "AdamW",
    "CosineSchedule",
    "RecordingBag",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "compute_gradients",
    "predict",
    "train",
]
