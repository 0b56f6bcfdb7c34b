"""Loss, learning-rate schedule, batching and the training loop."""

from mslesion.training.batches import make_batches
from mslesion.training.loss import dice_loss
from mslesion.training.schedule import lr_at
from mslesion.training.trainer import TrainResult, train

__all__ = ["TrainResult", "dice_loss", "lr_at", "make_batches", "train"]
