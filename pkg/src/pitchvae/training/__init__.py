from .losses import loss_vae, loss_dis, loss_dec, feature_matching
from .adam import adam_step
from .loop import TrainConfig, StageState, train_two_stage, NumericalError

__all__ = [
    "loss_vae",
    "loss_dis",
    "loss_dec",
    "feature_matching",
    "adam_step",
    "TrainConfig",
    "StageState",
    "train_two_stage",
    "NumericalError",
]
