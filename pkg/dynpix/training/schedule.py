import torch

from core.models.config_models import TrainSchedule


def lr_at(epoch: int, s: TrainSchedule) -> float:
    """lr0 for the first constant_epochs, then linear decay reaching 0 at total_epochs."""
    if not 0 <= epoch <= s.total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {s.total_epochs}]")
    if epoch < s.constant_epochs:
        return s.lr0
    if s.total_epochs == s.constant_epochs:
        return 0.0
    return s.lr0 * ((s.total_epochs - epoch) / (s.total_epochs - s.constant_epochs))


def apply_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    for param_group in optimizer.param_groups:
        param_group["lr"] = lr
