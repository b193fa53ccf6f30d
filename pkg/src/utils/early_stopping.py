import copy
from typing import Dict, Optional

import torch
from torch import nn

class EarlyStopping:
    """Tracks a validation metric that should increase and keeps the best weights.

    Args:
        patience: epochs without improvement before `should_stop` flips.
        min_delta: smallest increase that counts as an improvement.
    """

    def __init__(self, patience: int = 3, min_delta: float = 0.0):
        self.patience = patience
        self.min_delta = min_delta
        self.counter = 0
        self.best_score: Optional[float] = None
        self.best_epoch: Optional[int] = None
        self.best_state: Optional[Dict[str, torch.Tensor]] = None
        self.should_stop = False

    def step(self, score: float, model: nn.Module, epoch: int) -> bool:
        """Returns True when `score` is a new best."""
        if self.best_score is None or score > self.best_score + self.min_delta:
            self.best_score = score
            self.best_epoch = epoch
            self.best_state = copy.deepcopy(model.state_dict())
            self.counter = 0
            return True
        self.counter += 1
        if self.counter >= self.patience:
            self.should_stop = True
        return False

    def restore_best_weights(self, model: nn.Module) -> None:
        if self.best_state is not None:
            model.load_state_dict(self.best_state)
