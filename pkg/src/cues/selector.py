from typing import Literal, Optional

import torch
from torch import nn

from src.utils.errors import ConfigurationError, ValidationError

SelectorMode = Literal["per_position", "concatenated"]

class SelectorHead(nn.Module):
    """Maps the cue vectors S and A to the gate C.

    `per_position` applies one shared 2 -> hidden -> 1 network to every (s_t, a_t)
    pair. `concatenated` reads the whole [S ; A] vector and emits all k gates at
    once, which ties the head to a single sequence length.
    """

    def __init__(self, hidden: int = 16, mode: SelectorMode = "per_position", seq_len: Optional[int] = None):
        super().__init__()
        if hidden <= 0:
            raise ConfigurationError(f"selector hidden width must be positive, got {hidden}")
        self.mode = mode
        self.hidden = hidden
        self.seq_len = seq_len
        if mode == "per_position":
            self.fc1 = nn.Linear(2, hidden)
            self.fc2 = nn.Linear(hidden, 1)
        elif mode == "concatenated":
            if not seq_len:
                raise ConfigurationError("concatenated selector needs a fixed seq_len")
            self.fc1 = nn.Linear(2 * seq_len, hidden)
            self.fc2 = nn.Linear(hidden, seq_len)
        else:
            raise ConfigurationError(f"Unknown selector mode: {mode}")

    def forward(self, s: torch.Tensor, a: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        if s.shape != a.shape or s.shape != mask.shape:
            raise ValidationError(
                f"S {tuple(s.shape)}, A {tuple(a.shape)} and mask {tuple(mask.shape)} must share one shape"
            )
        if self.mode == "per_position":
            pairs = torch.stack([s, a], dim=-1)
            gate = torch.sigmoid(self.fc2(torch.tanh(self.fc1(pairs)))).squeeze(-1)
        else:
            if s.shape[-1] != self.seq_len:
                raise ValidationError(f"concatenated selector expects length {self.seq_len}, got {s.shape[-1]}")
            gate = torch.sigmoid(self.fc2(torch.tanh(self.fc1(torch.cat([s, a], dim=-1)))))
        return gate * mask.to(gate.dtype)
