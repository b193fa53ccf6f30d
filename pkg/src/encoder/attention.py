import math
from typing import Tuple

import torch
from torch import nn

from src.utils.errors import ValidationError

def attention_probs(q: torch.Tensor, k: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """softmax(QK^T / sqrt(d_head)) with PAD key columns at exactly zero.

    q and k are [..., k, d_head]; mask is [..., k] over keys and broadcasts
    against the leading dimensions of the scores.
    """
    q = torch.as_tensor(q)
    k = torch.as_tensor(k, dtype=q.dtype)
    mask = torch.as_tensor(mask)
    if q.shape[-2] == 0:
        raise ValidationError("attention over an empty sequence")
    if q.shape != k.shape:
        raise ValidationError(f"query shape {tuple(q.shape)} does not match key shape {tuple(k.shape)}")
    if mask.shape[-1] != q.shape[-2]:
        raise ValidationError(f"mask length {mask.shape[-1]} does not match sequence length {q.shape[-2]}")

    scores = torch.matmul(q, k.transpose(-2, -1)) / math.sqrt(q.shape[-1])
    keep = mask.bool().unsqueeze(-2)
    scores = scores.masked_fill(~keep, float("-inf"))
    return torch.softmax(scores, dim=-1)

class MultiHeadSelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int, d_head: int, dropout: float):
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_head
        self.query = nn.Linear(d_model, n_heads * d_head)
        self.key = nn.Linear(d_model, n_heads * d_head)
        self.value = nn.Linear(d_model, n_heads * d_head)
        self.output = nn.Linear(n_heads * d_head, d_model)
        self.dropout = nn.Dropout(dropout)

    def _split_heads(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.n_heads, self.d_head).transpose(1, 2)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        # x: [batch, k, d_model], mask: [batch, k]
        q = self._split_heads(self.query(x))
        k = self._split_heads(self.key(x))
        v = self._split_heads(self.value(x))

        probs = attention_probs(q, k, mask.unsqueeze(1))
        context = torch.matmul(self.dropout(probs), v)

        batch, _, length, _ = context.shape
        context = context.transpose(1, 2).reshape(batch, length, self.n_heads * self.d_head)
        # captured probabilities are pre-dropout so they stay row-stochastic
        return self.output(context), probs
