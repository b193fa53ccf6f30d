from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import torch
from torch import nn

from src.encoder.attention import MultiHeadSelfAttention
from src.encoder.config import EncoderConfig
from src.encoder.vocab import TokenSequence
from src.utils.errors import ConfigurationError, ValidationError

LAYER_NORM_EPS = 1e-5
INIT_STD = 0.02

@dataclass
class EncoderOutput:
    # one [batch, k, d_model] tensor per block
    hidden_states: Tuple[torch.Tensor, ...]
    # [batch, n_layers, n_heads, k, k]
    attentions: torch.Tensor
    logits: Optional[torch.Tensor] = None

    @property
    def last_hidden(self) -> torch.Tensor:
        return self.hidden_states[-1]

class EncoderBlock(nn.Module):
    """Post-norm transformer block that also hands back its attention probabilities."""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.attention = MultiHeadSelfAttention(config.d_model, config.n_heads, config.d_head, config.dropout)
        self.attention_norm = nn.LayerNorm(config.d_model, eps=LAYER_NORM_EPS)
        self.feed_forward = nn.Sequential(
            nn.Linear(config.d_model, config.d_ff),
            nn.GELU(),
            nn.Linear(config.d_ff, config.d_model),
        )
        self.output_norm = nn.LayerNorm(config.d_model, eps=LAYER_NORM_EPS)
        self.dropout = nn.Dropout(config.dropout)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        attended, probs = self.attention(x, mask)
        x = self.attention_norm(x + self.dropout(attended))
        x = self.output_norm(x + self.dropout(self.feed_forward(x)))
        return x, probs

class TaskHead(nn.Module):
    def __init__(self, d_model: int, num_labels: int, dropout: float):
        super().__init__()
        self.dense = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)
        self.out_proj = nn.Linear(d_model, num_labels)

    def forward(self, cls_hidden: torch.Tensor) -> torch.Tensor:
        x = torch.tanh(self.dense(self.dropout(cls_hidden)))
        return self.out_proj(self.dropout(x))

class EncoderStack(nn.Module):
    """Token and learned position embeddings followed by `n_layers` blocks.

    A stack may carry a task head (cue classifiers do, the hate detector's
    representation stack does not). Once frozen, the stack ignores `train()`
    and its parameters no longer require gradients.
    """

    def __init__(self, config: EncoderConfig, vocab_size: int, num_labels: Optional[int] = None, task: Optional[str] = None):
        super().__init__()
        if vocab_size <= 0:
            raise ConfigurationError(f"vocab_size must be positive, got {vocab_size}")
        self.config = config
        self.vocab_size = vocab_size
        self.num_labels = num_labels
        self.task = task
        self.frozen = False

        self.token_embedding = nn.Embedding(vocab_size, config.d_model)
        self.position_embedding = nn.Embedding(config.max_len, config.d_model)
        self.embedding_norm = nn.LayerNorm(config.d_model, eps=LAYER_NORM_EPS)
        self.embedding_dropout = nn.Dropout(config.dropout)
        self.blocks = nn.ModuleList(EncoderBlock(config) for _ in range(config.n_layers))
        self.head = TaskHead(config.d_model, num_labels, config.dropout) if num_labels else None

        self.apply(self._init_weights)

    @staticmethod
    def _init_weights(module: nn.Module) -> None:
        if isinstance(module, (nn.Linear, nn.Embedding)):
            nn.init.normal_(module.weight, mean=0.0, std=INIT_STD)
        if isinstance(module, nn.Linear) and module.bias is not None:
            nn.init.zeros_(module.bias)

    def train(self, mode: bool = True) -> "EncoderStack":
        return super().train(mode and not self.frozen)

    def set_frozen(self, frozen: bool = True) -> "EncoderStack":
        self.frozen = frozen
        for parameter in self.parameters():
            parameter.requires_grad_(not frozen)
        if frozen:
            self.eval()
        return self

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> EncoderOutput:
        if ids.dim() != 2 or ids.shape != mask.shape:
            raise ValidationError(f"ids {tuple(ids.shape)} and mask {tuple(mask.shape)} must be matching [batch, k]")
        length = ids.shape[1]
        if length > self.config.max_len:
            raise ValidationError(f"sequence length {length} exceeds max_len {self.config.max_len}")

        positions = torch.arange(length, device=ids.device)
        x = self.token_embedding(ids) + self.position_embedding(positions).unsqueeze(0)
        x = self.embedding_dropout(self.embedding_norm(x))

        hidden_states = []
        attentions = []
        for block in self.blocks:
            x, probs = block(x, mask)
            hidden_states.append(x)
            attentions.append(probs)

        logits = self.head(x[:, 0]) if self.head is not None else None
        return EncoderOutput(hidden_states=tuple(hidden_states), attentions=torch.stack(attentions, dim=1), logits=logits)

def validate_state(state: EncoderStack, config: EncoderConfig) -> None:
    """Raises ConfigurationError when the stack's parameter shapes disagree with `config`."""
    problems = []
    if state.token_embedding.embedding_dim != config.d_model:
        problems.append(f"embedding width {state.token_embedding.embedding_dim} != d_model {config.d_model}")
    if state.position_embedding.num_embeddings != config.max_len:
        problems.append(f"position table {state.position_embedding.num_embeddings} != max_len {config.max_len}")
    if len(state.blocks) != config.n_layers:
        problems.append(f"{len(state.blocks)} blocks != n_layers {config.n_layers}")
    for i, block in enumerate(state.blocks):
        attention = block.attention
        if (attention.n_heads, attention.d_head) != (config.n_heads, config.d_head):
            problems.append(f"block {i} has {attention.n_heads}x{attention.d_head} heads")
        if block.feed_forward[0].out_features != config.d_ff:
            problems.append(f"block {i} feed-forward width {block.feed_forward[0].out_features} != d_ff {config.d_ff}")
    if problems:
        raise ConfigurationError("Encoder state does not match config: " + "; ".join(problems))

def encode(
    seq: TokenSequence,
    state: EncoderStack,
    config: EncoderConfig,
    train_mode: bool = False
) -> Tuple[List[torch.Tensor], torch.Tensor]:
    """Single-sequence forward pass: per-layer [k, d_model] hidden states and the
    [n_layers, n_heads, k, k] attention tensor."""
    validate_state(state, config)
    if len(seq) > config.max_len:
        raise ValidationError(f"sequence length {len(seq)} exceeds max_len {config.max_len}")

    was_training = state.training
    state.train(train_mode)
    try:
        ids = torch.tensor([seq.ids], dtype=torch.long)
        mask = torch.tensor([seq.mask], dtype=torch.long)
        with torch.set_grad_enabled(train_mode and torch.is_grad_enabled()):
            output = state(ids, mask)
    finally:
        state.train(was_training)
    return [h[0] for h in output.hidden_states], output.attentions[0]

def parameter_snapshot(module: nn.Module) -> Dict[str, torch.Tensor]:
    return {name: p.detach().clone() for name, p in module.named_parameters()}

def snapshots_equal(before: Dict[str, torch.Tensor], after: Dict[str, torch.Tensor]) -> bool:
    if before.keys() != after.keys():
        return False
    return all(torch.equal(before[name], after[name]) for name in before)

def changed_parameters(before: Dict[str, torch.Tensor], after: Dict[str, torch.Tensor]) -> List[str]:
    return sorted(name for name in before if not torch.equal(before[name], after[name]))
