from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import torch

from src.cues.selector import SelectorHead
from src.encoder.model import EncoderStack
from src.encoder.vocab import Vocabulary, surface_tokens, tokenize
from src.utils.errors import ContractError, ValidationError
from src.utils.hashing import write_json

@dataclass
class CueAttention:
    """Sentiment (S) and aggression (A) attention at the CLS row; [k] or [batch, k]."""

    S: torch.Tensor
    A: torch.Tensor

def extract_cue_attention(
    attn: torch.Tensor,
    cls_index: int,
    mask: torch.Tensor,
    layer: int = -1
) -> torch.Tensor:
    """Head-averaged attention of block `layer`, read at row `cls_index`.

    `attn` is [n_layers, n_heads, k, k] or batched [batch, n_layers, n_heads, k, k].
    """
    attn = torch.as_tensor(attn)
    mask = torch.as_tensor(mask)
    k = attn.shape[-1]
    if not 0 <= cls_index < k:
        raise ValidationError(f"cls_index {cls_index} outside [0, {k})")
    if mask.shape[-1] != k:
        raise ValidationError(f"mask length {mask.shape[-1]} does not match attention size {k}")
    n_layers = attn.shape[-4]
    if not -n_layers <= layer < n_layers:
        raise ValidationError(f"layer {layer} outside a {n_layers}-block stack")

    block = attn[..., layer, :, :, :]
    return block.mean(dim=-3)[..., cls_index, :]

def freeze(state: EncoderStack) -> EncoderStack:
    return state.set_frozen(True)

def require_frozen(*states: EncoderStack) -> None:
    for state in states:
        if not state.frozen:
            raise ContractError(f"cue module {state.task or 'unnamed'} must be frozen before use")

def cue_vectors(
    ids: torch.Tensor,
    mask: torch.Tensor,
    sentiment_state: EncoderStack,
    aggression_state: EncoderStack,
    layer: int = -1
) -> CueAttention:
    require_frozen(sentiment_state, aggression_state)
    with torch.no_grad():
        s = extract_cue_attention(sentiment_state(ids, mask).attentions, 0, mask, layer)
        a = extract_cue_attention(aggression_state(ids, mask).attentions, 0, mask, layer)
    return CueAttention(S=s, A=a)

def fuse_cues(cue: CueAttention, params: SelectorHead, mask: torch.Tensor) -> torch.Tensor:
    mask = torch.as_tensor(mask)
    if cue.S.shape[-1] != mask.shape[-1] or cue.A.shape[-1] != mask.shape[-1]:
        raise ValidationError(
            f"S ({cue.S.shape[-1]}), A ({cue.A.shape[-1]}) and mask ({mask.shape[-1]}) lengths differ"
        )
    return params(cue.S, cue.A, mask)

def cue_guidance(
    text: str,
    sentiment_state: EncoderStack,
    aggression_state: EncoderStack,
    selector: SelectorHead,
    vocab: Vocabulary,
    layer: int = -1
) -> Tuple[CueAttention, torch.Tensor]:
    require_frozen(sentiment_state, aggression_state)
    seq = tokenize(text, vocab, sentiment_state.config.max_len)
    ids = torch.tensor([seq.ids], dtype=torch.long)
    mask = torch.tensor([seq.mask], dtype=torch.long)
    cue = cue_vectors(ids, mask, sentiment_state, aggression_state, layer)
    with torch.no_grad():
        fusion = fuse_cues(cue, selector, mask)
    return CueAttention(S=cue.S[0], A=cue.A[0]), fusion[0]

def guidance_document(tokens: Sequence[str], cue: CueAttention, fusion: torch.Tensor) -> Dict[str, Any]:
    """JSON-ready {tokens, S, A, C}, trimmed to the displayed tokens."""
    n = len(tokens)
    return {
        "tokens": list(tokens),
        "S": [float(v) for v in cue.S[:n]],
        "A": [float(v) for v in cue.A[:n]],
        "C": [float(v) for v in fusion[:n]],
    }

def export_guidance(
    text: str,
    sentiment_state: EncoderStack,
    aggression_state: EncoderStack,
    selector: SelectorHead,
    vocab: Vocabulary,
    path: Optional[str] = None
) -> Dict[str, Any]:
    cue, fusion = cue_guidance(text, sentiment_state, aggression_state, selector, vocab)
    document = guidance_document(surface_tokens(text, sentiment_state.config.max_len), cue, fusion)
    if path is not None:
        write_json(document, Path(path))
    return document
