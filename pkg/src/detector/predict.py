from typing import List, Tuple

import torch
from pydantic import BaseModel, ConfigDict, model_validator

from src.detector.model import HateModel
from src.encoder.vocab import surface_tokens, tokenize
from src.utils.errors import ValidationError

class Prediction(BaseModel):
    """Verdict plus the per-token tracks used for attribution, trimmed to real tokens."""

    model_config = ConfigDict(frozen=True)

    label: int
    probs: Tuple[float, float]
    tokens: Tuple[str, ...]
    S: Tuple[float, ...]
    A: Tuple[float, ...]
    C: Tuple[float, ...]
    detector_attention: Tuple[float, ...]
    variant: str = "full"

    @model_validator(mode="after")
    def verdict_consistent(self):
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-6:
            raise ValueError(f"probabilities {self.probs} are not a distribution")
        if self.label != max(range(2), key=lambda i: self.probs[i]):
            raise ValueError(f"label {self.label} is not the argmax of {self.probs}")
        lengths = {len(self.tokens), len(self.S), len(self.A), len(self.C), len(self.detector_attention)}
        if len(lengths) != 1:
            raise ValueError("attribution tracks must have one value per token")
        return self

def _track(values: torch.Tensor, length: int) -> Tuple[float, ...]:
    return tuple(float(v) for v in values[:length])

def predict(text: str, model: HateModel) -> Prediction:
    if not text or not text.strip():
        raise ValidationError("cannot predict on empty text")
    seq = tokenize(text, model.vocab, model.config.max_len)
    ids = torch.tensor([seq.ids], dtype=torch.long)
    mask = torch.tensor([seq.mask], dtype=torch.long)

    was_training = model.training
    model.eval()
    with torch.no_grad():
        forward = model(ids, mask)
        cue = forward.cue if forward.cue is not None else model.cue_attention(ids, mask)
        detector_row = model.detector_cls_attention(forward.detector_attentions, mask)
    model.train(was_training)

    length = seq.length
    probs = forward.probs[0].double()
    return Prediction(
        label=int(probs.argmax()),
        probs=(float(probs[0]), float(probs[1])),
        tokens=tuple(surface_tokens(text, model.config.max_len)),
        S=_track(cue.S[0], length),
        A=_track(cue.A[0], length),
        C=_track(forward.gate[0], length),
        detector_attention=_track(detector_row[0], length),
        variant=model.variant,
    )

def predict_many(texts: List[str], model: HateModel) -> List[Prediction]:
    return [predict(text, model) for text in texts]
