from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Sequence, Union

import torch
from pydantic import BaseModel, ConfigDict, Field
from torch import nn

from src.cues.extractor import CueAttention, cue_vectors, extract_cue_attention, require_frozen
from src.cues.selector import SelectorHead, SelectorMode
from src.data.schemas import ClassWeights
from src.encoder.config import EncoderConfig
from src.encoder.model import EncoderStack
from src.encoder.vocab import Vocabulary, batch_tokenize
from src.utils.errors import ConfigurationError, ValidationError

Variant = Literal["full", "sentiment_only", "aggression_only", "base"]
Readout = Literal["cls", "gated_mean"]
VARIANTS = ("full", "sentiment_only", "aggression_only", "base")
LOG_EPS = 1e-12
NUM_CLASSES = 2
CLS_INDEX = 0

class ModelOptions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    variant: Variant = "full"
    readout: Readout = "cls"
    selector_hidden: int = Field(default=16, gt=0)
    selector_mode: SelectorMode = "per_position"
    classifier_hidden: Optional[int] = Field(default=None, gt=0)
    cue_layer: int = -1

class ClassificationHead(nn.Module):
    """d -> hidden -> 2 with a tanh hidden layer."""

    def __init__(self, d_model: int, hidden: Optional[int] = None, dropout: float = 0.0):
        super().__init__()
        hidden = hidden or max(1, d_model // 2)
        self.dense = nn.Linear(d_model, hidden)
        self.dropout = nn.Dropout(dropout)
        self.out_proj = nn.Linear(hidden, NUM_CLASSES)

    @property
    def in_features(self) -> int:
        return self.dense.in_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.out_proj(self.dropout(torch.tanh(self.dense(x))))

def fuse_representation(R: torch.Tensor, C: torch.Tensor) -> torch.Tensor:
    """F = R * C with C broadcast across the feature dimension."""
    R = torch.as_tensor(R)
    C = torch.as_tensor(C, dtype=R.dtype)
    if R.shape[:-1] != C.shape:
        raise ValidationError(f"representation {tuple(R.shape)} and gate {tuple(C.shape)} lengths differ")
    return R * C.unsqueeze(-1)

def classifier_logits(F: torch.Tensor, cls_index: int, classifier: ClassificationHead) -> torch.Tensor:
    F = torch.as_tensor(F)
    if F.shape[-1] != classifier.in_features:
        raise ConfigurationError(f"classifier expects width {classifier.in_features}, got {F.shape[-1]}")
    if not -F.shape[-2] <= cls_index < F.shape[-2]:
        raise ValidationError(f"cls_index {cls_index} outside a length-{F.shape[-2]} sequence")
    return classifier(F[..., cls_index, :])

def classify(F: torch.Tensor, cls_index: int, classifier: ClassificationHead) -> torch.Tensor:
    return torch.softmax(classifier_logits(F, cls_index, classifier), dim=-1)

def balanced_cross_entropy(
    probs: torch.Tensor,
    y: Union[torch.Tensor, Sequence[int], int],
    weights: Union[ClassWeights, torch.Tensor, Sequence[float]]
) -> torch.Tensor:
    """Mean over examples of w_y * -log(max(p_y, eps)). Accepts one example or a batch."""
    probs = torch.as_tensor(probs)
    y = torch.as_tensor(y, dtype=torch.long)
    if isinstance(weights, ClassWeights):
        weights = weights.as_list()
    weights = torch.as_tensor(weights, dtype=probs.dtype)
    if probs.dim() == 1:
        probs, y = probs.unsqueeze(0), y.reshape(1)
    picked = probs.gather(1, y.unsqueeze(1)).squeeze(1)
    return (weights[y] * -torch.log(picked.clamp_min(LOG_EPS))).mean()

@dataclass
class HateForward:
    logits: torch.Tensor
    probs: torch.Tensor
    gate: torch.Tensor
    cue: Optional[CueAttention]
    detector_attentions: torch.Tensor

class HateModel(nn.Module):
    """Detector stack gated token-wise by the cue selector, classified by f_phi.

    The sentiment and aggression stacks must arrive frozen. `variant` decides the
    cue path: full fuses S and A, the single-cue variants zero the other vector,
    and base gates with the padding mask, so F equals R on every real token.
    """

    def __init__(
        self,
        detector: EncoderStack,
        sentiment: EncoderStack,
        aggression: EncoderStack,
        vocab: Vocabulary,
        options: ModelOptions = ModelOptions()
    ):
        super().__init__()
        require_frozen(sentiment, aggression)
        config = detector.config
        for cue_state in (sentiment, aggression):
            if cue_state.config.max_len != config.max_len:
                raise ConfigurationError(
                    f"cue module {cue_state.task} max_len {cue_state.config.max_len} != detector max_len {config.max_len}"
                )
            if cue_state.vocab_size != detector.vocab_size:
                raise ConfigurationError("cue modules and detector must share one vocabulary")
        if detector.vocab_size != len(vocab):
            raise ConfigurationError(f"detector vocab size {detector.vocab_size} != vocabulary size {len(vocab)}")

        self.detector = detector
        self.sentiment = sentiment
        self.aggression = aggression
        self.vocab = vocab
        self.options = options
        self.selector = SelectorHead(options.selector_hidden, options.selector_mode, seq_len=config.max_len)
        self.classifier = ClassificationHead(config.d_model, options.classifier_hidden, config.dropout)

    @property
    def config(self) -> EncoderConfig:
        return self.detector.config

    @property
    def variant(self) -> str:
        return self.options.variant

    def trainable_modules(self) -> List[nn.Module]:
        return [self.detector, self.selector, self.classifier]

    def trainable_parameters(self) -> Iterable[nn.Parameter]:
        for module in self.trainable_modules():
            yield from module.parameters()

    def set_dropout(self, p: float) -> None:
        for module in self.trainable_modules():
            for child in module.modules():
                if isinstance(child, nn.Dropout):
                    child.p = p

    def tokenize(self, texts: Sequence[str]):
        return batch_tokenize(texts, self.vocab, self.config.max_len)

    def cue_attention(self, ids: torch.Tensor, mask: torch.Tensor) -> CueAttention:
        return cue_vectors(ids, mask, self.sentiment, self.aggression, self.options.cue_layer)

    def gate(self, ids: torch.Tensor, mask: torch.Tensor, cue: Optional[CueAttention] = None):
        if self.variant == "base":
            return mask.to(self.detector.token_embedding.weight.dtype), cue
        if cue is None:
            cue = self.cue_attention(ids, mask)
        s, a = cue.S, cue.A
        if self.variant == "sentiment_only":
            a = torch.zeros_like(a)
        elif self.variant == "aggression_only":
            s = torch.zeros_like(s)
        return self.selector(s, a, mask), cue

    def readout(self, F: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        if self.options.readout == "cls":
            return F[:, CLS_INDEX]
        weights = mask.to(F.dtype).unsqueeze(-1)
        return (F * weights).sum(dim=1) / weights.sum(dim=1)

    def logits(self, F: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        if self.options.readout == "cls":
            return classifier_logits(F, CLS_INDEX, self.classifier)
        return self.classifier(self.readout(F, mask))

    def forward(
        self,
        ids: torch.Tensor,
        mask: torch.Tensor,
        cue: Optional[CueAttention] = None,
        gate_override: Optional[torch.Tensor] = None
    ) -> HateForward:
        output = self.detector(ids, mask)
        if gate_override is not None:
            gate = gate_override.to(output.last_hidden.dtype)
        else:
            gate, cue = self.gate(ids, mask, cue)
        F = fuse_representation(output.last_hidden, gate)
        logits = self.logits(F, mask)
        return HateForward(
            logits=logits,
            probs=torch.softmax(logits, dim=-1),
            gate=gate,
            cue=cue,
            detector_attentions=output.attentions,
        )

    def base_logits(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Detector plus classifier with no fusion step."""
        return self.logits(self.detector(ids, mask).last_hidden, mask)

    def detector_cls_attention(self, attentions: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        return extract_cue_attention(attentions, CLS_INDEX, mask, layer=-1)

    def predict_proba(self, texts: Sequence[str], batch_size: int = 256) -> torch.Tensor:
        if not texts:
            return torch.empty(0, NUM_CLASSES)
        ids, mask = self.tokenize(texts)
        was_training = self.training
        self.eval()
        chunks = []
        with torch.no_grad():
            for start in range(0, len(ids), batch_size):
                chunks.append(self(ids[start:start + batch_size], mask[start:start + batch_size]).probs)
        self.train(was_training)
        return torch.cat(chunks)

    def predict_labels(self, texts: Sequence[str]) -> List[int]:
        return self.predict_proba(texts).argmax(dim=-1).tolist()

def build_hate_model(
    vocab: Vocabulary,
    config: EncoderConfig,
    sentiment: EncoderStack,
    aggression: EncoderStack,
    options: ModelOptions = ModelOptions(),
    seed: int = 0
) -> HateModel:
    torch.manual_seed(seed)
    detector = EncoderStack(config, len(vocab), task="hate")
    model = HateModel(detector, sentiment, aggression, vocab, options)
    model.selector.apply(EncoderStack._init_weights)
    model.classifier.apply(EncoderStack._init_weights)
    return model
