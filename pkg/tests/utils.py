from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import torch

from src.cues.extractor import freeze
from src.data.schemas import Corpus, CueCorpus, CueExample, Provenance, Record
from src.data.synthetic import AGGRESSION_MARKERS, NEGATIVE_WORDS, generate_hate_corpus
from src.detector.model import HateModel, ModelOptions, build_hate_model
from src.encoder.config import EncoderConfig, preset
from src.encoder.model import EncoderStack
from src.encoder.vocab import Vocabulary, build_vocab

HATE_WORDS = set(NEGATIVE_WORDS) | set(AGGRESSION_MARKERS)

def make_corpus(platform: str, rows: Iterable[Tuple], fmt: str = "memory") -> Corpus:
    """rows are (text, label) or (text, label, hate_target, hate_type)."""
    records = []
    for row in rows:
        text, label = row[0], row[1]
        target = row[2] if len(row) > 2 else None
        hate_type = row[3] if len(row) > 3 else None
        records.append(Record(text=text, label=label, platform=platform, hate_target=target, hate_type=hate_type))
    return Corpus(records=tuple(records), platform=platform, provenance=Provenance(path="memory", format=fmt))

def make_cue_corpus(task: str, rows: Iterable[Tuple[str, int]]) -> CueCorpus:
    return CueCorpus(task=task, examples=tuple(CueExample(text=t, label=y) for t, y in rows))

def tiny_config(**overrides) -> EncoderConfig:
    return preset("tiny", **overrides)

def tiny_vocab(seed: int = 0) -> Vocabulary:
    corpus = generate_hate_corpus("alpha", 200, seed=seed, other_platforms=["beta"])
    return build_vocab([corpus], 120)

def frozen_cue_stack(config: EncoderConfig, vocab: Vocabulary, task: str, seed: int, dtype=torch.float32) -> EncoderStack:
    torch.manual_seed(seed)
    num_labels = 3 if task == "sentiment" else 2
    state = EncoderStack(config, len(vocab), num_labels=num_labels, task=task).to(dtype)
    return freeze(state)

def tiny_model(
    variant: str = "full",
    dtype=torch.float32,
    readout: str = "cls",
    selector_mode: str = "per_position",
    seed: int = 0,
    config: EncoderConfig = None,
    vocab: Vocabulary = None
) -> HateModel:
    config = config or tiny_config()
    vocab = vocab or tiny_vocab()
    sentiment = frozen_cue_stack(config, vocab, "sentiment", seed + 11, dtype)
    aggression = frozen_cue_stack(config, vocab, "aggression", seed + 23, dtype)
    options = ModelOptions(variant=variant, readout=readout, selector_mode=selector_mode)
    model = build_hate_model(vocab, config, sentiment, aggression, options, seed=seed)
    model.detector.to(dtype)
    model.selector.to(dtype)
    model.classifier.to(dtype)
    model.eval()
    return model

def keyword_label(text: str) -> int:
    return int(any(token in HATE_WORDS for token in text.split()))

class KeywordModel:
    """Stands in for a trained detector: hateful when a cue word appears."""

    def __init__(self, invert: bool = False):
        self.invert = invert

    def predict_labels(self, texts: Sequence[str]) -> List[int]:
        return [1 - keyword_label(t) if self.invert else keyword_label(t) for t in texts]

class ConstantModel:
    def __init__(self, label: int = 0):
        self.label = label

    def predict_labels(self, texts: Sequence[str]) -> List[int]:
        return [self.label] * len(texts)

def recording_factory(model, calls: List[Dict]):
    def factory(train, val, schedule):
        calls.append({"platform": train.platform, "train": len(train), "val": len(val), "seed": schedule.seed})
        return model
    return factory

# reference implementations in NumPy, float64 throughout

def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)

def reference_attention(q: np.ndarray, k: np.ndarray, mask: np.ndarray) -> np.ndarray:
    scores = q @ np.swapaxes(k, -1, -2) / np.sqrt(q.shape[-1])
    scores = np.where(mask[..., None, :].astype(bool), scores, -np.inf)
    return softmax(scores)

def reference_selector(s: np.ndarray, a: np.ndarray, mask: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
    pairs = np.stack([s, a], axis=-1)
    hidden = np.tanh(pairs @ params["fc1.weight"].T + params["fc1.bias"])
    gate = 1.0 / (1.0 + np.exp(-(hidden @ params["fc2.weight"].T + params["fc2.bias"])))
    return gate[..., 0] * mask

def reference_classifier(x: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
    hidden = np.tanh(x @ params["dense.weight"].T + params["dense.bias"])
    return softmax(hidden @ params["out_proj.weight"].T + params["out_proj.bias"])

def reference_balanced_ce(probs: np.ndarray, y: np.ndarray, weights: np.ndarray) -> float:
    picked = np.maximum(probs[np.arange(len(y)), y], 1e-12)
    return float(np.mean(weights[y] * -np.log(picked)))

def reference_macro_f1(preds: Sequence[int], labels: Sequence[int]) -> float:
    scores = []
    for cls in (0, 1):
        tp = sum(1 for p, y in zip(preds, labels) if p == cls and y == cls)
        fp = sum(1 for p, y in zip(preds, labels) if p == cls and y != cls)
        fn = sum(1 for p, y in zip(preds, labels) if p != cls and y == cls)
        denominator = 2 * tp + fp + fn
        scores.append(2 * tp / denominator if denominator else 0.0)
    return sum(scores) / 2

def numpy_params(module: torch.nn.Module) -> Dict[str, np.ndarray]:
    return {name: p.detach().double().numpy() for name, p in module.named_parameters()}
