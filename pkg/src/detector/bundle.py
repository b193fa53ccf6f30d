from pathlib import Path
from typing import Any, Dict, Optional

from src.detector.model import HateModel, ModelOptions
from src.encoder.checkpoint import load_checkpoint, read_tensor_archive, save_checkpoint, write_tensor_archive
from src.encoder.vocab import load_vocab, save_vocab
from src.utils.errors import ConfigurationError
from src.utils.manifest import write_run_manifest

SENTIMENT_FILE = "sentiment.ckpt"
AGGRESSION_FILE = "aggression.ckpt"
DETECTOR_FILE = "detector.ckpt"
FUSION_FILE = "fusion.ckpt"
VOCAB_FILE = "vocab.txt"

def save_bundle(
    model: HateModel,
    directory: str,
    config: Optional[Dict[str, Any]] = None,
    seed: int = 0,
    extra: Optional[Dict[str, Any]] = None
) -> Path:
    """Writes the three stacks, the fusion parameters, the vocabulary and a manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model.sentiment, directory / SENTIMENT_FILE)
    save_checkpoint(model.aggression, directory / AGGRESSION_FILE)
    save_checkpoint(model.detector, directory / DETECTOR_FILE)

    tensors = {f"selector.{k}": v for k, v in model.selector.state_dict().items()}
    tensors.update({f"classifier.{k}": v for k, v in model.classifier.state_dict().items()})
    write_tensor_archive(directory / FUSION_FILE, {"kind": "fusion", "options": model.options.model_dump()}, tensors)
    save_vocab(model.vocab, directory / VOCAB_FILE)

    write_run_manifest(directory, "bundle", config or {}, seed, extra=dict(extra or {}, variant=model.variant))
    return directory

def load_bundle(directory: str) -> HateModel:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"Model bundle not found: {directory}")
    vocab = load_vocab(directory / VOCAB_FILE)
    sentiment = load_checkpoint(directory / SENTIMENT_FILE)
    aggression = load_checkpoint(directory / AGGRESSION_FILE)
    detector = load_checkpoint(directory / DETECTOR_FILE)

    header, tensors = read_tensor_archive(directory / FUSION_FILE)
    if header.get("kind") != "fusion":
        raise ConfigurationError(f"{directory / FUSION_FILE} is not a fusion checkpoint")
    model = HateModel(detector, sentiment, aggression, vocab, ModelOptions(**header["options"]))
    if detector.token_embedding.weight.dtype != model.selector.fc1.weight.dtype:
        model.selector.to(detector.token_embedding.weight.dtype)
        model.classifier.to(detector.token_embedding.weight.dtype)
    try:
        model.selector.load_state_dict({k[len("selector."):]: v for k, v in tensors.items() if k.startswith("selector.")})
        model.classifier.load_state_dict({k[len("classifier."):]: v for k, v in tensors.items() if k.startswith("classifier.")})
    except RuntimeError as e:
        raise ConfigurationError(f"{directory / FUSION_FILE}: {e}") from e
    model.eval()
    return model
