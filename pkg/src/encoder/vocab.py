import re
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import torch
from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator

from src.utils.errors import ValidationError

PAD, UNK, CLS, SEP = "[PAD]", "[UNK]", "[CLS]", "[SEP]"
SPECIAL_TOKENS = (PAD, UNK, CLS, SEP)
PAD_ID, UNK_ID, CLS_ID, SEP_ID = range(len(SPECIAL_TOKENS))

_TOKEN_PATTERN = re.compile(r"\w+|[^\w\s]")

def split_tokens(text: str) -> List[str]:
    return _TOKEN_PATTERN.findall(text)

class Vocabulary(BaseModel):
    model_config = ConfigDict(frozen=True)

    tokens: Tuple[str, ...]
    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def specials_lead(self):
        if self.tokens[:len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise ValueError(f"vocabulary must start with {SPECIAL_TOKENS}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        return self

    def model_post_init(self, __context) -> None:
        self._index = {token: i for i, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

class TokenSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    ids: Tuple[int, ...]
    mask: Tuple[int, ...]
    cls_index: int = 0

    @model_validator(mode="after")
    def mask_trails(self):
        if len(self.ids) != len(self.mask):
            raise ValueError("ids and mask must have equal length")
        if self.mask[self.cls_index] != 1:
            raise ValueError("CLS position must be unmasked")
        length = sum(self.mask)
        if self.mask != (1,) * length + (0,) * (len(self.mask) - length):
            raise ValueError("padding must trail the real tokens")
        return self

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def length(self) -> int:
        return sum(self.mask)

def build_vocab(corpora: Sequence, max_size: int) -> Vocabulary:
    """Specials first, then surface tokens by descending count, ties broken lexicographically.

    `max_size` counts the special tokens.
    """
    if not corpora:
        raise ValidationError("build_vocab needs at least one corpus")
    if max_size < len(SPECIAL_TOKENS):
        raise ValidationError(f"max_size {max_size} is smaller than the {len(SPECIAL_TOKENS)} special tokens")

    counts = Counter()
    for corpus in corpora:
        for text in corpus.texts:
            counts.update(split_tokens(text))
    for special in SPECIAL_TOKENS:
        counts.pop(special, None)

    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    kept = [token for token, _ in ranked[:max_size - len(SPECIAL_TOKENS)]]
    return Vocabulary(tokens=SPECIAL_TOKENS + tuple(kept))

def tokenize(text: str, vocab: Vocabulary, max_len: int) -> TokenSequence:
    if not text or not text.strip():
        raise ValidationError("cannot tokenize empty text")
    if max_len < 1:
        raise ValidationError(f"max_len must be positive, got {max_len}")
    ids = [CLS_ID] + [vocab.id_of(token) for token in split_tokens(text)]
    ids = ids[:max_len]
    mask = [1] * len(ids) + [0] * (max_len - len(ids))
    ids = ids + [PAD_ID] * (max_len - len(ids))
    return TokenSequence(ids=tuple(ids), mask=tuple(mask), cls_index=0)

def surface_tokens(text: str, max_len: int) -> List[str]:
    """Display tokens aligned with the unmasked positions of `tokenize`."""
    return ([CLS] + split_tokens(text))[:max_len]

def batch_tokenize(texts: Iterable[str], vocab: Vocabulary, max_len: int) -> Tuple[torch.Tensor, torch.Tensor]:
    sequences = [tokenize(text, vocab, max_len) for text in texts]
    ids = torch.tensor([s.ids for s in sequences], dtype=torch.long)
    mask = torch.tensor([s.mask for s in sequences], dtype=torch.long)
    return ids, mask

def save_vocab(vocab: Vocabulary, path: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for token in vocab.tokens:
            f.write(token + "\n")
    return path

def load_vocab(path: str) -> Vocabulary:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Vocabulary file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        tokens = [line.rstrip("\n") for line in f if line.rstrip("\n")]
    return Vocabulary(tokens=tuple(tokens))
