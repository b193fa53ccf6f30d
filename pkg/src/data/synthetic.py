from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.data.corpus import binarize_score
from src.data.schemas import (
    AGGRESSION_LABELS, SENTIMENT_LABELS, Corpus, CueCorpus, CueExample, CueTask,
    HATE, NON_HATE, Provenance, Record
)
from src.utils.errors import ValidationError

POSITIVE_WORDS = ("wonderful", "lovely", "brilliant", "cheerful", "delightful", "kind", "gentle", "generous")
NEGATIVE_WORDS = ("disgusting", "vile", "horrible", "pathetic", "filthy", "miserable", "nasty", "wretched")
IMPERATIVE_MARKERS = ("crush", "expel", "smash", "destroy", "drown", "banish")
SLUR_PROXIES = ("vermin", "parasites", "scum", "rodents")
AGGRESSION_MARKERS = IMPERATIVE_MARKERS + SLUR_PROXIES
FILLER_WORDS = (
    "the", "people", "today", "about", "this", "they", "we", "post", "news", "city",
    "group", "said", "time", "comment", "thread", "really", "just", "think", "would", "those",
    "after", "again", "community", "folks", "online", "here", "there", "what", "new", "around",
    "story", "week", "still", "every", "other", "street", "video", "photo", "read", "saw",
)
TARGET_WORDS = {"LGBTQ": ("gay", "trans", "queer"), "Migrants": ("migrants", "refugees", "immigrants")}

def spurious_pool(owner: str, label: int, size: int = 4) -> Tuple[str, ...]:
    side = "h" if label == HATE else "n"
    return tuple(f"{owner.lower()}{side}{i}" for i in range(size))

def _sentence(rng: np.random.Generator, length_range: Tuple[int, int], planted: Sequence[str]) -> str:
    length = int(rng.integers(length_range[0], length_range[1] + 1))
    tokens = list(rng.choice(FILLER_WORDS, size=length))
    for token in planted:
        tokens.insert(int(rng.integers(0, len(tokens) + 1)), token)
    return " ".join(tokens)

def _cue_tokens(rng: np.random.Generator, label: int, cue_strength: float) -> Tuple[List[str], Optional[str]]:
    if label == HATE:
        has_negative = rng.random() < cue_strength
        has_marker = rng.random() < cue_strength
        if not (has_negative or has_marker):
            has_marker = True
        tokens = []
        if has_negative:
            tokens.append(str(rng.choice(NEGATIVE_WORDS)))
        if has_marker:
            tokens.append(str(rng.choice(AGGRESSION_MARKERS)))
        return tokens, "violence" if has_marker else "offensive"
    tokens = []
    if rng.random() < 0.5:
        tokens.append(str(rng.choice(POSITIVE_WORDS)))
    return tokens, None

def generate_hate_corpus(
    platform: str,
    num_records: int,
    seed: int,
    hate_rate: float = 0.3,
    other_platforms: Sequence[str] = (),
    spurious_alignment: float = 0.9,
    cross_spurious_rate: float = 0.6,
    cue_strength: float = 0.8,
    targets: Sequence[str] = (),
    with_scores: bool = False,
    length_range: Tuple[int, int] = (6, 14)
) -> Corpus:
    """Cue tokens decide the label on every platform.

    Each platform also carries its own spurious tokens, aligned with the label at
    `spurious_alignment`, and the other platforms' spurious tokens with the
    association flipped, so a shortcut learned on one platform misleads on the others.
    """
    if num_records <= 0:
        raise ValidationError("num_records must be positive")
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(num_records):
        label = HATE if rng.random() < hate_rate else NON_HATE
        planted, hate_type = _cue_tokens(rng, label, cue_strength)

        aligned = label if rng.random() < spurious_alignment else 1 - label
        planted.append(str(rng.choice(spurious_pool(platform, aligned))))
        for other in other_platforms:
            if rng.random() < cross_spurious_rate:
                planted.append(str(rng.choice(spurious_pool(other, 1 - label))))

        hate_target = None
        if targets:
            hate_target = str(rng.choice(list(targets)))
            planted.append(str(rng.choice(TARGET_WORDS.get(hate_target, (hate_target.lower(),)))))

        raw_score = None
        if with_scores:
            raw_score = float(np.round(rng.uniform(0.5, 1.0) if label == HATE else rng.uniform(-1.0, 0.5), 6))
            if binarize_score(raw_score) != label:
                raw_score = 0.5 if label == HATE else 0.0

        records.append(Record(
            text=_sentence(rng, length_range, planted),
            label=label,
            platform=platform,
            hate_target=hate_target,
            hate_type=hate_type,
            raw_score=raw_score,
        ))
    return Corpus(records=tuple(records), platform=platform, provenance=Provenance(path=f"synthetic:{seed}", format="synthetic"))

def generate_shift_suite(
    platforms: Sequence[str],
    records_per_platform: int,
    seed: int,
    hate_rate: float = 0.3,
    spurious_alignment: float = 0.9,
    cross_spurious_rate: float = 0.6,
    cue_strength: float = 0.8,
    score_platforms: Sequence[str] = ()
) -> Dict[str, Corpus]:
    if len(set(platforms)) != len(platforms):
        raise ValidationError(f"platform names must be unique: {list(platforms)}")
    suite = {}
    for offset, platform in enumerate(platforms):
        suite[platform] = generate_hate_corpus(
            platform=platform,
            num_records=records_per_platform,
            seed=seed * 1009 + offset,
            hate_rate=hate_rate,
            other_platforms=[p for p in platforms if p != platform],
            spurious_alignment=spurious_alignment,
            cross_spurious_rate=cross_spurious_rate,
            cue_strength=cue_strength,
            with_scores=platform in score_platforms,
        )
    return suite

def generate_target_corpus(
    platform: str,
    num_records: int,
    seed: int,
    targets: Sequence[str] = ("Migrants", "LGBTQ"),
    hate_rate: float = 0.35,
    spurious_alignment: float = 0.9,
    cue_strength: float = 0.8
) -> Corpus:
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(num_records):
        target = str(rng.choice(list(targets)))
        label = HATE if rng.random() < hate_rate else NON_HATE
        planted, hate_type = _cue_tokens(rng, label, cue_strength)
        planted.append(str(rng.choice(TARGET_WORDS.get(target, (target.lower(),)))))
        # each target has its own shortcut tokens, flipped for the other target
        aligned = label if rng.random() < spurious_alignment else 1 - label
        planted.append(str(rng.choice(spurious_pool(target, aligned))))
        for other in targets:
            if other != target and rng.random() < 0.6:
                planted.append(str(rng.choice(spurious_pool(other, 1 - label))))
        records.append(Record(
            text=_sentence(rng, (6, 14), planted),
            label=label,
            platform=platform,
            hate_target=target,
            hate_type=hate_type,
        ))
    return Corpus(records=tuple(records), platform=platform, provenance=Provenance(path=f"synthetic:{seed}", format="synthetic"))

def generate_cue_corpus(task: CueTask, num_examples: int, seed: int, length_range: Tuple[int, int] = (6, 14)) -> CueCorpus:
    """Sentiment: the polarity word decides the class. Aggression: a marker decides it.

    Tokens of the other cue appear independently of the label so each cue
    module has to single out its own tokens.
    """
    rng = np.random.default_rng(seed)
    examples = []
    for _ in range(num_examples):
        planted = []
        if task == "sentiment":
            label = int(rng.integers(0, len(SENTIMENT_LABELS)))
            if label == SENTIMENT_LABELS["negative"]:
                planted.append(str(rng.choice(NEGATIVE_WORDS)))
            elif label == SENTIMENT_LABELS["positive"]:
                planted.append(str(rng.choice(POSITIVE_WORDS)))
            if rng.random() < 0.3:
                planted.append(str(rng.choice(AGGRESSION_MARKERS)))
        elif task == "aggression":
            label = int(rng.integers(0, len(AGGRESSION_LABELS)))
            if label == AGGRESSION_LABELS["aggressive"]:
                planted.append(str(rng.choice(IMPERATIVE_MARKERS)))
                if rng.random() < 0.5:
                    planted.append(str(rng.choice(SLUR_PROXIES)))
            if rng.random() < 0.3:
                planted.append(str(rng.choice(NEGATIVE_WORDS + POSITIVE_WORDS)))
        else:
            raise ValidationError(f"Unknown cue task: {task}")
        examples.append(CueExample(text=_sentence(rng, length_range, planted), label=label))
    return CueCorpus(task=task, examples=tuple(examples))

def planted_sentence(kind: str, seed: int, length_range: Tuple[int, int] = (6, 12)) -> Tuple[str, int]:
    """One-cue sentence plus the token position of the cue (0 is CLS)."""
    rng = np.random.default_rng(seed)
    if kind == "polarity":
        pool = NEGATIVE_WORDS + POSITIVE_WORDS
    elif kind == "aggression":
        pool = IMPERATIVE_MARKERS
    else:
        raise ValidationError(f"Unknown planted sentence kind: {kind}")
    length = int(rng.integers(length_range[0], length_range[1] + 1))
    tokens = list(rng.choice(FILLER_WORDS, size=length))
    position = int(rng.integers(0, len(tokens) + 1))
    tokens.insert(position, str(rng.choice(pool)))
    return " ".join(tokens), position + 1
