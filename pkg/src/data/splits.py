from typing import List, Sequence, Tuple

import numpy as np
from sklearn.utils.class_weight import compute_class_weight

from src.data.schemas import HATE, NON_HATE, ClassWeights, Corpus, SplitSpec
from src.utils.errors import ValidationError

MIN_RECORDS_PER_CLASS = 10
SPLIT_NAMES = ("train", "val", "test")

def _allocate(count: int, ratios: Sequence[float]) -> List[int]:
    # largest remainder keeps every share within one record of count * ratio
    exact = [count * r for r in ratios]
    sizes = [int(np.floor(x)) for x in exact]
    remainder = count - sum(sizes)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[:remainder]:
        sizes[i] += 1
    return sizes

def stratified_split(corpus: Corpus, spec: SplitSpec) -> Tuple[Corpus, Corpus, Corpus]:
    if not isinstance(spec, SplitSpec):
        spec = SplitSpec.model_validate(spec)

    labels = np.asarray(corpus.labels)
    rng = np.random.default_rng(spec.seed)
    assignments = [[] for _ in SPLIT_NAMES]

    for label in (NON_HATE, HATE):
        indices = np.flatnonzero(labels == label)
        if len(indices) < MIN_RECORDS_PER_CLASS:
            raise ValidationError(
                f"{corpus.platform}: class {label} has {len(indices)} records, "
                f"stratified split needs at least {MIN_RECORDS_PER_CLASS}"
            )
        shuffled = rng.permutation(indices)
        start = 0
        for split_index, size in enumerate(_allocate(len(shuffled), spec.ratios)):
            assignments[split_index].extend(shuffled[start:start + size].tolist())
            start += size

    return tuple(
        corpus.subset([corpus.records[i] for i in sorted(idx)], name)
        for name, idx in zip(SPLIT_NAMES, assignments)
    )

def class_weights(labels: Sequence[int]) -> ClassWeights:
    labels = np.asarray(list(labels), dtype=np.int64)
    present = set(np.unique(labels).tolist())
    if present != {NON_HATE, HATE}:
        raise ValidationError(f"class weights need both classes, got labels {sorted(present)}")
    weights = compute_class_weight(class_weight="balanced", classes=np.array([NON_HATE, HATE]), y=labels)
    return ClassWeights(weights={NON_HATE: float(weights[0]), HATE: float(weights[1])})
