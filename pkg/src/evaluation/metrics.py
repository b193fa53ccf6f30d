from typing import Sequence

from sklearn.metrics import f1_score

from src.data.schemas import HATE, NON_HATE
from src.utils.errors import ValidationError

def macro_f1(preds: Sequence[int], labels: Sequence[int]) -> float:
    """Unweighted mean of the two per-class F1 scores; zero denominators score 0."""
    preds, labels = list(preds), list(labels)
    if len(preds) != len(labels):
        raise ValidationError(f"{len(preds)} predictions for {len(labels)} labels")
    if not preds:
        raise ValidationError("macro_f1 needs at least one prediction")
    stray = {v for v in preds + labels if v not in (NON_HATE, HATE)}
    if stray:
        raise ValidationError(f"macro_f1 expects binary values, got {sorted(stray)}")
    return float(f1_score(labels, preds, labels=[NON_HATE, HATE], average="macro", zero_division=0))

def error_rate(preds: Sequence[int], labels: Sequence[int]) -> float:
    if len(preds) != len(labels) or not labels:
        raise ValidationError("error_rate needs equal-length, non-empty inputs")
    return sum(p != y for p, y in zip(preds, labels)) / len(labels)
