from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from src.data.schemas import HATE, Corpus
from src.evaluation.schemas import Dimension, ErrorBreakdown, GroupError
from src.utils.errors import ValidationError
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

def error_breakdown(model, test: Corpus, dimension: Dimension, hateful_only: bool = True) -> ErrorBreakdown:
    """Misclassification rate per value of `dimension`.

    Records without the field are left out and counted in `excluded`. With
    `hateful_only` the rate is taken over the hateful records of each group.
    """
    if dimension not in ("hate_target", "hate_type"):
        raise ValidationError(f"Unknown breakdown dimension: {dimension}")
    annotated = [r for r in test.records if getattr(r, dimension) is not None]
    if not annotated:
        raise ValidationError(f"no test records carry {dimension}")

    preds = model.predict_labels([r.text for r in annotated])
    grouped: Dict[str, List[tuple]] = {}
    for record, pred in zip(annotated, preds):
        grouped.setdefault(getattr(record, dimension), []).append((record.label, pred))

    groups = {}
    for name in sorted(grouped):
        pairs = grouped[name]
        evaluated = [(y, p) for y, p in pairs if y == HATE or not hateful_only]
        errors = sum(1 for y, p in evaluated if y != p)
        groups[name] = GroupError(
            count=len(pairs),
            evaluated=len(evaluated),
            errors=errors,
            error_rate=errors / len(evaluated) if evaluated else 0.0,
        )
    breakdown = ErrorBreakdown(
        dimension=dimension,
        hateful_only=hateful_only,
        groups=groups,
        excluded=len(test) - len(annotated),
    )
    logger.info("%s breakdown: %s", dimension, {k: round(v, 4) for k, v in breakdown.rates().items()})
    return breakdown

def plot_breakdown(breakdown: ErrorBreakdown, path: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(breakdown.groups)
    rates = [breakdown.groups[n].error_rate for n in names]

    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(names)), 3.2))
    ax.bar(names, rates, color="#7b5ea7")
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("error rate")
    ax.set_title(f"Error rate by {breakdown.dimension.replace('_', ' ')}")
    for i, rate in enumerate(rates):
        ax.text(i, rate + 0.02, f"{rate:.2f}", ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
