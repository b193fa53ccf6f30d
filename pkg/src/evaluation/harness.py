from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from src.data.schemas import Corpus, SplitSpec
from src.data.splits import MIN_RECORDS_PER_CLASS, stratified_split
from src.detector.model import VARIANTS
from src.detector.train import TrainSchedule
from src.evaluation.metrics import macro_f1
from src.evaluation.schemas import AblationReport, EvalMatrix
from src.utils.errors import ValidationError
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

# model_factory(train, val, schedule) -> object with predict_labels(texts) -> List[int]
ModelFactory = Callable[[Corpus, Corpus, TrainSchedule], object]
PlatformSplits = Mapping[str, Tuple[Corpus, Corpus, Corpus]]

def _check_splits(corpora: PlatformSplits) -> None:
    if len(corpora) < 2:
        raise ValidationError(f"cross-platform evaluation needs at least 2 platforms, got {len(corpora)}")
    for platform, splits in corpora.items():
        if splits is None or len(splits) != 3 or any(s is None or not len(s) for s in splits):
            raise ValidationError(f"platform {platform} is missing its train/val/test split")

def _score(model, test: Corpus) -> float:
    return macro_f1(model.predict_labels(test.texts), test.labels)

def _run_jobs(jobs: Dict[str, Callable[[], Dict[str, float]]], max_workers: int) -> Dict[str, Dict[str, float]]:
    if max_workers <= 1:
        return {key: job() for key, job in jobs.items()}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {key: pool.submit(job) for key, job in jobs.items()}
        return {key: future.result() for key, future in futures.items()}

def cross_platform_eval(
    model_factory: ModelFactory,
    corpora: PlatformSplits,
    schedule: TrainSchedule,
    name: str = "full",
    max_workers: int = 1
) -> EvalMatrix:
    """One model per source platform, scored on every platform's test split."""
    _check_splits(corpora)
    platforms = list(corpora)

    def job(source: str) -> Callable[[], Dict[str, float]]:
        def run() -> Dict[str, float]:
            train, val, _ = corpora[source]
            logger.info("%s: training on %s (%d records)", name, source, len(train))
            model = model_factory(train, val, schedule)
            return {target: _score(model, corpora[target][2]) for target in platforms}
        return run

    rows = _run_jobs({source: job(source) for source in platforms}, max_workers)
    return EvalMatrix(
        name=name,
        sources=platforms,
        targets=platforms,
        scores=[[rows[source][target] for target in platforms] for source in platforms],
    )

def split_by_target(
    corpus: Corpus,
    targets: Sequence[str],
    spec: SplitSpec = SplitSpec()
) -> Dict[str, Tuple[Corpus, Corpus, Corpus]]:
    if len(targets) != 2 or targets[0] == targets[1]:
        raise ValidationError(f"cross-target evaluation needs two distinct targets, got {list(targets)}")
    splits = {}
    for target in targets:
        records = [r for r in corpus.records if r.hate_target == target]
        for label in (0, 1):
            count = sum(1 for r in records if r.label == label)
            if count < MIN_RECORDS_PER_CLASS:
                raise ValidationError(
                    f"target {target} has {count} records of class {label}, needs at least {MIN_RECORDS_PER_CLASS}"
                )
        splits[target] = stratified_split(corpus.subset(records, target), spec)
    return splits

def cross_target_eval(
    model_factory: ModelFactory,
    corpus: Corpus,
    targets: Sequence[str],
    schedule: TrainSchedule,
    spec: SplitSpec = SplitSpec(),
    name: str = "full",
    max_workers: int = 1
) -> EvalMatrix:
    """Train on one target's records, test on the other's; the diagonal stays empty."""
    targets = list(targets)
    splits = split_by_target(corpus, targets, spec)

    def job(source: str) -> Callable[[], Dict[str, float]]:
        def run() -> Dict[str, float]:
            train, val, _ = splits[source]
            model = model_factory(train, val, schedule)
            return {target: _score(model, splits[target][2]) for target in targets if target != source}
        return run

    rows = _run_jobs({source: job(source) for source in targets}, max_workers)
    return EvalMatrix(
        name=name,
        sources=targets,
        targets=targets,
        scores=[[rows[s].get(t) if s != t else None for t in targets] for s in targets],
    )

def mean_matrix(matrices: List[EvalMatrix], name: str) -> EvalMatrix:
    first = matrices[0]
    grid = np.array([[[np.nan if v is None else v for v in row] for row in m.scores] for m in matrices], dtype=float)
    mean = grid.mean(axis=0)
    return EvalMatrix(
        name=name,
        sources=first.sources,
        targets=first.targets,
        scores=[[None if np.isnan(v) else float(v) for v in row] for row in mean],
    )

def ablation_run(
    factory_for_variant: Callable[[str], ModelFactory],
    corpora: PlatformSplits,
    schedule: TrainSchedule,
    seeds: Iterable[int] = (0,),
    variants: Sequence[str] = VARIANTS,
    max_workers: int = 1
) -> List[AblationReport]:
    """Cross-platform matrices for every variant under the same splits and seeds."""
    _check_splits(corpora)
    seeds = list(seeds)
    if not seeds:
        raise ValidationError("ablation needs at least one seed")
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ValidationError(f"unknown ablation variants {unknown}")

    reports = []
    for variant in variants:
        factory = factory_for_variant(variant)
        matrices = [
            cross_platform_eval(factory, corpora, schedule.model_copy(update={"seed": seed}), variant, max_workers)
            for seed in seeds
        ]
        per_seed = [m.off_diagonal_mean() for m in matrices]
        reports.append(AblationReport(
            variant=variant,
            scores=mean_matrix(matrices, variant),
            seeds=seeds,
            seed_off_diagonal_means=per_seed,
            off_diagonal_mean=float(np.mean(per_seed)),
            off_diagonal_std=float(np.std(per_seed)),
        ))
        logger.info("%s: off-diagonal macro-F1 %.4f", variant, reports[-1].off_diagonal_mean)

    full = next((r for r in reports if r.variant == "full"), None)
    if full is not None:
        reports = [r.model_copy(update={"delta_from_full": full.off_diagonal_mean - r.off_diagonal_mean}) for r in reports]
    return reports
