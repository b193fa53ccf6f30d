"""Glue between an ExperimentConfig and the library: data, shared vocabulary,
frozen cue modules and model factories for the harness."""
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import torch

from src.cues.extractor import freeze
from src.data.corpus import load_corpus, load_cue_corpus
from src.data.schemas import Corpus, CueCorpus
from src.data.splits import stratified_split
from src.data.synthetic import generate_cue_corpus, generate_shift_suite, generate_target_corpus
from src.detector.model import HateModel, ModelOptions, build_hate_model
from src.detector.train import TrainSchedule, TrainingLog, train
from src.encoder.model import EncoderStack
from src.encoder.pretrain import PretrainLog, pretrain_cue_classifier
from src.encoder.vocab import Vocabulary, build_vocab
from src.evaluation.config import ExperimentConfig
from src.evaluation.harness import ModelFactory
from src.utils.errors import ConfigurationError
from src.utils.logging_utils import get_logger
from src.utils.settings import get_settings

logger = get_logger(__name__)

CUE_TASKS = ("sentiment", "aggression")

def configure_torch() -> None:
    settings = get_settings()
    torch.set_num_threads(settings.NUM_THREADS)
    if settings.DETERMINISTIC:
        torch.use_deterministic_algorithms(True)

def load_platform_corpora(cfg: ExperimentConfig) -> Dict[str, Corpus]:
    if cfg.uses_synthetic:
        s = cfg.synthetic
        return generate_shift_suite(
            s.platforms,
            s.records_per_platform,
            seed=cfg.seed,
            hate_rate=s.hate_rate,
            spurious_alignment=s.spurious_alignment,
            cross_spurious_rate=s.cross_spurious_rate,
            cue_strength=s.cue_strength,
            score_platforms=s.score_platforms,
        )
    corpora = {}
    for source in cfg.corpora:
        if source.platform in corpora:
            raise ConfigurationError(f"platform {source.platform} is listed twice")
        corpora[source.platform] = load_corpus(cfg.resolve(source.path), source.format, source.platform, source.columns)
    return corpora

def load_target_corpus(cfg: ExperimentConfig) -> Corpus:
    platform = cfg.target_eval.platform
    if platform is None:
        return generate_target_corpus(
            "targets",
            cfg.synthetic.target_records,
            seed=cfg.seed + 7919,
            targets=cfg.target_eval.targets,
            hate_rate=0.4,
            spurious_alignment=cfg.synthetic.spurious_alignment,
            cue_strength=cfg.synthetic.cue_strength,
        )
    corpora = load_platform_corpora(cfg)
    if platform not in corpora:
        raise ConfigurationError(f"target_eval.platform {platform!r} is not among the configured corpora")
    return corpora[platform]

def load_cue_corpora(cfg: ExperimentConfig) -> Dict[str, CueCorpus]:
    paths = {"sentiment": cfg.cue_corpora.sentiment, "aggression": cfg.cue_corpora.aggression}
    corpora = {}
    for offset, task in enumerate(CUE_TASKS):
        if paths[task]:
            corpora[task] = load_cue_corpus(cfg.resolve(paths[task]), task)
        else:
            corpora[task] = generate_cue_corpus(task, cfg.synthetic.cue_examples, seed=cfg.seed * 31 + 101 + offset)
    return corpora

def split_cue_corpus(corpus: CueCorpus, val_fraction: float, seed: int) -> Tuple[CueCorpus, CueCorpus]:
    order = np.random.default_rng(seed).permutation(len(corpus))
    n_val = max(1, int(round(len(corpus) * val_fraction)))
    val_idx, train_idx = sorted(order[:n_val].tolist()), sorted(order[n_val:].tolist())

    def pick(idx):
        return CueCorpus(task=corpus.task, examples=tuple(corpus.examples[i] for i in idx))

    return pick(train_idx), pick(val_idx)

def split_platforms(cfg: ExperimentConfig, corpora: Dict[str, Corpus]) -> Dict[str, Tuple[Corpus, Corpus, Corpus]]:
    return {platform: stratified_split(corpus, cfg.split) for platform, corpus in corpora.items()}

def shared_vocabulary(cfg: ExperimentConfig, *corpus_groups) -> Vocabulary:
    corpora = [c for group in corpus_groups for c in group]
    vocab = build_vocab(corpora, cfg.vocab_size)
    logger.info("shared vocabulary: %d tokens", len(vocab))
    return vocab

def prepare_cue_modules(
    cfg: ExperimentConfig,
    vocab: Vocabulary,
    cue_corpora: Dict[str, CueCorpus],
    logs: Optional[Dict[str, PretrainLog]] = None
) -> Tuple[EncoderStack, EncoderStack]:
    states = {}
    for task in CUE_TASKS:
        cue_train, cue_val = split_cue_corpus(cue_corpora[task], cfg.cue_val_fraction, cfg.seed)
        log = PretrainLog(task=task)
        state = pretrain_cue_classifier(cue_train, cue_val, cfg.cue_encoder_config(), task, cfg.cue_train, vocab, log)
        states[task] = freeze(state)
        if logs is not None:
            logs[task] = log
    return states["sentiment"], states["aggression"]

def peace_factory(
    vocab: Vocabulary,
    config,
    sentiment: EncoderStack,
    aggression: EncoderStack,
    options: ModelOptions,
    logs: Optional[Dict[str, TrainingLog]] = None
) -> ModelFactory:
    def factory(train_split: Corpus, val_split: Corpus, schedule: TrainSchedule) -> HateModel:
        model = build_hate_model(vocab, config, sentiment, aggression, options, seed=schedule.seed)
        model, log = train(model, train_split, val_split, schedule)
        if logs is not None:
            logs[f"{options.variant}:{train_split.platform}:{train_split.provenance.format}:{schedule.seed}"] = log
        return model
    return factory

def variant_factories(
    vocab: Vocabulary,
    config,
    sentiment: EncoderStack,
    aggression: EncoderStack,
    options: ModelOptions
) -> Callable[[str], ModelFactory]:
    def for_variant(variant: str) -> ModelFactory:
        return peace_factory(vocab, config, sentiment, aggression, options.model_copy(update={"variant": variant}))
    return for_variant
