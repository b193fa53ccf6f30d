from collections import Counter
from typing import List, Optional

import torch
from pydantic import BaseModel, ConfigDict, Field
from torch import nn
from torch.utils.data import DataLoader, TensorDataset

from src.data.schemas import CUE_LABELS, CueCorpus, CueTask
from src.encoder.config import EncoderConfig
from src.encoder.model import EncoderStack
from src.encoder.vocab import Vocabulary, batch_tokenize
from src.utils.early_stopping import EarlyStopping
from src.utils.errors import ValidationError
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

class CueSchedule(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(default=1e-3, gt=0)
    batch_size: int = Field(default=32, gt=0)
    max_epochs: int = Field(default=10, gt=0)
    early_stop_patience: int = Field(default=3, gt=0)
    seed: int = 0

class PretrainLog(BaseModel):
    task: str
    epochs: List[dict] = Field(default_factory=list)
    best_epoch: Optional[int] = None
    best_val_accuracy: Optional[float] = None
    majority_baseline: float = 0.0

def _check_arity(corpus: CueCorpus, task: CueTask, role: str) -> None:
    if corpus.task != task:
        raise ValidationError(f"{role} corpus is labeled for {corpus.task!r}, expected {task!r}")
    allowed = set(CUE_LABELS[task].values())
    stray = sorted(set(corpus.labels) - allowed)
    if stray:
        raise ValidationError(f"{role} corpus has labels {stray} outside the {len(allowed)} {task} classes")
    if not len(corpus):
        raise ValidationError(f"{role} corpus is empty")

def cue_accuracy(state: EncoderStack, corpus: CueCorpus, vocab: Vocabulary, batch_size: int = 256) -> float:
    ids, mask = batch_tokenize(corpus.texts, vocab, state.config.max_len)
    labels = torch.tensor(corpus.labels)
    was_training = state.training
    state.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(labels), batch_size):
            logits = state(ids[start:start + batch_size], mask[start:start + batch_size]).logits
            correct += int((logits.argmax(dim=-1) == labels[start:start + batch_size]).sum())
    state.train(was_training)
    return correct / len(labels)

def pretrain_cue_classifier(
    train: CueCorpus,
    val: CueCorpus,
    config: EncoderConfig,
    task: CueTask,
    schedule: CueSchedule,
    vocab: Vocabulary,
    log: Optional[PretrainLog] = None
) -> EncoderStack:
    """Fine-tunes a fresh stack with a `task` head; returns the best-validation weights."""
    _check_arity(train, task, "train")
    _check_arity(val, task, "val")

    torch.manual_seed(schedule.seed)
    num_labels = len(CUE_LABELS[task])
    state = EncoderStack(config, len(vocab), num_labels=num_labels, task=task)

    ids, mask = batch_tokenize(train.texts, vocab, config.max_len)
    labels = torch.tensor(train.labels, dtype=torch.long)
    loader = DataLoader(
        TensorDataset(ids, mask, labels),
        batch_size=schedule.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(schedule.seed),
    )
    optimizer = torch.optim.Adam(state.parameters(), lr=schedule.learning_rate)
    criterion = nn.CrossEntropyLoss()
    stopper = EarlyStopping(patience=schedule.early_stop_patience)

    log = log if log is not None else PretrainLog(task=task)
    log.majority_baseline = Counter(val.labels).most_common(1)[0][1] / len(val)

    for epoch in range(1, schedule.max_epochs + 1):
        state.train()
        total, batches = 0.0, 0
        for batch_ids, batch_mask, batch_labels in loader:
            optimizer.zero_grad()
            loss = criterion(state(batch_ids, batch_mask).logits, batch_labels)
            loss.backward()
            optimizer.step()
            total += float(loss)
            batches += 1

        val_accuracy = cue_accuracy(state, val, vocab)
        log.epochs.append({"epoch": epoch, "train_loss": total / batches, "val_accuracy": val_accuracy})
        logger.info("%s epoch %d: train loss %.4f, val accuracy %.4f", task, epoch, total / batches, val_accuracy)
        stopper.step(val_accuracy, state, epoch)
        if stopper.should_stop:
            logger.info("%s: early stop after epoch %d", task, epoch)
            break

    stopper.restore_best_weights(state)
    state.eval()
    log.best_epoch = stopper.best_epoch
    log.best_val_accuracy = stopper.best_score
    if stopper.best_score <= log.majority_baseline:
        logger.warning(
            "%s classifier does not beat the majority baseline (%.4f <= %.4f)",
            task, stopper.best_score, log.majority_baseline
        )
    return state
