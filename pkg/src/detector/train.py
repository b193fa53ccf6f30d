from typing import List, Optional, Tuple

import torch
from pydantic import BaseModel, ConfigDict, Field
from torch.utils.data import DataLoader, TensorDataset

from src.cues.extractor import CueAttention, require_frozen
from src.data.schemas import Corpus
from src.data.splits import class_weights
from src.detector.model import HateModel, balanced_cross_entropy
from src.evaluation.metrics import macro_f1
from src.utils.early_stopping import EarlyStopping
from src.utils.errors import ValidationError
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8

class TrainSchedule(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    learning_rate: float = Field(default=2e-5, gt=0)
    dropout: float = Field(default=0.2, ge=0, lt=1)
    batch_size: int = Field(default=32, gt=0)
    max_epochs: int = Field(default=20, gt=0)
    early_stop_patience: int = Field(default=3, gt=0)
    seed: int = 0
    max_steps: Optional[int] = Field(default=None, gt=0)

class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    val_macro_f1: float
    steps: int

class TrainingLog(BaseModel):
    epochs: List[EpochRecord] = Field(default_factory=list)
    best_epoch: Optional[int] = None
    best_val_macro_f1: Optional[float] = None
    stopped_early: bool = False
    total_steps: int = 0

def _check_corpus(corpus: Corpus, role: str) -> None:
    if not len(corpus):
        raise ValidationError(f"{role} corpus is empty")

def _predict_cached(model: HateModel, ids: torch.Tensor, mask: torch.Tensor, cue: Optional[CueAttention], batch_size: int) -> List[int]:
    model.eval()
    preds = []
    with torch.no_grad():
        for start in range(0, len(ids), batch_size):
            stop = start + batch_size
            batch_cue = None if cue is None else CueAttention(S=cue.S[start:stop], A=cue.A[start:stop])
            preds.extend(model(ids[start:stop], mask[start:stop], cue=batch_cue).probs.argmax(dim=-1).tolist())
    return preds

def train(
    model: HateModel,
    train: Corpus,
    val: Corpus,
    schedule: TrainSchedule
) -> Tuple[HateModel, TrainingLog]:
    """Adam on the detector, selector and classifier; cue stacks stay frozen.

    Early stopping watches validation macro-F1 and the best epoch's weights are
    restored before returning.
    """
    require_frozen(model.sentiment, model.aggression)
    _check_corpus(train, "train")
    _check_corpus(val, "val")
    weights = class_weights(train.labels)

    torch.manual_seed(schedule.seed)
    model.set_dropout(schedule.dropout)

    ids, mask = model.tokenize(train.texts)
    labels = torch.tensor(train.labels, dtype=torch.long)
    val_ids, val_mask = model.tokenize(val.texts)

    # frozen cue attention does not change during training
    uses_cues = model.variant != "base"
    cue = model.cue_attention(ids, mask) if uses_cues else None
    val_cue = model.cue_attention(val_ids, val_mask) if uses_cues else None
    cue_s = cue.S if uses_cues else torch.zeros(len(ids), ids.shape[1])
    cue_a = cue.A if uses_cues else torch.zeros(len(ids), ids.shape[1])

    loader = DataLoader(
        TensorDataset(ids, mask, labels, cue_s, cue_a),
        batch_size=schedule.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(schedule.seed),
    )
    optimizer = torch.optim.Adam(
        model.trainable_parameters(),
        lr=schedule.learning_rate,
        betas=ADAM_BETAS,
        eps=ADAM_EPS,
        weight_decay=0.0,
    )
    loss_weights = torch.tensor(weights.as_list())
    stopper = EarlyStopping(patience=schedule.early_stop_patience)
    log = TrainingLog()

    for epoch in range(1, schedule.max_epochs + 1):
        model.train()
        total, batches = 0.0, 0
        for batch_ids, batch_mask, batch_labels, batch_s, batch_a in loader:
            optimizer.zero_grad()
            batch_cue = CueAttention(S=batch_s, A=batch_a) if uses_cues else None
            probs = model(batch_ids, batch_mask, cue=batch_cue).probs
            loss = balanced_cross_entropy(probs, batch_labels, loss_weights.to(probs.dtype))
            loss.backward()
            optimizer.step()
            total += float(loss)
            batches += 1
            log.total_steps += 1
            if schedule.max_steps is not None and log.total_steps >= schedule.max_steps:
                break

        val_f1 = macro_f1(_predict_cached(model, val_ids, val_mask, val_cue, 256), val.labels)
        record = EpochRecord(epoch=epoch, train_loss=total / batches, val_macro_f1=val_f1, steps=log.total_steps)
        log.epochs.append(record)
        logger.info(
            "epoch %d: train loss %.4f, val macro-F1 %.4f (%d steps)",
            epoch, record.train_loss, val_f1, log.total_steps
        )

        stopper.step(val_f1, model, epoch)
        if stopper.should_stop:
            log.stopped_early = True
            logger.info("early stop after epoch %d, best epoch %d", epoch, stopper.best_epoch)
            break
        if schedule.max_steps is not None and log.total_steps >= schedule.max_steps:
            break

    stopper.restore_best_weights(model)
    model.eval()
    log.best_epoch = stopper.best_epoch
    log.best_val_macro_f1 = stopper.best_score
    return model, log
