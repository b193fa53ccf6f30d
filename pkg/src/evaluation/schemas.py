import math
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

TRACK_NAMES = ("S", "A", "C", "detector")
Dimension = Literal["hate_target", "hate_type"]

class EvalMatrix(BaseModel):
    """Macro-F1 grid, rows are training sources and columns are test targets.

    A cell may be None when that pair was not evaluated (the cross-target
    matrix leaves its diagonal empty).
    """

    name: str = "full"
    sources: List[str]
    targets: List[str]
    scores: List[List[Optional[float]]]

    @model_validator(mode="after")
    def grid_well_formed(self):
        if len(self.scores) != len(self.sources):
            raise ValueError(f"{len(self.scores)} score rows for {len(self.sources)} sources")
        for source, row in zip(self.sources, self.scores):
            if len(row) != len(self.targets):
                raise ValueError(f"row {source} has {len(row)} scores for {len(self.targets)} targets")
            for value in row:
                if value is not None and not (math.isfinite(value) and 0.0 <= value <= 1.0):
                    raise ValueError(f"score {value} outside [0, 1] in row {source}")
        return self

    def score(self, source: str, target: str) -> Optional[float]:
        return self.scores[self.sources.index(source)][self.targets.index(target)]

    def _cells(self, diagonal: Optional[bool] = None) -> List[float]:
        cells = []
        for source, row in zip(self.sources, self.scores):
            for target, value in zip(self.targets, row):
                if value is None:
                    continue
                if diagonal is None or (source == target) == diagonal:
                    cells.append(value)
        return cells

    def off_diagonal_mean(self) -> float:
        cells = self._cells(diagonal=False)
        return float(np.mean(cells)) if cells else float("nan")

    def in_platform_mean(self) -> float:
        cells = self._cells(diagonal=True)
        return float(np.mean(cells)) if cells else float("nan")

    def source_summary(self, source: str) -> Dict[str, Optional[float]]:
        row = self.scores[self.sources.index(source)]
        in_platform = None
        cross = []
        for target, value in zip(self.targets, row):
            if value is None:
                continue
            if target == source:
                in_platform = value
            else:
                cross.append(value)
        present = [v for v in row if v is not None]
        return {
            "in_platform": in_platform,
            "cross_platform_mean": float(np.mean(cross)) if cross else None,
            "overall_mean": float(np.mean(present)) if present else None,
        }

    def averages(self) -> Dict[str, Dict[str, Optional[float]]]:
        return {source: self.source_summary(source) for source in self.sources}

    def reorder(self, sources: Sequence[str], targets: Optional[Sequence[str]] = None) -> "EvalMatrix":
        targets = list(targets) if targets is not None else list(sources)
        if sorted(sources) != sorted(self.sources) or sorted(targets) != sorted(self.targets):
            raise ValueError("reorder must permute the existing platforms")
        return EvalMatrix(
            name=self.name,
            sources=list(sources),
            targets=targets,
            scores=[[self.score(s, t) for t in targets] for s in sources],
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.scores, index=self.sources, columns=self.targets, dtype=float)
        frame.index.name = "source"
        return frame

class AblationReport(BaseModel):
    variant: str
    scores: EvalMatrix
    seeds: List[int]
    seed_off_diagonal_means: List[float]
    off_diagonal_mean: float
    off_diagonal_std: float
    delta_from_full: Optional[float] = None

class GroupError(BaseModel):
    count: int
    evaluated: int
    errors: int
    error_rate: float = Field(ge=0.0, le=1.0)

class ErrorBreakdown(BaseModel):
    """`count` covers every annotated record of a group; the rate is over the evaluated subset."""

    dimension: Dimension
    hateful_only: bool = True
    groups: Dict[str, GroupError]
    excluded: int = 0

    @property
    def annotated(self) -> int:
        return sum(g.count for g in self.groups.values())

    def rates(self) -> Dict[str, float]:
        return {name: group.error_rate for name, group in self.groups.items()}

class HeatmapDoc(BaseModel):
    text: str
    tokens: List[str]
    tracks: Dict[str, List[float]]
    prediction: int
    probs: List[float]
    label: Optional[int] = None

    @model_validator(mode="after")
    def tracks_align(self):
        missing = [name for name in TRACK_NAMES if name not in self.tracks]
        if missing:
            raise ValueError(f"heatmap is missing tracks {missing}")
        for name, values in self.tracks.items():
            if len(values) != len(self.tokens):
                raise ValueError(f"track {name} has {len(values)} values for {len(self.tokens)} tokens")
        return self
