import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

HATE = 1
NON_HATE = 0
HATE_THRESHOLD = 0.5

SENTIMENT_LABELS = {"negative": 0, "neutral": 1, "positive": 2}
AGGRESSION_LABELS = {"non_aggressive": 0, "aggressive": 1}
CUE_LABELS = {"sentiment": SENTIMENT_LABELS, "aggression": AGGRESSION_LABELS}

CorpusFormat = Literal["jsonl", "csv"]
CueTask = Literal["sentiment", "aggression"]

class Record(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    label: int
    platform: str
    hate_target: Optional[str] = None
    hate_type: Optional[str] = None
    raw_score: Optional[float] = None

    @field_validator("text")
    @classmethod
    def text_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("text is empty after whitespace normalization")
        return value

    @field_validator("label")
    @classmethod
    def label_is_binary(cls, value: int) -> int:
        if value not in (NON_HATE, HATE):
            raise ValueError(f"label must be 0 or 1, got {value}")
        return value

    @model_validator(mode="after")
    def label_matches_score(self):
        if self.raw_score is not None:
            if not math.isfinite(self.raw_score):
                raise ValueError("raw_score must be finite")
            expected = NON_HATE if self.raw_score < HATE_THRESHOLD else HATE
            if self.label != expected:
                raise ValueError(f"label {self.label} disagrees with raw_score {self.raw_score}")
        return self

class Provenance(BaseModel):
    path: str
    format: str

class Corpus(BaseModel):
    model_config = ConfigDict(frozen=True)

    records: Tuple[Record, ...]
    platform: str
    provenance: Provenance

    @model_validator(mode="after")
    def records_share_platform(self):
        strays = {r.platform for r in self.records if r.platform != self.platform}
        if strays:
            raise ValueError(f"records from platforms {sorted(strays)} in corpus {self.platform!r}")
        return self

    def __len__(self) -> int:
        return len(self.records)

    @property
    def labels(self) -> List[int]:
        return [r.label for r in self.records]

    @property
    def texts(self) -> List[str]:
        return [r.text for r in self.records]

    @property
    def hateful_count(self) -> int:
        return sum(r.label for r in self.records)

    @property
    def hateful_fraction(self) -> float:
        if not self.records:
            return 0.0
        return self.hateful_count / len(self.records)

    def subset(self, records, tag: str) -> "Corpus":
        return Corpus(
            records=tuple(records),
            platform=self.platform,
            provenance=Provenance(path=self.provenance.path, format=f"{self.provenance.format}:{tag}"),
        )

class CueExample(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    label: int

class CueCorpus(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: CueTask
    examples: Tuple[CueExample, ...]

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def num_labels(self) -> int:
        return len(CUE_LABELS[self.task])

    @property
    def labels(self) -> List[int]:
        return [e.label for e in self.examples]

    @property
    def texts(self) -> List[str]:
        return [e.text for e in self.examples]

class SplitSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    @field_validator("ratios")
    @classmethod
    def ratios_form_partition(cls, value):
        if any(r <= 0 for r in value):
            raise ValueError(f"split ratios must be positive, got {value}")
        if abs(sum(value) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {sum(value)}")
        return value

class ClassWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    weights: Dict[int, float] = Field(default_factory=dict)

    @field_validator("weights")
    @classmethod
    def weights_positive(cls, value):
        if set(value) != {NON_HATE, HATE}:
            raise ValueError("class weights need exactly the labels 0 and 1")
        if any(w <= 0 for w in value.values()):
            raise ValueError("class weights must be positive")
        return value

    @property
    def hate(self) -> float:
        return self.weights[HATE]

    @property
    def non_hate(self) -> float:
        return self.weights[NON_HATE]

    def as_list(self) -> List[float]:
        return [self.weights[NON_HATE], self.weights[HATE]]

class CsvColumnMap(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str = "text"
    label: Optional[str] = "label"
    raw_score: Optional[str] = "raw_score"
    hate_target: Optional[str] = "hate_target"
    hate_type: Optional[str] = "hate_type"
