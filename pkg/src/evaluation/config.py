try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Dict, List, Literal, Optional

import pydantic
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from src.data.schemas import CorpusFormat, CsvColumnMap, SplitSpec
from src.detector.model import VARIANTS, ModelOptions
from src.detector.train import TrainSchedule
from src.encoder.config import EncoderConfig, preset
from src.encoder.pretrain import CueSchedule
from src.utils.errors import ConfigurationError
from src.utils.settings import get_settings

SCHEMA_VERSION = 1

class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

class EncoderSection(_Section):
    """A preset name plus explicit overrides."""

    preset: str = "desk"
    n_layers: Optional[int] = None
    d_model: Optional[int] = None
    n_heads: Optional[int] = None
    d_head: Optional[int] = None
    d_ff: Optional[int] = None
    max_len: Optional[int] = None
    dropout: Optional[float] = None

    def build(self) -> EncoderConfig:
        overrides = self.model_dump(exclude={"preset"}, exclude_none=True)
        return preset(self.preset, **overrides)

class SyntheticSuiteConfig(_Section):
    platforms: List[str] = Field(default_factory=lambda: ["alpha", "beta", "gamma"])
    records_per_platform: int = Field(default=2500, gt=0)
    hate_rate: float = Field(default=0.3, gt=0, lt=1)
    spurious_alignment: float = Field(default=0.9, ge=0, le=1)
    cross_spurious_rate: float = Field(default=0.6, ge=0, le=1)
    cue_strength: float = Field(default=0.8, ge=0, le=1)
    score_platforms: List[str] = Field(default_factory=list)
    cue_examples: int = Field(default=3000, gt=0)
    target_records: int = Field(default=1500, gt=0)

class CorpusSource(_Section):
    platform: str
    path: str
    format: CorpusFormat = "jsonl"
    columns: CsvColumnMap = Field(default_factory=CsvColumnMap)

class CueCorpusSources(_Section):
    sentiment: Optional[str] = None
    aggression: Optional[str] = None

class TargetEvalConfig(_Section):
    targets: List[str] = Field(default_factory=lambda: ["Migrants", "LGBTQ"])
    # a platform from [[corpora]]; synthetic data is generated when unset
    platform: Optional[str] = None

class ErrorAnalysisConfig(_Section):
    dimensions: List[Literal["hate_target", "hate_type"]] = Field(default_factory=lambda: ["hate_target", "hate_type"])
    hateful_only: bool = True
    chart: bool = True

class AblationConfig(_Section):
    seeds: List[int] = Field(default_factory=lambda: [0])
    variants: List[Literal["full", "sentiment_only", "aggression_only", "base"]] = Field(
        default_factory=lambda: list(VARIANTS)
    )

class ExperimentConfig(_Section):
    schema_version: int
    run_name: str = "peace"
    seed: int = 0
    vocab_size: int = Field(default=5000, gt=4)
    max_workers: int = Field(default=1, gt=0)
    cue_val_fraction: float = Field(default=0.1, gt=0, lt=1)

    encoder: EncoderSection = Field(default_factory=EncoderSection)
    cue_encoder: Optional[EncoderSection] = None
    model: ModelOptions = Field(default_factory=ModelOptions)
    train: TrainSchedule = Field(default_factory=TrainSchedule)
    cue_train: CueSchedule = Field(default_factory=CueSchedule)
    split: SplitSpec = Field(default_factory=SplitSpec)
    synthetic: SyntheticSuiteConfig = Field(default_factory=SyntheticSuiteConfig)
    corpora: List[CorpusSource] = Field(default_factory=list)
    cue_corpora: CueCorpusSources = Field(default_factory=CueCorpusSources)
    target_eval: TargetEvalConfig = Field(default_factory=TargetEvalConfig)
    errors: ErrorAnalysisConfig = Field(default_factory=ErrorAnalysisConfig)
    ablation: AblationConfig = Field(default_factory=AblationConfig)

    _base_dir: Path = PrivateAttr(default_factory=Path)

    @property
    def uses_synthetic(self) -> bool:
        return not self.corpora

    def encoder_config(self) -> EncoderConfig:
        return self.encoder.build()

    def cue_encoder_config(self) -> EncoderConfig:
        config = (self.cue_encoder or self.encoder).build()
        if config.max_len != self.encoder_config().max_len:
            raise ConfigurationError(
                f"cue_encoder.max_len {config.max_len} must equal encoder.max_len {self.encoder_config().max_len}"
            )
        return config

    def resolve(self, path: str) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self._base_dir / path

    def run_dir(self, command: str) -> Path:
        return get_settings().get_output_root() / self.run_name / command

    def hash_payload(self) -> Dict:
        return self.model_dump(mode="json")

def load_experiment(path: str) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"{path}: invalid TOML: {e}") from e

    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"{path}: schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")
    try:
        config = ExperimentConfig(**raw)
    except pydantic.ValidationError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    config._base_dir = path.resolve().parent
    config.cue_encoder_config()
    return config
