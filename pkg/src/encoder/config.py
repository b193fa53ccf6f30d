from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, model_validator

from src.utils.errors import ConfigurationError

MAX_SEQUENCE_LENGTH = 512

class EncoderConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_layers: int
    d_model: int
    n_heads: int
    d_head: int
    d_ff: int
    max_len: int = 128
    dropout: float = 0.2

    @model_validator(mode="before")
    @classmethod
    def derive_head_width(cls, values: Any):
        if isinstance(values, dict) and values.get("d_head") is None:
            values = dict(values)
            values.pop("d_head", None)
            if values.get("n_heads"):
                values["d_head"] = int(values.get("d_model", 0)) // int(values["n_heads"])
        return values

    @model_validator(mode="after")
    def dimensions_consistent(self):
        for name in ("n_layers", "d_model", "n_heads", "d_head", "d_ff", "max_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.d_model != self.n_heads * self.d_head:
            raise ValueError(
                f"d_model ({self.d_model}) must equal n_heads * d_head ({self.n_heads} * {self.d_head})"
            )
        if self.max_len > MAX_SEQUENCE_LENGTH:
            raise ValueError(f"max_len {self.max_len} exceeds {MAX_SEQUENCE_LENGTH}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        return self

PRESETS: Dict[str, Dict[str, Any]] = {
    "tiny": {"n_layers": 2, "d_model": 8, "n_heads": 2, "d_ff": 16, "max_len": 8, "dropout": 0.0},
    "desk": {"n_layers": 4, "d_model": 64, "n_heads": 4, "d_ff": 256, "max_len": 128, "dropout": 0.2},
    "roberta-base": {"n_layers": 12, "d_model": 768, "n_heads": 12, "d_ff": 3072, "max_len": 512, "dropout": 0.2},
}

def preset(name: str, **overrides: Optional[Any]) -> EncoderConfig:
    """Named configuration with explicit fields taking precedence."""
    if name not in PRESETS:
        raise ConfigurationError(f"Unknown encoder preset {name!r}; choose from {sorted(PRESETS)}")
    values = dict(PRESETS[name])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return EncoderConfig(**values)
