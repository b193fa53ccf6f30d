import json
import math
import re
import unicodedata
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
import pydantic

from src.data.schemas import (
    CUE_LABELS, Corpus, CorpusFormat, CsvColumnMap, CueCorpus, CueExample, CueTask,
    HATE, HATE_THRESHOLD, NON_HATE, Provenance, Record
)
from src.utils.errors import SchemaError, ValidationError
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

_WHITESPACE = re.compile(r"\s+")
_CSV_LINE = re.compile(r"line (\d+)")

def normalize_text(text: str) -> str:
    return _WHITESPACE.sub(" ", unicodedata.normalize("NFC", text)).strip()

def binarize_score(score: float) -> int:
    score = float(score)
    if not math.isfinite(score):
        raise ValidationError(f"hate score must be finite, got {score}")
    return NON_HATE if score < HATE_THRESHOLD else HATE

def _blank(value: Any) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and not value.strip()

def _integral_label(value: Any) -> int:
    if isinstance(value, bool):
        return int(value)
    number = float(value)
    if not number.is_integer():
        raise ValueError(f"label {value!r} is not a whole class id")
    return int(number)

def _build_record(raw: Dict[str, Any], platform: str, line_number: int) -> Record:
    text = raw.get("text")
    if _blank(text):
        raise SchemaError("record has no text", line_number)
    text = normalize_text(str(text))
    if not text:
        raise SchemaError("text is empty after whitespace normalization", line_number)

    label = raw.get("label")
    raw_score = raw.get("raw_score")
    if _blank(label) and _blank(raw_score):
        raise SchemaError("record carries neither label nor raw_score", line_number)

    try:
        if not _blank(raw_score):
            raw_score = float(raw_score)
            label = binarize_score(raw_score)
        else:
            raw_score = None
            label = _integral_label(label)
        return Record(
            text=text,
            label=label,
            platform=platform,
            hate_target=None if _blank(raw.get("hate_target")) else str(raw["hate_target"]),
            hate_type=None if _blank(raw.get("hate_type")) else str(raw["hate_type"]),
            raw_score=raw_score,
        )
    except (pydantic.ValidationError, ValueError, TypeError) as e:
        raise SchemaError(str(e).splitlines()[0] if str(e) else type(e).__name__, line_number) from e

def _read_jsonl(path: Path) -> List[tuple]:
    rows = []
    with open(path, "rb") as f:
        for line_number, raw_line in enumerate(f, start=1):
            try:
                line = raw_line.decode("utf-8")
            except UnicodeDecodeError as e:
                raise SchemaError(f"invalid UTF-8 at byte {e.start}", line_number) from e
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"invalid JSON: {e.msg}", line_number) from e
            if not isinstance(payload, dict):
                raise SchemaError("each line must hold a JSON object", line_number)
            rows.append((line_number, payload))
    return rows

def _first_bad_utf8_line(path: Path) -> Optional[int]:
    with open(path, "rb") as f:
        for line_number, raw_line in enumerate(f, start=1):
            try:
                raw_line.decode("utf-8")
            except UnicodeDecodeError:
                return line_number
    return None

def _read_csv(path: Path, columns: CsvColumnMap) -> List[tuple]:
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except UnicodeDecodeError as e:
        raise SchemaError("invalid UTF-8", _first_bad_utf8_line(path)) from e
    except pd.errors.ParserError as e:
        found = _CSV_LINE.search(str(e))
        raise SchemaError(f"malformed CSV: {str(e).strip()}", int(found.group(1)) if found else None) from e
    except pd.errors.EmptyDataError as e:
        raise ValidationError(f"Corpus {path} is empty") from e
    if columns.text not in df.columns:
        raise SchemaError(f"CSV header lacks text column {columns.text!r}", 1)
    mapping = {
        "text": columns.text,
        "label": columns.label,
        "raw_score": columns.raw_score,
        "hate_target": columns.hate_target,
        "hate_type": columns.hate_type,
    }
    rows = []
    for offset, row in enumerate(df.to_dict("records")):
        payload = {field: row.get(col) for field, col in mapping.items() if col and col in row}
        # header is line 1
        rows.append((offset + 2, payload))
    return rows

def load_corpus(
    path: str,
    format: CorpusFormat,
    platform: str,
    columns: Optional[CsvColumnMap] = None
) -> Corpus:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Corpus file not found: {path}")

    if format == "jsonl":
        rows = _read_jsonl(path)
    elif format == "csv":
        rows = _read_csv(path, columns or CsvColumnMap())
    else:
        raise ValidationError(f"Unsupported corpus format: {format}")

    records = [_build_record(payload, platform, line_number) for line_number, payload in rows]
    if not records:
        raise ValidationError(f"Corpus {path} is empty")

    corpus = Corpus(records=tuple(records), platform=platform, provenance=Provenance(path=str(path), format=format))
    summary = summarize_corpus(corpus)
    logger.info(
        "loaded %s: %d records, hateful fraction %.3f",
        platform, summary["records"], summary["hateful_fraction"]
    )
    return corpus

def summarize_corpus(corpus: Corpus) -> Dict[str, Any]:
    return {
        "platform": corpus.platform,
        "records": len(corpus),
        "hateful": corpus.hateful_count,
        "hateful_fraction": corpus.hateful_fraction,
    }

def format_summary_line(corpus: Corpus) -> str:
    summary = summarize_corpus(corpus)
    return (
        f"{summary['platform']}: {summary['records']} records, "
        f"{summary['hateful']} hateful ({summary['hateful_fraction'] * 100:.1f}%)"
    )

def record_to_dict(record: Record) -> Dict[str, Any]:
    payload = {"text": record.text, "label": record.label, "platform": record.platform}
    for field in ("hate_target", "hate_type", "raw_score"):
        value = getattr(record, field)
        if value is not None:
            payload[field] = value
    return payload

def save_corpus(corpus: Corpus, path: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in corpus.records:
            f.write(json.dumps(record_to_dict(record), ensure_ascii=False, sort_keys=True))
            f.write("\n")
    return path

def load_cue_corpus(path: str, task: CueTask) -> CueCorpus:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Cue corpus file not found: {path}")
    names = CUE_LABELS[task]
    examples = []
    for line_number, payload in _read_jsonl(path):
        text = payload.get("text")
        if _blank(text):
            raise SchemaError("record has no text", line_number)
        label = payload.get("label")
        if isinstance(label, str) and label in names:
            label = names[label]
        try:
            label = _integral_label(label)
        except (TypeError, ValueError) as e:
            raise SchemaError(f"unreadable {task} label {label!r}", line_number) from e
        if label not in names.values():
            raise SchemaError(f"label {label} outside the {len(names)} {task} classes", line_number)
        examples.append(CueExample(text=normalize_text(str(text)), label=label))
    if not examples:
        raise ValidationError(f"Cue corpus {path} is empty")
    return CueCorpus(task=task, examples=tuple(examples))

def save_cue_corpus(corpus: CueCorpus, path: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for example in corpus.examples:
            f.write(json.dumps({"text": example.text, "label": example.label}, ensure_ascii=False, sort_keys=True))
            f.write("\n")
    return path
