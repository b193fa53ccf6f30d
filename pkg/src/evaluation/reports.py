import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from src.evaluation.schemas import AblationReport, ErrorBreakdown, EvalMatrix
from src.utils.hashing import write_json

FLOAT_FORMAT = "%.6f"

def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return value

def _write_frame(frame: pd.DataFrame, path: Path, index: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n", encoding="utf-8")
    return path

def matrix_payload(matrix: EvalMatrix) -> Dict[str, Any]:
    payload = matrix.model_dump()
    payload["averages"] = matrix.averages()
    payload["off_diagonal_mean"] = _finite_or_none(matrix.off_diagonal_mean())
    payload["in_platform_mean"] = _finite_or_none(matrix.in_platform_mean())
    return payload

def write_matrix(matrix: EvalMatrix, out_dir: str, stem: Optional[str] = None) -> List[Path]:
    """`<stem>.csv` (sources as rows, targets as columns) and `<stem>.json`."""
    out_dir = Path(out_dir)
    stem = stem or matrix.name
    return [
        _write_frame(matrix.to_frame(), out_dir / f"{stem}.csv"),
        write_json(matrix_payload(matrix), out_dir / f"{stem}.json"),
    ]

def write_ablation(reports: List[AblationReport], out_dir: str) -> List[Path]:
    out_dir = Path(out_dir)
    paths = []
    for report in reports:
        paths.extend(write_matrix(report.scores, out_dir, f"matrix_{report.variant}"))
    summary = pd.DataFrame(
        [
            {
                "variant": r.variant,
                "off_diagonal_mean": r.off_diagonal_mean,
                "off_diagonal_std": r.off_diagonal_std,
                "delta_from_full": r.delta_from_full,
                "seeds": len(r.seeds),
            }
            for r in reports
        ]
    )
    paths.append(_write_frame(summary, out_dir / "ablation.csv", index=False))
    paths.append(write_json(
        {"reports": [dict(r.model_dump(exclude={"scores"}), scores=matrix_payload(r.scores)) for r in reports]},
        out_dir / "ablation.json",
    ))
    return paths

def write_breakdown(breakdown: ErrorBreakdown, out_dir: str) -> List[Path]:
    out_dir = Path(out_dir)
    stem = f"errors_{breakdown.dimension}"
    frame = pd.DataFrame(
        [dict(group=name, **group.model_dump()) for name, group in breakdown.groups.items()],
        columns=["group", "count", "evaluated", "errors", "error_rate"],
    )
    return [
        _write_frame(frame, out_dir / f"{stem}.csv", index=False),
        write_json(breakdown.model_dump(), out_dir / f"{stem}.json"),
    ]
