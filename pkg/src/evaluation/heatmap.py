import html
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from src.detector.predict import Prediction
from src.evaluation.schemas import TRACK_NAMES, HeatmapDoc
from src.utils.errors import ValidationError
from src.utils.hashing import write_json

TRACK_COLORS: Dict[str, Tuple[int, int, int]] = {
    "S": (123, 94, 167),
    "A": (230, 126, 34),
    "C": (39, 128, 94),
    "detector": (52, 101, 164),
}
TRACK_TITLES = {
    "S": "Sentiment cue (S)",
    "A": "Aggression cue (A)",
    "C": "Fusion gate (C)",
    "detector": "Detector attention",
}
VERDICTS = {0: "non-hateful", 1: "hateful"}

def intensities(values: Sequence[float]) -> List[float]:
    """Values scaled by the track maximum, so the largest value maps to 1."""
    peak = max(values) if values else 0.0
    if peak <= 0:
        return [0.0 for _ in values]
    return [max(0.0, v) / peak for v in values]

def cell_color(intensity: float, color: Tuple[int, int, int]) -> str:
    # white at 0, full track color at 1
    r, g, b = (int(round(255 - (255 - c) * intensity)) for c in color)
    return f"rgb({r},{g},{b})"

def build_heatmap(pred: Prediction, tokens: Sequence[str], text: str = "", label: Optional[int] = None) -> HeatmapDoc:
    tracks = {"S": list(pred.S), "A": list(pred.A), "C": list(pred.C), "detector": list(pred.detector_attention)}
    for name, values in tracks.items():
        if len(values) != len(tokens):
            raise ValidationError(f"track {name} has {len(values)} values for {len(tokens)} tokens")
    return HeatmapDoc(
        text=text,
        tokens=list(tokens),
        tracks=tracks,
        prediction=pred.label,
        probs=list(pred.probs),
        label=label,
    )

def render_html(doc: HeatmapDoc) -> str:
    rows = []
    for name in TRACK_NAMES:
        cells = []
        for token, value, level in zip(doc.tokens, doc.tracks[name], intensities(doc.tracks[name])):
            cells.append(
                f'<span class="tok" style="background-color: {cell_color(level, TRACK_COLORS[name])};" '
                f'title="{value:.4f}">{html.escape(token)}</span>'
            )
        rows.append(f'<tr><th>{html.escape(TRACK_TITLES[name])}</th><td>{" ".join(cells)}</td></tr>')

    verdict = f"Prediction: {VERDICTS[doc.prediction]} (p(hate) = {doc.probs[1]:.3f})"
    if doc.label is not None:
        verdict += f" | Label: {VERDICTS[doc.label]}"
    return "\n".join([
        "<!DOCTYPE html>",
        '<html lang="en">',
        '<head><meta charset="utf-8"><title>Token importance</title>',
        "<style>body{font-family:sans-serif;margin:1.5em}th{text-align:left;padding-right:1em;font-weight:normal}"
        ".tok{padding:2px 3px;border-radius:2px;display:inline-block;margin:1px}</style></head>",
        "<body>",
        f"<p><b>{html.escape(verdict)}</b></p>",
        f"<p>{html.escape(doc.text)}</p>",
        "<table>",
        *rows,
        "</table>",
        "</body>",
        "</html>",
        "",
    ])

def export_heatmap(
    pred: Prediction,
    tokens: Sequence[str],
    out_path: str,
    text: str = "",
    label: Optional[int] = None
) -> HeatmapDoc:
    """Writes `out_path` (HTML) and the same document as JSON next to it."""
    doc = build_heatmap(pred, tokens, text, label)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_html(doc))
    write_json(doc.model_dump(), out_path.with_suffix(".json"))
    return doc

def load_heatmap_json(path: str) -> HeatmapDoc:
    with open(path, "r", encoding="utf-8") as f:
        return HeatmapDoc(**json.load(f))
