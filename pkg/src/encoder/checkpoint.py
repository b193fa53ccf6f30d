"""Checkpoint archives.

A checkpoint is a zip file (entries stored, fixed timestamps) holding:

    config.json      format version plus whatever header the writer supplies
    <name>.npy       one entry per tensor, NumPy .npy layout, little-endian
                     dtype (<f4, <f8 or <i8) and C order

Reading an archive back yields tensors bit-identical to the ones written.
"""
import io
import json
import zipfile
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
import torch

from src.encoder.config import EncoderConfig
from src.encoder.model import EncoderStack
from src.utils.errors import ConfigurationError

FORMAT_VERSION = 1
HEADER_NAME = "config.json"
_FIXED_DATE = (1980, 1, 1, 0, 0, 0)
_LITTLE_ENDIAN = {
    torch.float32: np.dtype("<f4"),
    torch.float64: np.dtype("<f8"),
    torch.int64: np.dtype("<i8"),
}

def _entry(name: str) -> zipfile.ZipInfo:
    info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    return info

def write_tensor_archive(path: str, header: Dict[str, Any], tensors: Dict[str, torch.Tensor]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = dict(header, format_version=FORMAT_VERSION, tensors=sorted(tensors))
    with zipfile.ZipFile(path, "w") as archive:
        archive.writestr(_entry(HEADER_NAME), json.dumps(header, indent=2, sort_keys=True))
        for name in sorted(tensors):
            tensor = tensors[name].detach().cpu()
            if tensor.dtype not in _LITTLE_ENDIAN:
                raise ConfigurationError(f"tensor {name} has unsupported dtype {tensor.dtype}")
            array = np.ascontiguousarray(tensor.numpy()).astype(_LITTLE_ENDIAN[tensor.dtype], copy=False)
            buffer = io.BytesIO()
            np.lib.format.write_array(buffer, array, allow_pickle=False)
            archive.writestr(_entry(f"{name}.npy"), buffer.getvalue())
    return path

def read_tensor_archive(path: str) -> Tuple[Dict[str, Any], Dict[str, torch.Tensor]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    with zipfile.ZipFile(path, "r") as archive:
        header = json.loads(archive.read(HEADER_NAME).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ConfigurationError(
                f"{path}: checkpoint format {header.get('format_version')} is not {FORMAT_VERSION}"
            )
        tensors = {}
        for name in header["tensors"]:
            array = np.lib.format.read_array(io.BytesIO(archive.read(f"{name}.npy")), allow_pickle=False)
            tensors[name] = torch.from_numpy(array.astype(array.dtype.newbyteorder("="), copy=True))
    return header, tensors

def save_checkpoint(state: EncoderStack, path: str) -> Path:
    header = {
        "kind": "encoder",
        "encoder": state.config.model_dump(),
        "vocab_size": state.vocab_size,
        "num_labels": state.num_labels,
        "task": state.task,
        "frozen": state.frozen,
    }
    return write_tensor_archive(path, header, state.state_dict())

def load_checkpoint(path: str) -> EncoderStack:
    header, tensors = read_tensor_archive(path)
    if header.get("kind") != "encoder":
        raise ConfigurationError(f"{path} is not an encoder checkpoint")
    state = EncoderStack(
        EncoderConfig(**header["encoder"]),
        vocab_size=header["vocab_size"],
        num_labels=header["num_labels"],
        task=header["task"],
    )
    if any(t.dtype == torch.float64 for t in tensors.values()):
        state = state.double()
    try:
        state.load_state_dict(tensors, strict=True)
    except RuntimeError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    state.set_frozen(bool(header["frozen"]))
    state.eval()
    return state
