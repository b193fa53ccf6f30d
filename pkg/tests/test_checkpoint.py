import io
import json
import zipfile

import numpy as np
import pytest
import torch

from src.detector.bundle import FUSION_FILE, load_bundle, save_bundle
from src.encoder.checkpoint import (
    HEADER_NAME, load_checkpoint, read_tensor_archive, save_checkpoint, write_tensor_archive
)
from src.encoder.model import EncoderStack, parameter_snapshot, snapshots_equal
from src.utils.errors import ConfigurationError
from src.utils.manifest import MANIFEST_NAME
from tests.utils import tiny_config, tiny_model, tiny_vocab

TEXTS = ["crush the vile vermin", "the people said lovely things"]

def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    vocab = tiny_vocab()
    torch.manual_seed(0)
    state = EncoderStack(tiny_config(), len(vocab), num_labels=3, task="sentiment").set_frozen(True)
    path = save_checkpoint(state, tmp_path / "sentiment.ckpt")
    loaded = load_checkpoint(path)
    assert snapshots_equal(parameter_snapshot(state), parameter_snapshot(loaded))
    assert loaded.frozen and loaded.task == "sentiment" and loaded.num_labels == 3
    assert loaded.config == state.config

def test_checkpoint_bytes_are_reproducible(tmp_path):
    torch.manual_seed(0)
    state = EncoderStack(tiny_config(), 40)
    first = save_checkpoint(state, tmp_path / "a.ckpt").read_bytes()
    second = save_checkpoint(state, tmp_path / "b.ckpt").read_bytes()
    assert first == second

def test_archive_layout(tmp_path):
    tensors = {"w": torch.arange(6, dtype=torch.float64).reshape(2, 3), "ids": torch.tensor([3, 1], dtype=torch.int64)}
    path = write_tensor_archive(tmp_path / "x.ckpt", {"kind": "test"}, tensors)
    with zipfile.ZipFile(path) as archive:
        names = archive.namelist()
        assert names == [HEADER_NAME, "ids.npy", "w.npy"]
        assert all(info.compress_type == zipfile.ZIP_STORED for info in archive.infolist())
        assert all(info.date_time == (1980, 1, 1, 0, 0, 0) for info in archive.infolist())
        header = json.loads(archive.read(HEADER_NAME))
        array = np.lib.format.read_array(io.BytesIO(archive.read("w.npy")))
    assert header["format_version"] == 1 and header["tensors"] == ["ids", "w"]
    assert array.dtype.str == "<f8"

    header, loaded = read_tensor_archive(path)
    assert torch.equal(loaded["w"], tensors["w"]) and torch.equal(loaded["ids"], tensors["ids"])

def test_float64_checkpoint(tmp_path):
    state = EncoderStack(tiny_config(), 30).double()
    loaded = load_checkpoint(save_checkpoint(state, tmp_path / "f64.ckpt"))
    assert loaded.token_embedding.weight.dtype == torch.float64
    assert snapshots_equal(parameter_snapshot(state), parameter_snapshot(loaded))

def test_checkpoint_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "missing.ckpt")
    path = write_tensor_archive(tmp_path / "other.ckpt", {"kind": "fusion"}, {})
    with pytest.raises(ConfigurationError):
        load_checkpoint(path)
    with pytest.raises(ConfigurationError):
        write_tensor_archive(tmp_path / "bad.ckpt", {}, {"b": torch.zeros(2, dtype=torch.bool)})

def test_bundle_round_trip_preserves_predictions(tmp_path):
    model = tiny_model(readout="gated_mean", seed=4)
    directory = save_bundle(model, tmp_path / "bundle", {"run": "test"}, seed=4)
    assert (directory / MANIFEST_NAME).exists()
    assert (directory / FUSION_FILE).exists()

    loaded = load_bundle(directory)
    assert loaded.options == model.options
    assert loaded.sentiment.frozen and loaded.aggression.frozen
    assert torch.equal(loaded.predict_proba(TEXTS), model.predict_proba(TEXTS))

    manifest = json.loads((directory / MANIFEST_NAME).read_text())
    assert manifest["extra"]["variant"] == "full"
    assert "detector.ckpt" in manifest["outputs"]

def test_missing_bundle(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_bundle(tmp_path / "nowhere")
