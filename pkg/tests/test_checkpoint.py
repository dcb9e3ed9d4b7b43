import numpy as np
import pytest

from attackprints import nn
from attackprints.blob import read_blob, write_blob
from attackprints.errors import FormatError


def test_checkpoint_round_trips_bitwise(tmp_path):
    model = nn.init_model(nn.victim_spec(), seed=42)
    model.m = np.random.default_rng(0).random(model.params.size).astype(np.float32)
    model.v = np.random.default_rng(1).random(model.params.size).astype(np.float32)
    model.t = 17
    path = tmp_path / "v.ckpt"
    nn.save_checkpoint(model, path)
    loaded = nn.load_checkpoint(path)
    assert loaded.spec == model.spec
    assert np.array_equal(loaded.params, model.params)
    assert np.array_equal(loaded.m, model.m)
    assert np.array_equal(loaded.v, model.v)
    assert loaded.t == 17 and loaded.seed == 42


def test_checkpoint_header_layout(tmp_path):
    model = nn.init_model(nn.victim_spec(), seed=0)
    path = tmp_path / "v.ckpt"
    nn.save_checkpoint(model, path)
    raw = path.read_bytes()
    assert raw[:4] == b"AFCK"
    desc_len = int.from_bytes(raw[8:12], "little")
    desc = raw[12 : 12 + desc_len].decode()
    assert desc == model.spec.descriptor()
    count = int.from_bytes(raw[12 + desc_len : 20 + desc_len], "little")
    assert count == model.params.size


def test_checkpoint_rejects_corruption(tmp_path):
    model = nn.init_model(nn.victim_spec(), seed=0)
    path = tmp_path / "v.ckpt"
    nn.save_checkpoint(model, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        nn.load_checkpoint(bad)
    truncated = tmp_path / "trunc.ckpt"
    truncated.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        nn.load_checkpoint(truncated)


def test_blob_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    for shape in [(2, 3), (28, 28, 1), (2, 28, 28, 1), (5,)]:
        arr = rng.standard_normal(shape).astype(np.float32)
        path = tmp_path / "a.bin"
        write_blob(path, arr)
        back = read_blob(path)
        assert back.shape == arr.shape
        assert np.array_equal(back, arr)


def test_blob_header_and_errors(tmp_path):
    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    path = tmp_path / "a.bin"
    write_blob(path, arr)
    raw = path.read_bytes()
    assert raw[:4] == b"AFPT"
    assert raw[8] == 0  # dtype code f32
    assert raw[9] == 2  # rank
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FormatError):
        read_blob(bad)
    short = tmp_path / "short.bin"
    short.write_bytes(raw[:-4])
    with pytest.raises(FormatError):
        read_blob(short)
