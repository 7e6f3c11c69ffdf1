"""Weight container and binary file format round-trips."""

import numpy as np
import pytest

from qwavenet import (
    BadMagicError,
    ModelConfig,
    TruncatedFileError,
    WeightFileError,
    WeightShapeError,
    WeightSet,
    load_weights,
    random_weights,
    save_weights,
    validate_config,
)

CFG = ModelConfig(num_blocks=2, layers_per_block=3, channels=5, quant_levels=16)


def expected_file_size(cfg):
    specs = validate_config(cfg)
    header = 8 + 6 * 4
    kernels = sum(2 * s.out_channels * s.in_channels for s in specs)
    fc = cfg.channels * cfg.quant_levels + cfg.quant_levels
    return header + 4 * (kernels + fc)


def test_random_weights_shapes_and_range():
    ws = random_weights(CFG, seed=1, scale=0.3)
    ws.validate(CFG)
    specs = validate_config(CFG)
    assert len(ws.kernels) == len(specs)
    for spec, (k0, k1) in zip(specs, ws.kernels):
        assert k0.shape == k1.shape == (spec.out_channels, spec.in_channels)
        assert k0.dtype == k1.dtype == np.float32
    assert ws.fc_weight.shape == (5, 16)
    assert ws.fc_bias.shape == (16,)
    flat = np.concatenate(
        [k.ravel() for pair in ws.kernels for k in pair]
        + [ws.fc_weight.ravel(), ws.fc_bias.ravel()]
    )
    assert np.all(np.abs(flat) <= 0.3)


def test_random_weights_deterministic():
    a = random_weights(CFG, seed=42)
    b = random_weights(CFG, seed=42)
    c = random_weights(CFG, seed=43)
    assert np.array_equal(a.fc_weight, b.fc_weight)
    assert all(
        np.array_equal(x, y)
        for pa, pb in zip(a.kernels, b.kernels)
        for x, y in zip(pa, pb)
    )
    assert not np.array_equal(a.fc_weight, c.fc_weight)


def test_random_weights_rejects_bad_scale():
    with pytest.raises(ValueError):
        random_weights(CFG, seed=0, scale=0.0)


def test_roundtrip_bit_exact(tmp_path):
    ws = random_weights(CFG, seed=7)
    path = tmp_path / "w.bin"
    save_weights(path, ws, CFG)
    back = load_weights(path, CFG)
    for (a0, a1), (b0, b1) in zip(ws.kernels, back.kernels):
        assert np.array_equal(a0, b0) and a0.dtype == b0.dtype
        assert np.array_equal(a1, b1)
    assert np.array_equal(ws.fc_weight, back.fc_weight)
    assert np.array_equal(ws.fc_bias, back.fc_bias)


def test_file_size_matches_layout(tmp_path):
    path = tmp_path / "w.bin"
    save_weights(path, random_weights(CFG, seed=7), CFG)
    assert path.stat().st_size == expected_file_size(CFG)


def test_file_starts_with_magic(tmp_path):
    path = tmp_path / "w.bin"
    save_weights(path, random_weights(CFG, seed=7), CFG)
    assert path.read_bytes()[:8] == b"FWAVE001"


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "w.bin"
    save_weights(path, random_weights(CFG, seed=7), CFG)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(BadMagicError):
        load_weights(path, CFG)


@pytest.mark.parametrize("keep", [4, 8, 20, 100])
def test_load_rejects_truncated(tmp_path, keep):
    path = tmp_path / "w.bin"
    save_weights(path, random_weights(CFG, seed=7), CFG)
    raw = path.read_bytes()
    path.write_bytes(raw[:keep])
    with pytest.raises((BadMagicError, TruncatedFileError)):
        load_weights(path, CFG)


def test_load_rejects_trailing_bytes(tmp_path):
    path = tmp_path / "w.bin"
    save_weights(path, random_weights(CFG, seed=7), CFG)
    path.write_bytes(path.read_bytes() + b"\0")
    with pytest.raises(WeightFileError):
        load_weights(path, CFG)


def test_load_rejects_config_mismatch(tmp_path):
    path = tmp_path / "w.bin"
    save_weights(path, random_weights(CFG, seed=7), CFG)
    other = ModelConfig(num_blocks=2, layers_per_block=3, channels=6, quant_levels=16)
    with pytest.raises(WeightShapeError):
        load_weights(path, other)


def test_validate_rejects_wrong_shapes():
    ws = random_weights(CFG, seed=7)
    bad = WeightSet(
        kernels=ws.kernels,
        fc_weight=ws.fc_weight.T.copy(),
        fc_bias=ws.fc_bias,
    )
    with pytest.raises(WeightShapeError):
        bad.validate(CFG)
    bad = WeightSet(
        kernels=ws.kernels[:-1],
        fc_weight=ws.fc_weight,
        fc_bias=ws.fc_bias,
    )
    with pytest.raises(WeightShapeError):
        bad.validate(CFG)


def test_save_validates_before_writing(tmp_path):
    ws = random_weights(CFG, seed=7)
    other = ModelConfig(num_blocks=1, layers_per_block=3, channels=5, quant_levels=16)
    path = tmp_path / "w.bin"
    with pytest.raises(WeightShapeError):
        save_weights(path, ws, other)
    assert not path.exists()
