"""Network description and geometry accounting.

The generator is a stack of blocks, each holding ``layers_per_block`` dilated
causal convolution layers of filter width 2.  Within a block, layer ``l``
(1-based) has dilation ``2**(l-1)`` and a cyclic activation queue of the same
length.  Layer 1 of block 1 reads the scalar input stream (one channel); every
other layer reads ``channels`` channels.  A single fully connected layer maps
the last convolution output to ``quant_levels`` logits.

This module owns the structural invariants: per-layer shapes, queue sizes,
receptive field, and the JSON config format.  Weight storage lives in
:mod:`qwavenet.weights`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

SUPPORTED_FILTER_WIDTH = 2

CONFIG_KEYS = (
    "num_blocks",
    "layers_per_block",
    "filter_width",
    "channels",
    "quant_levels",
    "sample_rate",
)


class ConfigError(ValueError):
    """A model configuration violates a structural invariant."""


@dataclass(frozen=True)
class ModelConfig:
    """Full network description.

    The defaults describe the reference architecture: 2 blocks of 14 layers,
    128 channels, 256 linear quantization levels, 16 kHz audio.
    """

    num_blocks: int = 2
    layers_per_block: int = 14
    filter_width: int = 2
    channels: int = 128
    quant_levels: int = 256
    sample_rate: int = 16000

    @property
    def total_layers(self) -> int:
        return self.num_blocks * self.layers_per_block


@dataclass(frozen=True)
class LayerSpec:
    """Resolved geometry of one convolution layer.

    ``block_index`` and ``layer_index`` are 1-based; ``queue_length`` equals
    the dilation, and the queue stores ``queue_length * in_channels``
    elements.
    """

    block_index: int
    layer_index: int
    in_channels: int
    out_channels: int
    dilation: int
    queue_length: int

    @property
    def queue_elems(self) -> int:
        return self.queue_length * self.in_channels


def validate_config(cfg: ModelConfig) -> list[LayerSpec]:
    """Check every config invariant and return the ordered per-layer specs.

    Layers are listed block-major (all of block 1, then block 2, ...).
    Raises :class:`ConfigError` on any violation; pure otherwise.
    """
    if cfg.num_blocks < 1:
        raise ConfigError("num_blocks must be >= 1")
    if cfg.layers_per_block < 1:
        raise ConfigError("layers_per_block must be >= 1")
    if cfg.filter_width != SUPPORTED_FILTER_WIDTH:
        raise ConfigError(
            f"filter_width must be {SUPPORTED_FILTER_WIDTH}, got {cfg.filter_width}"
        )
    if cfg.channels < 1:
        raise ConfigError("channels must be >= 1")
    if cfg.quant_levels < 2:
        raise ConfigError("quant_levels must be >= 2")
    if cfg.sample_rate < 1:
        raise ConfigError("sample_rate must be >= 1")

    specs = []
    for b in range(1, cfg.num_blocks + 1):
        for l in range(1, cfg.layers_per_block + 1):
            dilation = 2 ** (l - 1)
            in_ch = 1 if (b == 1 and l == 1) else cfg.channels
            specs.append(
                LayerSpec(
                    block_index=b,
                    layer_index=l,
                    in_channels=in_ch,
                    out_channels=cfg.channels,
                    dilation=dilation,
                    queue_length=dilation,
                )
            )
    return specs


@dataclass(frozen=True)
class QueueMemory:
    """Per-layer and total queue element counts (elements, not bytes)."""

    per_layer: tuple[int, ...]
    total: int


def estimate_queue_memory(cfg: ModelConfig) -> QueueMemory:
    """Element counts of every activation queue (block-major order)."""
    specs = validate_config(cfg)
    per_layer = tuple(s.queue_elems for s in specs)
    return QueueMemory(per_layer=per_layer, total=sum(per_layer))


def receptive_field(cfg: ModelConfig) -> int:
    """Number of past input samples that influence one output sample.

    Exact value for the dilated stack: ``1 + sum(dilation * (filter_width - 1))``
    over all layers.
    """
    specs = validate_config(cfg)
    return 1 + sum(s.dilation * (cfg.filter_width - 1) for s in specs)


def config_to_dict(cfg: ModelConfig) -> dict:
    return {k: getattr(cfg, k) for k in CONFIG_KEYS}


def config_from_dict(data: dict) -> ModelConfig:
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = set(CONFIG_KEYS) - set(data)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    values = {}
    for k in CONFIG_KEYS:
        v = data[k]
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"config key {k} must be an integer, got {v!r}")
        values[k] = v
    cfg = ModelConfig(**values)
    validate_config(cfg)
    return cfg


def save_config(cfg: ModelConfig, path) -> None:
    validate_config(cfg)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_dict(cfg), f, indent=2)
        f.write("\n")


def load_config(path) -> ModelConfig:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ConfigError("config JSON must be an object")
    return config_from_dict(data)


def config_digest(cfg: ModelConfig) -> str:
    """Stable sha256 of the canonical JSON form, for provenance reports."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("ascii")).hexdigest()
