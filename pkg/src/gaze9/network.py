"""The fixed eye-state network.

Topology: three blocks of [3x3 conv (64 filters) -> batch norm -> ReLU ->
2x2 max pool], then a 300-unit fully connected layer with ReLU, then a
10-way fully connected output.  Input strips are 32 x W x 3 with W a
multiple of 8, so the flattened feature size into FC1 is
(32/8) * (W/8) * filters: 4096 for W=128 and 2048 for W=64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import (BatchNorm, Conv2D, Dense, MaxPool2x2, ReLU,
                 KIND_BN, KIND_CONV, KIND_FC,
                 ShapeTableMismatch, load_weights, save_weights, softmax)


@dataclass(frozen=True)
class ModelConfig:
    width: int = 128
    height: int = 32
    blocks: int = 3
    filters: int = 64
    hidden: int = 300
    classes: int = 10

    def __post_init__(self):
        div = 1 << self.blocks
        if self.width <= 0 or self.width % div:
            raise ValueError(f"width must be a positive multiple of {div}, got {self.width}")
        if self.height <= 0 or self.height % div:
            raise ValueError(f"height must be a positive multiple of {div}, got {self.height}")
        for field in ("blocks", "filters", "hidden", "classes"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{field} must be positive")

    @property
    def feature_size(self) -> int:
        return (self.height >> self.blocks) * (self.width >> self.blocks) * self.filters


class GazeNet:
    def __init__(self, config: ModelConfig | None = None, seed: int = 0, dtype=np.float32):
        self.config = config or ModelConfig()
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        cfg = self.config
        self.layers = []
        cin = 3
        for _ in range(cfg.blocks):
            self.layers += [Conv2D(cin, cfg.filters, rng, dtype),
                            BatchNorm(cfg.filters, dtype=dtype),
                            ReLU(), MaxPool2x2()]
            cin = cfg.filters
        self.fc1 = Dense(cfg.feature_size, cfg.hidden, rng, dtype)
        self.fc_relu = ReLU()
        self.fc2 = Dense(cfg.hidden, cfg.classes, rng, dtype)

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        """x: (N, H, W, 3) -> logits (N, classes)."""
        if x.shape[1:] != (self.config.height, self.config.width, 3):
            raise ValueError(f"expected input {self.config.height}x{self.config.width}x3, "
                             f"got {x.shape[1:]}")
        h = x.astype(self.dtype, copy=False)
        for layer in self.layers:
            h = layer.forward(h, train=train)
        h = h.reshape(h.shape[0], -1)
        h = self.fc1.forward(h, train=train)
        h = self.fc_relu.forward(h, train=train)
        return self.fc2.forward(h, train=train)

    def backward(self, dlogits: np.ndarray) -> np.ndarray:
        dh = self.fc2.backward(dlogits)
        dh = self.fc_relu.backward(dh)
        dh = self.fc1.backward(dh)
        n = dh.shape[0]
        cfg = self.config
        dh = dh.reshape(n, cfg.height >> cfg.blocks, cfg.width >> cfg.blocks, cfg.filters)
        for layer in reversed(self.layers):
            dh = layer.backward(dh)
        return dh

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.forward(x, train=False))

    def parameters(self):
        """(name, param, grad) triples for every learnable tensor."""
        out = []
        for i, layer in enumerate(self.layers):
            for name, p, g in layer.params():
                out.append((f"{layer.kind}{i // 4 + 1}.{name}", p, g))
        for tag, layer in (("fc1", self.fc1), ("fc2", self.fc2)):
            for name, p, g in layer.params():
                out.append((f"{tag}.{name}", p, g))
        return out

    def param_count(self) -> int:
        return sum(p.size for _, p, _ in self.parameters())

    # --- serialization ------------------------------------------------

    def state_records(self):
        """All tensors (learnable + running stats) in topological order."""
        records = []
        for layer in self.layers:
            if isinstance(layer, Conv2D):
                records += [(KIND_CONV, layer.w), (KIND_CONV, layer.b)]
            elif isinstance(layer, BatchNorm):
                records += [(KIND_BN, layer.gamma), (KIND_BN, layer.beta),
                            (KIND_BN, layer.running_mean), (KIND_BN, layer.running_var)]
        records += [(KIND_FC, self.fc1.w), (KIND_FC, self.fc1.b),
                    (KIND_FC, self.fc2.w), (KIND_FC, self.fc2.b)]
        return records

    def save(self, path) -> None:
        if self.dtype != np.float32:
            raise ValueError("only float32 models are serialized "
                             "(float64 exists for gradient checks)")
        save_weights(self.state_records(), path)

    @classmethod
    def load(cls, path, config: ModelConfig | None = None) -> "GazeNet":
        records = load_weights(path)
        if config is None:
            config = _infer_config(records, path)
        net = cls(config, seed=0, dtype=np.float32)
        expected = net.state_records()
        if len(records) != len(expected):
            raise ShapeTableMismatch(
                f"{path}: expected {len(expected)} tensor records, found {len(records)}")
        for i, ((kind, arr), (want_kind, target)) in enumerate(zip(records, expected)):
            if kind != want_kind or arr.shape != target.shape:
                raise ShapeTableMismatch(
                    f"{path}: record {i} is kind {kind} shape {arr.shape}, "
                    f"expected kind {want_kind} shape {target.shape}")
            target[...] = arr
        return net


def _infer_config(records, path) -> ModelConfig:
    """Recover the configuration of a canonical (height 32) network."""
    try:
        conv1_w = next(arr for kind, arr in records
                       if kind == KIND_CONV and arr.ndim == 4)
        fc_shapes = [arr.shape for kind, arr in records
                     if kind == KIND_FC and arr.ndim == 2]
        filters = conv1_w.shape[3]
        feature, hidden = fc_shapes[0]
        classes = fc_shapes[1][1]
        width = 2 * feature // filters       # feature = 4 * (width/8) * filters
        return ModelConfig(width=width, filters=filters, hidden=hidden, classes=classes)
    except (StopIteration, IndexError, ValueError) as exc:
        raise ShapeTableMismatch(f"{path}: tensor shapes do not describe "
                                 f"a supported network ({exc})") from exc
