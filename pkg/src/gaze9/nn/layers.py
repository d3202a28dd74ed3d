"""Dense layers with hand-written backward passes.

All tensors are NHWC numpy arrays.  Every layer follows the same protocol:
``forward(x, train=True)`` caches whatever the matching ``backward(dy)``
needs; ``backward`` fills the layer's parameter gradients in place and
returns the gradient with respect to the input.  The dtype of the
parameters rules the math: float32 for real models, float64 when the
gradient-check tests need headroom below the 1e-4 tolerance.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeMismatch(ValueError):
    """Input shape incompatible with the layer's parameters."""


def _uniform_init(rng: np.random.Generator, fan_in: int, shape, dtype):
    # Zero-mean uniform scaled by fan-in.
    limit = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Conv2D:
    """3x3 convolution, stride 1, zero padding 1 (spatial size preserved).

    Weights are stored K x K x Cin x Cout.  The forward pass lowers each
    3x3 neighbourhood to a row (im2col) so the contraction runs as one
    matrix product.
    """

    kind = "conv"

    def __init__(self, in_channels: int, out_channels: int,
                 rng: np.random.Generator | None = None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.w = _uniform_init(rng, 9 * in_channels, (3, 3, in_channels, out_channels), dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeMismatch(f"conv input must be NxHxWxC, got shape {x.shape}")
        cin = self.w.shape[2]
        if x.shape[3] != cin:
            raise ShapeMismatch(f"conv expects {cin} input channels, got {x.shape[3]}")
        n, h, w, _ = x.shape
        xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
        # (N, H, W, C, 3, 3) -> rows of the 3x3xC window in (ky, kx, c) order
        cols = sliding_window_view(xp, (3, 3), axis=(1, 2))
        cols = np.ascontiguousarray(cols.transpose(0, 1, 2, 4, 5, 3)).reshape(n * h * w, 9 * cin)
        y = cols @ self.w.reshape(9 * cin, -1) + self.b
        if train:
            self._cache = (x.shape, cols)
        return y.reshape(n, h, w, -1)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        (n, h, w, cin), cols = self._cache
        cout = self.w.shape[3]
        dyf = dy.reshape(n * h * w, cout)
        self.dw[...] = (cols.T @ dyf).reshape(self.w.shape)
        self.db[...] = dyf.sum(axis=0)
        dcols = (dyf @ self.w.reshape(9 * cin, cout).T).reshape(n, h, w, 3, 3, cin)
        dxp = np.zeros((n, h + 2, w + 2, cin), dtype=dy.dtype)
        for ky in range(3):
            for kx in range(3):
                dxp[:, ky:ky + h, kx:kx + w, :] += dcols[:, :, :, ky, kx, :]
        return dxp[:, 1:1 + h, 1:1 + w, :]

    def params(self):
        return [("w", self.w, self.dw), ("b", self.b, self.db)]


class BatchNorm:
    """Per-channel batch normalization over the N, H, W axes.

    Train mode normalizes by batch statistics and folds them into the
    running estimates (running <- momentum*running + (1-momentum)*batch);
    Infer mode uses the running estimates only and is a pure function.
    Running stats start at (0, 1) so an untrained layer can already infer.
    """

    kind = "bn"

    def __init__(self, channels: int, epsilon: float = 1e-5, momentum: float = 0.9,
                 dtype=np.float32):
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.epsilon = epsilon
        self.momentum = momentum
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self._cache = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if x.shape[-1] != self.gamma.shape[0]:
            raise ShapeMismatch(f"batchnorm expects {self.gamma.shape[0]} channels, "
                                f"got {x.shape[-1]}")
        axes = tuple(range(x.ndim - 1))
        if train:
            count = int(np.prod([x.shape[a] for a in axes]))
            if count < 2:
                raise ValueError("batchnorm train mode needs at least 2 samples per channel")
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.running_mean[...] = m * self.running_mean + (1 - m) * mean
            self.running_var[...] = m * self.running_var + (1 - m) * var
            inv_std = 1.0 / np.sqrt(var + self.epsilon)
            xhat = (x - mean) * inv_std
            self._cache = (xhat, inv_std, count)
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + self.epsilon)
            xhat = (x - self.running_mean) * inv_std
        return self.gamma * xhat + self.beta

    def backward(self, dy: np.ndarray) -> np.ndarray:
        xhat, inv_std, count = self._cache
        axes = tuple(range(dy.ndim - 1))
        self.dbeta[...] = dy.sum(axis=axes)
        self.dgamma[...] = (dy * xhat).sum(axis=axes)
        # dx = gamma*inv_std * (dy - mean(dy) - xhat * mean(dy*xhat))
        dxhat = dy * self.gamma
        return inv_std * (dxhat
                          - dxhat.mean(axis=axes)
                          - xhat * (dxhat * xhat).mean(axis=axes))

    def params(self):
        return [("gamma", self.gamma, self.dgamma), ("beta", self.beta, self.dbeta)]


class ReLU:
    """max(0, x); the gradient is blocked where x <= 0 (tie at 0 blocks)."""

    kind = "relu"

    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        mask = x > 0
        if train:
            self._mask = mask
        return np.where(mask, x, x.dtype.type(0))

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return np.where(self._mask, dy, dy.dtype.type(0))

    def params(self):
        return []


class MaxPool2x2:
    """Disjoint 2x2 max pooling, stride 2.

    Backward routes each output gradient to exactly one input position:
    the first argmax in scan order (row-major within the window), so ties
    are deterministic.
    """

    kind = "pool"

    def __init__(self):
        self._cache = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ShapeMismatch(f"maxpool needs even spatial dims, got {h}x{w}")
        windows = (x.reshape(n, h // 2, 2, w // 2, 2, c)
                    .transpose(0, 1, 3, 2, 4, 5)
                    .reshape(n, h // 2, w // 2, 4, c))
        idx = windows.argmax(axis=3)
        y = np.take_along_axis(windows, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
        if train:
            self._cache = (x.shape, idx)
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        (n, h, w, c), idx = self._cache
        dwin = np.zeros((n, h // 2, w // 2, 4, c), dtype=dy.dtype)
        np.put_along_axis(dwin, idx[:, :, :, None, :], dy[:, :, :, None, :], axis=3)
        return (dwin.reshape(n, h // 2, w // 2, 2, 2, c)
                    .transpose(0, 1, 3, 2, 4, 5)
                    .reshape(n, h, w, c))

    def params(self):
        return []


class Dense:
    """Fully connected layer, y = x @ W + b with W stored D x M."""

    kind = "fc"

    def __init__(self, in_dim: int, out_dim: int,
                 rng: np.random.Generator | None = None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.w = _uniform_init(rng, in_dim, (in_dim, out_dim), dtype)
        self.b = np.zeros(out_dim, dtype=dtype)
        self.dw = np.zeros_like(self.w)
        self.db = np.zeros_like(self.b)
        self._cache = None

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        if x.shape[-1] != self.w.shape[0]:
            raise ShapeMismatch(f"dense expects input dim {self.w.shape[0]}, "
                                f"got {x.shape[-1]}")
        if train:
            self._cache = x
        return x @ self.w + self.b

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x = self._cache
        self.dw[...] = x.T @ dy
        self.db[...] = dy.sum(axis=0)
        return dy @ self.w.T

    def params(self):
        return [("w", self.w, self.dw), ("b", self.b, self.db)]
