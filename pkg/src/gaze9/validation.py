"""Input validation helpers shared by the estimator and the service.

Strips are H x W x 3 arrays of reals in [0, 1]; batches stack them on a
leading axis.  Validators return a float32 array (copying only when the
input is not already float32) so downstream math never re-checks.
"""

from __future__ import annotations

import numpy as np

STRIP_HEIGHT = 32


def check_strip(strip, width: int | None = None, height: int = STRIP_HEIGHT) -> np.ndarray:
    arr = np.asarray(strip, dtype=np.float32)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"eye strip must be HxWx3, got shape {arr.shape}")
    if arr.shape[0] != height or (width is not None and arr.shape[1] != width):
        want = f"{height}x{width if width is not None else '*'}"
        raise ValueError(f"eye strip must be {want}, got {arr.shape[0]}x{arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("eye strip contains non-finite values")
    if arr.min() < -1e-6 or arr.max() > 1 + 1e-6:
        raise ValueError("eye strip values must lie in [0, 1]")
    return np.clip(arr, 0.0, 1.0)


def check_strip_batch(X, width: int | None = None, height: int = STRIP_HEIGHT) -> np.ndarray:
    X = np.asarray(X, dtype=np.float32)
    if X.ndim == 3:
        X = X[None]
    if X.ndim != 4 or X.shape[3] != 3:
        raise ValueError(f"strip batch must be NxHxWx3, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("strip batch is empty")
    if X.shape[1] != height or (width is not None and X.shape[2] != width):
        raise ValueError(f"strip batch has spatial size {X.shape[1]}x{X.shape[2]}, "
                         f"expected {height}x{width if width is not None else '*'}")
    if not np.all(np.isfinite(X)):
        raise ValueError("strip batch contains non-finite values")
    return np.clip(X, 0.0, 1.0)


def check_labels(y, n: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be one-dimensional, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        rounded = np.rint(np.asarray(y, dtype=np.float64))
        if not np.array_equal(rounded, np.asarray(y, dtype=np.float64)):
            raise ValueError("labels must be integers 0-9")
        y = rounded.astype(np.int64)
    if y.size and (y.min() < 0 or y.max() > 9):
        raise ValueError("labels must lie in 0-9")
    if n is not None and len(y) != n:
        raise ValueError(f"got {len(y)} labels for {n} samples")
    return y.astype(np.int64)
