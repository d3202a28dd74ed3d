"""The eye-state classifier, wrapped as a scikit-learn style estimator.

``GazeDirectionClassifier`` owns the fixed conv topology and the training
loop: SGD with momentum 0.9, learning rate halved on a fixed schedule,
flip/HSV augmentation streamed per epoch over the geometrically expanded
pool, and best-epoch selection by validation top-1.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .augment import AugmentConfig, training_stream
from .network import GazeNet, ModelConfig
from .nn import NonFiniteGradient, SGDMomentum, softmax, softmax_cross_entropy_batch
from .validation import check_labels, check_strip_batch


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, batch: int, detail: str = "non-finite loss"):
        super().__init__(f"{detail} in epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class NoEyesDetected(ValueError):
    """No candidate eye strips for this frame; the caller skips it."""


class GazeDirectionClassifier(BaseEstimator, ClassifierMixin):
    """fit(X, y) / predict(X) over eye strips (N, 32, W, 3) in [0, 1].

    ``augment=None`` trains on the raw images; pass an AugmentConfig to
    stream flips + HSV jitter over the expanded pool.  ``steps_per_epoch``
    caps the number of batches per epoch (None = the full pool).
    """

    def __init__(self, width: int = 128, height: int = 32, filters: int = 64,
                 hidden: int = 300, epochs: int = 30, batch_size: int = 32,
                 learning_rate: float = 0.01, momentum: float = 0.9,
                 lr_halving_period: int = 10, augment: AugmentConfig | None = None,
                 steps_per_epoch: int | None = None, seed: int = 0, verbose: int = 0):
        self.width = width
        self.height = height
        self.filters = filters
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.lr_halving_period = lr_halving_period
        self.augment = augment
        self.steps_per_epoch = steps_per_epoch
        self.seed = seed
        self.verbose = verbose

    # --- training -------------------------------------------------------

    def fit(self, X, y, validation=None):
        X = check_strip_batch(X, self.width, self.height)
        y = check_labels(y, len(X))
        if validation is not None:
            X_val = check_strip_batch(validation[0], self.width, self.height)
            y_val = check_labels(validation[1], len(X_val))

        net = GazeNet(ModelConfig(width=self.width, height=self.height,
                                  filters=self.filters, hidden=self.hidden),
                      seed=self.seed)
        opt = SGDMomentum(net.parameters(), self.learning_rate, self.momentum)
        rng = np.random.default_rng(self.seed)

        history = []
        best_top1 = -1.0
        best_records = None
        for epoch in range(self.epochs):
            opt.lr = self.learning_rate * 0.5 ** (epoch // self.lr_halving_period)
            losses = []
            for step, (xb, yb) in enumerate(self._epoch_batches(X, y, rng, epoch)):
                logits = net.forward(xb, train=True)
                loss, _, dlogits = softmax_cross_entropy_batch(logits, yb)
                if not np.isfinite(loss):
                    raise TrainingDiverged(epoch, step)
                net.backward(dlogits)
                try:
                    opt.step()
                except NonFiniteGradient as exc:
                    raise TrainingDiverged(epoch, step, str(exc)) from exc
                losses.append(loss)
            entry = {"epoch": epoch, "loss": float(np.mean(losses))}
            if validation is not None:
                entry["val_top1"] = _accuracy(_forward_proba(net, X_val), y_val)
                # ties keep the later epoch: equal accuracy, more training
                if entry["val_top1"] >= best_top1:
                    best_top1 = entry["val_top1"]
                    best_records = [(k, a.copy()) for k, a in net.state_records()]
            history.append(entry)
            if self.verbose:
                print(f"epoch {epoch}: loss {entry['loss']:.4f}"
                      + (f" val_top1 {entry.get('val_top1', float('nan')):.4f}"
                         if validation is not None else ""))

        if best_records is not None:
            for (_, live), (_, saved) in zip(net.state_records(), best_records):
                live[...] = saved
        self.net_ = net
        self.history_ = history
        self.classes_ = np.arange(10)
        return self

    def _epoch_batches(self, X, y, rng, epoch):
        bs = self.batch_size
        if self.augment is not None:
            stream = training_stream(X, y, self.augment, self.seed, epoch)
        else:
            order = rng.permutation(len(X))
            stream = ((X[i], int(y[i])) for i in order)
        if self.steps_per_epoch is not None:
            stream = itertools.islice(stream, self.steps_per_epoch * bs)
        while True:
            chunk = list(itertools.islice(stream, bs))
            if len(chunk) < 2:
                # batch statistics are undefined on a single sample
                return
            xb = np.stack([c[0] for c in chunk])
            yb = np.array([c[1] for c in chunk], dtype=np.int64)
            yield xb, yb

    # --- inference ------------------------------------------------------

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_strip_batch(X, self.width, self.height)
        return _forward_proba(self.net_, X)

    def predict(self, X) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)

    def predict_strip(self, strip) -> np.ndarray:
        """Scores for a single strip (the per-frame entry point)."""
        return self.predict_proba(strip[None] if np.asarray(strip).ndim == 3
                                  else strip)[0]

    def _check_fitted(self):
        if not hasattr(self, "net_"):
            raise NotFittedError("this GazeDirectionClassifier has not been fitted; "
                                 "call fit or from_weights first")

    # --- persistence ----------------------------------------------------

    def save_weights(self, path) -> None:
        self._check_fitted()
        self.net_.save(path)

    @classmethod
    def from_weights(cls, path) -> "GazeDirectionClassifier":
        net = GazeNet.load(path)
        clf = cls(width=net.config.width, height=net.config.height,
                  filters=net.config.filters, hidden=net.config.hidden)
        clf.net_ = net
        clf.history_ = []
        clf.classes_ = np.arange(10)
        return clf


def _forward_proba(net: GazeNet, X: np.ndarray, chunk: int = 256) -> np.ndarray:
    out = np.empty((len(X), net.config.classes), dtype=np.float64)
    for i in range(0, len(X), chunk):
        out[i:i + chunk] = softmax(net.forward(X[i:i + chunk], train=False))
    return out


def _accuracy(probs: np.ndarray, y: np.ndarray) -> float:
    return float((probs.argmax(axis=1) == y).mean())


# --- evaluation ----------------------------------------------------------


@dataclass
class EvalReport:
    """Top-1/top-2 accuracy (percent), confusion at top-1 (rows = truth),
    and per-class sample counts."""

    top1: float
    top2: float
    confusion: list[list[int]]
    counts: list[int]

    def __post_init__(self):
        if self.top1 > self.top2 + 1e-9:
            raise ValueError("top-1 accuracy cannot exceed top-2")
        for row, count in zip(self.confusion, self.counts):
            if sum(row) != count:
                raise ValueError("confusion row sums must equal per-class counts")

    def to_json(self) -> str:
        return json.dumps({"top1": self.top1, "top2": self.top2,
                           "confusion": self.confusion, "counts": self.counts},
                          indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        obj = json.loads(text)
        return cls(obj["top1"], obj["top2"], obj["confusion"], obj["counts"])


def evaluate(model, X, y) -> EvalReport:
    """model needs predict_proba; a sample is top-k correct when its truth
    is among the k highest scores."""
    y = check_labels(y)
    if len(y) == 0:
        raise ValueError("cannot evaluate an empty split")
    probs = model.predict_proba(X)
    order = np.argsort(-probs, axis=1)
    top1_hit = order[:, 0] == y
    top2_hit = (order[:, :2] == y[:, None]).any(axis=1)
    confusion = np.zeros((10, 10), dtype=int)
    for truth, pred in zip(y, order[:, 0]):
        confusion[truth, pred] += 1
    return EvalReport(top1=float(top1_hit.mean() * 100.0),
                      top2=float(top2_hit.mean() * 100.0),
                      confusion=confusion.tolist(),
                      counts=confusion.sum(axis=1).tolist())


def disambiguate(model, candidates) -> tuple[int, int, float]:
    """Pick the candidate strip whose best class score is largest.

    Returns (candidate index, predicted state, score); ties go to the
    lowest index.  An empty candidate list means no eyes were found in
    the frame and the frame should be skipped.
    """
    candidates = list(candidates)
    if not candidates:
        raise NoEyesDetected("no candidate eye strips in this frame")
    probs = model.predict_proba(np.stack(candidates))
    best_per_candidate = probs.max(axis=1)
    idx = int(np.argmax(best_per_candidate))
    return idx, int(probs[idx].argmax()), float(best_per_candidate[idx])


def write_history_csv(history, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss", "val_top1"])
        for entry in history:
            writer.writerow([entry["epoch"], f"{entry['loss']:.6f}",
                             "" if "val_top1" not in entry
                             else f"{entry['val_top1']:.6f}"])
