from .layers import BatchNorm, Conv2D, Dense, MaxPool2x2, ReLU, ShapeMismatch
from .losses import softmax, softmax_cross_entropy, softmax_cross_entropy_batch
from .optim import NonFiniteGradient, SGDMomentum
from .io import (BadMagic, ShapeTableMismatch, TruncatedPayload, WeightFormatError,
                 KIND_BN, KIND_CONV, KIND_FC, load_weights, save_weights)

__all__ = [
    "BatchNorm", "Conv2D", "Dense", "MaxPool2x2", "ReLU", "ShapeMismatch",
    "softmax", "softmax_cross_entropy", "softmax_cross_entropy_batch",
    "NonFiniteGradient", "SGDMomentum",
    "BadMagic", "ShapeTableMismatch", "TruncatedPayload", "WeightFormatError",
    "KIND_BN", "KIND_CONV", "KIND_FC", "load_weights", "save_weights",
]
