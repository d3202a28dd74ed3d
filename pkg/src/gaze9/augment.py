"""Training-time augmentation: horizontal flip with label swap, HSV
jitter, and geometric expansion (rotation / scale / shift).

Flip and HSV jitter are applied on the fly while streaming; geometric
expansion is a pre-pass that multiplies the training set, here realized
as a virtual index of (image, transform) pairs so nothing is
materialized until a sample is drawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .states import MIRROR
from .synth import HEIGHT

# compass order: N, NE, E, SE, S, SW, W, NW as (dx, dy)
_COMPASS = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


@dataclass(frozen=True)
class AugmentConfig:
    flip_probability: float = 0.5
    hue_amplitude: float = 10.0        # degrees
    saturation_amplitude: float = 0.1
    value_amplitude: float = 0.1
    rotation_angles: tuple[float, ...] = (2.5, -2.5)
    scale_factors: tuple[float, ...] = (1.2, 1.5)
    shift_pixels: int = 5

    def __post_init__(self):
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError("flip probability must lie in [0, 1]")
        if any(s < 1.0 for s in self.scale_factors):
            raise ValueError("scale factors must be >= 1")
        if self.shift_pixels < 1:
            raise ValueError("shift magnitude must be >= 1 pixel")
        if min(self.hue_amplitude, self.saturation_amplitude, self.value_amplitude) < 0:
            raise ValueError("jitter amplitudes must be non-negative")

    @property
    def variant_count(self) -> int:
        return len(self.rotation_angles) + len(self.scale_factors) + 8


def hflip_with_label_swap(strip: np.ndarray, label: int):
    """Mirror about the vertical axis; directions swap 1<->3, 4<->6, 7<->9."""
    return strip[:, ::-1].copy(), MIRROR[label]


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Hexcone conversion; h in [0, 360), s and v in [0, 1].
    Grayscale pixels take h = 0 and s = 0."""
    rgb64 = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb64[..., 0], rgb64[..., 1], rgb64[..., 2]
    v = rgb64.max(axis=-1)
    c = v - rgb64.min(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v > 0, c / v, 0.0)
        hp = np.select(
            [c == 0, v == r, v == g],
            [0.0,
             ((g - b) / c) % 6.0,
             (b - r) / c + 2.0],
            default=(r - g) / c + 4.0)
    h = 60.0 * hp
    out = np.stack([h, s, v], axis=-1)
    return out.astype(rgb.dtype) if np.asarray(rgb).dtype == np.float32 else out


def hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    hsv64 = np.asarray(hsv, dtype=np.float64)
    h, s, v = hsv64[..., 0], hsv64[..., 1], hsv64[..., 2]
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    zeros = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    rgb_by_sector = np.stack([
        np.stack([c, x, zeros], axis=-1),
        np.stack([x, c, zeros], axis=-1),
        np.stack([zeros, c, x], axis=-1),
        np.stack([zeros, x, c], axis=-1),
        np.stack([x, zeros, c], axis=-1),
        np.stack([c, zeros, x], axis=-1),
    ], axis=0)
    picked = np.take_along_axis(rgb_by_sector,
                                sector[None, ..., None],
                                axis=0)[0]
    out = picked + (v - c)[..., None]
    return out.astype(hsv.dtype) if np.asarray(hsv).dtype == np.float32 else out


def hsv_jitter(strip: np.ndarray, config: AugmentConfig, seed: int) -> np.ndarray:
    """One (dh, ds, dv) draw per image, applied to every pixel."""
    rng = np.random.default_rng(seed)
    dh = rng.uniform(-config.hue_amplitude, config.hue_amplitude)
    ds = rng.uniform(-config.saturation_amplitude, config.saturation_amplitude)
    dv = rng.uniform(-config.value_amplitude, config.value_amplitude)
    if dh == 0.0 and ds == 0.0 and dv == 0.0:
        return strip.copy()
    return _apply_hsv_delta(strip, dh, ds, dv)


def _apply_hsv_delta(strip, dh, ds, dv):
    hsv = rgb_to_hsv(strip)
    hsv[..., 0] = (hsv[..., 0] + dh) % 360.0
    hsv[..., 1] = np.clip(hsv[..., 1] + ds, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] + dv, 0.0, 1.0)
    return np.clip(hsv_to_rgb(hsv), 0.0, 1.0).astype(np.float32)


def _shift(strip, dx, dy):
    h, w = strip.shape[:2]
    m = max(abs(dx), abs(dy))
    padded = np.pad(strip, ((m, m), (m, m), (0, 0)), mode="edge")
    return padded[m + dy:m + dy + h, m + dx:m + dx + w]


def _scale_crop(strip, factor):
    h, w = strip.shape[:2]
    zoomed = ndimage.zoom(strip, (factor, factor, 1.0), order=1, mode="nearest")
    zh, zw = zoomed.shape[:2]
    y0 = (zh - h) // 2
    x0 = (zw - w) // 2
    return zoomed[y0:y0 + h, x0:x0 + w]


def geometric_variant(strip: np.ndarray, tag: int, config: AugmentConfig) -> np.ndarray:
    """One of the expansion transforms: rotations, then scales, then the
    8 compass shifts, indexed 0 .. variant_count-1."""
    n_rot = len(config.rotation_angles)
    n_scale = len(config.scale_factors)
    if tag < n_rot:
        angle = config.rotation_angles[tag]
        if angle == 0.0:
            return strip.copy()
        out = ndimage.rotate(strip, angle, reshape=False, order=1, mode="nearest")
    elif tag < n_rot + n_scale:
        out = _scale_crop(strip, config.scale_factors[tag - n_rot])
    else:
        dx, dy = _COMPASS[tag - n_rot - n_scale]
        out = _shift(strip, dx * config.shift_pixels, dy * config.shift_pixels)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def geometric_expand(strip: np.ndarray, label: int, config: AugmentConfig | None = None,
                     seed: int = 0):
    """All expansion variants of one image, each keeping its label."""
    config = config or AugmentConfig()
    return [(geometric_variant(strip, tag, config), label)
            for tag in range(config.variant_count)]


def training_stream(X, y, config: AugmentConfig | None = None, seed: int = 0,
                    epoch: int = 0):
    """Yields (strip, label) for one epoch.

    The virtual pool holds every base image plus its geometric variants;
    the epoch's order is a seed-derived shuffle of that pool, and flip /
    HSV jitter are sampled per emitted image.  Identical (seed, epoch)
    reproduce the identical sequence.
    """
    config = config or AugmentConfig()
    n = len(X)
    per_image = 1 + config.variant_count  # tag -1 = untransformed original
    rng = np.random.default_rng((seed, epoch))
    order = rng.permutation(n * per_image)
    for item in order:
        base, tag = divmod(int(item), per_image)
        strip = X[base] if tag == 0 else geometric_variant(X[base], tag - 1, config)
        label = int(y[base])
        if rng.random() < config.flip_probability:
            strip, label = hflip_with_label_swap(strip, label)
        dh = rng.uniform(-config.hue_amplitude, config.hue_amplitude)
        ds = rng.uniform(-config.saturation_amplitude, config.saturation_amplitude)
        dv = rng.uniform(-config.value_amplitude, config.value_amplitude)
        if dh or ds or dv:
            strip = _apply_hsv_delta(strip, dh, ds, dv)
        yield strip, label
