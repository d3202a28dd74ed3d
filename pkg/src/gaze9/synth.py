"""Procedural eye-strip renderer and dataset generator.

A strip is 32 pixels tall and 128 (two eyes) or 64 (one eye) wide.  Each
eye is an ellipse of sclera on skin, with an iris/pupil disk whose center
is displaced from the eye center by the state's direction vector scaled
by per-image sampled magnitudes.  State 0 covers the ellipse with a lid
and draws a lash line instead; no pupil-colored pixel survives.

Rendering is deterministic in (state, params, seed).  All random draws
happen in a fixed order that does not depend on the state, so two renders
with the same seed differ only in geometry.  Eye centers sit on
half-integer coordinates, which makes a horizontal flip map the state-4
render exactly onto the state-6 render (and 1<->3, 7<->9) when pixel
noise and asynchrony are disabled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .states import check_state, direction_vector, CLOSED

HEIGHT = 32

# Fixed geometry (pixels). The eye ellipse is centered in each 64-wide half.
EYE_RX = 27.0
EYE_RY = 13.0
PUPIL_RATIO = 0.45

SKIN_RGB = (0.78, 0.62, 0.52)
SCLERA_RGB = (0.93, 0.92, 0.90)
PUPIL_RGB = (0.05, 0.04, 0.04)
LASH_RGB = (0.45, 0.36, 0.30)

SPLITS = ("train", "val", "test-known", "test-unknown")


@dataclass(frozen=True)
class SynthParams:
    """Appearance and geometry ranges for the renderer.

    Ranges are (low, high) and sampled uniformly per image.  ``brightness``
    scales the skin/sclera/lash colors; disjoint brightness and iris ranges
    are how "unknown users" are emulated.
    """

    width: int = 128
    brightness: tuple[float, float] = (0.62, 0.92)
    iris_radius: tuple[float, float] = (4.6, 5.8)
    iris_rgb: tuple[float, float, float] = (0.30, 0.22, 0.16)
    offset_h: tuple[float, float] = (8.0, 11.0)
    offset_v: tuple[float, float] = (3.2, 4.5)
    color_jitter: float = 0.04
    pixel_noise: float = 0.02
    lid_thickness: float = 3.0
    asynchrony_prob: float = 0.25
    view_scale: tuple[float, float] = (1.0, 1.0)
    view_shift: float = 0.0

    def __post_init__(self):
        if self.width not in (128, 64):
            raise ValueError(f"width must be 128 (double eye) or 64 (single), got {self.width}")
        for name in ("brightness", "iris_radius", "offset_h", "offset_v"):
            lo, hi = getattr(self, name)
            if not (0 < lo < hi):
                raise ValueError(f"{name} range must be 0 < low < high, got ({lo}, {hi})")
        if min(self.color_jitter, self.pixel_noise, self.asynchrony_prob) < 0:
            raise ValueError("jitter, noise and asynchrony must be non-negative")
        if not 1.0 <= self.lid_thickness <= 8.0:
            raise ValueError("lid thickness out of range")
        lo, hi = self.view_scale
        if not 0.5 <= lo <= hi <= 2.0:
            raise ValueError(f"view_scale must satisfy 0.5 <= low <= high <= 2, got ({lo}, {hi})")
        if not 0.0 <= self.view_shift <= 8.0:
            raise ValueError("view_shift must be within 0..8 pixels")
        # The iris disk (radius r, center offset by up to (mh, mv) plus one
        # asynchrony sub-step) must stay inside the eye ellipse for every
        # sample the ranges allow; reject impossible geometry here, never
        # at render time.
        r = self.iris_radius[1]
        mh = self.offset_h[1] + 1.0
        mv = self.offset_v[1]
        if r >= min(EYE_RX, EYE_RY) or \
           (mh / (EYE_RX - r)) ** 2 + (mv / (EYE_RY - r)) ** 2 > 1.0:
            raise ValueError("pupil offset range would push the iris outside the eye ellipse")


def default_params(width: int = 128) -> SynthParams:
    return SynthParams(width=width)


def unknown_params(width: int = 128) -> SynthParams:
    """Ranges disjoint from the defaults, emulating users the model never
    trained on: brighter skin, larger irises, a hue-shifted iris color,
    and a camera sitting closer (zoomed) with a sloppier crop box."""
    return replace(default_params(width),
                   brightness=(0.97, 1.18),
                   iris_radius=(6.0, 6.9),
                   iris_rgb=(0.22, 0.26, 0.19),
                   view_scale=(1.15, 1.4),
                   view_shift=4.0)


def _eye_centers(width: int):
    if width == 128:
        return ((15.5, 31.5), (15.5, 95.5))
    return ((15.5, 31.5),)


def _circle_alpha(dist, radius):
    # 1-pixel antialiasing band around the rim
    return np.clip(radius - dist + 0.5, 0.0, 1.0)


def _ellipse_alpha(ys, xs, cy, cx, ry, rx):
    d = np.sqrt(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2)
    return np.clip((1.0 - d) * min(rx, ry) + 0.5, 0.0, 1.0)


def _blend(img, alpha, color):
    img += alpha[:, :, None] * (np.asarray(color, dtype=np.float64) - img)


def render_eye_strip(state: int, params: SynthParams | None = None, seed: int = 0) -> np.ndarray:
    params = params or default_params()
    check_state(state)
    rng = np.random.default_rng(seed)

    # Fixed draw order, independent of the state.
    brightness = rng.uniform(*params.brightness)
    iris_r = rng.uniform(*params.iris_radius)
    mh = rng.uniform(*params.offset_h)
    mv = rng.uniform(*params.offset_v)
    j = params.color_jitter
    skin = np.clip(np.asarray(SKIN_RGB) * brightness + rng.uniform(-j, j, 3), 0, 1)
    sclera = np.clip(np.asarray(SCLERA_RGB) * brightness + rng.uniform(-j, j, 3), 0, 1)
    iris = np.clip(np.asarray(params.iris_rgb) + rng.uniform(-j, j, 3), 0, 1)
    async_draw = rng.random()
    async_eye = int(rng.integers(2))
    async_step = 1.0 if rng.random() < 0.5 else -1.0
    noise = rng.uniform(-params.pixel_noise, params.pixel_noise,
                        size=(HEIGHT, params.width, 3))
    view = rng.uniform(*params.view_scale)
    shift_x = rng.uniform(-params.view_shift, params.view_shift)
    shift_y = rng.uniform(-params.view_shift, params.view_shift)

    img = np.empty((HEIGHT, params.width, 3), dtype=np.float64)
    img[...] = skin

    ys = np.arange(HEIGHT, dtype=np.float64)[:, None]
    xs = np.arange(params.width, dtype=np.float64)[None, :]

    centers = _eye_centers(params.width)
    for eye_index, (base_cy, base_cx) in enumerate(centers):
        # view scales the eye in place; shift moves the whole crop box
        cy = base_cy + shift_y
        cx = base_cx + shift_x
        eye_mh = mh
        if len(centers) == 2 and async_draw < params.asynchrony_prob and eye_index == async_eye:
            eye_mh = mh + async_step
        if state == CLOSED:
            lid = _ellipse_alpha(ys, xs, cy, cx, EYE_RY * view, EYE_RX * view)
            _blend(img, lid, skin * 0.96)
            lash = _ellipse_alpha(ys, xs, cy, cx,
                                  (params.lid_thickness / 2 + 0.5) * view,
                                  EYE_RX * 0.92 * view)
            _blend(img, lash, np.clip(np.asarray(LASH_RGB) * brightness, 0, 1))
        else:
            dx, dy = direction_vector(state)
            _blend(img, _ellipse_alpha(ys, xs, cy, cx, EYE_RY * view, EYE_RX * view),
                   sclera)
            px = cx + dx * eye_mh * view
            py = cy + dy * mv * view
            dist = np.sqrt((xs - px) ** 2 + (ys - py) ** 2)
            _blend(img, _circle_alpha(dist, iris_r * view), iris)
            _blend(img, _circle_alpha(dist, iris_r * view * PUPIL_RATIO), PUPIL_RGB)

    img += noise
    return np.clip(img, 0.0, 1.0).astype(np.float32)


# --- dataset on disk --------------------------------------------------------


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRecord:
    path: str
    label: int
    split: str
    seed: int


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    records: tuple[ManifestRecord, ...]

    def split(self, name: str) -> list[ManifestRecord]:
        return [r for r in self.records if r.split == name]


def generate_dataset(root, counts: dict[str, int],
                     params: SynthParams | None = None,
                     unknown: SynthParams | None = None,
                     master_seed: int = 0) -> DatasetManifest:
    """counts maps split name -> images per class.

    The test-unknown split renders with the disjoint appearance params; a
    running counter derived from the master seed gives every image its own
    seed (which is also its file name).
    """
    params = params or default_params()
    unknown = unknown or unknown_params(params.width)
    if set(counts) - set(SPLITS):
        raise ValueError(f"unknown split names: {sorted(set(counts) - set(SPLITS))}")
    root = Path(root)
    records = []
    next_seed = master_seed * 1_000_000
    for split in SPLITS:
        per_class = counts.get(split, 0)
        p = unknown if split == "test-unknown" else params
        for label in range(10):
            directory = root / "images" / split / str(label)
            directory.mkdir(parents=True, exist_ok=True)
            for _ in range(per_class):
                seed = next_seed
                next_seed += 1
                strip = render_eye_strip(label, p, seed)
                rel = f"images/{split}/{label}/{seed}.png"
                save_strip(strip, root / rel)
                records.append(ManifestRecord(rel, label, split, seed))
    manifest = DatasetManifest(root, tuple(records))
    with open(root / "manifest.jsonl", "w") as fh:
        for r in records:
            fh.write(json.dumps({"path": r.path, "label": r.label,
                                 "split": r.split, "seed": r.seed}) + "\n")
    return manifest


def save_strip(strip: np.ndarray, path) -> None:
    eight_bit = np.clip(np.rint(strip * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(eight_bit, mode="RGB").save(path, format="PNG")


def load_strip(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise ManifestError(f"{path}: cannot decode image ({exc})") from exc
    return arr / 255.0


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    root = path.parent
    records = []
    seen = set()
    with open(path) as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rec = ManifestRecord(str(obj["path"]), int(obj["label"]),
                                     str(obj["split"]), int(obj["seed"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ManifestError(f"{path}: record {i} is malformed ({exc})") from exc
            if not 0 <= rec.label <= 9:
                raise ManifestError(f"{path}: record {i} has label {rec.label}, expected 0-9")
            if rec.split not in SPLITS:
                raise ManifestError(f"{path}: record {i} has unknown split {rec.split!r}")
            if rec.path in seen:
                raise ManifestError(f"{path}: record {i} duplicates path {rec.path}")
            seen.add(rec.path)
            records.append(rec)
    return DatasetManifest(root, tuple(records))


def iterate(manifest: DatasetManifest, split: str, shuffle_seed: int | None = None):
    """Yields (strip, label); order is manifest order, or shuffled."""
    records = manifest.split(split)
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(len(records))
        records = [records[i] for i in order]
    for rec in records:
        yield load_strip(manifest.root / rec.path), rec.label


def load_split(manifest: DatasetManifest, split: str):
    """The whole split as stacked arrays (X, y)."""
    pairs = list(iterate(manifest, split))
    if not pairs:
        return (np.zeros((0, HEIGHT, 0, 3), dtype=np.float32),
                np.zeros(0, dtype=np.int64))
    X = np.stack([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs], dtype=np.int64)
    return X, y
