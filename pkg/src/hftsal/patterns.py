"""Synthetic stimuli: pop-out search arrays, size series, noisy variants,
spatial-chaos sequences and a dead-leaves natural-statistics corpus.

Tokens are rendered hard-edged (no anti-aliasing) so ground-truth masks are
exact.  Every generator is a pure function of its spec and seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

KINDS = ("odd-color-bar", "odd-orientation-bar", "odd-shape", "asymmetric-item",
         "missing-item", "size-series", "repeated-distractor")
SHAPES = ("bar", "square", "disc", "ring", "ring-stub", "plus")
# shape -> the same shape with one extra feature
ADDED_FEATURE = {"ring": "ring-stub", "bar": "plus"}

RED = (1.0, 0.0, 0.0)
GREEN = (0.0, 1.0, 0.0)
WHITE = (1.0, 1.0, 1.0)
BLACK = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class PatternSpec:
    kind: str
    grid: tuple = (5, 5)
    canvas: tuple = (120, 120)
    shape: str = "bar"
    target_shape: str | None = None
    token_size: float = 14.0
    token_width: float = 4.0
    orientation: float = 0.0
    target_orientation: float | None = None
    color: tuple = WHITE
    target_color: tuple | None = None
    target_scale: float = 1.0
    background: tuple = BLACK
    target_index: int = 12
    jitter: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}")
        rows, cols = self.grid
        if rows < 1 or cols < 1:
            raise ValueError("grid must have at least one cell")
        if not 0 <= self.target_index < rows * cols:
            raise ValueError(f"target index {self.target_index} outside a {rows}x{cols} grid")
        for s in (self.shape, self.target_shape):
            if s is not None and s not in SHAPES:
                raise ValueError(f"unknown token shape {s!r}")
        if self.token_size <= 0 or self.token_width <= 0 or self.target_scale <= 0:
            raise ValueError("token geometry must be positive")

    @property
    def cell(self) -> tuple[float, float]:
        return self.canvas[0] / self.grid[0], self.canvas[1] / self.grid[1]

    def deviant(self) -> dict:
        """Geometry and colour of the target token."""
        base = {"shape": self.shape, "size": self.token_size, "width": self.token_width,
                "orientation": self.orientation, "color": tuple(self.color)}
        dev = dict(base)
        if self.target_shape is not None:
            dev["shape"] = self.target_shape
        if self.target_orientation is not None:
            dev["orientation"] = self.target_orientation
        if self.target_color is not None:
            dev["color"] = tuple(self.target_color)
        dev["size"] = self.token_size * self.target_scale
        if self.kind == "odd-color-bar" and dev["color"] == base["color"]:
            raise ValueError("odd-color pattern needs a target colour different from the distractors")
        if self.kind == "odd-orientation-bar" and _same_orientation(dev, base):
            raise ValueError("odd-orientation pattern needs a target orientation different from the distractors")
        if self.kind == "odd-shape" and dev["shape"] == base["shape"]:
            raise ValueError("odd-shape pattern needs a target shape different from the distractors")
        if self.kind == "asymmetric-item":
            if self.shape not in ADDED_FEATURE:
                raise ValueError(f"no added-feature variant of shape {self.shape!r}")
            dev["shape"] = ADDED_FEATURE[self.shape]
        if self.kind == "repeated-distractor" and self.target_scale == 1.0:
            raise ValueError("repeated-distractor pattern needs target_scale != 1")
        return dev


def _same_orientation(a, b) -> bool:
    period = 90.0 if a["shape"] in ("square", "plus") else 180.0
    if a["shape"] in ("disc", "ring"):
        return True
    return math.isclose((a["orientation"] - b["orientation"]) % period, 0.0, abs_tol=1e-9) or \
        math.isclose((a["orientation"] - b["orientation"]) % period, period, abs_tol=1e-9)


def _bar(dx, dy, length, width, theta_deg):
    t = math.radians(theta_deg)
    along = dx * math.sin(t) - dy * math.cos(t)
    across = dx * math.cos(t) + dy * math.sin(t)
    return (np.abs(along) < length / 2) & (np.abs(across) < width / 2)


def token_mask(shape: str, dx: np.ndarray, dy: np.ndarray, size: float, width: float,
               orientation: float) -> np.ndarray:
    """Pixels covered by a token centred at the origin (dx, dy are pixel-centre offsets)."""
    if shape == "bar":
        return _bar(dx, dy, size, width, orientation)
    if shape == "plus":
        return _bar(dx, dy, size, width, orientation) | _bar(dx, dy, size, width, orientation + 90)
    if shape == "square":
        t = math.radians(orientation)
        u = dx * math.cos(t) + dy * math.sin(t)
        v = -dx * math.sin(t) + dy * math.cos(t)
        return (np.abs(u) < size / 2) & (np.abs(v) < size / 2)
    r2 = dx ** 2 + dy ** 2
    if shape == "disc":
        return r2 < (size / 2) ** 2
    ring = (r2 < (size / 2) ** 2) & (r2 >= (size / 2 - width) ** 2)
    if shape == "ring":
        return ring
    if shape == "ring-stub":
        # tail crossing the ring at the lower right, like a Q
        r = size / 2
        cx = cy = (r - width / 2) * math.sqrt(0.5)
        return ring | _bar(dx - cx, dy - cy, size / 2, width, 135.0)
    raise ValueError(f"unknown token shape {shape!r}")


def _cell_centres(spec: PatternSpec, rng: np.random.Generator):
    ch, cw = spec.cell
    rows, cols = spec.grid
    for idx in range(rows * cols):
        r, c = divmod(idx, cols)
        oy, ox = (rng.integers(-spec.jitter, spec.jitter + 1, size=2) if spec.jitter else (0, 0))
        yield idx, (r + 0.5) * ch + oy, (c + 0.5) * cw + ox


def make_pattern(spec: PatternSpec) -> tuple[np.ndarray, np.ndarray]:
    """Render ``spec``; returns an (H, W, 3) image in [0, 1] and the boolean target mask."""
    H, W = spec.canvas
    ch, cw = spec.cell
    dev = spec.deviant()
    img = np.empty((H, W, 3))
    img[:] = spec.background
    mask = np.zeros((H, W), dtype=bool)
    rng = np.random.default_rng(spec.seed)
    yy = np.arange(H)[:, None] + 0.5
    xx = np.arange(W)[None, :] + 0.5
    base = {"shape": spec.shape, "size": spec.token_size, "width": spec.token_width,
            "orientation": spec.orientation, "color": tuple(spec.color)}

    if spec.kind == "size-series":
        tokens = [(spec.target_index, H / 2.0, W / 2.0)] if spec.grid == (1, 1) else \
            list(_cell_centres(spec, rng))
    else:
        tokens = list(_cell_centres(spec, rng))

    for idx, cy, cx in tokens:
        is_target = idx == spec.target_index
        tok = dev if is_target else base
        if spec.kind == "size-series" and not is_target:
            continue
        r0, r1 = int(math.floor(cy - ch / 2)), int(math.ceil(cy + ch / 2))
        c0, c1 = int(math.floor(cx - cw / 2)), int(math.ceil(cx + cw / 2))
        if spec.kind == "size-series":
            r0, r1, c0, c1 = 0, H, 0, W
        if is_target and spec.kind == "missing-item":
            mask[max(r0, 0):min(r1, H), max(c0, 0):min(c1, W)] = True
            continue
        sub_y, sub_x = yy[max(r0, 0):min(r1, H)], xx[:, max(c0, 0):min(c1, W)]
        cover = token_mask(tok["shape"], sub_x - cx, sub_y - cy, tok["size"], tok["width"],
                           tok["orientation"])
        # the token must stay strictly inside its cell
        full = token_mask(tok["shape"], xx - cx, yy - cy, tok["size"], tok["width"], tok["orientation"])
        if full.sum() != cover.sum() or not cover.any():
            raise ValueError(f"token {idx} ({tok['shape']}, size {tok['size']}) does not fit its cell")
        region = img[max(r0, 0):min(r1, H), max(c0, 0):min(c1, W)]
        region[cover] = tok["color"]
        if is_target:
            rows = np.flatnonzero(full.any(axis=1))
            cols = np.flatnonzero(full.any(axis=0))
            mask[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1] = True
    return img, mask


def add_noise(img: np.ndarray, kind: str, level: float, seed=0) -> np.ndarray:
    """Gaussian (std ``level``, clamped) or salt-and-pepper (pixel fraction ``level``) noise."""
    img = np.asarray(img, dtype=np.float64)
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if level == 0:
        return img.copy()
    if kind == "gaussian":
        return np.clip(img + rng.normal(0.0, level, img.shape), 0.0, 1.0)
    if kind == "salt-pepper":
        if level > 1:
            raise ValueError("salt-and-pepper fraction must be at most 1")
        hit = rng.random(img.shape[:2]) < level
        salt = rng.random(img.shape[:2]) < 0.5
        out = img.copy()
        out[hit & salt] = 1.0
        out[hit & ~salt] = 0.0
        return out
    raise ValueError(f"unknown noise kind {kind!r}")


# ---------------------------------------------------------------- canned sets

def popout_battery(seed: int = 0) -> list[tuple[str, PatternSpec]]:
    """Ten search arrays: colour, orientation, shape, asymmetry and missing-item cases."""
    bar = dict(shape="bar", token_size=14.0, token_width=4.0)
    return [
        ("color-red-among-green", PatternSpec("odd-color-bar", color=GREEN, target_color=RED,
                                              target_index=7, seed=seed, **bar)),
        ("color-green-among-red", PatternSpec("odd-color-bar", color=RED, target_color=GREEN,
                                              target_index=18, seed=seed, **bar)),
        ("color-and-orientation", PatternSpec("odd-color-bar", color=GREEN, target_color=RED,
                                              orientation=0.0, target_orientation=45.0,
                                              target_index=16, seed=seed, **bar)),
        ("orientation-45", PatternSpec("odd-orientation-bar", orientation=0.0, target_orientation=45.0,
                                       target_index=8, seed=seed, **bar)),
        ("orientation-90", PatternSpec("odd-orientation-bar", orientation=0.0, target_orientation=90.0,
                                       target_index=11, seed=seed, **bar)),
        ("shape-disc-among-squares", PatternSpec("odd-shape", shape="square", target_shape="disc",
                                                 token_size=12.0, target_index=6, seed=seed)),
        ("shape-plus-among-squares", PatternSpec("odd-shape", shape="square", target_shape="plus",
                                                 token_size=14.0, token_width=4.0,
                                                 target_index=17, seed=seed)),
        ("asymmetric-q-among-o", PatternSpec("asymmetric-item", shape="ring", token_size=14.0,
                                             token_width=3.0, target_index=13, seed=seed)),
        ("asymmetric-plus-among-bars", PatternSpec("asymmetric-item", target_index=3, seed=seed, **bar)),
        ("missing-item", PatternSpec("missing-item", shape="disc", token_size=12.0,
                                     target_index=12, seed=seed)),
    ]


def size_series(sides=(8, 24, 48), canvas=(120, 120), seed: int = 0) -> list[tuple[str, PatternSpec]]:
    """Single red square of growing side on a black canvas."""
    return [(f"size-{s}", PatternSpec("size-series", grid=(1, 1), canvas=canvas, shape="square",
                                      token_size=float(s), color=RED, target_index=0, seed=seed))
            for s in sides]


def natural_image(size=128, seed=0, r_min: float = 2.0, r_max: float = 40.0,
                  blur: float = 0.7, max_leaves: int = 6000) -> np.ndarray:
    """Colour dead-leaves image: occluding discs with a power-law radius law.

    Radii follow p(r) ~ r^-3 on [r_min, r_max], which gives the scale
    invariance and roughly 1/f amplitude spectrum of natural scenes.  Discs
    wrap around the borders, so the image is periodic and the DFT sees no
    artificial frame edge.  A light Gaussian blur stands in for optics.
    """
    rng = np.random.default_rng(seed)
    h, w = (size, size) if isinstance(size, int) else size
    img = np.zeros((h, w, 3))
    covered = np.zeros((h, w), bool)
    a, b = r_min ** -2, r_max ** -2
    for _ in range(max_leaves):
        r = (a - rng.random() * (a - b)) ** -0.5
        cy, cx = rng.random() * h, rng.random() * w
        colour = rng.random(3)
        # wrapped window around the disc; offsets measured from pixel centres
        ys = np.arange(math.floor(cy - r), math.ceil(cy + r) + 1)
        xs = np.arange(math.floor(cx - r), math.ceil(cx + r) + 1)
        ys, xs = np.unique(ys % h), np.unique(xs % w)
        dy = (ys + 0.5 - cy + h / 2) % h - h / 2
        dx = (xs + 0.5 - cx + w / 2) % w - w / 2
        win = np.ix_(ys, xs)
        # first leaf down stays on top, later ones only fill gaps
        m = (dy[:, None] ** 2 + dx[None, :] ** 2 < r * r) & ~covered[win]
        sub = img[win]
        sub[m] = colour
        img[win] = sub
        covered[win] |= m
        if covered.all():
            break
    return ndimage.gaussian_filter(img, (blur, blur, 0), mode="wrap")


def natural_corpus(n: int = 20, size=128, seed: int = 0) -> list[np.ndarray]:
    return [natural_image(size, seed=seed * 1000 + i) for i in range(n)]


CHAOS_BLOCKS = (96, 32, 16, 8, 6, 4, 2)


def chaos_sequence(size: int = 96, blocks=CHAOS_BLOCKS, seed: int = 0) -> list[np.ndarray]:
    """Binary images sharing one histogram, increasingly scrambled.

    Starts from a half-white image and shuffles it as a grid of b x b tiles
    for each block size b, from coarse to fine.  Every image has exactly the
    same pixel counts; only the spatial arrangement gets more chaotic.
    """
    rng = np.random.default_rng(seed)
    base = np.zeros((size, size))
    base[:, : size // 2] = 1.0
    out = []
    for b in blocks:
        if size % b:
            raise ValueError(f"block size {b} does not divide image size {size}")
        n = size // b
        tiles = base.reshape(n, b, n, b).transpose(0, 2, 1, 3).reshape(n * n, b, b)
        if n > 1:
            tiles = tiles[rng.permutation(n * n)]
        out.append(tiles.reshape(n, n, b, b).transpose(0, 2, 1, 3).reshape(size, size))
    return out


def with_seed(spec: PatternSpec, seed: int) -> PatternSpec:
    return replace(spec, seed=seed)
