"""ROC / Dice scoring and calibrated comparison of saliency models.

Calibration follows the fair-comparison recipe: the raw (unsmoothed) maps of
each model are re-smoothed over a grid of Gaussian widths and the best mean
AUC is reported; optionally a border frame is excluded from scoring and a
multiplicative centre bias is fitted per model.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imaging import centered_gaussian, gaussian_smooth, normalize_minmax, resize_nearest

SIGMA_GRID = tuple(round(0.01 * i, 2) for i in range(1, 13))
ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
SIGMA_C_GRID = (0.125, 0.25, 0.5)
DSC_STEPS = 256


def _plane(m) -> np.ndarray:
    return np.asarray(getattr(m, "values", m), dtype=np.float64)


@dataclass
class GroundTruth:
    """Binary region mask, or fixation points given as (x, y) in a frame of size ``shape``."""

    kind: str
    mask: np.ndarray | None = None
    points: list | None = None
    shape: tuple | None = None

    def __post_init__(self):
        if self.kind == "region-mask":
            if self.mask is None:
                raise ValueError("region ground truth needs a mask")
            self.mask = np.asarray(self.mask).astype(bool)
            if self.mask.ndim != 2:
                raise ValueError("mask must be 2-D")
            if not self.mask.any():
                raise ValueError("region mask has no positive pixel")
            self.shape = self.mask.shape
        elif self.kind == "fixation-set":
            if self.shape is None or not self.points:
                raise ValueError("fixation ground truth needs points and a frame shape")
            H, W = self.shape
            pts = [(float(x), float(y)) for x, y in self.points]
            for x, y in pts:
                if not (0 <= x < W and 0 <= y < H):
                    raise ValueError(f"fixation ({x}, {y}) outside {W}x{H} frame")
            self.points = pts
        else:
            raise ValueError(f"unknown ground-truth kind {self.kind!r}")

    @classmethod
    def region(cls, mask) -> "GroundTruth":
        return cls("region-mask", mask=mask)

    @classmethod
    def fixations(cls, points, shape) -> "GroundTruth":
        return cls("fixation-set", points=list(points), shape=tuple(shape))

    def positives(self, shape) -> np.ndarray:
        """Boolean plane of positive pixels at resolution ``shape``."""
        shape = tuple(shape)
        if self.kind == "region-mask":
            return self.mask if self.mask.shape == shape else resize_nearest(self.mask, shape)
        H, W = self.shape
        h, w = shape
        out = np.zeros(shape, dtype=bool)
        for x, y in self.points:
            out[min(int(y * h / H), h - 1), min(int(x * w / W), w - 1)] = True
        return out


def as_ground_truth(gt) -> GroundTruth:
    return gt if isinstance(gt, GroundTruth) else GroundTruth.region(gt)


def crop_border(plane: np.ndarray, width: int) -> np.ndarray:
    if width <= 0:
        return plane
    if 2 * width >= min(plane.shape[:2]):
        raise ValueError(f"border cut {width} leaves no interior in a {plane.shape} map")
    return plane[width:-width, width:-width]


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


@dataclass
class DscCurve:
    thresholds: np.ndarray
    dsc: np.ndarray
    podsc: float


def _roc_from_labels(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0:
        raise ValueError("ground truth has no positive pixel")
    if n_neg == 0:
        raise ValueError("ground truth has no negative pixel")
    # Thresholds at every distinct value, highest first; +inf gives (0, 0).
    uniq, inverse = np.unique(scores, return_inverse=True)
    pos = np.bincount(inverse, weights=labels, minlength=uniq.size)[::-1]
    tot = np.bincount(inverse, minlength=uniq.size)[::-1]
    tpr = np.concatenate([[0.0], np.cumsum(pos) / n_pos])
    fpr = np.concatenate([[0.0], np.cumsum(tot - pos) / n_neg])
    tpr[-1] = fpr[-1] = 1.0
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, auc)


def roc_auc(m, gt, border_cut: int = 0) -> RocCurve:
    """ROC curve of a map against a region mask or fixation set; AUC by trapezoid."""
    v = _plane(m)
    pos = as_ground_truth(gt).positives(v.shape)
    v, pos = crop_border(v, border_cut), crop_border(pos, border_cut)
    return _roc_from_labels(v.ravel(), pos.ravel().astype(np.float64))


def dsc_curve(m, mask, border_cut: int = 0) -> DscCurve:
    """Dice overlap of {normalized map > t} with the mask for 256 thresholds in [0, 1)."""
    v = _plane(m)
    if isinstance(mask, GroundTruth):
        if mask.kind != "region-mask":
            raise ValueError("Dice needs a region mask")
        mask = mask.positives(v.shape)
    mask = np.asarray(mask).astype(bool)
    if mask.shape != v.shape:
        mask = resize_nearest(mask, v.shape)
    v, mask = crop_border(v, border_cut), crop_border(mask, border_cut)
    if not mask.any():
        raise ValueError("mask has no positive pixel")
    n = normalize_minmax(v).ravel()
    mk = mask.ravel()
    thresholds = np.arange(DSC_STEPS) / DSC_STEPS
    order = np.argsort(n, kind="stable")
    sorted_vals = n[order]
    sorted_hits = np.cumsum(mk[order][::-1])[::-1]
    # first index with value > t
    start = np.searchsorted(sorted_vals, thresholds, side="right")
    size_b = n.size - start
    inter = np.where(start < n.size, sorted_hits[np.minimum(start, n.size - 1)], 0)
    dsc = 2.0 * inter / (size_b + mk.sum())
    return DscCurve(thresholds, dsc, float(dsc.max()))


def rank_auc(m, gt, border_cut: int = 0) -> float:
    """Mann-Whitney form of the AUC (used as a cross-check)."""
    from scipy.stats import rankdata

    v = _plane(m)
    pos = as_ground_truth(gt).positives(v.shape)
    v, pos = crop_border(v, border_cut).ravel(), crop_border(pos, border_cut).ravel()
    ranks = rankdata(v)
    n_pos = int(pos.sum())
    n_neg = v.size - n_pos
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def apply_center_bias(plane: np.ndarray, alpha: float, sigma_c_factor: float) -> np.ndarray:
    H, W = plane.shape
    g = centered_gaussian(plane.shape, sigma_c_factor * W, sigma_c_factor * W)
    return plane * (alpha + (1.0 - alpha) * g)


def mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else float("nan")


# ---------------------------------------------------------------- calibration

@dataclass(frozen=True)
class CalibrationOptions:
    border_cut: int = 0
    smoothing_sweep: bool = True
    sigma_factors: tuple = SIGMA_GRID
    default_sigma_factor: float = 0.05
    center_bias: bool = True
    alphas: tuple = ALPHA_GRID
    sigma_c_factors: tuple = SIGMA_C_GRID

    def grid(self) -> tuple:
        grid = tuple(self.sigma_factors) if self.smoothing_sweep else (self.default_sigma_factor,)
        if not grid:
            raise ValueError("empty smoothing grid")
        return grid


@dataclass
class CalibrationReport:
    model: str
    n_images: int
    border_cut: int
    sigma_factors: list
    mean_auc: list
    mean_podsc: list | None
    best_sigma_factor: float
    auc: float
    podsc: float | None
    center_bias: dict | None = None
    per_image: list = field(default_factory=list)
    categories: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n_images": self.n_images,
            "border_cut": self.border_cut,
            "smoothing": {
                "sigma_factors": list(self.sigma_factors),
                "mean_auc": list(self.mean_auc),
                "mean_podsc": None if self.mean_podsc is None else list(self.mean_podsc),
                "best_sigma_factor": self.best_sigma_factor,
            },
            "auc": self.auc,
            "podsc": self.podsc,
            "center_bias": self.center_bias,
            "categories": self.categories,
            "per_image": self.per_image,
        }


def _score_one(raw, gt, sigma_factor, border_cut):
    sm = gaussian_smooth(raw, sigma_factor * raw.shape[1])
    auc = roc_auc(sm, gt, border_cut).auc
    podsc = dsc_curve(sm, gt, border_cut).podsc if gt.kind == "region-mask" else None
    return auc, podsc


def calibrate(runner, images, gts, options: CalibrationOptions = CalibrationOptions(),
              *, model: str = "model", categories=None, jobs: int = 1,
              with_gt: bool = False) -> CalibrationReport:
    """Calibrated scores of one model over an image set.

    ``runner(image)`` must return the model's raw (unsmoothed) map; with
    ``with_gt`` it is called as ``runner(image, gt)`` (oracle scale selection).
    """
    images, gts = list(images), [as_ground_truth(g) for g in gts]
    if not images:
        raise ValueError("empty image set")
    if len(images) != len(gts):
        raise ValueError(f"{len(images)} images but {len(gts)} ground truths")
    categories = list(categories) if categories is not None else [None] * len(images)
    if len(categories) != len(images):
        raise ValueError("category list does not match the image set")
    grid = options.grid()

    def _raw(img, gt):
        return _plane(runner(img, gt) if with_gt else runner(img))

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            raws = list(pool.map(_raw, images, gts))
    else:
        raws = [_raw(img, gt) for img, gt in zip(images, gts)]

    region = all(g.kind == "region-mask" for g in gts)
    table = [[_score_one(r, g, s, options.border_cut) for r, g in zip(raws, gts)] for s in grid]
    mean_auc = [mean(a for a, _ in row) for row in table]
    mean_podsc = [mean(p for _, p in row) for row in table] if region else None
    best = int(np.argmax(mean_auc))
    best_sigma = grid[best]

    per_image = []
    for i, (a, p) in enumerate(table[best]):
        rec = {"index": i, "auc": a}
        if p is not None:
            rec["podsc"] = p
        if categories[i] is not None:
            rec["category"] = categories[i]
        per_image.append(rec)

    cats = {}
    for c in sorted({c for c in categories if c is not None}, key=str):
        idx = [i for i, ci in enumerate(categories) if ci == c]
        cats[str(c)] = {"n": len(idx), "auc": mean(table[best][i][0] for i in idx),
                        "podsc": mean(table[best][i][1] for i in idx) if region else None}

    cb = None
    if options.center_bias:
        smoothed = [gaussian_smooth(r, best_sigma * r.shape[1]) for r in raws]
        best_cb = None
        for alpha in options.alphas:
            for sc in options.sigma_c_factors:
                auc = mean(roc_auc(apply_center_bias(s, alpha, sc), g, options.border_cut).auc
                           for s, g in zip(smoothed, gts))
                if best_cb is None or auc > best_cb["auc"]:
                    best_cb = {"alpha": alpha, "sigma_c_factor": sc, "auc": auc}
        cb = best_cb

    return CalibrationReport(
        model=model, n_images=len(images), border_cut=options.border_cut,
        sigma_factors=list(grid), mean_auc=mean_auc, mean_podsc=mean_podsc,
        best_sigma_factor=best_sigma, auc=mean_auc[best],
        podsc=mean_podsc[best] if mean_podsc is not None else None,
        center_bias=cb, per_image=per_image, categories=cats,
    )


CATEGORIES = tuple(range(1, 7))


def report_tables(reports) -> dict:
    """Per-category and overall score tables, one row per model.

    Returns ``{name: (header, rows)}`` for AUC, PoDSC (when every report has
    region ground truth) and the smoothing sweep.
    """
    reports = list(reports)
    header = ["model"] + [f"category_{c}" for c in CATEGORIES] + ["overall"]

    def row(rep, key):
        cells = [rep.model]
        for c in CATEGORIES:
            entry = rep.categories.get(str(c))
            cells.append("" if entry is None or entry[key] is None else float(entry[key]))
        overall = getattr(rep, key)
        cells.append("" if overall is None else float(overall))
        return cells

    tables = {"auc": (header, [row(r, "auc") for r in reports])}
    if reports and all(r.podsc is not None for r in reports):
        tables["podsc"] = (header, [row(r, "podsc") for r in reports])
    sweep = []
    for r in reports:
        for i, sf in enumerate(r.sigma_factors):
            sweep.append([r.model, float(sf), float(r.mean_auc[i]),
                          "" if r.mean_podsc is None else float(r.mean_podsc[i])])
    tables["smoothing"] = (["model", "sigma_factor", "mean_auc", "mean_podsc"], sweep)
    cb = [[r.model, float(r.center_bias["alpha"]), float(r.center_bias["sigma_c_factor"]),
           float(r.center_bias["auc"])] for r in reports if r.center_bias]
    if cb:
        tables["center_bias"] = (["model", "alpha", "sigma_c_factor", "auc"], cb)
    return tables


# ---------------------------------------------------------------- manifests

@dataclass
class ManifestRecord:
    image: Path
    gt: Path
    gt_kind: str
    category: int | None = None


def load_manifest(path) -> list[ManifestRecord]:
    """Read a JSON array of {image, gt, gt_kind, category}; paths are relative to the manifest."""
    path = Path(path)
    entries = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise ValueError(f"{path}: manifest must be a JSON array")
    out = []
    for i, e in enumerate(entries):
        try:
            kind = e.get("gt_kind", "region-mask")
            if kind not in ("region-mask", "fixation-set"):
                raise ValueError(f"unknown gt_kind {kind!r}")
            cat = e.get("category")
            if cat is not None and int(cat) not in range(1, 7):
                raise ValueError(f"category must be 1-6, got {cat!r}")
            out.append(ManifestRecord(path.parent / e["image"], path.parent / e["gt"], kind,
                                      None if cat is None else int(cat)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: bad manifest entry {i}: {exc}") from exc
    return out


def read_fixations(path) -> list[tuple[float, float]]:
    """Fixation list: JSON [[x, y], ...] or whitespace/comma separated "x y" lines."""
    text = Path(path).read_text(encoding="utf-8").strip()
    if text.startswith("["):
        return [(float(x), float(y)) for x, y in json.loads(text)]
    pts = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].replace(",", " ").split()
        if line:
            pts.append((float(line[0]), float(line[1])))
    return pts


def load_ground_truth(rec: ManifestRecord, image_shape) -> GroundTruth:
    from .imageio import read_image

    if rec.gt_kind == "region-mask":
        m = read_image(rec.gt)
        if m.ndim == 3:
            m = m.mean(axis=2)
        return GroundTruth.region(m > 0.5)
    return GroundTruth.fixations(read_fixations(rec.gt), image_shape[:2])
