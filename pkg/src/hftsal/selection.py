"""Entropy-based choice of the best scale among candidate saliency maps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .imaging import centered_gaussian, gaussian_smooth

MODES = ("full", "entropy-only", "oracle")


@dataclass(frozen=True)
class SelectionCriterion:
    mode: str = "full"
    varsigma_factor: float = 0.02
    bins: int = 256

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown selection mode {self.mode!r}; expected one of {MODES}")
        if self.bins < 2:
            raise ValueError("need at least two histogram bins")
        if not self.varsigma_factor > 0:
            raise ValueError("varsigma factor must be positive")


def _values(m) -> np.ndarray:
    return np.asarray(getattr(m, "values", m), dtype=np.float64)


def is_degenerate(m) -> bool:
    """A map with no structure at all (constant, including all zero)."""
    v = _values(m)
    return bool(v.max() == v.min())


def histogram_entropy(m, bins: int = 256) -> float:
    """Shannon entropy (bits) of the min-max normalized value histogram."""
    v = _values(m).ravel()
    lo, hi = v.min(), v.max()
    if hi == lo:
        return 0.0
    u = (v - lo) / (hi - lo)
    idx = np.minimum((u * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    p = counts[counts > 0] / v.size
    return float(-(p * np.log2(p)).sum())


def entropy2d(m, varsigma: float, bins: int = 256) -> float:
    """Entropy of the map after Gaussian smoothing at scale ``varsigma``."""
    if not varsigma > 0:
        raise ValueError("varsigma must be positive")
    return histogram_entropy(gaussian_smooth(_values(m), varsigma), bins)


def center_mask(shape: tuple[int, int]) -> np.ndarray:
    """Centred Gaussian, sigma = size / 4 per axis, summing to 1."""
    H, W = shape
    k = centered_gaussian(shape, H / 4.0, W / 4.0)
    return k / k.sum()


def border_weight_lambda(m) -> float:
    """Overlap of the sum-normalized map with the centred mask.

    Large when the map's mass sits near the centre, small near the border.
    """
    v = _values(m)
    mask = center_mask(v.shape)
    total = v.sum()
    if not total > 0:
        return 1.0 / v.size
    return float((mask * (v / total)).sum())


def criterion_values(maps, crit: SelectionCriterion) -> list[dict]:
    """Per-scale trace rows: k, entropy, lambda and the combined score."""
    rows = []
    for k, m in enumerate(maps, start=1):
        v = _values(m)
        degenerate = is_degenerate(v)
        if degenerate:
            h, lam = 0.0, (border_weight_lambda(v) if v.sum() > 0 else 1.0 / v.size)
        else:
            h = entropy2d(v, crit.varsigma_factor * v.shape[1], crit.bins)
            lam = border_weight_lambda(v)
        score = h if crit.mode == "entropy-only" else h / lam
        rows.append({"k": k, "entropy": h, "lambda": lam, "score": score,
                     "degenerate": degenerate})
    return rows


def select_scale(maps, crit: SelectionCriterion = SelectionCriterion(), gt=None,
                 trace: list | None = None) -> int:
    """Return the 1-based index of the selected map.

    Constant maps only win when every candidate is constant; ties go to the
    smallest k.  In oracle mode the map with the highest ROC AUC against
    ``gt`` is chosen.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("no candidate maps")
    if crit.mode == "oracle":
        if gt is None:
            raise ValueError("oracle scale selection needs ground truth")
        from .evaluation import roc_auc
        aucs = [roc_auc(m, gt).auc for m in maps]
        if trace is not None:
            trace.extend({"k": k, "auc": a} for k, a in enumerate(aucs, start=1))
        return int(np.argmax(aucs)) + 1
    rows = criterion_values(maps, crit)
    if trace is not None:
        trace.extend(rows)
    scores = np.array([r["score"] for r in rows])
    usable = np.array([not r["degenerate"] for r in rows])
    if usable.any():
        scores = np.where(usable, scores, np.inf)
    return int(np.argmin(scores)) + 1


def trace_to_csv(rows) -> str:
    """Serialize a criterion trace: header plus one row per scale."""
    from .report import fmt_float
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "entropy", "lambda", "score"])
    for r in rows:
        w.writerow([r["k"], fmt_float(r["entropy"]), fmt_float(r["lambda"]), fmt_float(r["score"])])
    return buf.getvalue()
