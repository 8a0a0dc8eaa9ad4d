import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hftsal.evaluation import (ALPHA_GRID, SIGMA_C_GRID, SIGMA_GRID, CalibrationOptions, GroundTruth,
                               apply_center_bias, calibrate, crop_border, dsc_curve, load_ground_truth,
                               load_manifest, mean, rank_auc, read_fixations, report_tables, roc_auc)
from hftsal.imageio import write_image
from hftsal.imaging import gaussian_smooth
from oracles import auc_mannwhitney, auc_pairwise, dice


def half_mask(shape=(20, 20)):
    m = np.zeros(shape, bool)
    m[:, : shape[1] // 2] = True
    return m


# ---------------------------------------------------------------- ROC

def test_auc_examples():
    mask = half_mask()
    assert roc_auc(mask * 1.0, mask).auc == 1.0
    assert roc_auc(np.full(mask.shape, 0.3), mask).auc == 0.5
    assert roc_auc(1.0 - mask, mask).auc == 0.0
    with pytest.raises(ValueError):
        roc_auc(np.ones((4, 4)), GroundTruth("region-mask", mask=np.zeros((4, 4))))
    with pytest.raises(ValueError):
        roc_auc(np.ones((4, 4)), np.ones((4, 4), bool))


def test_auc_matches_oracles(rng):
    for _ in range(30):
        v = np.round(rng.random((15, 17)), 2)  # plenty of ties
        mask = rng.random((15, 17)) < 0.3
        if not mask.any() or mask.all():
            continue
        a = roc_auc(v, mask).auc
        assert abs(a - auc_pairwise(v, mask)) < 1e-12
        assert abs(a - auc_mannwhitney(v, mask)) < 1e-12
        assert abs(a - rank_auc(v, mask)) < 1e-12


def test_roc_curve_invariants(rng):
    v = rng.random((20, 20))
    mask = rng.random((20, 20)) < 0.2
    c = roc_auc(v, mask)
    assert (c.fpr[0], c.tpr[0]) == (0.0, 0.0) and (c.fpr[-1], c.tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)
    trap = np.sum(np.diff(c.fpr) * (c.tpr[1:] + c.tpr[:-1]) / 2)
    assert abs(trap - c.auc) < 1e-12


@given(arrays(np.float64, (8, 8), elements=st.integers(-60, 60).map(float)), st.integers(0, 2 ** 31 - 1))
def test_auc_rank_properties(v, seed):
    mask = np.random.default_rng(seed).random((8, 8)) < 0.4
    if not mask.any() or mask.all():
        return
    a = roc_auc(v, mask).auc
    assert abs(roc_auc(np.exp(v / 10.0), mask).auc - a) < 1e-12  # strictly monotone on this grid
    assert abs(roc_auc(v.max() - v, mask).auc + a - 1) < 1e-9
    assert roc_auc(v, mask, border_cut=0).auc == a


def test_fixation_ground_truth():
    gt = GroundTruth.fixations([(1.5, 2.5), (9.9, 0.0)], (5, 10))
    pos = gt.positives((5, 10))
    assert pos.sum() == 2 and pos[2, 1] and pos[0, 9]
    small = gt.positives((10, 20))
    assert small[5, 3] and small[0, 19]
    v = np.zeros((5, 10))
    v[2, 1] = v[0, 9] = 1.0
    assert roc_auc(v, gt).auc == 1.0
    with pytest.raises(ValueError):
        GroundTruth.fixations([(10, 0)], (5, 10))
    with pytest.raises(ValueError):
        GroundTruth("scribble")


def test_mask_resized_nearest():
    gt = GroundTruth.region(np.kron(half_mask((4, 4)), np.ones((8, 8))))
    pos = gt.positives((8, 8))
    assert pos.dtype == bool and pos.sum() == 32 and pos[:, :4].all()


def test_border_cut():
    v = np.random.default_rng(0).random((20, 20))
    mask = half_mask()
    a = roc_auc(v, mask, border_cut=3).auc
    assert a == roc_auc(v[3:-3, 3:-3], mask[3:-3, 3:-3]).auc
    # anything inside the frame is ignored
    w = v.copy()
    w[:3] = 100.0
    assert roc_auc(w, mask, border_cut=3).auc == a
    with pytest.raises(ValueError):
        crop_border(v, 10)


# ---------------------------------------------------------------- Dice

def test_dsc_examples():
    mask = half_mask()
    assert dsc_curve(mask * 1.0, mask).podsc == 1.0
    c = dsc_curve(np.ones(mask.shape), mask)
    assert np.allclose(c.dsc, 2 / 3)
    disjoint = 1.0 - mask
    c = dsc_curve(disjoint, mask)
    assert np.all(c.dsc == 0.0)  # every threshold keeps exactly the complement
    with pytest.raises(ValueError):
        dsc_curve(np.ones((4, 4)), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        dsc_curve(np.ones((4, 4)), GroundTruth.fixations([(1, 1)], (4, 4)))


def test_dsc_matches_direct(rng):
    for _ in range(10):
        v = rng.random((16, 16)) ** 2
        mask = rng.random((16, 16)) < 0.3
        c = dsc_curve(v, mask)
        n = (v - v.min()) / np.ptp(v)
        direct = [dice(n > t, mask) for t in np.arange(256) / 256]
        assert np.allclose(c.dsc, direct, atol=1e-15)
        assert c.podsc == max(direct) and np.all((0 <= c.dsc) & (c.dsc <= 1))


# ---------------------------------------------------------------- calibration

def blob_set(rng, n=4, size=32):
    imgs, gts = [], []
    for _ in range(n):
        y, x = rng.integers(8, size - 8, 2)
        mask = np.zeros((size, size), bool)
        mask[y - 3:y + 3, x - 3:x + 3] = True
        raw = np.zeros((size, size))
        raw[y - 1:y + 1, x - 1:x + 1] = 1.0
        raw += 0.3 * rng.random((size, size))
        imgs.append(raw)
        gts.append(GroundTruth.region(mask))
    return imgs, gts


def test_calibrate_optimum_is_grid_max(rng):
    raws, gts = blob_set(rng)
    rep = calibrate(lambda r: r, raws, gts, CalibrationOptions(center_bias=False))
    direct = [mean(roc_auc(gaussian_smooth(r, s * 32), g).auc for r, g in zip(raws, gts)) for s in SIGMA_GRID]
    assert rep.mean_auc == direct
    assert rep.auc == max(direct) and rep.best_sigma_factor == SIGMA_GRID[int(np.argmax(direct))]
    assert rep.podsc == rep.mean_podsc[int(np.argmax(direct))]
    assert len(rep.per_image) == 4


def test_calibrate_single_sigma_and_errors(rng):
    raws, gts = blob_set(rng, 1)
    rep = calibrate(lambda r: r, raws, gts, CalibrationOptions(sigma_factors=(0.07,), center_bias=False))
    assert rep.sigma_factors == [0.07] and rep.best_sigma_factor == 0.07
    rep = calibrate(lambda r: r, raws, gts, CalibrationOptions(smoothing_sweep=False, center_bias=False))
    assert rep.best_sigma_factor == 0.05
    with pytest.raises(ValueError):
        calibrate(lambda r: r, raws, gts + gts)
    with pytest.raises(ValueError):
        calibrate(lambda r: r, [], [])
    with pytest.raises(ValueError):
        calibrate(lambda r: r, raws, gts, CalibrationOptions(sigma_factors=()))


def test_center_bias_helps_centred_targets(rng):
    size = 48
    raws, gts = [], []
    for _ in range(3):
        mask = np.zeros((size, size), bool)
        mask[20:28, 20:28] = True
        raw = 0.5 * rng.random((size, size))
        raw[22:26, 22:26] += 0.4
        raws.append(raw)
        gts.append(GroundTruth.region(mask))
    rep = calibrate(lambda r: r, raws, gts, CalibrationOptions(center_bias=True))
    no_bias = mean(roc_auc(gaussian_smooth(r, rep.best_sigma_factor * size), g).auc for r, g in zip(raws, gts))
    assert rep.center_bias["auc"] > no_bias
    assert rep.center_bias["alpha"] in ALPHA_GRID and rep.center_bias["sigma_c_factor"] in SIGMA_C_GRID
    assert rep.center_bias["alpha"] < 1.0
    # alpha = 1 is the identity
    assert np.array_equal(apply_center_bias(raws[0], 1.0, 0.25), raws[0])


def test_calibrate_categories_and_tables(rng):
    raws, gts = blob_set(rng, 4)
    rep = calibrate(lambda r: r, raws, gts, CalibrationOptions(center_bias=True), model="toy",
                    categories=[1, 1, 3, 3])
    assert set(rep.categories) == {"1", "3"} and rep.categories["1"]["n"] == 2
    tables = report_tables([rep])
    header, rows = tables["auc"]
    assert header[0] == "model" and header[-1] == "overall" and len(header) == 8
    assert rows[0][0] == "toy" and rows[0][2] == "" and rows[0][-1] == rep.auc
    assert set(tables) == {"auc", "podsc", "smoothing", "center_bias"}
    assert len(tables["smoothing"][1]) == len(SIGMA_GRID)
    json.dumps(rep.to_dict(), default=float)


def test_calibrate_parallel_matches_serial(rng):
    raws, gts = blob_set(rng, 5)
    a = calibrate(lambda r: r, raws, gts, CalibrationOptions(center_bias=False))
    b = calibrate(lambda r: r, raws, gts, CalibrationOptions(center_bias=False), jobs=3)
    assert a.to_dict() == b.to_dict()


def test_mean_is_order_independent():
    vals = [0.1, 1e16, -1e16, 0.2] * 5
    assert mean(vals) == mean(vals[::-1]) == math.fsum(vals) / len(vals)


# ---------------------------------------------------------------- manifests

def test_manifest_roundtrip(tmp_path):
    img = np.random.default_rng(0).random((10, 12, 3))
    write_image(tmp_path / "a.ppm", img)
    mask = np.zeros((10, 12))
    mask[2:5, 3:6] = 1
    write_image(tmp_path / "a_mask.pgm", mask)
    (tmp_path / "fix.txt").write_text("# x y\n1 2\n3.5, 4\n")
    (tmp_path / "m.json").write_text(json.dumps([
        {"image": "a.ppm", "gt": "a_mask.pgm", "gt_kind": "region-mask", "category": 2},
        {"image": "a.ppm", "gt": "fix.txt", "gt_kind": "fixation-set"},
    ]))
    recs = load_manifest(tmp_path / "m.json")
    assert recs[0].category == 2 and recs[1].category is None
    gt = load_ground_truth(recs[0], (10, 12))
    assert gt.mask.sum() == 9
    gt = load_ground_truth(recs[1], (10, 12))
    assert gt.points == [(1.0, 2.0), (3.5, 4.0)]
    (tmp_path / "fix.json").write_text("[[1, 2], [3, 4]]")
    assert read_fixations(tmp_path / "fix.json") == [(1.0, 2.0), (3.0, 4.0)]
    for bad in ([{"image": "a.ppm", "gt": "x", "category": 9}], [{"image": "a.ppm"}],
                [{"image": "a", "gt": "b", "gt_kind": "blob"}], {"image": "a"}):
        (tmp_path / "bad.json").write_text(json.dumps(bad))
        with pytest.raises(ValueError):
            load_manifest(tmp_path / "bad.json")
