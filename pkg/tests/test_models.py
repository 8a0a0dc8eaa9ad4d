import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hftsal.imaging import gaussian_smooth, intensity, resize_bilinear
from hftsal.models import (LAPLACIAN, MODEL_NAMES, ModelConfig, SaliencyMap, build_hypercomplex, gs_saliency,
                           hft_saliency, hft_spectrum, matched_noise, noise_amplitude_saliency, pft_saliency,
                           pqft_saliency, rgb_to_features, run_model, saliency_at_scale, spectral_residual,
                           sr_saliency)
from hftsal.patterns import PatternSpec, make_pattern, popout_battery, GREEN, RED
from hftsal.quaternion import QuaternionImage
from hftsal.spectral import hft_forward, polar_decompose
from oracles import pearson, quaternion_dft_direct

colour = st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))


# ---------------------------------------------------------------- features

def test_feature_examples():
    f = rgb_to_features(np.full((2, 2, 3), 0.4))
    assert np.allclose(f.I, 0.4) and np.allclose(f.RG, 0) and np.allclose(f.BY, 0)
    red = rgb_to_features(np.array([[[1.0, 0, 0]]]))
    assert np.allclose([red.I[0, 0], red.RG[0, 0], red.BY[0, 0]], [1 / 3, 1.5, -0.5])
    # B = b - (r+g)/2 = 1 and Y = (r+g)/2 - |r-g|/2 - b = -1, so BY = 2
    blue = rgb_to_features(np.array([[[0, 0, 1.0]]]))
    assert np.allclose([blue.I[0, 0], blue.RG[0, 0], blue.BY[0, 0]], [1 / 3, 0, 2.0])
    yellow = rgb_to_features(np.array([[[1.0, 1.0, 0]]]))
    assert np.allclose([yellow.RG[0, 0], yellow.BY[0, 0]], [0, -2.0])


@given(colour)
def test_feature_ranges(rgb):
    f = rgb_to_features(np.array(rgb, float).reshape(1, 1, 3))
    assert 0 <= f.I[0, 0] <= 1
    assert -1.5 - 1e-12 <= f.RG[0, 0] <= 1.5 + 1e-12
    assert -2.0 - 1e-12 <= f.BY[0, 0] <= 2.0 + 1e-12


def test_hypercomplex_packing():
    ones = np.ones((3, 3))
    f = rgb_to_features(np.zeros((3, 3, 3)))
    assert not build_hypercomplex(f).data.any()
    f = f._replace(I=ones, RG=ones, BY=ones)
    q = build_hypercomplex(f)
    assert np.allclose(q.data[:, 0, 0], [0, 0.5, 0.25, 0.25])
    cfg2 = ModelConfig(weights=(0, 1.0, 0.5, 0.5))
    assert np.allclose(build_hypercomplex(f, cfg2).data, 2 * q.data)
    q = build_hypercomplex(f, ModelConfig(weights=(0.3, 0.5, 0.25, 0.25)), motion=2 * ones)
    assert np.allclose(q.a, 0.6)


def test_model_config_validation():
    for bad in [dict(weights=(0, -1, 0, 0)), dict(weights=(1, 2)), dict(resolution=4),
                dict(varsigma_factor=0), dict(t0=-1), dict(domain="x"), dict(selection="x"),
                dict(post_sigma_factor=-0.1)]:
        with pytest.raises(ValueError):
            ModelConfig(**bad)
    assert ModelConfig(resolution=(64, 96)).shape == (64, 96)


# ---------------------------------------------------------------- per-scale reconstruction

def random_rgb(rng, shape=(32, 32)):
    return rng.random(shape + (3,))


def test_identity_scale_reconstructs_input(rng):
    cfg = ModelConfig(resolution=32, post_sigma_factor=0.0)
    img = random_rgb(rng)
    q = build_hypercomplex(rgb_to_features(img), cfg)
    spec = polar_decompose(hft_forward(q, cfg.axis), cfg.axis)
    m = saliency_at_scale(spec.amplitude, spec.phase, spec.eigenaxis, cfg)
    assert np.max(np.abs(m.values - np.sum(q.data ** 2, axis=0))) < 1e-9


def test_flat_layer_is_phase_only_reconstruction(rng):
    cfg = ModelConfig(resolution=64)
    for _ in range(3):
        img = random_rgb(rng, (50, 70))
        spec = hft_spectrum(img, cfg)
        m = saliency_at_scale(np.ones(spec.shape), spec.phase, spec.eigenaxis, cfg, support=spec.support)
        assert np.max(np.abs(m.values - pqft_saliency(img, cfg, size=64).values)) < 1e-9


def test_zero_phase_flat_amplitude_gives_impulse():
    cfg = ModelConfig(resolution=8, post_sigma_factor=0.0)
    N = 8
    eig = np.tile(cfg.axis.as_array()[:, None, None], (1, N, N))
    m = saliency_at_scale(np.ones((N, N)), np.zeros((N, N)), eig, cfg)
    # oracle: the inverse transform of the all-ones spectrum, by direct sum
    spec = np.zeros((4, N, N))
    spec[0] = 1.0
    rec = quaternion_dft_direct(spec, cfg.axis.as_array(), sign=+1)
    assert np.allclose(m.values, np.sum(rec ** 2, axis=0), atol=1e-12)
    expected = np.zeros((N, N))
    expected[0, 0] = N * N
    assert np.allclose(m.values, expected, atol=1e-12)
    smoothed = saliency_at_scale(np.ones((N, N)), np.zeros((N, N)), eig, cfg.with_(post_sigma_factor=0.05))
    assert np.allclose(smoothed.values, gaussian_smooth(expected, 0.4))


def test_saliency_at_scale_rejects_mismatch():
    with pytest.raises(ValueError):
        saliency_at_scale(np.ones((4, 4)), np.ones((4, 5)), np.ones((3, 4, 4)))


def test_log_domain_layers_are_exponentiated(rng):
    spec = hft_spectrum(random_rgb(rng), ModelConfig(resolution=32))
    cfg = ModelConfig(resolution=32)
    a = saliency_at_scale(np.log(spec.amplitude + 1e-300), spec.phase, spec.eigenaxis, cfg, log_domain=True)
    b = saliency_at_scale(spec.amplitude, spec.phase, spec.eigenaxis, cfg)
    assert np.allclose(a.values, b.values, rtol=1e-9, atol=1e-15)


def test_large_scale_approaches_pqft(rng):
    # with ever wider smoothing the per-scale map moves towards the phase-only map
    img = random_rgb(rng, (64, 64))
    cfg = ModelConfig(resolution=64)
    res = hft_saliency(img, cfg)
    ref = pqft_saliency(img, cfg, size=64).values
    err = [np.max(np.abs(m.values / m.values.mean() - ref / ref.mean())) for m in res.maps]
    assert err[-1] < err[0] and err[-1] < 0.05


# ---------------------------------------------------------------- HFT

def test_hft_result_structure(rng):
    res = hft_saliency(random_rgb(rng, (90, 150)))
    assert res.K == 8 and len(res.raw_maps) == 8
    assert 1 <= res.k_p <= res.K
    assert res.saliency is res.maps[res.k_p - 1]
    assert res.saliency.shape == (128, 128)
    assert np.array_equal(res.raw, res.raw_maps[res.k_p - 1])
    assert res.saliency.provenance()["scale"] == res.k_p
    assert [row["k"] for row in res.trace] == list(range(1, 9))


def test_hft_red_bar_popout():
    img, mask = make_pattern(dict(popout_battery())["color-red-among-green"])
    for name in ("hft", "pqft"):
        m = run_model(name, img)
        big = resize_bilinear(m.values, mask.shape)
        assert mask.ravel()[np.argmax(big)], name


@pytest.mark.parametrize("value", [0.0, 0.37, 1.0])
def test_constant_inputs_give_flat_maps(value):
    img = np.full((40, 40, 3), value)
    for name in MODEL_NAMES:
        if name == "hft-star":
            continue
        m = run_model(name, img)
        assert np.all(np.isfinite(m.values)) and np.all(m.values >= 0), name
        assert np.ptp(m.values) <= 1e-9, name
    res = hft_saliency(img)
    assert res.k_p == 1


def test_gs_constant_and_step():
    assert not gs_saliency(np.full((128, 128), 0.6)).values.any()
    # resizing leaves only round-off
    assert gs_saliency(np.full((30, 30), 0.6)).values.max() < 1e-24
    step = np.zeros((128, 128))
    step[:, 64:] = 1.0
    raw = gs_saliency(step, post_sigma_factor=0.0).values
    # direct stencil: -1 * right neighbour + 4 * centre - ... on a vertical step
    expected = np.zeros((128, 128))
    expected[:, 63] = 1.0   # (4*0 - 1) ** 2
    expected[:, 64] = 1.0   # (4 - 3) ** 2
    assert np.array_equal(raw, expected)
    smoothed = gs_saliency(step).values
    assert np.all(np.argmax(smoothed, axis=1) >= 63) and np.all(np.argmax(smoothed, axis=1) <= 64)
    assert LAPLACIAN.sum() == 0


def test_pft_impulse():
    imp = np.zeros((64, 64))
    imp[0, 0] = 1.0
    raw = pft_saliency(imp, post_sigma_factor=0.0).values
    # unit spectrum -> unitary inverse is an impulse of height N, squared N^2
    expected = np.zeros((64, 64))
    expected[0, 0] = 64.0 ** 2
    assert np.allclose(raw, expected, atol=1e-12)
    assert np.allclose(pft_saliency(imp).values, gaussian_smooth(expected, 3.2))


def test_pft_equals_real_hft_path(rng):
    # intensity in the scalar slot, phase-only reconstruction == PFT
    img = rng.random((64, 64))
    cfg = ModelConfig(resolution=64, weights=(1.0, 0, 0, 0))
    feats = rgb_to_features(np.repeat(img[..., None], 3, axis=2))
    q = build_hypercomplex(feats, cfg, motion=img)
    spec = polar_decompose(hft_forward(q, cfg.axis), cfg.axis)
    m = saliency_at_scale(np.ones(spec.shape), spec.phase, spec.eigenaxis, cfg, support=spec.support)
    assert np.max(np.abs(m.values - pft_saliency(img).values)) < 1e-9


def test_sr_examples():
    assert np.ptp(sr_saliency(np.full((64, 64), 0.5)).values) < 1e-12
    img = np.zeros((64, 64))
    img[20:26, 40:46] = 1.0
    m = sr_saliency(img).values
    y, x = np.unravel_index(np.argmax(m), m.shape)
    assert 20 <= y < 26 and 40 <= x < 46


def test_working_resolutions(rng):
    img = random_rgb(rng, (200, 300))
    assert hft_saliency(img).saliency.shape == (128, 128)
    for fn, n in [(sr_saliency, 64), (pft_saliency, 64), (gs_saliency, 128), (noise_amplitude_saliency, 64)]:
        assert fn(img).shape == (n, n)
    assert pqft_saliency(img).shape == (64, 64)


def test_matched_noise_statistics(rng):
    R = rng.standard_normal((64, 64))
    W = matched_noise(R, np.random.default_rng(1))
    assert np.isclose(W.mean(), R.mean()) and np.isclose(W.max(), R.max())
    mask = np.ones(R.shape, bool)
    mask[0, 0] = False
    W = matched_noise(R, np.random.default_rng(1), stats_mask=mask)
    assert np.isclose(W[mask].mean(), R[mask].mean()) and np.isclose(W[mask].max(), R[mask].max())
    flat = matched_noise(R, np.random.default_rng(1), spread=0.0)
    assert np.allclose(flat, R.mean())


def test_noise_diagnostic_determinism_and_zero_spread(corpus):
    img = corpus[0]
    a = noise_amplitude_saliency(img, seed=7).values
    assert np.array_equal(a, noise_amplitude_saliency(img, seed=7).values)
    assert not np.array_equal(a, noise_amplitude_saliency(img, seed=8).values)
    flat = noise_amplitude_saliency(img, seed=7, spread=0.0).values
    ref = pft_saliency(img).values
    # flat log amplitude == unit amplitude up to a global factor
    assert np.allclose(flat / flat.max(), ref / ref.max(), atol=1e-9)


def test_phase_dominance_examples(corpus):
    sr_pft = [pearson(sr_saliency(im).values, pft_saliency(im).values) for im in corpus]
    assert min(sr_pft) >= 0.9
    seeds = [pearson(noise_amplitude_saliency(im, seed=1).values, noise_amplitude_saliency(im, seed=2).values)
             for im in corpus]
    assert np.mean(seeds) >= 0.9


@settings(max_examples=10)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.5, 2.0]))
def test_argmax_invariant_under_input_scaling(seed, c):
    rng = np.random.default_rng(seed)
    img = rng.random((48, 48, 3)) * 0.5
    img[10:18, 20:28] = [0.5, 0.1, 0.1]
    for name in ("hft", "pqft", "pft"):
        a = run_model(name, img).values
        b = run_model(name, img * c).values
        assert np.argmax(a) == np.argmax(b), name


def test_extreme_inputs_are_finite(rng):
    for img in (np.zeros((40, 40, 3)), np.ones((40, 40, 3)), (rng.random((40, 40, 3)) > 0.5) * 1.0,
                np.zeros((9, 9)), np.ones((128, 1, 3))[:, [0] * 8]):
        for name in MODEL_NAMES:
            if name == "hft-star":
                continue
            m = run_model(name, img)
            assert np.all(np.isfinite(m.values)) and m.values.min() >= 0


def test_saliency_map_validation():
    with pytest.raises(ValueError):
        SaliencyMap(np.ones(3), "x")
    with pytest.raises(ValueError):
        SaliencyMap(np.array([[np.nan]]), "x")
    assert SaliencyMap(np.array([[-1e-20, 1.0]]), "x").values.min() == 0.0


def test_run_model_dispatch(rng):
    img = random_rgb(rng)
    with pytest.raises(ValueError):
        run_model("itti", img)
    with pytest.raises(ValueError):
        run_model("hft-star", img)  # oracle mode needs ground truth
    mask = np.zeros((32, 32), bool)
    mask[8:16, 8:16] = True
    from hftsal.evaluation import GroundTruth
    star = run_model("hft-star", img, gt=GroundTruth.region(mask))
    assert star.model == "hft-star" and 1 <= star.scale <= 8
    raw = run_model("sr", img, raw=True)
    assert raw.post_sigma == 0.0


def test_pattern_spec_colours_available():
    spec = PatternSpec("odd-color-bar", color=GREEN, target_color=RED)
    img, mask = make_pattern(spec)
    assert mask.any() and intensity(img).max() > 0


def test_spectral_residual_full_support_is_plain_box_residual(rng):
    L = rng.standard_normal((16, 16))
    box = sum(np.roll(np.roll(L, dy, 0), dx, 1) for dy in (-1, 0, 1) for dx in (-1, 0, 1)) / 9
    assert np.allclose(spectral_residual(L), L - box, atol=1e-12)
    assert np.allclose(spectral_residual(L, np.ones(L.shape, bool)), L - box, atol=1e-12)
    assert np.abs(spectral_residual(np.full((8, 8), 3.0))).max() < 1e-12


def test_spectral_residual_ignores_off_support_bins():
    L = np.zeros((12, 12))
    support = np.ones(L.shape, bool)
    support[5, 5] = False
    L[5, 5] = -27.6  # log of a spectral zero
    R = spectral_residual(L, support)
    assert R[5, 5] == 0.0 and np.abs(R).max() < 1e-12
