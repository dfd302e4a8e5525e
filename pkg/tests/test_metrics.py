import math

import numpy as np
import pytest

from deraintv import corpus, metrics, solver, synth
from deraintv.errors import InvalidImageError

from oracles import psnr_reference, ssim_reference


def test_psnr_identical_is_inf(rng):
    a = rng.random((16, 16))
    assert metrics.psnr(a, a) == metrics.PSNR_INF


def test_psnr_uniform_offset():
    a = np.zeros((10, 10))
    assert metrics.psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)


def test_psnr_matches_reference(rng):
    a, b = rng.random((12, 14)), rng.random((12, 14))
    assert metrics.psnr(a, b) == pytest.approx(psnr_reference(a, b), abs=1e-9)


def test_psnr_symmetry(rng):
    a, b = rng.random((8, 8)), rng.random((8, 8))
    assert metrics.psnr(a, b) == pytest.approx(metrics.psnr(b, a), abs=1e-12)


def test_psnr_decreases_with_noise(rng):
    a = corpus.procedural_texture(64, seed=3)
    values = []
    for scale in (0.01, 0.03, 0.09):
        noisy = a + scale * rng.standard_normal(a.shape)
        values.append(metrics.psnr(a, noisy))
    assert values[0] > values[1] > values[2]


def test_psnr_shape_mismatch():
    with pytest.raises(InvalidImageError):
        metrics.psnr(np.ones((8, 8)), np.ones((8, 9)))


def test_ssim_identical_is_one(rng):
    a = rng.random((24, 24))
    assert metrics.ssim(a, a) == pytest.approx(1.0, abs=1e-12)


def test_ssim_matches_loop_reference(rng):
    for _ in range(3):
        a, b = rng.random((20, 20)), rng.random((20, 20))
        assert metrics.ssim(a, b) == pytest.approx(
            ssim_reference(a, b), abs=1e-6
        )


def test_ssim_inverted_image_scores_low(rng):
    a = corpus.procedural_texture(32, seed=5)
    value = metrics.ssim(a, 1.0 - a)
    expected = ssim_reference(a, 1.0 - a)
    assert value == pytest.approx(expected, abs=1e-6)
    assert value < 0.5


def test_ssim_symmetry_and_range(rng):
    a, b = rng.random((16, 16)), rng.random((16, 16))
    assert metrics.ssim(a, b) == pytest.approx(metrics.ssim(b, a), abs=1e-12)
    assert -1.0 <= metrics.ssim(a, b) <= 1.0


def test_ssim_window_too_large():
    with pytest.raises(InvalidImageError):
        metrics.ssim(np.ones((6, 6)), np.ones((6, 6)), window=8)


def test_gradient_histogram_constant_image():
    counts, edges = metrics.gradient_histogram(np.full((16, 16), 0.5), "along")
    center_bin = np.digitize(0.0, edges) - 1
    assert counts[center_bin] == counts.sum()


def test_gradient_histogram_needs_16_bins():
    with pytest.raises(InvalidImageError):
        metrics.gradient_histogram(np.ones((8, 8)), "along", bins=8)


def test_clean_corpus_histograms_isotropic(clean_tiles):
    for name, img in clean_tiles.items():
        along, _ = metrics.gradient_histogram(img, "along")
        across, _ = metrics.gradient_histogram(img, "across")
        div = metrics.js_divergence(along, across)
        assert div < 0.05, f"{name}: JS divergence {div}"


def test_rain_layer_histogram_heavy_across_tails():
    layer = synth.synth_rain_layer(128, 128, synth.RainSpec(seed=11))
    along, edges = metrics.gradient_histogram(layer, "along")
    across, _ = metrics.gradient_histogram(layer, "across")
    t_along = metrics.tail_mass(along, edges, 0.1)
    t_across = metrics.tail_mass(across, edges, 0.1)
    assert t_across > 0
    assert t_across / max(t_along, 1e-12) >= 3.0


def test_js_divergence_properties(rng):
    p = rng.integers(0, 100, size=32)
    assert metrics.js_divergence(p, p) == pytest.approx(0.0, abs=1e-12)
    q = rng.integers(0, 100, size=32)
    assert metrics.js_divergence(p, q) == pytest.approx(
        metrics.js_divergence(q, p), abs=1e-12
    )
    disjoint_p = np.zeros(32)
    disjoint_p[:16] = 1
    disjoint_q = np.zeros(32)
    disjoint_q[16:] = 1
    assert metrics.js_divergence(disjoint_p, disjoint_q) == pytest.approx(1.0)


def test_anisotropy_scale_invariance(clean_tiles):
    img = clean_tiles["coins"]
    base = metrics.anisotropy_ratio(img)
    for k in (0.25, 0.5, 1.0):
        assert metrics.anisotropy_ratio(k * img) == pytest.approx(base, rel=1e-9)


def test_anisotropy_clean_range(clean_tiles):
    for name, img in clean_tiles.items():
        ratio = metrics.anisotropy_ratio(img)
        assert 0.7 <= ratio <= 1.4, f"{name}: ratio {ratio}"


def test_evaluate_images_report(rng):
    a = rng.random((32, 32))
    rep = metrics.evaluate_images([("same", a, a), ("noisy", a + 0.05, a)])
    assert rep.per_image[0]["psnr_db"] == metrics.PSNR_INF
    assert rep.per_image[0]["ssim"] == pytest.approx(1.0, abs=1e-9)
    assert math.isfinite(rep.aggregates["mean_psnr_db"])
    assert rep.aggregates["count"] == 2


def test_run_sweep_empty_dataset(tmp_path):
    rep = metrics.run_sweep([], csv_path=tmp_path / "s.csv")
    assert rep.per_image == []
    assert rep.sweep_table == []
    header = (tmp_path / "s.csv").read_text().strip()
    assert header.startswith("id,ratio,angle_err_deg")


def test_run_sweep_grid_rows(clean_tiles, tmp_path):
    clean = clean_tiles["moon"][:64, :64]
    pair = synth.make_pair(clean, synth.RainSpec(seed=3), blend="additive")
    fast = solver.UdgParams(inner_iters=3, outer_iters=2)
    rep = metrics.run_sweep([pair], ratios=[1.0, 2.0],
                            angle_errors_deg=[0.0, 5.0],
                            params=fast, csv_path=tmp_path / "s.csv")
    assert len(rep.sweep_table) == 4
    lines = (tmp_path / "s.csv").read_text().strip().splitlines()
    assert len(lines) == 5  # header + 4 rows
