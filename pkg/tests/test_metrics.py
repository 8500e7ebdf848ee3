import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from evcalib.core import IntensityFrame
from evcalib.metrics import compare, gaussian_window, psnr, rmse, ssim

skm = pytest.importorskip("skimage.metrics")


def sk_ssim(a, b):
    return skm.structural_similarity(a, b, gaussian_weights=True, sigma=1.5,
                                     use_sample_covariance=False, data_range=255)


images = arrays(np.float64, (16, 16), elements=st.integers(0, 255).map(float))


def test_rmse_values():
    z = np.zeros((12, 12))
    assert rmse(z, z) == 0
    assert rmse(z, z + 10) == 10
    assert rmse(z, z + 255) == 255


def test_psnr_values():
    z = np.zeros((12, 12))
    assert psnr(z, z) == 100
    assert psnr(z, z + 255) == pytest.approx(0.0)
    assert psnr(z, z + 25.5) == pytest.approx(20.0)
    # tiny errors are capped too
    assert psnr(z, z + 1e-9) == 100


def test_accepts_frames():
    v = np.full((12, 12), 30.0)
    r = compare(IntensityFrame(0.0, v), IntensityFrame(1.0, v))
    assert (r.rmse, r.psnr, r.ssim) == (0.0, 100.0, 1.0)


def test_window():
    w = gaussian_window()
    assert w.shape == (11, 11) and w.sum() == pytest.approx(1.0)
    assert np.allclose(w, w.T) and w[5, 5] == w.max()


def test_ssim_identical(rng):
    a = rng.integers(0, 256, (20, 30)).astype(float)
    assert ssim(a, a) == pytest.approx(1.0, abs=1e-12)


def test_ssim_inverted_structure_negative():
    a = np.zeros((24, 24))
    a[:, ::2] = 255.0
    assert ssim(a, 255.0 - a) < 0


def test_ssim_matches_reference(rng):
    for _ in range(10):
        a = rng.integers(0, 256, (32, 40)).astype(float)
        b = np.clip(a + rng.normal(0, 30, a.shape), 0, 255).round()
        assert ssim(a, b) == pytest.approx(sk_ssim(a, b), abs=1e-4)


def test_ssim_small_image_rejected():
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))
    with pytest.raises(ValueError, match="resolution"):
        rmse(np.zeros((12, 12)), np.zeros((12, 13)))


@settings(max_examples=50, deadline=None)
@given(images, images)
def test_symmetry_and_ranges(a, b):
    assert rmse(a, b) == rmse(b, a)
    assert psnr(a, b) == psnr(b, a)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert -1 <= ssim(a, b) <= 1 + 1e-12
    assert 0 <= psnr(a, b) <= 100


@settings(max_examples=30, deadline=None)
@given(images, images)
def test_ssim_against_reference(a, b):
    assert ssim(a, b) == pytest.approx(sk_ssim(a, b), abs=1e-4)
