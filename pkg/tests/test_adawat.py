"""
Adaptive wavelet analysis and synthesis.
"""
import numpy as np
import pytest

from fusion_cli.adawat.adawat import (BANDS, AdaWatParams, SubbandSet, adaiwat, adawat_forward, analysis_init,
                                      build_kernels, decompose_image, haar_init)
from fusion_cli.autodiff import ops
from fusion_cli.autodiff.gradcheck import gradient_check
from fusion_cli.errors import ShapeError

ROOT_HALF = np.sqrt(0.5)


def test_haar_init_vectors():
    v = haar_init()
    assert np.allclose(v.u0, [ROOT_HALF, ROOT_HALF])
    assert np.allclose(v.u1, [ROOT_HALF, -ROOT_HALF])
    assert v.length == 2


@pytest.mark.parametrize('length', [2, 4])
def test_init_pair_is_orthonormal(length):
    v = analysis_init(length)
    assert v.length == length
    assert np.isclose(np.dot(v.u0, v.u1), 0.0, atol=1e-12)
    assert np.isclose(np.dot(v.u0, v.u0), 1.0)
    assert np.isclose(np.dot(v.u1, v.u1), 1.0)


def test_unsupported_length_raises():
    with pytest.raises(ShapeError):
        analysis_init(3)


def test_haar_kernels():
    k = build_kernels(haar_init())
    assert np.allclose(k.ll, 0.5 * np.ones((2, 2)))
    assert np.allclose(k.hh, 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert np.allclose(k.lh, 0.5 * np.array([[1.0, -1.0], [1.0, -1.0]]))
    assert np.allclose(k.hl, k.lh.T)


def test_kernels_of_basis_vectors():
    v = haar_init()
    v.u0 = np.array([1.0, 0.0])
    v.u1 = np.array([0.0, 1.0])
    k = build_kernels(v)
    assert np.array_equal(k.band('ll'), [[1.0, 0.0], [0.0, 0.0]])
    assert np.array_equal(k.band('lh'), [[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(k.band('hl'), [[0.0, 0.0], [1.0, 0.0]])


def test_constant_input_lands_in_low_band():
    s = adawat_forward(np.full((1, 3, 8, 8), 0.6), AdaWatParams(3), enhance=False)
    assert s.shape == (1, 3, 4, 4)
    assert np.allclose(s.ll.value, 1.2)
    for band in (s.lh, s.hl, s.hh):
        assert np.allclose(band.value, 0.0)


def test_checkerboard_lands_in_diagonal_band():
    i, j = np.indices((8, 8))
    board = ((-1.0) ** (i + j)).reshape(1, 1, 8, 8)
    s = adawat_forward(board, AdaWatParams(1), enhance=False)
    assert np.allclose(s.ll.value, 0.0)
    assert np.allclose(s.lh.value, 0.0)
    assert np.allclose(s.hl.value, 0.0)
    assert np.allclose(np.abs(s.hh.value), 2.0)


def test_analysis_matches_strided_depthwise_conv(rng, conv_oracle):
    f = rng.normal(size=(2, 3, 6, 8))
    s = adawat_forward(f, AdaWatParams(3), enhance=False)
    kernels = build_kernels(haar_init())
    for band, value in zip(BANDS, s.bands()):
        weight = np.broadcast_to(kernels.band(band), (3, 1, 2, 2))
        assert np.allclose(value.value, conv_oracle(f, weight, stride=2, groups=3), atol=1e-12)


def test_haar_round_trip_is_exact(rng):
    p = AdaWatParams(2)
    f = rng.normal(size=(1, 2, 16, 16))
    restored = adaiwat(adawat_forward(f, p, enhance=False), p)
    assert restored.shape == f.shape
    assert np.max(np.abs(restored.value - f)) < 1e-9


@pytest.mark.parametrize('seed', range(50))
def test_haar_round_trip_on_random_images(seed):
    rng = np.random.default_rng(seed)
    channels = int(rng.integers(1, 4))
    p = AdaWatParams(channels)
    f = rng.uniform(-1.0, 1.0, size=(1, channels, 64, 64)) * rng.uniform(0.1, 10.0)
    restored = adaiwat(adawat_forward(f, p, enhance=rng.random() < 0.5), p)
    assert np.max(np.abs(restored.value - f)) < 1e-9


def test_haar_bands_split_energy(rng):
    f = rng.normal(size=(1, 2, 8, 8))
    s = adawat_forward(f, AdaWatParams(2), enhance=False)
    energy = sum(np.sum(band.value ** 2) for band in s.bands())
    assert np.isclose(energy, np.sum(f ** 2), rtol=1e-9)


def test_zero_enhancement_is_identity(rng):
    p = AdaWatParams(2)
    f = rng.normal(size=(1, 2, 8, 8))
    plain = adawat_forward(f, p, enhance=False)
    enhanced = adawat_forward(f, p, enhance=True)
    for a, b in zip(plain.bands(), enhanced.bands()):
        assert np.array_equal(a.value, b.value)


def test_enhancement_changes_bands(rng):
    p = AdaWatParams(2)
    p.dconv_hh.value = rng.normal(size=p.dconv_hh.shape)
    f = rng.normal(size=(1, 2, 8, 8))
    plain = adawat_forward(f, p, enhance=False)
    enhanced = adawat_forward(f, p, enhance=True)
    assert np.array_equal(plain.ll.value, enhanced.ll.value)
    assert not np.allclose(plain.hh.value, enhanced.hh.value)


@pytest.mark.parametrize('band,dilation', [('ll', 3), ('lh', 1), ('hl', 1), ('hh', 1)])
def test_each_band_uses_its_own_enhancement(band, dilation, rng, conv_oracle):
    p = AdaWatParams(2)
    kernel = rng.normal(size=(2, 1, 3, 3))
    p.enhancement(band).value = kernel
    f = rng.normal(size=(1, 2, 12, 12))
    plain = adawat_forward(f, p, enhance=False)
    enhanced = adawat_forward(f, p, enhance=True)
    for name in BANDS:
        before = getattr(plain, name).value
        after = getattr(enhanced, name).value
        if name == band:
            expected = before + conv_oracle(before, kernel, dilation=dilation, groups=2, pad=dilation)
            assert np.allclose(after, expected, atol=1e-12)
        else:
            assert np.array_equal(after, before)


def test_enhancement_rejects_unknown_band():
    with pytest.raises(ShapeError):
        AdaWatParams(1).enhancement('lo')


def test_low_band_only_synthesis_replicates_blocks(rng):
    low = rng.normal(size=(1, 1, 4, 4))
    zero = np.zeros_like(low)
    out = adaiwat(SubbandSet(ops.lift(low), ops.lift(zero), ops.lift(zero), ops.lift(zero)), AdaWatParams(1)).value
    assert out.shape == (1, 1, 8, 8)
    assert np.allclose(out[0, 0], 0.5 * np.kron(low[0, 0], np.ones((2, 2))))


def test_zero_subbands_synthesize_zero():
    zero = ops.lift(np.zeros((1, 2, 3, 3)))
    assert not adaiwat(SubbandSet(zero, zero, zero, zero), AdaWatParams(2)).value.any()


def test_odd_size_raises(rng):
    with pytest.raises(ShapeError):
        adawat_forward(rng.normal(size=(1, 1, 7, 8)), AdaWatParams(1))


def test_channel_mismatch_raises(rng):
    with pytest.raises(ShapeError):
        adawat_forward(rng.normal(size=(1, 2, 8, 8)), AdaWatParams(3))


def test_subband_shapes_must_agree():
    with pytest.raises(ShapeError):
        SubbandSet(np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 2)), np.zeros((1, 1, 2, 3)))


def test_length_four_keeps_half_resolution(rng):
    p = AdaWatParams(2, length=4)
    s = adawat_forward(rng.normal(size=(1, 2, 8, 12)), p)
    assert s.shape == (1, 2, 4, 6)
    assert adaiwat(s, p).shape == (1, 2, 8, 12)


def test_non_adaptive_vectors_are_frozen():
    p = AdaWatParams(2, adaptive=False)
    names = {param.name for param in p.trainable()}
    assert names == {'adawat.dconv_lo', 'adawat.dconv_lh', 'adawat.dconv_hl', 'adawat.dconv_hh'}
    assert p.param_count() == 2 + 2 + 4 * 18 + 2 + 2


def test_adawat_gradients(rng):
    p = AdaWatParams(2)
    for param in p.parameters():
        param.value = param.value + rng.normal(0.0, 0.1, size=param.shape)
    f = rng.normal(size=(1, 2, 8, 8))
    target = rng.normal(size=(1, 2, 8, 8))
    errors, worst = gradient_check(
        lambda: ops.sum_all(ops.mul(adaiwat(adawat_forward(f, p, enhance=True), p), target)), p.parameters())
    assert errors[worst] < 1e-5


def test_decompose_image_constant():
    bands = decompose_image(np.full((1, 1, 6, 6), 0.25), haar_init())
    assert set(bands) == set(BANDS)
    assert np.allclose(bands['ll'], 0.5)
    assert np.allclose(bands['hh'], 0.0)
