"""
Structural, texture and intensity loss terms.
"""
import numpy as np
import pytest
from skimage.metrics import structural_similarity

from fusion_cli.autodiff.gradcheck import gradient_check
from fusion_cli.autodiff.tape import Parameter
from fusion_cli.errors import ConfigError, ShapeError
from fusion_cli.losses.losses import (K1, LossReport, aggregate, gaussian_window, loss_int, loss_ssim, loss_text,
                                      ssim_index, total_loss, window_size_for)
from fusion_cli.pipeline.config import FusionConfig


def _image(rng, size=16):
    return rng.uniform(0.0, 1.0, size=(1, 1, size, size))


def test_gaussian_window_is_normalized():
    window = gaussian_window(11)
    assert window.shape == (11, 11)
    assert np.isclose(window.sum(), 1.0)
    assert np.unravel_index(np.argmax(window), window.shape) == (5, 5)


@pytest.mark.parametrize('size,expected', [((32, 32), 11), ((8, 20), 7), ((9, 9), 9), ((1, 4), 1)])
def test_window_shrinks_for_small_images(size, expected):
    assert window_size_for(*size) == expected


def test_ssim_of_image_with_itself_is_one(rng):
    x = _image(rng)
    assert np.isclose(ssim_index(x, x).item(), 1.0, atol=1e-12)


def test_ssim_of_constants_has_closed_form():
    a, b = 0.2, 0.7
    c1 = K1 ** 2
    expected = (2 * a * b + c1) / (a * a + b * b + c1)
    value = ssim_index(np.full((1, 1, 16, 16), a), np.full((1, 1, 16, 16), b)).item()
    assert np.isclose(value, expected, rtol=1e-9)


def test_ssim_of_inverted_checkerboard_is_negative():
    i, j = np.indices((16, 16))
    board = ((i + j) % 2).astype(np.float64).reshape(1, 1, 16, 16)
    assert ssim_index(board, 1.0 - board).item() < 0.0


def test_ssim_matches_reference_implementation(rng):
    x = rng.uniform(0.0, 1.0, size=(32, 32))
    y = np.clip(x + rng.normal(0.0, 0.1, size=(32, 32)), 0.0, 1.0)
    expected = structural_similarity(x, y, gaussian_weights=True, sigma=1.5, use_sample_covariance=False,
                                     data_range=1.0)
    assert np.isclose(ssim_index(x.reshape(1, 1, 32, 32), y.reshape(1, 1, 32, 32)).item(), expected, atol=1e-7)


def test_ssim_averages_over_batch(rng):
    x = rng.uniform(size=(2, 1, 16, 16))
    y = rng.uniform(size=(2, 1, 16, 16))
    separate = [ssim_index(x[k:k + 1], y[k:k + 1]).item() for k in range(2)]
    assert np.isclose(ssim_index(x, y).item(), np.mean(separate))


def test_ssim_shape_checks(rng):
    with pytest.raises(ShapeError):
        ssim_index(_image(rng), _image(rng, 8))
    with pytest.raises(ShapeError):
        ssim_index(rng.uniform(size=(1, 2, 8, 8)), rng.uniform(size=(1, 2, 8, 8)))


def test_loss_ssim_cases(rng):
    a, b = _image(rng), _image(rng)
    assert np.isclose(loss_ssim(a, a, a).item(), 0.0, atol=1e-12)
    assert np.isclose(loss_ssim(a, a, b).item(), 1.0 - ssim_index(a, b).item())


def test_loss_text_zero_cases(rng):
    a = _image(rng)
    assert np.isclose(loss_text(np.full_like(a, 0.3), np.full_like(a, 0.1), np.full_like(a, 0.9)).item(), 0.0)
    assert np.isclose(loss_text(a, a, np.zeros_like(a)).item(), 0.0)


def test_loss_text_of_ramp():
    ramp = np.tile(np.arange(4.0), (4, 1)).reshape(1, 1, 4, 4)
    assert np.isclose(loss_text(np.zeros_like(ramp), ramp, np.zeros_like(ramp)).item(), 6.0)


def test_loss_int_cases(rng):
    a, b = _image(rng), _image(rng)
    assert np.isclose(loss_int(np.maximum(a, b), a, b).item(), 0.0)
    ones = np.ones((1, 1, 4, 4))
    assert np.isclose(loss_int(np.zeros_like(ones), ones, ones).item(), 1.0)
    mean = loss_int(np.full((1, 1, 4, 4), 0.1), np.full((1, 1, 4, 4), 0.2), np.full((1, 1, 4, 4), 0.6), 'mean')
    assert np.isclose(mean.item(), 0.3)


def test_aggregate_modes(rng):
    a, b = _image(rng), _image(rng)
    assert np.array_equal(aggregate(a, b, 'max'), np.maximum(a, b))
    assert np.allclose(aggregate(a, b, 'mean'), 0.5 * (a + b))
    with pytest.raises(ConfigError):
        aggregate(a, b, 'median')


def test_total_loss_is_weighted_sum(rng):
    f, a, b = _image(rng), _image(rng), _image(rng)
    cfg = FusionConfig(task='mef')
    total, report = total_loss(f, a, b, cfg)
    assert isinstance(report, LossReport)
    assert np.isclose(report.l_int, loss_int(f, a, b, 'mean').item())
    expected = 10.0 * report.l_ssim + 20.0 * report.l_text + 20.0 * report.l_int
    assert np.isclose(total.item(), expected)
    assert np.isclose(report.l_total, expected)
    assert min(report.l_ssim, report.l_text, report.l_int) >= 0.0


def test_total_loss_is_symmetric_in_sources(rng):
    f, a, b = _image(rng), _image(rng), _image(rng)
    cfg = FusionConfig()
    assert np.isclose(total_loss(f, a, b, cfg)[0].item(), total_loss(f, b, a, cfg)[0].item(), rtol=1e-12)


def test_loss_report_row():
    report = LossReport(0.1, 0.2, 0.3, 1.0, 2.0, 3.0)
    assert report.row(7) == [7, 0.1, 0.2, 0.3, report.l_total]
    assert np.isclose(report.l_total, 1.4)


@pytest.mark.parametrize('term', ['ssim', 'text', 'int'])
def test_loss_gradients(term):
    rng = np.random.default_rng(29)
    f = Parameter('f', rng.uniform(0.2, 0.8, size=(1, 1, 12, 12)))
    a, b = _image(rng, 12), _image(rng, 12)
    loss = {'ssim': loss_ssim, 'text': loss_text, 'int': loss_int}[term]
    errors, worst = gradient_check(lambda: loss(f, a, b), [f])
    assert errors[worst] < 1e-5
