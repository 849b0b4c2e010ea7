"""
End-to-end runs of the click commands on small images and the micro model.
"""
import os

import numpy as np
import pytest
from click.testing import CliRunner

from fusion_cli import logger
from fusion_cli.fusion_lib import cli
from fusion_cli.image_io.pnm import Image, read_pnm, write_pnm
from fusion_cli.metrics.metrics import METRIC_NAMES
from fusion_cli.tensor.dump import load_tensor

MICRO_TRAINING = '\n'.join([
    '# micro model',
    'channels=4',
    'n1=1',
    'n2=1',
    'steps=3',
    'batch_size=1',
    'patch_size=16',
    'lr=0.001',
    '',
])


@pytest.fixture
def runner():
    return CliRunner()


def _gray(path, rng, width=16, height=16):
    write_pnm(str(path), Image(width, height, 1, rng.integers(0, 256, size=(height, width, 1)).astype(np.uint8)))
    return str(path)


def _color(path, rng, width=16, height=16):
    write_pnm(str(path), Image(width, height, 3, rng.integers(0, 256, size=(height, width, 3)).astype(np.uint8)))
    return str(path)


def _pair_directory(root, rng, names=('one.pgm', 'two.pgm')):
    for side in ('a', 'b'):
        os.makedirs(str(root / side), exist_ok=True)
        for name in names:
            _gray(root / side / name, rng)
    return str(root)


def test_info_reports_parameter_count(runner, micro_checkpoint):
    result = runner.invoke(cli, ['info', '--ckpt', micro_checkpoint])
    assert result.exit_code == 0
    assert 'param_count=4000' in result.output
    assert 'step=0' in result.output


def test_info_rejects_corrupt_checkpoint(runner, tmp_path):
    path = tmp_path / 'broken.ckpt'
    path.write_bytes(b'not a checkpoint')
    result = runner.invoke(cli, ['info', '--ckpt', str(path)])
    assert result.exit_code == 2


def test_fuse_writes_deterministic_grayscale(runner, tmp_path, rng, micro_checkpoint):
    a = _gray(tmp_path / 'a.pgm', rng)
    b = _gray(tmp_path / 'b.pgm', rng)
    outputs = [str(tmp_path / name) for name in ('first.pgm', 'second.pgm')]
    for out in outputs:
        result = runner.invoke(cli, ['fuse', '--a', a, '--b', b, '--ckpt', micro_checkpoint, '--out', out])
        assert result.exit_code == 0
    fused = read_pnm(outputs[0])
    assert (fused.width, fused.height, fused.channels) == (16, 16, 1)
    with open(outputs[0], 'rb') as first, open(outputs[1], 'rb') as second:
        assert first.read() == second.read()


def test_fuse_crops_back_unaligned_sizes(runner, tmp_path, rng, micro_checkpoint):
    a = _gray(tmp_path / 'a.pgm', rng, width=18, height=14)
    b = _gray(tmp_path / 'b.pgm', rng, width=18, height=14)
    out = str(tmp_path / 'f.pgm')
    result = runner.invoke(cli, ['fuse', '--a', a, '--b', b, '--ckpt', micro_checkpoint, '--out', out])
    assert result.exit_code == 0
    fused = read_pnm(out)
    assert (fused.width, fused.height) == (18, 14)


def test_fuse_keeps_chroma_of_color_source(runner, tmp_path, rng, micro_checkpoint):
    a = _gray(tmp_path / 'a.pgm', rng)
    b = _color(tmp_path / 'b.ppm', rng)
    out = str(tmp_path / 'f.ppm')
    result = runner.invoke(cli, ['fuse', '--a', a, '--b', b, '--ckpt', micro_checkpoint, '--out', out,
                                 '--color', 'b'])
    assert result.exit_code == 0
    assert read_pnm(out).channels == 3
    result = runner.invoke(cli, ['fuse', '--a', a, '--b', b, '--ckpt', micro_checkpoint, '--out', out,
                                 '--color', 'a'])
    assert result.exit_code == 2


def test_fuse_usage_errors(runner, tmp_path, rng, micro_checkpoint):
    a = _gray(tmp_path / 'a.pgm', rng)
    b = _gray(tmp_path / 'b.pgm', rng, width=8)
    out = str(tmp_path / 'f.pgm')
    assert runner.invoke(cli, ['fuse', '--a', a, '--b', b, '--ckpt', micro_checkpoint, '--out', out]).exit_code == 2
    missing = str(tmp_path / 'missing.ckpt')
    assert runner.invoke(cli, ['fuse', '--a', a, '--b', a, '--ckpt', missing, '--out', out]).exit_code == 2
    assert not os.path.exists(out)


def test_decompose_writes_bands_and_spectra(runner, tmp_path, micro_checkpoint):
    write_pnm(str(tmp_path / 'flat.pgm'), Image(16, 16, 1, np.full((16, 16, 1), 100, dtype=np.uint8)))
    out = tmp_path / 'bands'
    result = runner.invoke(cli, ['decompose', '--in', str(tmp_path / 'flat.pgm'), '--ckpt', micro_checkpoint,
                                 '--out', str(out), '--dump'])
    assert result.exit_code == 0
    assert sorted(os.listdir(str(out))) == sorted(
        ['{}{}'.format(band, suffix) for band in ('ll', 'lh', 'hl', 'hh')
         for suffix in ('.pgm', '_spectrum.pgm', '.tensor')])
    assert read_pnm(str(out / 'll.pgm')).width == 8
    assert np.all(read_pnm(str(out / 'hh.pgm')).pixels == 128)
    ll = load_tensor(str(out / 'll.tensor'))
    assert ll.shape == (1, 1, 8, 8)
    assert np.allclose(ll, 2.0 * 100 / 255.0)


def test_metrics_writes_rows_and_mean(runner, tmp_path, rng):
    root = _pair_directory(tmp_path, rng, names=('x.pgm',))
    os.makedirs(str(tmp_path / 'fused'))
    _gray(tmp_path / 'fused' / 'x.pgm', rng)
    csv_path = str(tmp_path / 'scores.csv')
    args = ['metrics', '--fused', str(tmp_path / 'fused'), '--a', os.path.join(root, 'a'),
            '--b', os.path.join(root, 'b'), '--csv', csv_path]
    assert runner.invoke(cli, args).exit_code == 0
    with open(csv_path) as stream:
        lines = stream.read().splitlines()
    assert lines[0] == ','.join(['file'] + list(METRIC_NAMES))
    assert [line.split(',')[0] for line in lines[1:]] == ['x.pgm', 'mean']
    assert lines[1].split(',')[1:] == lines[2].split(',')[1:]

    _gray(tmp_path / 'fused' / 'y.pgm', rng)
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    with open(csv_path) as stream:
        rows = [line.split(',') for line in stream.read().splitlines()]
    assert rows[2] == ['y.pgm'] + ['nan'] * len(METRIC_NAMES)
    assert rows[3][0] == 'mean'


def test_gradcheck_threshold_controls_exit(runner):
    assert runner.invoke(cli, ['gradcheck', '--entries', '5']).exit_code == 0
    result = runner.invoke(cli, ['gradcheck', '--threshold', '0', '--entries', '1'])
    assert result.exit_code == 1
    assert 'Gradient check failed' in result.output


def test_train_then_resume(runner, tmp_path, rng):
    data = _pair_directory(tmp_path / 'data', rng)
    config = tmp_path / 'run.cfg'
    config.write_text(MICRO_TRAINING)
    ckpt = str(tmp_path / 'model.ckpt')
    result = runner.invoke(cli, ['train', '--data', data, '--config', str(config), '--out', ckpt])
    assert result.exit_code == 0
    with open(ckpt + '.loss.csv') as stream:
        lines = stream.read().splitlines()
    assert lines[0].startswith('step,')
    assert [line.split(',')[0] for line in lines[1:]] == ['1', '2', '3']

    result = runner.invoke(cli, ['train', '--data', data, '--config', str(config), '--out', ckpt,
                                 '--resume', ckpt, '--steps', '2'])
    assert result.exit_code == 0
    with open(ckpt + '.loss.csv') as stream:
        lines = stream.read().splitlines()
    assert [line.split(',')[0] for line in lines[1:]] == ['1', '2', '3', '4', '5']

    result = runner.invoke(cli, ['info', '--ckpt', ckpt])
    assert result.exit_code == 0
    assert 'step=5' in result.output


def test_train_usage_errors(runner, tmp_path, rng):
    empty = tmp_path / 'empty'
    (empty / 'a').mkdir(parents=True)
    (empty / 'b').mkdir()
    config = tmp_path / 'run.cfg'
    config.write_text(MICRO_TRAINING)
    out = str(tmp_path / 'model.ckpt')
    assert runner.invoke(cli, ['train', '--data', str(empty), '--config', str(config), '--out', out]).exit_code == 2

    data = _pair_directory(tmp_path / 'data', rng)
    config.write_text(MICRO_TRAINING + 'dropout=0.1\n')
    assert runner.invoke(cli, ['train', '--data', data, '--config', str(config), '--out', out]).exit_code == 2
    assert not os.path.exists(out)


def test_verbose_flag_shows_debug_logs(runner, tmp_path, micro_checkpoint):
    write_pnm(str(tmp_path / 'flat.pgm'), Image(16, 16, 1, np.full((16, 16, 1), 100, dtype=np.uint8)))
    args = ['decompose', '--in', str(tmp_path / 'flat.pgm'), '--ckpt', micro_checkpoint, '--out', str(tmp_path)]
    quiet = runner.invoke(cli, args)
    loud = runner.invoke(cli, ['--verbose'] + args)
    assert quiet.exit_code == 0 and loud.exit_code == 0
    assert 'Band ll range' not in quiet.output
    assert 'Band ll range' in loud.output


def test_logger_prepares_windows_console(monkeypatch):
    calls = []
    monkeypatch.setattr(logger.colorama, 'just_fix_windows_console', lambda: calls.append(True))
    logger.Logger()
    assert calls


def test_train_is_byte_reproducible(runner, tmp_path, rng):
    data = _pair_directory(tmp_path / 'data', rng)
    config = tmp_path / 'run.cfg'
    config.write_text(MICRO_TRAINING)
    outputs = [str(tmp_path / name) for name in ('first.ckpt', 'second.ckpt')]
    for out in outputs:
        result = runner.invoke(cli, ['train', '--data', data, '--config', str(config), '--out', out])
        assert result.exit_code == 0
    for suffix in ('', '.loss.csv'):
        with open(outputs[0] + suffix, 'rb') as first, open(outputs[1] + suffix, 'rb') as second:
            assert first.read() == second.read()


def test_decompose_routes_horizontal_sine(runner, tmp_path, micro_checkpoint):
    columns = np.round(128.0 + 100.0 * np.sin(2.0 * np.pi * 2.0 * np.arange(32) / 32.0))
    pixels = np.tile(columns, (32, 1)).astype(np.uint8).reshape(32, 32, 1)
    write_pnm(str(tmp_path / 'sine.pgm'), Image(32, 32, 1, pixels))
    out = tmp_path / 'bands'
    result = runner.invoke(cli, ['decompose', '--in', str(tmp_path / 'sine.pgm'), '--ckpt', micro_checkpoint,
                                 '--out', str(out), '--dump'])
    assert result.exit_code == 0
    energy = {band: np.sum(load_tensor(str(out / '{}.tensor'.format(band))) ** 2) for band in ('lh', 'hl', 'hh')}
    assert energy['lh'] > 0.5
    assert energy['hl'] < 1e-20 and energy['hh'] < 1e-20

    spectrum = read_pnm(str(out / 'll_spectrum.pgm')).pixels[..., 0].astype(float)
    assert spectrum.shape == (16, 16)
    spectrum[8, 8] = -1.0
    peaks = sorted(zip(*np.unravel_index(np.argsort(spectrum, axis=None)[-2:], spectrum.shape)))
    assert peaks == [(8, 6), (8, 10)]
    assert spectrum[8, 6] == spectrum[8, 10]
