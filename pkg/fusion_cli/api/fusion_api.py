import csv
import io
import os
from typing import List, Optional

import numpy as np

from ..adawat.adawat import BANDS, decompose_image
from ..atomic import atomic_write_text
from ..errors import ImageFormatError, ShapeError
from ..image_io.color import from_tensor, rgb_to_ycbcr, to_tensor, ycbcr_to_rgb
from ..image_io.patches import crop_back, list_images, load_pair_directory, pad_to_multiple
from ..image_io.pnm import Image, read_pnm, write_pnm
from ..image_io.render import log_spectrum, normalize_to_image
from ..logger import Logger
from ..metrics.metrics import METRIC_NAMES, evaluate, mean_report
from ..pipeline.checkpoint import load_checkpoint, save_checkpoint
from ..pipeline.config import FusionConfig, load_run_config, parse_config_lines
from ..pipeline.diagnostics import model_gradient_check
from ..pipeline.model import SIZE_MULTIPLE, fuse, param_count
from ..pipeline.trainer import CSV_HEADER, train_toy
from ..tensor.dump import dump_tensor

METRICS_HEADER = ['file'] + list(METRIC_NAMES)


def _luminance(img: Image) -> np.ndarray:
    return rgb_to_ycbcr(img)[0] if img.channels == 3 else to_tensor(img)


def _csv_text(rows: List[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerows(rows)
    return buffer.getvalue()


class FusionAPI(object):
    def __init__(self, logger: Logger):
        self.logger = logger

    def log_tag(self, tag: str):
        """
        Update the tag of the logs.
        """
        self.logger.tag = tag

    def log_config(self, lines: List[str]):
        """
        Log the resolved configuration, one key=value per line.
        """
        for line in lines:
            self.info('{}', line)

    def fuse_images(self, a_path: str, b_path: str, ckpt_path: str, out_path: str,
                    color: Optional[str] = None) -> bool:
        """
        Fuse two aligned images and write the result.

        :return: True if the fused image was written.
        """
        checkpoint = load_checkpoint(ckpt_path)
        self.log_config(['a={}'.format(a_path), 'b={}'.format(b_path), 'ckpt={}'.format(ckpt_path),
                         'out={}'.format(out_path), 'color={}'.format(color or '')]
                        + checkpoint.config.describe())
        sources = {'a': read_pnm(a_path), 'b': read_pnm(b_path)}
        if (sources['a'].width, sources['a'].height) != (sources['b'].width, sources['b'].height):
            raise ShapeError('Source sizes differ: {}x{} vs {}x{}'.format(
                sources['a'].width, sources['a'].height, sources['b'].width, sources['b'].height))
        if color and sources[color].channels != 3:
            raise ImageFormatError('--color {} needs a color (P6) source but {} is grayscale'.format(color, color))

        a, size = pad_to_multiple(_luminance(sources['a']), SIZE_MULTIPLE)
        b, _ = pad_to_multiple(_luminance(sources['b']), SIZE_MULTIPLE)
        self.info('Fusing {}x{} luminance with {} parameters', size[1], size[0], param_count(checkpoint.params))
        fused = crop_back(fuse(a, b, checkpoint.params, checkpoint.config, mask_mode='hard').value, size)

        if color:
            _, cb, cr = rgb_to_ycbcr(sources[color])
            write_pnm(out_path, ycbcr_to_rgb(fused, cb, cr))
        else:
            write_pnm(out_path, from_tensor(fused))
        self.success('Wrote fused image {}', out_path)
        return True

    def decompose(self, in_path: str, ckpt_path: str, out_dir: str, dump: bool = False) -> bool:
        """
        Write the four analysis subbands of an image and their log-magnitude spectra.
        With dump, each subband is also written as a raw `{band}.tensor` text dump.

        :return: True once all eight images are written.
        """
        checkpoint = load_checkpoint(ckpt_path)
        self.log_config(['in={}'.format(in_path), 'ckpt={}'.format(ckpt_path), 'out={}'.format(out_dir),
                         'wavelet_length={}'.format(checkpoint.config.wavelet_length)])
        image, _ = pad_to_multiple(_luminance(read_pnm(in_path)), 2)
        bands = decompose_image(image, checkpoint.params.adawat.analysis())
        os.makedirs(out_dir, exist_ok=True)
        for band in BANDS:
            plane = bands[band][0, 0]
            write_pnm(os.path.join(out_dir, '{}.pgm'.format(band)), normalize_to_image(plane))
            write_pnm(os.path.join(out_dir, '{}_spectrum.pgm'.format(band)), normalize_to_image(log_spectrum(plane)))
            if dump:
                dump_tensor(os.path.join(out_dir, '{}.tensor'.format(band)), bands[band])
            self.debug('Band {} range [{:.4f}, {:.4f}]', band, float(plane.min()), float(plane.max()))
        self.success('Wrote {} subband images to {}', 2 * len(BANDS), out_dir)
        return True

    def evaluate_directory(self, fused_dir: str, a_dir: str, b_dir: str, csv_path: str) -> bool:
        """
        Score every fused image against its sources and write a CSV with a mean row.

        :return: True if every item was scored.
        """
        self.log_config(['fused={}'.format(fused_dir), 'a={}'.format(a_dir), 'b={}'.format(b_dir),
                         'csv={}'.format(csv_path)])
        names = list_images(fused_dir)
        if not names:
            raise ImageFormatError('No PNM images in {}'.format(fused_dir))
        rows = [METRICS_HEADER]
        reports = []
        failed = 0
        for name in names:
            try:
                fused = _luminance(read_pnm(os.path.join(fused_dir, name)))
                a = _luminance(read_pnm(os.path.join(a_dir, name)))
                b = _luminance(read_pnm(os.path.join(b_dir, name)))
                report = evaluate(fused, a, b)
            except (OSError, ImageFormatError, ShapeError) as error:
                self.error('Cannot score {}: {}', name, error)
                rows.append([name] + ['nan'] * len(METRIC_NAMES))
                failed += 1
                continue
            self.debug('{} {}', name, report)
            reports.append(report)
            rows.append([name] + report.values())
        if reports:
            rows.append(['mean'] + mean_report(reports).values())
        atomic_write_text(csv_path, _csv_text(rows))
        if failed:
            self.warn('{} of {} item(s) could not be scored', failed, len(names))
            return False
        self.success('Scored {} item(s) into {}', len(reports), csv_path)
        return True

    def check_gradients(self, config_path: Optional[str], threshold: float, entries: Optional[int] = None) -> bool:
        """
        Finite-difference check of every parameter of a small model.

        :return: True if the worst relative error is below threshold.
        """
        pairs = {}
        if config_path:
            with open(config_path, 'r') as stream:
                pairs = parse_config_lines(stream)
        cfg = FusionConfig.micro(**pairs)
        self.log_config(cfg.describe() + ['threshold={}'.format(threshold), 'entries={}'.format(entries or 'all')])
        errors, worst = model_gradient_check(cfg, entries=entries)
        for name in sorted(errors):
            self.debug('{} {:.3e}', name, errors[name])
        self.info('Checked {} parameter(s); worst {} at {:.3e}', len(errors), worst, errors.get(worst, 0.0))
        if errors.get(worst, 0.0) < threshold:
            self.success('All gradients agree within {}', threshold)
            return True
        self.error('Gradient check failed: {} has relative error {:.3e} >= {}', worst, errors[worst], threshold)
        return False

    def train(self, data_dir: str, config_path: Optional[str], out_path: str, resume: Optional[str] = None,
              steps: Optional[int] = None) -> bool:
        """
        Train on the pairs under data_dir/a and data_dir/b and write a checkpoint plus its loss CSV.

        :return: True once the checkpoint is written.
        """
        overrides = {} if steps is None else {'steps': str(steps)}
        cfg = load_run_config(config_path, overrides)
        params, state = None, None
        if resume:
            checkpoint = load_checkpoint(resume)
            if checkpoint.config != cfg.fusion:
                self.warn('Resuming with the model configuration stored in {}', resume)
            cfg.fusion = checkpoint.config
            params, state = checkpoint.params, checkpoint.state
        self.log_config(['data={}'.format(data_dir), 'out={}'.format(out_path), 'resume={}'.format(resume or '')]
                        + cfg.describe())

        pairs = [(a, b) for _, a, b in load_pair_directory(os.path.join(data_dir, 'a'), os.path.join(data_dir, 'b'))]
        self.info('Training on {} pair(s) from step {}', len(pairs), state.step if state else 0)

        def report_step(step, report):
            if step % cfg.train.log_every == 0:
                self.info('step {} {}', step, report)

        params, trace, state = train_toy(pairs, cfg, params=params, state=state, on_step=report_step)
        save_checkpoint(out_path, params, cfg.fusion, state)

        csv_path = out_path + '.loss.csv'
        existing = ''
        if resume and os.path.isfile(csv_path):
            with open(csv_path, 'r') as stream:
                existing = stream.read()
        header = '' if existing else _csv_text([CSV_HEADER])
        atomic_write_text(csv_path, existing + header + _csv_text(trace.rows()))
        if len(trace):
            self.info('Smoothed loss {:.6f} -> {:.6f}', trace.smoothed[0], trace.smoothed[-1])
        self.success('Wrote checkpoint {} at step {}', out_path, state.step)
        return True

    def describe_checkpoint(self, ckpt_path: str) -> bool:
        """
        Print a checkpoint's configuration and parameter count.
        """
        checkpoint = load_checkpoint(ckpt_path)
        self.log_config(checkpoint.config.describe())
        self.info('step={}', checkpoint.step)
        self.success('param_count={}', param_count(checkpoint.params))
        return True

    def success(self, format_string: str, *args):
        """
        Success level logging.
        """
        self.logger.success(format_string, *args)

    def info(self, format_string: str, *args):
        """
        Info level logging.
        """
        self.logger.info(format_string, *args)

    def warn(self, format_string: str, *args):
        """
        Warn level logging.
        """
        self.logger.warn(format_string, *args)

    def error(self, format_string: str, *args):
        """
        Error level logging.
        """
        self.logger.error(format_string, *args)

    def debug(self, format_string: str, *args):
        """
        Debug level logging, shown with --verbose.
        """
        self.logger.debug(format_string, *args)
