"""
Checkpoint file: a text manifest followed by raw little-endian float64 payloads.

    fusion-checkpoint 1
    config channels=64
    ...
    step 120
    entry param stem.w 64,1,3,3
    entry adam_m stem.w 64,1,3,3
    ...
    payload
    <bytes in entry order>
"""
from collections import OrderedDict
from typing import List, Optional, Tuple

import numpy as np

from ..atomic import atomic_write
from ..autodiff.optim import AdamState
from ..errors import CheckpointError, ConfigError
from .config import FusionConfig, parse_config_lines
from .model import ModelParams

MAGIC = 'fusion-checkpoint'
VERSION = 1
PAYLOAD_MARKER = b'\npayload\n'
ENTRY_KINDS = ('param', 'adam_m', 'adam_v')
DTYPE = np.dtype('<f8')


class Checkpoint(object):
    def __init__(self, params: ModelParams, config: FusionConfig, state: Optional[AdamState] = None):
        self.params = params
        self.config = config
        self.state = state

    @property
    def step(self) -> int:
        return self.state.step if self.state else 0

    def __repr__(self):
        return 'Checkpoint(step={}, params={})'.format(self.step, self.params.param_count())


def _entries(params: ModelParams, state: Optional[AdamState]) -> List[Tuple[str, str, np.ndarray]]:
    entries = [('param', p.name, p.value) for p in params.parameters()]
    if state is not None:
        for p in params.parameters():
            if p.name in state.m:
                entries.append(('adam_m', p.name, state.m[p.name]))
                entries.append(('adam_v', p.name, state.v[p.name]))
    return entries


def _shape_text(shape) -> str:
    return ','.join(str(d) for d in shape)


def encode_checkpoint(params: ModelParams, config: FusionConfig, state: Optional[AdamState] = None) -> bytes:
    entries = _entries(params, state)
    lines = ['{} {}'.format(MAGIC, VERSION)]
    lines.extend('config {}'.format(line) for line in config.describe())
    lines.append('step {}'.format(state.step if state else 0))
    lines.extend('entry {} {} {}'.format(kind, name, _shape_text(value.shape)) for kind, name, value in entries)
    manifest = '\n'.join(lines).encode('utf-8')
    payload = b''.join(np.ascontiguousarray(value, dtype=DTYPE).tobytes() for _, _, value in entries)
    return manifest + PAYLOAD_MARKER + payload


def save_checkpoint(path: str, params: ModelParams, config: FusionConfig, state: Optional[AdamState] = None):
    atomic_write(path, encode_checkpoint(params, config, state))


def _parse_manifest(text: str):
    lines = text.split('\n')
    if not lines or lines[0].strip() != '{} {}'.format(MAGIC, VERSION):
        raise CheckpointError('Not a version {} checkpoint: first line is "{}"'.format(VERSION, lines[0][:40]))
    config_lines = []
    step = 0
    entries = []
    for line in lines[1:]:
        fields = line.split(' ')
        if fields[0] == 'config':
            config_lines.append(line[len('config '):])
        elif fields[0] == 'step' and len(fields) == 2:
            try:
                step = int(fields[1])
            except ValueError:
                raise CheckpointError('Bad step line: "{}"'.format(line))
        elif fields[0] == 'entry' and len(fields) == 4:
            if fields[1] not in ENTRY_KINDS:
                raise CheckpointError('Unknown entry kind {}'.format(fields[1]))
            try:
                shape = tuple(int(d) for d in fields[3].split(','))
            except ValueError:
                raise CheckpointError('Bad shape in entry line: "{}"'.format(line))
            entries.append((fields[1], fields[2], shape))
        elif line.strip():
            raise CheckpointError('Unrecognized manifest line: "{}"'.format(line))
    return config_lines, step, entries


def decode_checkpoint(data: bytes) -> Checkpoint:
    marker = data.find(PAYLOAD_MARKER)
    if marker < 0:
        raise CheckpointError('Checkpoint has no payload marker')
    try:
        text = data[:marker].decode('utf-8')
    except UnicodeDecodeError:
        raise CheckpointError('Checkpoint manifest is not text')
    config_lines, step, entries = _parse_manifest(text)
    try:
        config = FusionConfig(**parse_config_lines(config_lines))
    except ConfigError as error:
        raise CheckpointError('Checkpoint config rejected: {}'.format(error))

    params = ModelParams(config)
    by_name = OrderedDict((p.name, p) for p in params.parameters())
    payload = data[marker + len(PAYLOAD_MARKER):]
    expected = sum(int(np.prod(shape)) for _, _, shape in entries) * DTYPE.itemsize
    if len(payload) != expected:
        raise CheckpointError('Payload holds {} bytes but the manifest describes {}'.format(len(payload), expected))

    state = AdamState()
    state.step = step
    loaded = set()
    offset = 0
    for kind, name, shape in entries:
        if name not in by_name:
            raise CheckpointError('Checkpoint entry {} is not a parameter of this configuration'.format(name))
        target = by_name[name]
        if shape != target.shape:
            raise CheckpointError('Shape of {} is {} in the checkpoint but {} in the configuration'
                                  .format(name, shape, target.shape))
        size = int(np.prod(shape))
        value = np.frombuffer(payload, dtype=DTYPE, count=size, offset=offset).astype(np.float64).reshape(shape)
        offset += size * DTYPE.itemsize
        if kind == 'param':
            if name in loaded:
                raise CheckpointError('Parameter {} appears twice'.format(name))
            target.value = value
            loaded.add(name)
        elif kind == 'adam_m':
            state.m[name] = value
        else:
            state.v[name] = value
    missing = [name for name in by_name if name not in loaded]
    if missing:
        raise CheckpointError('Checkpoint lacks {} parameter(s), first {}'.format(len(missing), missing[0]))
    if set(state.m) != set(state.v):
        raise CheckpointError('Adam moments are incomplete')
    return Checkpoint(params, config, state if step or state.m else None)


def load_checkpoint(path: str) -> Checkpoint:
    try:
        with open(path, 'rb') as stream:
            data = stream.read()
    except OSError as error:
        raise CheckpointError('Cannot read checkpoint {}: {}'.format(path, error))
    return decode_checkpoint(data)
