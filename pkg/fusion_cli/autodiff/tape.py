"""
Reverse-mode gradient tape.

Primitives record (output, inputs, vjp) triples while a tape is recording.
backward() walks the records in reverse, handing each vjp the gradient of its
output and accumulating the returned input gradients. Parameters accumulate
into their own .grad; intermediate gradients live only for one backward pass.
"""
from contextlib import contextmanager
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..errors import TapeError

_recording = []


class Node(object):
    """
    A value flowing through the graph.
    """

    def __init__(self, value, requires_grad: bool = False):
        self.value = np.asarray(value, dtype=np.float64)
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.value.shape

    def item(self) -> float:
        return float(self.value.reshape(-1)[0])

    def __repr__(self):
        return 'Node(shape={}, requires_grad={})'.format(self.shape, self.requires_grad)


class Parameter(Node):
    """
    A named learnable leaf. grad always has the shape of value.
    """

    def __init__(self, name: str, value):
        super().__init__(value, requires_grad=True)
        self.name = name
        self.grad = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad = np.zeros_like(self.value)

    @property
    def size(self) -> int:
        return int(self.value.size)

    def __repr__(self):
        return 'Parameter(name={}, shape={})'.format(self.name, self.shape)


class Record(object):
    def __init__(self, output: Node, inputs: Sequence[Node], vjp: Callable):
        self.output = output
        self.inputs = inputs
        self.vjp = vjp


class Tape(object):
    def __init__(self):
        self.records = []  # type: List[Record]
        self.consumed = False
        self._outputs = set()

    @contextmanager
    def recording(self):
        """
        Record every primitive applied inside the block onto this tape.
        """
        if self.consumed:
            raise TapeError('Tape was already consumed by backward; record on a fresh tape')
        _recording.append(self)
        try:
            yield self
        finally:
            _recording.pop()

    def record(self, output: Node, inputs: Sequence[Node], vjp: Callable):
        self.records.append(Record(output, inputs, vjp))
        self._outputs.add(id(output))

    def backward(self, loss: Node):
        if self.consumed:
            raise TapeError('backward called twice on the same tape')
        if loss.value.size != 1:
            raise TapeError('backward needs a scalar loss but got shape {}'.format(loss.shape))
        if id(loss) not in self._outputs:
            raise TapeError('Loss was not produced while this tape was recording')
        self.consumed = True

        grads = {id(loss): np.ones_like(loss.value)}
        for record in reversed(self.records):
            g = grads.pop(id(record.output), None)
            if g is None:
                continue
            input_grads = record.vjp(g)
            for node, gi in zip(record.inputs, input_grads):
                if gi is None or not node.requires_grad:
                    continue
                gi = np.asarray(gi, dtype=np.float64)
                if gi.shape != node.value.shape:
                    gi = gi.reshape(node.value.shape)
                if isinstance(node, Parameter):
                    node.grad = node.grad + gi
                elif id(node) in grads:
                    grads[id(node)] = grads[id(node)] + gi
                else:
                    grads[id(node)] = gi


def current_tape() -> Optional[Tape]:
    return _recording[-1] if _recording else None


def record(value, inputs: Sequence[Node], vjp: Callable) -> Node:
    """
    Wrap a primitive's result; attach it to the active tape when any input needs a gradient.
    """
    tape = current_tape()
    tracked = tape is not None and any(node.requires_grad for node in inputs)
    out = Node(value, requires_grad=tracked)
    if tracked:
        tape.record(out, inputs, vjp)
    return out


def backward(tape: Tape, loss: Node):
    tape.backward(loss)


def zero_grad(params: Sequence[Parameter]):
    for param in params:
        param.zero_grad()
