# Copyright 2026 The lfmrp Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Lossless 4D light-field coding with minimum-rate predictors.

Light fields are uint16 numpy arrays shaped (planes, T, S, V, U).
"""

from dataclasses import dataclass

import numpy as np

from ._lfmrp import (
    ArgumentError,
    Error,
    FormatError,
    IntegrityError,
    decode as _decode,
    encode as _encode,
    inspect as _inspect,
    load as _load,
    store as _store,
    synth as _synth,
)

__all__ = [
    "ArgumentError",
    "Error",
    "FormatError",
    "IntegrityError",
    "LightField",
    "decode",
    "encode",
    "inspect",
    "load",
    "store",
    "synth",
]


@dataclass
class LightField:
    samples: np.ndarray  # (planes, T, S, V, U), uint16
    bit_depth: int

    @property
    def dims(self):
        return tuple(int(x) for x in self.samples.shape[1:])

    @property
    def planes(self):
        return int(self.samples.shape[0])


def encode(lf, mode="4d", **options):
    """Returns (bitstream, report). Options are config keys, e.g. classes=8."""
    return _encode(lf.samples, lf.bit_depth, mode, {k: str(v) for k, v in options.items()})


def decode(stream):
    samples, depth = _decode(bytes(stream))
    return LightField(samples, depth)


def inspect(stream):
    return _inspect(bytes(stream))


def synth(kind, dims, planes=1, bit_depth=8, seed=0, disparity=1, value=0):
    return LightField(_synth(kind, list(dims), planes, bit_depth, seed, disparity, value), bit_depth)


def load(path, layout="container"):
    samples, depth = _load(str(path), layout)
    return LightField(samples, depth)


def store(lf, path, layout="container"):
    _store(lf.samples, lf.bit_depth, str(path), layout)
