#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Netpbm images and ground-truth label sidecars.

Binary PPM (P6) and PGM (P5) with 8-bit (maxval <= 255) or
16-bit big-endian samples.

Label sidecar byte layout, all integers big-endian:

    magic       8 bytes, b"COCALBL1"
    height      uint32
    width       uint32
    n_bg        uint16, number of background ids
    bg_ids      n_bg x uint16
    labels      height x width x uint16, row-major
"""

import os
from typing import BinaryIO, Iterable, List, Tuple, Union

import numpy as np

from cocalib.alias import Image, Labels, Tensor
from cocalib.exceptions import CocaLibIOError, CocaLibValueError

Path = Union[str, "os.PathLike[str]"]

LABEL_MAGIC = b"COCALBL1"
_WHITESPACE = b" \t\r\n\v\f"


def _header_tokens(stream: BinaryIO, count: int) -> List[bytes]:
    "Read count whitespace-separated header tokens, skipping comments."

    tokens: List[bytes] = []
    token = b""
    while len(tokens) < count:
        char = stream.read(1)
        if not char:
            raise CocaLibIOError("truncated netpbm header")
        if char == b"#" and not token:
            while char not in (b"\n", b""):
                char = stream.read(1)
            continue
        if char in _WHITESPACE:
            if token:
                tokens.append(token)
                token = b""
            continue
        token += char
    return tokens


def _read_netpbm(path: Path, magic: bytes, channels: int) -> Tuple[Tensor, int]:
    with open(path, "rb") as stream:
        tokens = _header_tokens(stream, 4)
        if tokens[0] != magic:
            err_msg = f"invalid netpbm magic: {tokens[0]!r} instead of {magic!r}"
            raise CocaLibIOError(err_msg)
        try:
            width, height, maxval = (int(tok) for tok in tokens[1:])
        except ValueError as e:
            raise CocaLibIOError(f"invalid netpbm header: {tokens}") from e
        if width < 1 or height < 1 or not 0 < maxval < 65536:
            raise CocaLibIOError(f"invalid netpbm header: {tokens}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        size = width * height * channels
        data = stream.read(size * dtype.itemsize)
    if len(data) != size * dtype.itemsize:
        raise CocaLibIOError(f"truncated netpbm raster: {path}")
    samples = np.frombuffer(data, dtype=dtype).reshape(height, width, channels)
    if samples.max(initial=0) > maxval:
        raise CocaLibIOError(f"invalid netpbm sample above maxval {maxval}")
    return samples, maxval


def read_ppm(path: Path) -> Image:
    "Return the (H, W, 3) image in [0, 1] of a binary PPM file."
    samples, maxval = _read_netpbm(path, b"P6", 3)
    return samples.astype(np.float64) / maxval


def read_pgm(path: Path) -> Tensor:
    "Return the (H, W) image in [0, 1] of a binary PGM file."
    samples, maxval = _read_netpbm(path, b"P5", 1)
    return samples[:, :, 0].astype(np.float64) / maxval


def _quantize(values: Tensor, maxval: int) -> Tensor:
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)) or values.min() < 0 or values.max() > 1:
        raise CocaLibValueError("invalid image: samples not in [0, 1]")
    dtype = ">u2" if maxval > 255 else "u1"
    return np.rint(values * maxval).astype(dtype)


def _write_netpbm(path: Path, magic: bytes, samples: Tensor, maxval: int) -> None:
    height, width = samples.shape[:2]
    header = magic + b"\n%d %d\n%d\n" % (width, height, maxval)
    with open(path, "wb") as stream:
        stream.write(header)
        stream.write(samples.tobytes())


def write_ppm(path: Path, img: Image, bits: int = 8) -> None:
    "Write an (H, W, 3) image in [0, 1] as binary PPM."

    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise CocaLibValueError(f"invalid image shape: {img.shape}")
    maxval = _maxval(bits)
    _write_netpbm(path, b"P6", _quantize(img, maxval), maxval)


def write_pgm(path: Path, img: Tensor, bits: int = 8) -> None:
    "Write an (H, W) image in [0, 1] as binary PGM."

    img = np.asarray(img)
    if img.ndim != 2:
        raise CocaLibValueError(f"invalid image shape: {img.shape}")
    maxval = _maxval(bits)
    _write_netpbm(path, b"P5", _quantize(img, maxval), maxval)


def _maxval(bits: int) -> int:
    if bits not in (8, 16):
        raise CocaLibValueError(f"invalid bit depth: {bits}")
    return (1 << bits) - 1


def write_labels(path: Path, labels: Labels, bg_ids: Iterable[int] = ()) -> None:
    "Write an (H, W) label map and its background ids as a label sidecar."

    labels = np.asarray(labels)
    bg = sorted(set(int(i) for i in bg_ids))
    if labels.ndim != 2:
        raise CocaLibValueError(f"invalid label map shape: {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() > 0xFFFF):
        raise CocaLibValueError("invalid labels: ids not in uint16 range")
    if any(not 0 <= i <= 0xFFFF for i in bg) or len(bg) > 0xFFFF:
        raise CocaLibValueError(f"invalid background ids: {bg}")
    height, width = labels.shape
    with open(path, "wb") as stream:
        stream.write(LABEL_MAGIC)
        stream.write(np.array([height, width], dtype=">u4").tobytes())
        stream.write(np.array([len(bg)], dtype=">u2").tobytes())
        stream.write(np.array(bg, dtype=">u2").tobytes())
        stream.write(labels.astype(">u2").tobytes())


def read_labels(path: Path) -> Tuple[Labels, Tuple[int, ...]]:
    "Return the (H, W) label map and the background ids of a label sidecar."

    with open(path, "rb") as stream:
        data = stream.read()
    if data[:8] != LABEL_MAGIC:
        raise CocaLibIOError(f"invalid label sidecar magic: {data[:8]!r}")
    if len(data) < 18:
        raise CocaLibIOError("truncated label sidecar header")
    height, width = (int(i) for i in np.frombuffer(data, ">u4", 2, 8))
    n_bg = int(np.frombuffer(data, ">u2", 1, 16)[0])
    offset = 18 + 2 * n_bg
    expected = offset + 2 * height * width
    if len(data) != expected:
        err_msg = f"invalid label sidecar size: {len(data)} instead of {expected}"
        raise CocaLibIOError(err_msg)
    bg_ids = tuple(int(i) for i in np.frombuffer(data, ">u2", n_bg, 18))
    labels = np.frombuffer(data, ">u2", height * width, offset)
    return labels.reshape(height, width).astype(np.int64), bg_ids
