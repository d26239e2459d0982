#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"Tests for the `cocalib.netpbm` module."

from pathlib import Path

import numpy as np
import pytest

from cocalib.exceptions import CocaLibIOError, CocaLibValueError
from cocalib.netpbm import (
    LABEL_MAGIC,
    read_labels,
    read_pgm,
    read_ppm,
    write_labels,
    write_pgm,
    write_ppm,
)


def test_ppm(tmp_path: Path) -> None:
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, (5, 7, 3)) / 255
    path = tmp_path / "img.ppm"
    write_ppm(path, img)
    assert path.read_bytes().startswith(b"P6\n7 5\n255\n")
    assert path.stat().st_size == len(b"P6\n7 5\n255\n") + 5 * 7 * 3
    assert np.array_equal(read_ppm(path), img)

    deep = rng.integers(0, 65536, (3, 4, 3)) / 65535
    write_ppm(path, deep, bits=16)
    assert np.array_equal(read_ppm(path), deep)

    with pytest.raises(CocaLibValueError, match="invalid bit depth: "):
        write_ppm(path, img, bits=12)
    with pytest.raises(CocaLibValueError, match="invalid image shape: "):
        write_ppm(path, img[:, :, 0])
    with pytest.raises(CocaLibValueError, match="samples not in"):
        write_ppm(path, img + 1.0)


def test_pgm(tmp_path: Path) -> None:
    img = np.array([[0.0, 1.0, 0.5]])
    path = tmp_path / "img.pgm"
    write_pgm(path, img)
    assert path.read_bytes() == b"P5\n3 1\n255\n" + bytes([0, 255, 128])
    assert np.allclose(read_pgm(path), [[0.0, 1.0, 128 / 255]])

    with pytest.raises(CocaLibValueError, match="invalid image shape: "):
        write_pgm(path, np.zeros((2, 2, 3)))


def test_header_comments(tmp_path: Path) -> None:
    path = tmp_path / "comment.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1 # width height\n15\n" + bytes([0, 15]))
    assert read_pgm(path).tolist() == [[0.0, 1.0]]


def test_malformed_images(tmp_path: Path) -> None:
    path = tmp_path / "bad.ppm"
    path.write_bytes(b"P5\n1 1\n255\n" + bytes([7]))
    with pytest.raises(CocaLibIOError, match="invalid netpbm magic: "):
        read_ppm(path)
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
    with pytest.raises(CocaLibIOError, match="truncated netpbm raster: "):
        read_ppm(path)
    path.write_bytes(b"P6\n2 2")
    with pytest.raises(CocaLibIOError, match="truncated netpbm header"):
        read_ppm(path)
    path.write_bytes(b"P6\nx 2\n255\n")
    with pytest.raises(CocaLibIOError, match="invalid netpbm header: "):
        read_ppm(path)
    path.write_bytes(b"P5\n1 1\n10\n" + bytes([11]))
    with pytest.raises(CocaLibIOError, match="above maxval 10"):
        read_pgm(path)
    # the library error is an OSError too
    with pytest.raises(OSError):
        read_ppm(path)
    with pytest.raises(OSError):
        read_ppm(tmp_path / "missing.ppm")


def test_labels(tmp_path: Path) -> None:
    labels = np.array([[0, 1, 2], [3, 3, 65535]])
    path = tmp_path / "gt.lbl"
    write_labels(path, labels, (3, 1, 3))
    data = path.read_bytes()
    assert data[:8] == LABEL_MAGIC
    assert data[8:16] == bytes([0, 0, 0, 2, 0, 0, 0, 3])
    assert data[16:22] == bytes([0, 2, 0, 1, 0, 3])
    assert len(data) == 22 + 2 * 6

    read, bg_ids = read_labels(path)
    assert np.array_equal(read, labels)
    assert read.dtype == np.int64
    assert bg_ids == (1, 3)

    write_labels(path, np.zeros((2, 2), dtype=int))
    assert read_labels(path)[1] == ()

    with pytest.raises(CocaLibValueError, match="ids not in uint16 range"):
        write_labels(path, np.array([[65536]]))
    with pytest.raises(CocaLibValueError, match="ids not in uint16 range"):
        write_labels(path, np.array([[-1]]))
    with pytest.raises(CocaLibValueError, match="invalid background ids: "):
        write_labels(path, labels, (70000,))
    with pytest.raises(CocaLibValueError, match="invalid label map shape: "):
        write_labels(path, np.zeros(4, dtype=int))


def test_malformed_labels(tmp_path: Path) -> None:
    path = tmp_path / "bad.lbl"
    path.write_bytes(b"NOTLABEL" + bytes(10))
    with pytest.raises(CocaLibIOError, match="invalid label sidecar magic: "):
        read_labels(path)
    path.write_bytes(LABEL_MAGIC + bytes(4))
    with pytest.raises(CocaLibIOError, match="truncated label sidecar header"):
        read_labels(path)
    path.write_bytes(LABEL_MAGIC + bytes([0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 5]))
    with pytest.raises(CocaLibIOError, match="invalid label sidecar size: 20"):
        read_labels(path)
