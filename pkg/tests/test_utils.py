#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"Tests for the `cocalib.utils` module."

import pytest

from cocalib.exceptions import CocaLibValueError
from cocalib.utils import THREADS_ENV, chunk_ranges, parallel_map, resolve_threads


def test_resolve_threads(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert resolve_threads() == 1
    assert resolve_threads(4) == 4

    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2

    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(CocaLibValueError, match="invalid COCA_THREADS: many"):
        resolve_threads()

    with pytest.raises(CocaLibValueError, match="invalid thread count: 0"):
        resolve_threads(0)


def test_chunk_ranges() -> None:
    assert chunk_ranges(10, 3) == [(0, 3), (3, 6), (6, 10)]
    assert chunk_ranges(2, 8) == [(0, 1), (1, 2)]
    assert chunk_ranges(5, 1) == [(0, 5)]
    assert chunk_ranges(0, 4) == []
    for size in range(1, 20):
        for chunks in range(1, 6):
            ranges = chunk_ranges(size, chunks)
            assert ranges[0][0] == 0
            assert ranges[-1][1] == size
            for (_, stop), (start, _) in zip(ranges[:-1], ranges[1:]):
                assert stop == start


def test_parallel_map() -> None:
    items = list(range(50))
    expected = [i * i for i in items]
    assert parallel_map(lambda i: i * i, items) == expected
    assert parallel_map(lambda i: i * i, items, threads=4) == expected
    assert parallel_map(lambda i: i, [], threads=4) == []
