#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Utility functions.

Thread count resolution and an order preserving parallel map.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

from cocalib.exceptions import CocaLibValueError

_T = TypeVar("_T")
_R = TypeVar("_R")

THREADS_ENV = "COCA_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Return the worker count.

    Explicit value first, then the COCA_THREADS environment variable,
    then a single thread.
    """

    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        if not env:
            return 1
        try:
            threads = int(env)
        except ValueError as e:
            err_msg = f"invalid {THREADS_ENV}: {env}"
            raise CocaLibValueError(err_msg) from e
    if threads < 1:
        raise CocaLibValueError(f"invalid thread count: {threads}")
    return threads


def chunk_ranges(size: int, chunks: int) -> List[Tuple[int, int]]:
    "Split range(size) in at most chunks contiguous [start, stop) ranges."

    chunks = max(1, min(chunks, size))
    bounds = [size * i // chunks for i in range(chunks + 1)]
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def parallel_map(
    func: Callable[[_T], _R], items: Iterable[_T], threads: int = 1
) -> List[_R]:
    """Apply func to every item, returning results in input order.

    Items are independent: the output does not depend on the thread count.
    """

    items_: Sequence[_T] = list(items)
    if threads <= 1 or len(items_) <= 1:
        return [func(item) for item in items_]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items_))
