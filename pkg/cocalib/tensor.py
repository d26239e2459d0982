#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Dense row-major tensor helpers.

Non-overlapping window partitioning of node grids and its inverse.

A node grid is a Tensor of shape (H', W', K, ...):
H' x W' spatial cells with K cluster nodes each, followed by
any number of trailing payload axes (e.g. the feature dimension).
Partitioning with t windows per axis gives a (t*t, n, ...) Tensor,
windows being enumerated row-major over the window grid
and nodes within a window in (row, column, cluster) order,
so that n = (H'/t) * (W'/t) * K.
"""

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Tuple, Type, TypeVar, Union

import numpy as np

from cocalib.alias import Tensor
from cocalib.exceptions import CocaLibValueError

_WindowLayout = TypeVar("_WindowLayout", bound="WindowLayout")
_FeatureMap = TypeVar("_FeatureMap", bound="FeatureMap")

WindowCount = Union[int, Tuple[int, int]]


def _window_counts(t: WindowCount) -> Tuple[int, int]:
    if isinstance(t, (int, np.integer)):
        return int(t), int(t)
    t_h, t_w = t
    return int(t_h), int(t_w)


@dataclass(frozen=True)
class WindowLayout:
    "Window grid of t x t_cols windows, each holding h x w x k_in nodes."

    t: int
    h: int
    w: int
    k_in: int
    t_cols: int

    def __init__(
        self,
        t: int,
        h: int,
        w: int,
        k_in: int = 1,
        t_cols: int = 0,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "t", t)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "k_in", k_in)
        object.__setattr__(self, "t_cols", t_cols or t)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        for field, value in (
            ("t", self.t),
            ("t_cols", self.t_cols),
            ("h", self.h),
            ("w", self.w),
            ("k_in", self.k_in),
        ):
            if value < 1:
                raise CocaLibValueError(f"invalid {field}: {value}")

    @property
    def n(self) -> int:
        "Node count per window."
        return self.h * self.w * self.k_in

    @property
    def n_windows(self) -> int:
        return self.t * self.t_cols

    @property
    def grid(self) -> Tuple[int, int, int]:
        "The (H', W', K) node grid this layout partitions."
        return self.t * self.h, self.t_cols * self.w, self.k_in

    @classmethod
    def from_grid(
        cls: Type[_WindowLayout], grid: Tuple[int, ...], t: WindowCount
    ) -> _WindowLayout:
        "Return the layout partitioning an (H', W', K) grid in t windows per axis."

        t_h, t_w = _window_counts(t)
        if len(grid) < 2:
            raise CocaLibValueError(f"invalid grid shape: {grid}")
        rows, cols = grid[0], grid[1]
        k_in = grid[2] if len(grid) > 2 else 1
        if t_h < 1 or t_w < 1:
            raise CocaLibValueError(f"invalid window count: {t}")
        if rows % t_h:
            err_msg = f"height {rows} not divisible by window count {t_h}"
            raise CocaLibValueError(err_msg)
        if cols % t_w:
            err_msg = f"width {cols} not divisible by window count {t_w}"
            raise CocaLibValueError(err_msg)
        return cls(t_h, rows // t_h, cols // t_w, k_in, t_w)

    def to_dict(self) -> Dict[str, int]:
        return {
            "t": self.t,
            "t_cols": self.t_cols,
            "h": self.h,
            "w": self.w,
            "k_in": self.k_in,
        }

    @classmethod
    def from_dict(
        cls: Type[_WindowLayout], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _WindowLayout:
        return cls(
            dict_["t"],
            dict_["h"],
            dict_["w"],
            dict_.get("k_in", 1),
            dict_.get("t_cols", 0),
            check_validity,
        )


def unfold_windows(x: Tensor, t: WindowCount) -> Tensor:
    "Partition an (H', W', K, ...) node grid into (t*t, n, ...) windows."

    x = np.asarray(x)
    if x.ndim < 3:
        raise CocaLibValueError(f"invalid node grid rank: {x.ndim} instead of >= 3")
    layout = WindowLayout.from_grid(x.shape[:3], t)
    rest = x.shape[3:]
    y = x.reshape(layout.t, layout.h, layout.t_cols, layout.w, layout.k_in, *rest)
    axes = (0, 2, 1, 3, 4) + tuple(range(5, 5 + len(rest)))
    y = np.ascontiguousarray(y.transpose(axes))
    return y.reshape(layout.n_windows, layout.n, *rest)


def fold_windows(x: Tensor, layout: WindowLayout) -> Tensor:
    "Reassemble (t*t, n, ...) windows into their (H', W', K, ...) node grid."

    x = np.asarray(x)
    if x.ndim < 2 or x.shape[0] != layout.n_windows or x.shape[1] != layout.n:
        err_msg = f"invalid window tensor shape: {x.shape}, "
        err_msg += f"instead of ({layout.n_windows}, {layout.n}, ...)"
        raise CocaLibValueError(err_msg)
    rest = x.shape[2:]
    y = x.reshape(layout.t, layout.t_cols, layout.h, layout.w, layout.k_in, *rest)
    axes = (0, 2, 1, 3, 4) + tuple(range(5, 5 + len(rest)))
    y = np.ascontiguousarray(y.transpose(axes))
    return y.reshape(*layout.grid, *rest)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    "Flat (n, d) node feature matrix of an (H', W', K) node grid."

    data: Tensor
    grid: Tuple[int, int, int]

    def __init__(
        self,
        data: Tensor,
        grid: Tuple[int, ...],
        check_validity: bool = True,
    ) -> None:

        grid_ = tuple(int(i) for i in grid)
        if len(grid_) == 2:
            grid_ += (1,)
        object.__setattr__(self, "data", np.asarray(data, dtype=np.float64))
        object.__setattr__(self, "grid", grid_)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if len(self.grid) != 3 or min(self.grid) < 1:
            raise CocaLibValueError(f"invalid node grid: {self.grid}")
        if self.data.ndim != 2:
            raise CocaLibValueError(f"invalid feature rank: {self.data.ndim}")
        n = self.grid[0] * self.grid[1] * self.grid[2]
        if self.data.shape[0] != n:
            err_msg = f"invalid feature row count: {self.data.shape[0]} "
            err_msg += f"instead of {n}"
            raise CocaLibValueError(err_msg)
        if not np.all(np.isfinite(self.data)):
            raise CocaLibValueError("invalid features: non-finite entries")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def as_grid(self) -> Tensor:
        "Return the (H', W', K, d) view of the features."
        return self.data.reshape(*self.grid, self.d)

    @classmethod
    def from_grid(
        cls: Type[_FeatureMap], x: Tensor, check_validity: bool = True
    ) -> _FeatureMap:
        "Build a FeatureMap from an (H', W', d) or (H', W', K, d) Tensor."

        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 3:
            x = x[:, :, None, :]
        if x.ndim != 4:
            raise CocaLibValueError(f"invalid feature grid rank: {x.ndim}")
        grid = x.shape[:3]
        return cls(x.reshape(-1, x.shape[3]), grid, check_validity)
