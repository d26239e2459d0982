#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Dendrogram: cluster masks merged down to pixel resolution.

Level l is stored as an (H, W, k_l) Tensor: entry [r, c, m] is the
membership of pixel (r, c) in cluster m of the layer-l window
containing the pixel. Each level is obtained from the previous one as

    Pi^{1->l} = Pi^l Pi^{1->(l-1)}

i.e. a per-pixel product of the layer-l masks of the node grid cell
covering the pixel with the pixel's previous-level memberships.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from cocalib.alias import Tensor
from cocalib.exceptions import CocaLibValueError
from cocalib.tensor import WindowLayout


def window_grid_masks(pi: Tensor, layout: WindowLayout) -> Tensor:
    """Rearrange (t*t, k, n) window masks to (H', W', k, k_in).

    Entry [r, c, m, j] is the mask-m weight of node j
    of node grid cell (r, c).
    """

    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim != 3 or pi.shape[0] != layout.n_windows or pi.shape[2] != layout.n:
        err_msg = f"invalid window masks shape: {pi.shape}, "
        err_msg += f"instead of ({layout.n_windows}, k, {layout.n})"
        raise CocaLibValueError(err_msg)
    k = pi.shape[1]
    m = pi.reshape(layout.t, layout.t_cols, k, layout.h, layout.w, layout.k_in)
    m = m.transpose(0, 3, 1, 4, 2, 5)
    rows, cols, _ = layout.grid
    return np.ascontiguousarray(m).reshape(rows, cols, k, layout.k_in)


def merge_dendrogram(prev: Tensor, pi: Tensor, layout: WindowLayout) -> Tensor:
    """Return the (H, W, k) level of layer masks pi (t*t, k, n).

    prev is the (H, W, k_in) previous level; the first layer
    takes an all-ones (H, W, 1) level.
    """

    prev = np.asarray(prev, dtype=np.float64)
    rows, cols, k_in = layout.grid
    if prev.ndim != 3 or prev.shape[2] != k_in:
        err_msg = f"invalid dendrogram level shape: {prev.shape}, "
        err_msg += f"instead of (H, W, {k_in})"
        raise CocaLibValueError(err_msg)
    height, width, _ = prev.shape
    if height % rows or width % cols:
        err_msg = f"dendrogram level {prev.shape[:2]} "
        err_msg += f"not a multiple of node grid {(rows, cols)}"
        raise CocaLibValueError(err_msg)
    m = window_grid_masks(pi, layout)
    m = np.repeat(np.repeat(m, height // rows, axis=0), width // cols, axis=1)
    return (m * prev[:, :, None, :]).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class Dendrogram:
    "Per-layer pixel-resolution cluster memberships."

    levels: Tuple[Tensor, ...]
    layouts: Tuple[WindowLayout, ...]

    def __init__(
        self,
        levels: Sequence[Tensor],
        layouts: Sequence[WindowLayout],
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "levels", tuple(np.asarray(lv) for lv in levels))
        object.__setattr__(self, "layouts", tuple(layouts))

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if len(self.levels) != len(self.layouts):
            err_msg = f"invalid dendrogram: {len(self.levels)} levels, "
            err_msg += f"{len(self.layouts)} layouts"
            raise CocaLibValueError(err_msg)
        for level in self.levels:
            if level.ndim != 3:
                raise CocaLibValueError(f"invalid level shape: {level.shape}")
            if level.shape[:2] != self.levels[0].shape[:2]:
                raise CocaLibValueError(f"invalid level shape: {level.shape}")
            if level.min(initial=0) < 0 or level.max(initial=0) > 1 + 1e-9:
                raise CocaLibValueError("invalid level: entries not in [0, 1]")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def shape(self) -> Tuple[int, int]:
        height, width, _ = self.levels[0].shape
        return height, width

    def push(self, pi: Tensor, layout: WindowLayout) -> "Dendrogram":
        "Return the dendrogram extended by the masks of the next layer."

        if self.levels:
            prev = self.levels[-1]
        else:
            rows, cols, _ = layout.grid
            prev = np.ones((rows, cols, 1))
        level = merge_dendrogram(prev, pi, layout)
        return Dendrogram(self.levels + (level,), self.layouts + (layout,), False)

    def window_masks(self, layer: int) -> Tensor:
        "Return level layer as (t*t, k, pixels per window) Tensor."

        level = self.levels[layer]
        layout = self.layouts[layer]
        height, width, k = level.shape
        t_h, t_w = layout.t, layout.t_cols
        m = level.reshape(t_h, height // t_h, t_w, width // t_w, k)
        m = m.transpose(0, 2, 4, 1, 3)
        return np.ascontiguousarray(m).reshape(t_h * t_w, k, -1)

    def slot_masks(self, layer: int = -1) -> Tensor:
        """Return the (t*t*k, H, W) full-image masks of all clusters of a layer.

        Slots are enumerated window by window (row-major), then by cluster;
        a slot is zero outside its own window.
        """

        level = self.levels[layer]
        layout = self.layouts[layer]
        height, width, k = level.shape
        t_h, t_w = layout.t, layout.t_cols
        block_rows = np.arange(height) // (height // t_h)
        block_cols = np.arange(width) // (width // t_w)
        rows_in = block_rows[None, :] == np.arange(t_h)[:, None]
        cols_in = block_cols[None, :] == np.arange(t_w)[:, None]
        window = rows_in[:, None, :, None] & cols_in[None, :, None, :]
        masks = window[:, :, None, :, :] * np.moveaxis(level, 2, 0)[None, None]
        return masks.reshape(t_h * t_w * k, height, width)

    def hard_labels(self, layer: int = -1) -> Tensor:
        "Per-pixel argmax over the slot masks, lowest slot on ties."
        return np.argmax(self.slot_masks(layer), axis=0)

    def layer_labels(self) -> List[Tensor]:
        "Hard labels of every layer."
        return [self.hard_labels(i) for i in range(self.depth)]
