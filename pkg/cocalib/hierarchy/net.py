#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Layered network of clustering layers.

Pixels are encoded, then every layer partitions its input node grid
into windows and collapses each window to k clusters; the final-layer
clusters, merged down to pixel resolution through the dendrogram,
are the object slots.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from cocalib.alias import Image, Tensor
from cocalib.coca.compactness import init_pixel_attrs
from cocalib.encoder import EncoderConfig, check_image, encode_pixels
from cocalib.exceptions import CocaLibValueError
from cocalib.hierarchy.dendrogram import Dendrogram
from cocalib.hierarchy.layer import LayerConfig, LayerState, coca_layer
from cocalib.utils import resolve_threads

LOGGER = logging.getLogger(__name__)


def check_layer_chain(h: int, w: int, cfgs: Sequence[LayerConfig]) -> None:
    """Check that every layer's window count divides its input grid.

    The first layer partitions the h x w pixel grid,
    every following layer the t x t output grid of the previous one.
    """

    if not cfgs:
        raise CocaLibValueError("invalid layer chain: no layers")
    rows, cols = h, w
    for i, cfg in enumerate(cfgs, 1):
        if rows % cfg.t:
            err_msg = f"layer {i}: height {rows} not divisible by t={cfg.t}"
            raise CocaLibValueError(err_msg)
        if cols % cfg.t:
            err_msg = f"layer {i}: width {cols} not divisible by t={cfg.t}"
            raise CocaLibValueError(err_msg)
        rows = cols = cfg.t


@dataclass(frozen=True, eq=False)
class CocaNetResult:
    """Segmentation of one image.

    slot_masks is (K, H, W), hard_labels the (H, W) per-pixel argmax;
    anchors holds the per-window anchors of every layer.
    """

    slot_masks: Tensor
    dendrogram: Dendrogram
    hard_labels: Tensor
    anchors: Tuple[Tensor, ...]
    state: LayerState

    @property
    def n_slots(self) -> int:
        return self.slot_masks.shape[0]

    @property
    def nonempty_slots(self) -> int:
        "Number of slots owning at least one pixel."
        return int(np.unique(self.hard_labels).size)

    @property
    def final_anchored(self) -> int:
        "Anchored (non-residual) masks emitted by the final layer."
        return int(self.state.masks_by_layer[-1].emitted.sum())


def coca_net(
    img: Image,
    cfgs: Sequence[LayerConfig],
    enc: EncoderConfig = EncoderConfig(),
    anchor_mode: str = "compact",
    seed: int = 0,
    threads: Optional[int] = None,
    erosion: str = "cumulative",
) -> CocaNetResult:
    "Segment an (H, W, 3) image into object slots."

    img = check_image(img)
    height, width, _ = img.shape
    check_layer_chain(height, width, cfgs)
    workers = resolve_threads(threads)

    state = LayerState(encode_pixels(img, enc), init_pixel_attrs(height, width))
    dendrogram = Dendrogram((), ())
    for cfg in cfgs:
        state = coca_layer(state, cfg, anchor_mode, seed, workers, erosion)
        dendrogram = dendrogram.push(state.masks_by_layer[-1].pi, state.layouts[-1])

    slot_masks = dendrogram.slot_masks()
    hard_labels = np.argmax(slot_masks, axis=0)
    anchors = tuple(masks.anchors for masks in state.masks_by_layer)
    n_used = np.unique(hard_labels).size
    LOGGER.info("%d slots, %d non-empty", slot_masks.shape[0], n_used)
    return CocaNetResult(slot_masks, dendrogram, hard_labels, anchors, state)

