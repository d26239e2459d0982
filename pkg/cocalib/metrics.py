#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Segmentation quality metrics.

Adjusted Rand Index and mean Segmentation Covering of predicted pixel
partitions against ground truth, with background-included ("bg") and
foreground-only ("fg") scoring: in fg mode background pixels are
excluded from the scored region.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from dataclasses_json import DataClassJsonMixin
from sklearn.metrics import adjusted_rand_score

from cocalib.alias import Labels, Tensor
from cocalib.exceptions import CocaLibRuntimeError, CocaLibTypeError, CocaLibValueError

MODES = ("fg", "bg")


@dataclass(frozen=True, eq=False)
class LabelMap:
    "(H, W) segment ids, with an optional mask of pixels excluded from scoring."

    labels: Labels
    ignore: Optional[Tensor] = None

    def __init__(
        self,
        labels: Labels,
        ignore: Optional[Tensor] = None,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "labels", np.asarray(labels))
        if ignore is not None:
            ignore = np.asarray(ignore, dtype=bool)
        object.__setattr__(self, "ignore", ignore)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.labels.ndim != 2:
            raise CocaLibValueError(f"invalid label map shape: {self.labels.shape}")
        if not np.issubdtype(self.labels.dtype, np.integer):
            raise CocaLibTypeError(f"invalid label dtype: {self.labels.dtype}")
        if self.labels.size and self.labels.min() < 0:
            raise CocaLibValueError("invalid labels: negative ids")
        if self.ignore is not None and self.ignore.shape != self.labels.shape:
            err_msg = f"invalid ignore mask shape: {self.ignore.shape}, "
            err_msg += f"instead of {self.labels.shape}"
            raise CocaLibValueError(err_msg)

    @property
    def scored(self) -> Tensor:
        "Boolean mask of the pixels taking part in scoring."
        if self.ignore is None:
            return np.ones(self.labels.shape, dtype=bool)
        return ~self.ignore


def _scored_region(pred: LabelMap, gt: LabelMap) -> Tensor:
    if pred.labels.shape != gt.labels.shape:
        err_msg = f"label map shape mismatch: {pred.labels.shape}, {gt.labels.shape}"
        raise CocaLibValueError(err_msg)
    scored = pred.scored & gt.scored
    if not np.any(scored):
        raise CocaLibRuntimeError("empty scored region")
    return scored


def ari(pred: LabelMap, gt: LabelMap) -> float:
    "Adjusted Rand Index over the pixels scored in both label maps."

    scored = _scored_region(pred, gt)
    return float(adjusted_rand_score(gt.labels[scored], pred.labels[scored]))


def masks_from_labels(labels: Labels) -> Tensor:
    "Return the (G, H, W) boolean masks of the ids present in labels."

    labels = np.asarray(labels)
    ids = np.unique(labels)
    return labels[None, ...] == ids.reshape((-1,) + (1,) * labels.ndim)


def labels_from_masks(masks: Tensor) -> Labels:
    "Per-pixel argmax over (K, H, W) masks, lowest index on ties."

    masks = np.asarray(masks)
    if masks.ndim != 3 or masks.shape[0] < 1:
        raise CocaLibValueError(f"invalid masks shape: {masks.shape}")
    return np.argmax(masks, axis=0)


def msc(
    pred_masks: Tensor,
    gt_masks: Tensor,
    weighted: bool = True,
    ignore: Optional[Tensor] = None,
) -> float:
    """Mean Segmentation Covering of binary (G, H, W) ground-truth masks.

    Every ground-truth segment contributes its best IoU against the
    (K, H, W) predicted masks, weighted by its size (or uniformly).
    Ignored pixels are removed from both sides; empty segments are dropped.
    """

    pred = np.asarray(pred_masks, dtype=bool)
    gt = np.asarray(gt_masks, dtype=bool)
    if pred.ndim != 3 or gt.ndim != 3 or pred.shape[1:] != gt.shape[1:]:
        err_msg = f"mask shape mismatch: {pred.shape}, {gt.shape}"
        raise CocaLibValueError(err_msg)
    if ignore is not None:
        keep = ~np.asarray(ignore, dtype=bool)
        pred = pred & keep
        gt = gt & keep
    pred = pred.reshape(pred.shape[0], -1).astype(np.int64)
    gt = gt.reshape(gt.shape[0], -1).astype(np.int64)
    sizes = gt.sum(axis=1)
    gt, sizes = gt[sizes > 0], sizes[sizes > 0]
    if not sizes.size:
        raise CocaLibRuntimeError("no ground-truth segments to cover")
    inter = gt @ pred.T
    union = sizes[:, None] + pred.sum(axis=1)[None, :] - inter
    iou = np.where(union > 0, inter / np.maximum(union, 1), 0.0)
    best = iou.max(axis=1) if iou.shape[1] else np.zeros(sizes.size)
    if weighted:
        return float((sizes * best).sum() / sizes.sum())
    return float(best.mean())


def fg_filter(labels: LabelMap, bg_ids: Iterable[int]) -> LabelMap:
    "Exclude the background ids from the scored region."

    bg = np.asarray(sorted(set(bg_ids)), dtype=labels.labels.dtype)
    if not bg.size:
        return labels
    ignore = np.isin(labels.labels, bg)
    if labels.ignore is not None:
        ignore |= labels.ignore
    return LabelMap(labels.labels, ignore)


@dataclass
class SegmentationScores(DataClassJsonMixin):
    mode: str
    ari: float
    msc: float
    scored_pixels: int


def score_segmentation(
    pred: Labels, gt: Labels, bg_ids: Iterable[int] = (), mode: str = "bg"
) -> SegmentationScores:
    "ARI and size-weighted mSC of predicted labels in fg or bg mode."

    if mode not in MODES:
        raise CocaLibValueError(f"invalid mode: {mode}")
    pred_map = LabelMap(pred)
    gt_map = LabelMap(gt)
    if mode == "fg":
        gt_map = fg_filter(gt_map, bg_ids)
    scored = _scored_region(pred_map, gt_map)
    ignore = ~scored
    return SegmentationScores(
        mode,
        ari(pred_map, gt_map),
        msc(
            masks_from_labels(pred_map.labels),
            masks_from_labels(gt_map.labels),
            ignore=ignore,
        ),
        int(scored.sum()),
    )
