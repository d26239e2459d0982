#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"Tests for the `cocalib.metrics` module."

import json
from itertools import combinations
from typing import Iterator, List, Sequence

import numpy as np
import pytest

from cocalib.exceptions import CocaLibRuntimeError, CocaLibTypeError, CocaLibValueError
from cocalib.metrics import (
    LabelMap,
    ari,
    fg_filter,
    labels_from_masks,
    masks_from_labels,
    msc,
    score_segmentation,
)


def _partitions(n: int) -> Iterator[List[int]]:
    "All set partitions of n elements as restricted growth strings."

    def grow(prefix: List[int], top: int) -> Iterator[List[int]]:
        if len(prefix) == n:
            yield prefix
            return
        for label in range(top + 2):
            yield from grow(prefix + [label], max(top, label))

    yield from grow([0], 0)


def _pair_count_ari(pred: Sequence[int], gt: Sequence[int]) -> float:
    tp = fp = fn = tn = 0
    for i, j in combinations(range(len(pred)), 2):
        same_pred = pred[i] == pred[j]
        same_gt = gt[i] == gt[j]
        if same_pred and same_gt:
            tp += 1
        elif same_pred:
            fp += 1
        elif same_gt:
            fn += 1
        else:
            tn += 1
    if fn == 0 and fp == 0:
        return 1.0
    return 2.0 * (tp * tn - fn * fp) / ((tp + fn) * (fn + tn) + (tp + fp) * (fp + tn))


def _set_covering(pred: Sequence[int], gt: Sequence[int], weighted: bool) -> float:
    pred_sets = [
        {i for i, p in enumerate(pred) if p == label} for label in set(pred)
    ]
    total = 0.0
    sizes = 0
    segments = 0
    for label in set(gt):
        segment = {i for i, g in enumerate(gt) if g == label}
        best = max(len(segment & s) / len(segment | s) for s in pred_sets)
        total += best * len(segment) if weighted else best
        sizes += len(segment)
        segments += 1
    return total / sizes if weighted else total / segments


def test_partitions() -> None:
    assert len(list(_partitions(4))) == 15
    assert len(list(_partitions(8))) == 4140


def test_ari_examples() -> None:
    gt = LabelMap(np.array([[0, 0, 1, 1], [2, 2, 3, 3]]))
    assert ari(gt, gt) == 1.0
    permuted = LabelMap(np.array([[5, 5, 0, 0], [1, 1, 7, 7]]))
    assert ari(permuted, gt) == pytest.approx(1.0)

    halves = LabelMap(np.array([[0, 0, 0, 0], [1, 1, 1, 1]]))
    single = LabelMap(np.zeros((2, 4), dtype=int))
    assert ari(single, halves) == pytest.approx(0.0)
    assert ari(halves, gt) == pytest.approx(ari(gt, halves))

    with pytest.raises(CocaLibValueError, match="label map shape mismatch: "):
        ari(LabelMap(np.zeros((2, 3), dtype=int)), gt)


def test_ari_exhaustive() -> None:
    gts = ([0, 0, 0, 0, 1, 1, 1, 1], [0, 1, 2, 3, 4, 5, 6, 7], [0, 0, 1, 1, 1, 2, 2, 0])
    for gt in gts:
        gt_map = LabelMap(np.array(gt).reshape(2, 4))
        for pred in _partitions(8):
            pred_map = LabelMap(np.array(pred).reshape(2, 4))
            expected = _pair_count_ari(pred, gt)
            assert ari(pred_map, gt_map) == pytest.approx(expected, abs=1e-12)


def test_msc_examples() -> None:
    gt = np.array([[0, 0, 1, 1], [2, 2, 3, 3]])
    masks = masks_from_labels(gt)
    assert masks.shape == (4, 2, 4)
    assert msc(masks, masks) == 1.0

    whole = masks_from_labels(np.zeros((2, 4), dtype=int))
    halves = masks_from_labels(np.array([[0, 0, 0, 0], [1, 1, 1, 1]]))
    assert msc(halves, whole) == 0.5
    assert msc(np.zeros((1, 2, 4)), whole) == 0.0

    # a large perfect segment and a small half-covered one
    gt = np.array([[0, 0, 0, 0], [0, 0, 1, 1]])
    pred = np.array([[0, 0, 0, 0], [0, 0, 1, 2]])
    pred_masks, gt_masks = masks_from_labels(pred), masks_from_labels(gt)
    assert msc(pred_masks, gt_masks) == pytest.approx((6 + 2 * 0.5) / 8)
    assert msc(pred_masks, gt_masks, weighted=False) == pytest.approx(0.75)

    # replacing a predicted mask with the exact segment never hurts
    improved = pred_masks.copy()
    improved[1] = gt_masks[1]
    assert msc(improved, gt_masks) >= msc(pred_masks, gt_masks)

    ignore = np.zeros((2, 4), dtype=bool)
    ignore[1, 3] = True
    assert msc(pred_masks, gt_masks, ignore=ignore) == pytest.approx(7 / 7)

    with pytest.raises(CocaLibRuntimeError, match="no ground-truth segments"):
        msc(pred_masks, np.zeros((2, 2, 4)))
    with pytest.raises(CocaLibValueError, match="mask shape mismatch: "):
        msc(pred_masks, np.ones((1, 2, 3)))


def test_msc_exhaustive() -> None:
    gts = ([0, 0, 0, 1, 1, 2], [0, 1, 0, 1, 0, 1])
    for gt in gts:
        gt_masks = masks_from_labels(np.array(gt).reshape(2, 3))
        for pred in _partitions(6):
            pred_masks = masks_from_labels(np.array(pred).reshape(2, 3))
            for weighted in (True, False):
                expected = _set_covering(pred, gt, weighted)
                actual = msc(pred_masks, gt_masks, weighted)
                assert actual == pytest.approx(expected, abs=1e-12)


def test_label_masks() -> None:
    labels = np.array([[3, 3], [7, 0]])
    masks = masks_from_labels(labels)
    assert masks.shape == (3, 2, 2)
    assert masks[1].tolist() == [[True, True], [False, False]]
    assert labels_from_masks(masks).tolist() == [[1, 1], [2, 0]]

    soft = np.array([[[0.5, 0.2]], [[0.5, 0.7]]])
    assert labels_from_masks(soft).tolist() == [[0, 1]]
    with pytest.raises(CocaLibValueError, match="invalid masks shape: "):
        labels_from_masks(np.zeros((2, 2)))


def test_label_map() -> None:
    with pytest.raises(CocaLibTypeError, match="invalid label dtype: "):
        LabelMap(np.zeros((2, 2)))
    with pytest.raises(CocaLibValueError, match="invalid labels: negative ids"):
        LabelMap(np.array([[0, -1]]))
    with pytest.raises(CocaLibValueError, match="invalid label map shape: "):
        LabelMap(np.zeros(4, dtype=int))
    with pytest.raises(CocaLibValueError, match="invalid ignore mask shape: "):
        LabelMap(np.zeros((2, 2), dtype=int), np.zeros((2, 3), dtype=bool))


def test_fg_filter() -> None:
    gt = LabelMap(np.array([[0, 0, 1], [2, 2, 2]]))
    assert fg_filter(gt, ()) is gt
    filtered = fg_filter(gt, (2,))
    assert filtered.scored.tolist() == [[True, True, True], [False, False, False]]

    pred = LabelMap(np.array([[4, 4, 5], [4, 4, 4]]))
    assert ari(pred, filtered) == 1.0
    assert ari(pred, gt) < 1.0

    all_bg = fg_filter(gt, (0, 1, 2))
    with pytest.raises(CocaLibRuntimeError, match="empty scored region"):
        ari(pred, all_bg)


def test_score_segmentation() -> None:
    gt = np.array([[0, 0, 1, 1], [2, 2, 2, 2]])
    pred = np.array([[0, 0, 1, 1], [1, 1, 3, 3]])

    fg = score_segmentation(pred, gt, (2,), "fg")
    assert fg.mode == "fg"
    assert fg.scored_pixels == 4
    assert fg.ari == 1.0
    assert fg.msc == 1.0

    bg = score_segmentation(pred, gt, (2,), "bg")
    assert bg.scored_pixels == 8
    assert bg.ari < 1.0
    assert bg.msc < 1.0

    data = json.loads(bg.to_json())
    assert set(data) == {"mode", "ari", "msc", "scored_pixels"}
    assert data["scored_pixels"] == 8

    with pytest.raises(CocaLibValueError, match="invalid mode: "):
        score_segmentation(pred, gt, (2,), "all")
    with pytest.raises(CocaLibRuntimeError, match="empty scored region"):
        score_segmentation(pred, np.full((2, 4), 2), (2,), "fg")
    with pytest.raises(CocaLibValueError, match="label map shape mismatch: "):
        score_segmentation(pred[:, :2], gt)
