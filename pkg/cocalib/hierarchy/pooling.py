#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Pooling of node features and physical attributes into clusters.

Given (..., k, n) cluster masks Pi over n nodes:

    A' = Pi A,  M' = Pi M,  I' = Pi I,  D' = M' / A'
    P' = Pi P / Pi 1,  X' = Pi X / Pi 1

With parallel-axis inertia pooling, the inertia of each member node
is moved from its own position to the cluster position:
I' = Pi I + Pi (M ||P - P'||^2).
"""

import logging

import numpy as np

from cocalib.alias import Tensor
from cocalib.coca.compactness import NodeAttrs
from cocalib.exceptions import CocaLibValueError

LOGGER = logging.getLogger(__name__)

POOL_EPS = 1e-9
INERTIA_POOLINGS = ("sum", "parallel_axis")


def _weighted_sum(pi: Tensor, values: Tensor) -> Tensor:
    """(..., k, n) masks times (..., n, c) values, reduced along n.

    Summed along the last axis instead of a BLAS product:
    pooled values are bit-identical however windows are chunked.
    """
    transposed = np.swapaxes(values, -1, -2)
    return (pi[..., :, None, :] * transposed[..., None, :, :]).sum(axis=-1)


def _check_masks(pi: Tensor, n: int) -> Tensor:
    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim < 2 or pi.shape[-1] != n:
        err_msg = f"invalid cluster masks shape: {pi.shape} for {n} nodes"
        raise CocaLibValueError(err_msg)
    return pi


def pool_features(pi: Tensor, x: Tensor) -> Tensor:
    "Return the (..., k, d) mask-weighted mean features of (..., n, d) nodes."

    x = np.asarray(x, dtype=np.float64)
    pi = _check_masks(pi, x.shape[-2])
    weight = pi.sum(axis=-1)
    pooled = _weighted_sum(pi, x)
    empty = weight <= POOL_EPS
    if np.any(empty):
        LOGGER.debug("%d empty clusters pooled to zero features", int(empty.sum()))
    mean = pooled / np.maximum(weight, POOL_EPS)[..., None]
    return np.where(empty[..., None], 0.0, mean)


def pool_attrs(pi: Tensor, attrs: NodeAttrs, inertia: str = "sum") -> NodeAttrs:
    "Return the (..., k) attributes of the clusters of (..., n) nodes."

    if inertia not in INERTIA_POOLINGS:
        raise CocaLibValueError(f"invalid inertia pooling: {inertia}")
    pi = _check_masks(pi, attrs.n)
    stacked = np.stack([attrs.area, attrs.mass, attrs.inertia], axis=-1)
    area, mass, inertia_ = np.moveaxis(_weighted_sum(pi, stacked), -1, 0)
    weight = pi.sum(axis=-1)
    solid = weight > POOL_EPS
    position = _weighted_sum(pi, attrs.position)
    position = np.where(
        solid[..., None], position / np.maximum(weight, POOL_EPS)[..., None], 0.0
    )
    density = np.where(area > POOL_EPS, mass / np.maximum(area, POOL_EPS), 0.0)
    if inertia == "parallel_axis":
        diff = attrs.position[..., None, :, :] - position[..., :, None, :]
        sq = (diff * diff).sum(axis=-1)
        inertia_ = inertia_ + (pi * attrs.mass[..., None, :] * sq).sum(axis=-1)
    return NodeAttrs(area, mass, density, inertia_, position, check_validity=False)
