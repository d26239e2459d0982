#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Affinity masks of node windows.

Node features are group-normalized, projected onto a common space,
normalized again, and turned into temperature-scaled squared distances

    E[i][j] = tau / sqrt(n * d) * ||y_i - y_j||^2

Each row of E is then mapped by a soft-argmin (softmin) followed by
min-max scaling, so that row i is the affinity mask of anchor node i:
1 at the nodes closest to i, 0 at the farthest ones.

All functions accept leading batch axes, i.e. (..., n, d) features,
and reduce along the last axis only.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union

import numpy as np
from scipy.special import softmax

from cocalib.alias import Tensor
from cocalib.exceptions import CocaLibValueError
from cocalib.tensor import FeatureMap

LOGGER = logging.getLogger(__name__)

_AffinityConfig = TypeVar("_AffinityConfig", bound="AffinityConfig")

NORM_EPS = 1e-6
MINMAX_EPS = 1e-12
# rows per chunk in the pairwise difference evaluation
ROW_CHUNK = 64

PROJECTIONS = ("identity", "seeded-orthogonal")
DEGENERATE_ROW_POLICIES = ("all_ones",)


@dataclass(frozen=True)
class AffinityConfig:
    tau: float
    groups: int = 1
    projection: str = "identity"
    projection_seed: int = 0
    degenerate_row_policy: str = "all_ones"

    def __init__(
        self,
        tau: float,
        groups: int = 1,
        projection: str = "identity",
        projection_seed: int = 0,
        degenerate_row_policy: str = "all_ones",
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "tau", float(tau))
        object.__setattr__(self, "groups", int(groups))
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "projection_seed", int(projection_seed))
        object.__setattr__(self, "degenerate_row_policy", degenerate_row_policy)

        if check_validity:
            self.assert_valid()

    def assert_valid(self, d: Optional[int] = None) -> None:
        "Check the configuration, and its fit to d feature channels if given."

        if not (np.isfinite(self.tau) and self.tau > 0):
            raise CocaLibValueError(f"invalid tau: {self.tau}")
        if self.groups < 1:
            raise CocaLibValueError(f"invalid groups: {self.groups}")
        if d is not None and d % self.groups:
            err_msg = f"invalid groups: {self.groups} does not divide {d}"
            raise CocaLibValueError(err_msg)
        if self.projection not in PROJECTIONS:
            raise CocaLibValueError(f"invalid projection: {self.projection}")
        if self.degenerate_row_policy not in DEGENERATE_ROW_POLICIES:
            err_msg = f"invalid degenerate_row_policy: {self.degenerate_row_policy}"
            raise CocaLibValueError(err_msg)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": self.tau,
            "groups": self.groups,
            "projection": self.projection,
            "projection_seed": self.projection_seed,
            "degenerate_row_policy": self.degenerate_row_policy,
        }

    @classmethod
    def from_dict(
        cls: Type[_AffinityConfig],
        dict_: Mapping[str, Any],
        check_validity: bool = True,
    ) -> _AffinityConfig:
        return cls(**dict_, check_validity=check_validity)


@dataclass(frozen=True, eq=False)
class AffinityMasks:
    """Affinity masks of one or more windows.

    lam[..., i, :] is the mask of anchor node i;
    distances, when available, are the scaled squared distances
    the masks were derived from.
    """

    lam: Tensor
    distances: Optional[Tensor] = None

    def __init__(
        self,
        lam: Tensor,
        distances: Optional[Tensor] = None,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "lam", np.asarray(lam, dtype=np.float64))
        if distances is not None:
            distances = np.asarray(distances, dtype=np.float64)
        object.__setattr__(self, "distances", distances)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        lam = self.lam
        if lam.ndim < 2 or lam.shape[-1] != lam.shape[-2]:
            raise CocaLibValueError(f"invalid affinity shape: {lam.shape}")
        if not np.all(np.isfinite(lam)) or lam.min() < 0 or lam.max() > 1:
            raise CocaLibValueError("invalid affinities: entries not in [0, 1]")
        if self.distances is not None and self.distances.shape != lam.shape:
            err_msg = f"invalid distance shape: {self.distances.shape}, "
            err_msg += f"instead of {lam.shape}"
            raise CocaLibValueError(err_msg)

    @property
    def n(self) -> int:
        return self.lam.shape[-1]


def _as_array(x: Union[FeatureMap, Tensor]) -> Tensor:
    if isinstance(x, FeatureMap):
        return x.data
    return np.asarray(x, dtype=np.float64)


def group_normalize(
    x: Union[FeatureMap, Tensor], groups: int = 1, eps: float = NORM_EPS
) -> Tensor:
    "Non-affine group normalization of every node (row) of x."

    x = _as_array(x)
    d = x.shape[-1]
    if groups < 1 or d % groups:
        raise CocaLibValueError(f"invalid groups: {groups} for {d} channels")
    g = x.reshape(*x.shape[:-1], groups, d // groups)
    size = d // groups
    mean = g.sum(axis=-1, keepdims=True) / size
    centered = g - mean
    var = (centered * centered).sum(axis=-1, keepdims=True) / size
    return (centered / np.sqrt(var + eps)).reshape(x.shape)


def _ones_complement(d: int) -> Tensor:
    m = np.column_stack([np.ones(d), np.eye(d)[:, : d - 1]])
    q, _ = np.linalg.qr(m)
    return q[:, 1:]


def projection_matrix(d: int, projection: str = "identity", seed: int = 0) -> Tensor:
    """Return the (d, d) projection applied to normalized features.

    The seeded-orthogonal projection is a random rotation
    of the zero-mean subspace fixing the all-ones direction,
    so that it commutes with group normalization (single group).
    """

    if projection == "identity" or d == 1:
        return np.eye(d)
    if projection != "seeded-orthogonal":
        raise CocaLibValueError(f"invalid projection: {projection}")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d - 1, d - 1)))
    q = q * np.sign(np.diag(r))[None, :]
    u = _ones_complement(d)
    return np.full((d, d), 1.0 / d) + u @ q @ u.T


def project(x: Tensor, p: Tensor) -> Tensor:
    """Apply the (d, d) projection p to every row of x.

    Each output entry is an elementwise product summed along the last
    axis, not a BLAS matrix product, so that a row gets the same bits
    whatever the batch of windows it is computed in.
    """

    out = np.empty_like(x)
    flat_x = x.reshape(-1, x.shape[-1])
    flat_out = out.reshape(-1, x.shape[-1])
    for start in range(0, flat_x.shape[0], ROW_CHUNK):
        rows = flat_x[start : start + ROW_CHUNK]
        flat_out[start : start + ROW_CHUNK] = (rows[:, None, :] * p[None, :, :]).sum(
            axis=-1
        )
    return out


def pairwise_distances(y: Union[FeatureMap, Tensor], tau: float) -> Tensor:
    """Return E[..., i, j] = tau / sqrt(n*d) * ||y_i - y_j||^2.

    The result is exactly symmetric with an exactly zero diagonal.
    """

    y = _as_array(y)
    n, d = y.shape[-2], y.shape[-1]
    scale = tau / np.sqrt(n * d)
    out = np.empty(y.shape[:-1] + (n,))
    for start in range(0, n, ROW_CHUNK):
        stop = min(n, start + ROW_CHUNK)
        diff = y[..., start:stop, None, :] - y[..., None, :, :]
        out[..., start:stop, :] = (diff * diff).sum(axis=-1)
    return scale * out


def affinities_from_distances(
    e: Tensor, policy: str = "all_ones", eps: float = MINMAX_EPS
) -> AffinityMasks:
    "Softmin over each row of e followed by per-row min-max scaling."

    if policy not in DEGENERATE_ROW_POLICIES:
        raise CocaLibValueError(f"invalid degenerate_row_policy: {policy}")
    e = np.asarray(e, dtype=np.float64)
    if not np.all(np.isfinite(e)) or (e.size and e.min() < 0):
        raise CocaLibValueError("invalid distances: not finite and non-negative")
    s = softmax(-e, axis=-1)
    s_min = s.min(axis=-1, keepdims=True)
    s_max = s.max(axis=-1, keepdims=True)
    span = s_max - s_min
    degenerate = span <= eps
    lam = (s - s_min) / np.where(degenerate, 1.0, span)
    lam = np.where(degenerate, 1.0, np.clip(lam, 0.0, 1.0))
    if np.any(degenerate):
        LOGGER.debug("%d degenerate affinity rows", int(degenerate.sum()))
    return AffinityMasks(lam, e, check_validity=False)


def build_affinities(
    x: Union[FeatureMap, Tensor], cfg: AffinityConfig
) -> AffinityMasks:
    "Normalize, project, normalize, and turn features into affinity masks."

    x = _as_array(x)
    cfg.assert_valid(x.shape[-1])
    y = group_normalize(x, cfg.groups)
    if cfg.projection != "identity":
        p = projection_matrix(y.shape[-1], cfg.projection, cfg.projection_seed)
        y = project(y, p)
    y = group_normalize(y, cfg.groups)
    e = pairwise_distances(y, cfg.tau)
    return affinities_from_distances(e, cfg.degenerate_row_policy)
