#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Deterministic pixel feature encoder.

Initial node features are built from color and position only:
the weighted RGB channels and the four-direction position channels
(top, bottom, left, right).

With d0 >= 9 the seven base channels are lifted to a constant norm and
embedded into the zero-mean subspace of R^d0 by a seeded orthonormal
basis. Every feature row then has zero mean and the same norm,
so that the non-affine single-group normalization applied before
computing affinities is a uniform rescaling:
pixels with equal color and position channels get identical features,
and the distances between any two pixels are preserved up to scale.

With 6 <= d0 <= 8 there is no room for that embedding: the base
channels are zero-padded to d0 (d0 = 7, 8) or truncated to their first
six (d0 = 6, dropping the right channel, which is 1 - left).
Group normalization may then merge pixels whose base channels differ
only by an offset and a scale.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Type, TypeVar

import numpy as np

from cocalib.alias import Image, Tensor
from cocalib.exceptions import CocaLibValueError
from cocalib.tensor import FeatureMap

LOGGER = logging.getLogger(__name__)

_EncoderConfig = TypeVar("_EncoderConfig", bound="EncoderConfig")

# color (3) and position (4) channels
BASE_CHANNELS = 7
# base channels plus the norm-lifting channel
LIFTED_CHANNELS = BASE_CHANNELS + 1
# the embedding basis must also be orthogonal to the all-ones direction
MIN_EMBEDDED_D0 = LIFTED_CHANNELS + 1
MIN_D0 = 6


@dataclass(frozen=True)
class EncoderConfig:
    d0: int = 16
    color_weight: float = 1.0
    position_weight: float = 0.1
    smoothing_radius: int = 0
    smoothing_strength: float = 1.0
    projection_seed: int = 0

    def __init__(
        self,
        d0: int = 16,
        color_weight: float = 1.0,
        position_weight: float = 0.1,
        smoothing_radius: int = 0,
        smoothing_strength: float = 1.0,
        projection_seed: int = 0,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "d0", int(d0))
        object.__setattr__(self, "color_weight", float(color_weight))
        object.__setattr__(self, "position_weight", float(position_weight))
        object.__setattr__(self, "smoothing_radius", int(smoothing_radius))
        object.__setattr__(self, "smoothing_strength", float(smoothing_strength))
        object.__setattr__(self, "projection_seed", int(projection_seed))

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.d0 < MIN_D0:
            raise CocaLibValueError(f"invalid d0: {self.d0} instead of >= {MIN_D0}")
        if not self.color_weight >= 0:
            raise CocaLibValueError(f"invalid color_weight: {self.color_weight}")
        if not self.position_weight >= 0:
            raise CocaLibValueError(f"invalid position_weight: {self.position_weight}")
        if self.smoothing_radius < 0:
            err_msg = f"invalid smoothing_radius: {self.smoothing_radius}"
            raise CocaLibValueError(err_msg)
        if not 0 <= self.smoothing_strength <= 1:
            err_msg = f"invalid smoothing_strength: {self.smoothing_strength}"
            raise CocaLibValueError(err_msg)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d0": self.d0,
            "color_weight": self.color_weight,
            "position_weight": self.position_weight,
            "smoothing_radius": self.smoothing_radius,
            "smoothing_strength": self.smoothing_strength,
            "projection_seed": self.projection_seed,
        }

    @classmethod
    def from_dict(
        cls: Type[_EncoderConfig], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _EncoderConfig:
        return cls(**dict_, check_validity=check_validity)


def _normalized_coordinates(extent: int) -> Tensor:
    if extent == 1:
        return np.full(1, 0.5)
    return np.arange(extent, dtype=np.float64) / (extent - 1)


def encode_position(h: int, w: int) -> Tensor:
    """Return the (h, w, 4) normalized distances to the image borders.

    Channels are (top, bottom, left, right):
    coordinate / (extent - 1) and its complement,
    0.5 along an axis of extent 1.
    """

    if h < 1 or w < 1:
        raise CocaLibValueError(f"invalid image extent: {h}x{w}")
    rows = _normalized_coordinates(h)
    cols = _normalized_coordinates(w)
    pos = np.empty((h, w, 4))
    pos[:, :, 0] = rows[:, None]
    pos[:, :, 1] = 1.0 - rows[:, None]
    pos[:, :, 2] = cols[None, :]
    pos[:, :, 3] = 1.0 - cols[None, :]
    return pos


def embedding_basis(d0: int, seed: int) -> Tensor:
    "Return a (d0, 8) orthonormal basis orthogonal to the all-ones vector."

    if d0 < MIN_EMBEDDED_D0:
        err_msg = f"invalid d0: {d0} instead of >= {MIN_EMBEDDED_D0}"
        raise CocaLibValueError(err_msg)
    rng = np.random.default_rng(seed)
    m = np.column_stack([np.ones(d0), rng.standard_normal((d0, LIFTED_CHANNELS))])
    q, _ = np.linalg.qr(m)
    return np.ascontiguousarray(q[:, 1 : LIFTED_CHANNELS + 1])


def check_image(img: Image) -> Image:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise CocaLibValueError(f"invalid image shape: {img.shape}")
    if not np.all(np.isfinite(img)) or img.min() < 0 or img.max() > 1:
        raise CocaLibValueError("invalid image: channels not in [0, 1]")
    return img


def encode_pixels(img: Image, cfg: EncoderConfig = EncoderConfig()) -> FeatureMap:
    "Return the (h*w, d0) pixel features of an (h, w, 3) image."

    img = check_image(img)
    h, w, _ = img.shape
    base = np.concatenate(
        [cfg.color_weight * img, cfg.position_weight * encode_position(h, w)], axis=2
    ).reshape(h * w, BASE_CHANNELS)
    if cfg.d0 < MIN_EMBEDDED_D0:
        data = np.zeros((h * w, cfg.d0))
        kept = min(cfg.d0, BASE_CHANNELS)
        data[:, :kept] = base[:, :kept]
    else:
        radius_sq = 3 * cfg.color_weight ** 2 + 2 * cfg.position_weight ** 2
        lift = np.sqrt(np.maximum(radius_sq - (base * base).sum(axis=1), 0.0))
        lifted = np.column_stack([base, lift])
        basis = embedding_basis(cfg.d0, cfg.projection_seed)
        data = (lifted[:, None, :] * basis[None, :, :]).sum(axis=2)
    features = FeatureMap(data, (h, w, 1))
    if cfg.smoothing_radius and cfg.smoothing_strength:
        features = smooth_features(
            features, cfg.smoothing_radius, cfg.smoothing_strength
        )
    return features


def _slices(offset: int, extent: int):
    target = slice(max(0, -offset), extent - max(0, offset))
    source = slice(max(0, offset), extent - max(0, -offset))
    return target, source


def smooth_features(x: FeatureMap, radius: int, strength: float = 1.0) -> FeatureMap:
    """Blend every node with a similarity-weighted neighborhood average.

    The neighborhood is the (2*radius+1)^2 block of grid cells around
    the node (clipped at the borders), all cluster nodes of each cell
    included. Weights are exp(-||x_i - x_j||^2 / d).
    """

    if radius < 0:
        raise CocaLibValueError(f"invalid smoothing radius: {radius}")
    if radius == 0 or strength == 0:
        return x
    g = x.as_grid()
    rows, cols, _, d = g.shape
    num = np.zeros_like(g)
    den = np.zeros(g.shape[:3])
    for dr in range(-radius, radius + 1):
        ti, si = _slices(dr, rows)
        if ti.start >= ti.stop:
            continue
        for dc in range(-radius, radius + 1):
            tj, sj = _slices(dc, cols)
            if tj.start >= tj.stop:
                continue
            a = g[ti, tj]
            b = g[si, sj]
            diff = a[:, :, :, None, :] - b[:, :, None, :, :]
            wgt = np.exp(-(diff * diff).sum(axis=-1) / d)
            num[ti, tj] += (wgt[..., None] * b[:, :, None, :, :]).sum(axis=3)
            den[ti, tj] += wgt.sum(axis=-1)
    smoothed = (1.0 - strength) * g + strength * num / den[..., None]
    LOGGER.debug("smoothed %s features, radius %d", x.grid, radius)
    return FeatureMap(smoothed.reshape(x.n, d), x.grid)
