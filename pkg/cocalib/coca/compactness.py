#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Physical node attributes and mass-normalized compactness.

Every node carries five physical attributes:
area A, mass M, density D = M / A, moment of inertia I,
and mean position P in original image coordinates.
Pixels start as unit squares: A = M = D = 1 and I = 1/6.

An affinity mask is treated as a non-uniform density shape:
attributes are broadcast against the mask (area, density and inertia
scale linearly with the affinity, mass quadratically)
and the mask's compactness about its anchor node i is

    c[i] = [ sum_j M~ A~ + sum_{j<v} 2 min(D~_j, D~_v) A~_j A~_v ]
           / [ 2 pi sum_j (I~_j + M~_j ||P_i - P_j||^2) ]

i.e. the moment of inertia of a circle with the same effective area
over the moment of inertia of the shape about the anchor.
A disk centered at its anchor scores 1; elongated, scattered,
or off-center shapes score less.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Type, TypeVar

import numpy as np

from cocalib.alias import Tensor
from cocalib.coca.affinity import AffinityMasks
from cocalib.exceptions import CocaLibValueError

LOGGER = logging.getLogger(__name__)

_NodeAttrs = TypeVar("_NodeAttrs", bound="NodeAttrs")

PIXEL_INERTIA = 1.0 / 6.0
# denominators at or below this value flag an empty mask
DENOMINATOR_EPS = 1e-12
# raw scores above 1 + this slack are reported
SCORE_SLACK = 0.01
DENSITY_TOL = 1e-9
# upper bound on the entries of a pair-term block
BLOCK_ENTRIES = 2 ** 20

METHODS = ("pairwise", "sorted")


@dataclass(frozen=True, eq=False)
class NodeAttrs:
    """Physical attributes of nodes, possibly batched over windows.

    area, mass, density and inertia are (..., n);
    position is (..., n, 2) as (row, column).
    Pooled empty clusters have zero area, mass and inertia.
    """

    area: Tensor
    mass: Tensor
    density: Tensor
    inertia: Tensor
    position: Tensor

    def __init__(
        self,
        area: Tensor,
        mass: Tensor,
        density: Tensor,
        inertia: Tensor,
        position: Tensor,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "area", np.asarray(area, dtype=np.float64))
        object.__setattr__(self, "mass", np.asarray(mass, dtype=np.float64))
        object.__setattr__(self, "density", np.asarray(density, dtype=np.float64))
        object.__setattr__(self, "inertia", np.asarray(inertia, dtype=np.float64))
        object.__setattr__(self, "position", np.asarray(position, dtype=np.float64))

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        shape = self.area.shape
        for field in ("mass", "density", "inertia"):
            value = getattr(self, field)
            if value.shape != shape:
                err_msg = f"invalid {field} shape: {value.shape} instead of {shape}"
                raise CocaLibValueError(err_msg)
        if self.position.shape != shape + (2,):
            err_msg = f"invalid position shape: {self.position.shape}"
            raise CocaLibValueError(err_msg)
        for field in ("area", "mass", "density", "inertia", "position"):
            value = getattr(self, field)
            if not np.all(np.isfinite(value)):
                raise CocaLibValueError(f"invalid {field}: non-finite entries")
        for field in ("area", "mass", "density", "inertia"):
            if getattr(self, field).min(initial=0.0) < 0:
                raise CocaLibValueError(f"invalid {field}: negative entries")
        solid = self.area > DENSITY_TOL
        err = np.abs(self.density * self.area - self.mass)
        if np.any(err[solid] > DENSITY_TOL * np.maximum(1.0, self.mass[solid])):
            raise CocaLibValueError("invalid density: not mass / area")

    @property
    def n(self) -> int:
        return self.area.shape[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "area": self.area.tolist(),
            "mass": self.mass.tolist(),
            "density": self.density.tolist(),
            "inertia": self.inertia.tolist(),
            "position": self.position.tolist(),
        }

    @classmethod
    def from_dict(
        cls: Type[_NodeAttrs], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _NodeAttrs:
        return cls(
            dict_["area"],
            dict_["mass"],
            dict_["density"],
            dict_["inertia"],
            dict_["position"],
            check_validity,
        )


def init_pixel_attrs(h: int, w: int) -> NodeAttrs:
    "Return the row-major attributes of an h x w grid of unit pixels."

    if h < 1 or w < 1:
        raise CocaLibValueError(f"invalid image extent: {h}x{w}")
    ones = np.ones(h * w)
    rows, cols = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    position = np.stack([rows.ravel(), cols.ravel()], axis=1)
    return NodeAttrs(ones, ones.copy(), ones.copy(), ones * PIXEL_INERTIA, position)


@dataclass(frozen=True, eq=False)
class IntermediateAttrs:
    "Attributes broadcast against (..., m, n) affinity masks."

    a_t: Tensor
    d_t: Tensor
    i_t: Tensor
    m_t: Tensor


def broadcast_scale(attrs: NodeAttrs, masks: AffinityMasks) -> IntermediateAttrs:
    "Scale area, density and inertia by the affinities; mass by their square."

    return _broadcast(attrs, masks.lam)


def _broadcast(attrs: NodeAttrs, lam: Tensor) -> IntermediateAttrs:
    a_t = attrs.area[..., None, :] * lam
    d_t = attrs.density[..., None, :] * lam
    i_t = attrs.inertia[..., None, :] * lam
    return IntermediateAttrs(a_t, d_t, i_t, a_t * d_t)


def position_sq_distances(p: Tensor, anchors: Optional[Tensor] = None) -> Tensor:
    """Return the squared distances between positions.

    With anchors, the (..., m, n) distances from the anchor positions
    to all positions; otherwise the full (..., n, n) matrix.
    """

    p = np.asarray(p, dtype=np.float64)
    src = p if anchors is None else p[..., anchors, :]
    diff = src[..., :, None, :] - p[..., None, :, :]
    return (diff * diff).sum(axis=-1)


def _pair_term_pairwise(a_t: Tensor, d_t: Tensor) -> Tensor:
    # sum_{j != v} min(d_j, d_v) a_j a_v, one j column at a time
    n = a_t.shape[-1]
    batch = max(1, a_t.size)
    chunk = max(1, BLOCK_ENTRIES // batch)
    terms = np.empty_like(a_t)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        block = np.minimum(d_t[..., start:stop][..., None], d_t[..., None, :])
        block = block * a_t[..., None, :]
        off_diag = np.arange(start, stop)[:, None] != np.arange(n)[None, :]
        block = np.where(off_diag, block, 0.0)
        terms[..., start:stop] = block.sum(axis=-1) * a_t[..., start:stop]
    return terms.sum(axis=-1)


def _pair_term_sorted(a_t: Tensor, d_t: Tensor) -> Tensor:
    # in ascending density order, each node is the minimum of every later pair
    order = np.argsort(d_t, axis=-1, kind="stable")
    d_s = np.take_along_axis(d_t, order, axis=-1)
    a_s = np.take_along_axis(a_t, order, axis=-1)
    suffix = np.cumsum(a_s[..., ::-1], axis=-1)[..., ::-1]
    later = np.concatenate([suffix[..., 1:], np.zeros_like(suffix[..., :1])], axis=-1)
    return 2.0 * (d_s * a_s * later).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class CompactnessScores:
    """Compactness of affinity masks about their anchors.

    c holds the scores clamped to [0, 1], raw the unclamped ones;
    empty flags zero-denominator (all-zero) masks, scored 0.
    """

    c: Tensor
    raw: Tensor
    empty: Tensor


def mask_compactness(
    attrs: NodeAttrs,
    lam: Tensor,
    anchors: Optional[Tensor] = None,
    method: str = "pairwise",
) -> CompactnessScores:
    """Score (..., m, n) masks, row r anchored at node anchors[r].

    Without anchors the masks must be square, row i anchored at node i.
    """

    if method not in METHODS:
        raise CocaLibValueError(f"invalid compactness method: {method}")
    lam = np.asarray(lam, dtype=np.float64)
    n = attrs.n
    if lam.shape[-1] != n:
        err_msg = f"invalid mask length: {lam.shape[-1]} instead of {n}"
        raise CocaLibValueError(err_msg)
    if anchors is None:
        if lam.shape[-2] != n:
            raise CocaLibValueError(f"invalid mask shape: {lam.shape}")
    else:
        anchors = np.asarray(anchors, dtype=np.int64)
        if anchors.shape != (lam.shape[-2],):
            raise CocaLibValueError(f"invalid anchors shape: {anchors.shape}")

    inter = _broadcast(attrs, lam)
    delta = position_sq_distances(attrs.position, anchors)
    mass_term = (inter.m_t * inter.a_t).sum(axis=-1)
    if method == "pairwise":
        pair_term = _pair_term_pairwise(inter.a_t, inter.d_t)
    else:
        pair_term = _pair_term_sorted(inter.a_t, inter.d_t)
    den = 2.0 * np.pi * (inter.i_t + inter.m_t * delta).sum(axis=-1)

    empty = den <= DENOMINATOR_EPS
    raw = np.where(empty, 0.0, (mass_term + pair_term) / np.where(empty, 1.0, den))
    if np.any(raw > 1.0 + SCORE_SLACK):
        LOGGER.debug("%d compactness scores above 1", int((raw > 1.0).sum()))
    if np.any(empty):
        LOGGER.debug("%d empty masks scored 0", int(empty.sum()))
    return CompactnessScores(np.clip(raw, 0.0, 1.0), raw, empty)


def compactness_scores(
    attrs: NodeAttrs, masks: AffinityMasks, method: str = "pairwise"
) -> CompactnessScores:
    "Score every affinity mask about its own anchor node."

    return mask_compactness(attrs, masks.lam, None, method)


def shared_mask_scores(attrs: NodeAttrs, mask: Tensor) -> Tensor:
    """Return the clamped scores of one (n,) mask anchored at every node.

    The numerator does not depend on the anchor; the anchor-dependent
    part of the denominator follows from the mask's mass moments:
    sum_j w_j ||p - p_j||^2 = W ||p - mu||^2 + sum_j w_j ||p_j - mu||^2.
    """

    mask = np.asarray(mask, dtype=np.float64)
    if attrs.area.ndim != 1 or mask.shape != attrs.area.shape:
        raise CocaLibValueError(f"invalid mask shape: {mask.shape}")
    inter = _broadcast(attrs, mask[None, :])
    a_t, d_t, i_t, m_t = inter.a_t[0], inter.d_t[0], inter.i_t[0], inter.m_t[0]
    num = (m_t * a_t).sum() + _pair_term_sorted(a_t, d_t)
    weight = m_t.sum()
    if weight > 0:
        mu = (m_t[:, None] * attrs.position).sum(axis=0) / weight
    else:
        mu = np.zeros(2)
    spread = attrs.position - mu[None, :]
    second = (m_t * (spread * spread).sum(axis=1)).sum()
    to_anchor = weight * (spread * spread).sum(axis=1)
    den = 2.0 * np.pi * (i_t.sum() + second + to_anchor)
    empty = den <= DENOMINATOR_EPS
    raw = np.where(empty, 0.0, num / np.where(empty, 1.0, den))
    return np.clip(raw, 0.0, 1.0)


def compactness_heatmap(attrs: NodeAttrs, slot_masks: Tensor, labels: Tensor) -> Tensor:
    """Return the per-node compactness of each node's own slot mask.

    slot_masks is (K, n), labels (n,) assigns every node to a slot;
    node i gets the score of its slot's mask anchored at i.
    """

    slot_masks = np.asarray(slot_masks, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    if slot_masks.ndim != 2 or slot_masks.shape[1] != labels.size:
        raise CocaLibValueError(f"invalid slot masks shape: {slot_masks.shape}")
    heat = np.zeros(labels.size)
    for slot in np.unique(labels):
        members = labels == slot
        heat[members] = shared_mask_scores(attrs, slot_masks[slot])[members]
    return heat
