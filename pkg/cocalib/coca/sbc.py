#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Compactness-guided stick-breaking clustering.

Starting from a full scope Z (the unassigned share of every node),
each iteration

    erodes the compactness scores by the scope: C = C * Z
    selects the anchor node w = argmax C among in-scope nodes
    emits the cluster mask Pi = Lambda_w * Z
    consumes the scope: Z = Z * (1 - Pi)

and the residual scope is appended as the final mask.
With fixed(k) stopping exactly k - 1 anchored masks are emitted;
with dynamic stopping the loop ends as soon as the scope drops below
a fraction of its initial total, optionally capped at k - 1 masks.
The scope total counts nodes, or with the area measure the pixel area
the nodes stand for.

Windows are independent: sbc_cluster_windows runs the loop for a batch
of windows at once, every iteration acting on all still-active windows.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Type, TypeVar

import numpy as np

from cocalib.alias import Tensor
from cocalib.coca.affinity import AffinityMasks
from cocalib.coca.compactness import CompactnessScores
from cocalib.exceptions import CocaLibRuntimeError, CocaLibValueError

LOGGER = logging.getLogger(__name__)

_StopPolicy = TypeVar("_StopPolicy", bound="StopPolicy")

STOP_KINDS = ("fixed", "dynamic")
STOP_MEASURES = ("nodes", "area")
ANCHOR_MODES = ("compact", "random")
EROSIONS = ("cumulative", "fresh")
DEFAULT_THRESHOLD = 0.025

# anchor index of padding masks
NO_ANCHOR = -1


@dataclass(frozen=True)
class StopPolicy:
    """Stopping rule of the clustering loop.

    fixed: exactly k masks, k - 1 anchored plus the residual.
    dynamic: stop when the scope total drops below threshold times its
    initial total; k > 0 caps the output at k masks (padded to k),
    k = 0 leaves it uncapped.
    measure: the scope total is a node count ("nodes") or is weighted
    by the node areas ("area").
    """

    kind: str = "fixed"
    k: int = 1
    threshold: float = DEFAULT_THRESHOLD
    measure: str = "nodes"

    def __init__(
        self,
        kind: str = "fixed",
        k: int = 1,
        threshold: float = DEFAULT_THRESHOLD,
        measure: str = "nodes",
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "threshold", float(threshold))
        object.__setattr__(self, "measure", measure)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.kind not in STOP_KINDS:
            raise CocaLibValueError(f"invalid stop kind: {self.kind}")
        if self.kind == "fixed" and self.k < 1:
            raise CocaLibValueError(f"invalid k: {self.k}")
        if self.kind == "dynamic" and self.k < 0:
            raise CocaLibValueError(f"invalid k cap: {self.k}")
        if not 0 < self.threshold < 1:
            raise CocaLibValueError(f"invalid threshold: {self.threshold}")
        if self.measure not in STOP_MEASURES:
            raise CocaLibValueError(f"invalid stop measure: {self.measure}")

    @classmethod
    def fixed(cls: Type[_StopPolicy], k: int) -> _StopPolicy:
        return cls("fixed", k)

    @classmethod
    def dynamic(
        cls: Type[_StopPolicy],
        threshold: float = DEFAULT_THRESHOLD,
        k: int = 0,
        measure: str = "nodes",
    ) -> _StopPolicy:
        return cls("dynamic", k, threshold, measure)

    def max_anchored(self, n: int) -> int:
        "Upper bound on the anchored masks of an n-node window."
        if self.kind == "fixed":
            return self.k - 1
        return min(n, self.k - 1) if self.k else n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "k": self.k,
            "threshold": self.threshold,
            "measure": self.measure,
        }

    @classmethod
    def from_dict(
        cls: Type[_StopPolicy], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _StopPolicy:
        return cls(
            dict_.get("kind", "fixed"),
            dict_.get("k", 1),
            dict_.get("threshold", DEFAULT_THRESHOLD),
            dict_.get("measure", "nodes"),
            check_validity,
        )


@dataclass(frozen=True, eq=False)
class Scope:
    "Unassigned share of every node, in [0, 1]."

    z: Tensor

    def __init__(self, z: Tensor, check_validity: bool = True) -> None:
        object.__setattr__(self, "z", np.asarray(z, dtype=np.float64))
        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if not np.all(np.isfinite(self.z)) or self.z.min(initial=0) < 0:
            raise CocaLibValueError("invalid scope: entries not in [0, 1]")
        if self.z.max(initial=0) > 1:
            raise CocaLibValueError("invalid scope: entries not in [0, 1]")

    @classmethod
    def full(cls, n: int) -> "Scope":
        return cls(np.ones(n))

    @property
    def total(self) -> float:
        return float(self.z.sum())


@dataclass(frozen=True, eq=False)
class ClusterMasks:
    """Cluster masks of one or more windows.

    pi is (..., k, n): the anchored masks in emission order,
    then padding (all-zero) masks, then the residual scope.
    anchors is (..., k - 1), NO_ANCHOR marking padding masks.
    """

    pi: Tensor
    anchors: Tensor

    def __init__(
        self, pi: Tensor, anchors: Tensor, check_validity: bool = True
    ) -> None:

        object.__setattr__(self, "pi", np.asarray(pi, dtype=np.float64))
        object.__setattr__(self, "anchors", np.asarray(anchors, dtype=np.int64))
        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.pi.ndim < 2:
            raise CocaLibValueError(f"invalid cluster masks shape: {self.pi.shape}")
        expected = self.pi.shape[:-2] + (self.pi.shape[-2] - 1,)
        if self.anchors.shape != expected:
            err_msg = f"invalid anchors shape: {self.anchors.shape} "
            err_msg += f"instead of {expected}"
            raise CocaLibValueError(err_msg)
        if not np.all(np.isfinite(self.pi)):
            raise CocaLibValueError("invalid cluster masks: non-finite entries")
        if self.pi.min(initial=0) < 0 or self.pi.max(initial=0) > 1:
            raise CocaLibValueError("invalid cluster masks: entries not in [0, 1]")

    @property
    def k(self) -> int:
        return self.pi.shape[-2]

    @property
    def n(self) -> int:
        return self.pi.shape[-1]

    @property
    def residual(self) -> Tensor:
        return self.pi[..., -1, :]

    @property
    def emitted(self) -> Tensor:
        "Number of anchored masks (per window)."
        return (self.anchors != NO_ANCHOR).sum(axis=-1)


def _check_active(z: Tensor) -> None:
    if not np.any(z > 0):
        raise CocaLibRuntimeError("empty scope: no node left to anchor")


def select_anchor_compact(c: Tensor, z: Tensor) -> int:
    """Return the in-scope node maximizing c * z.

    Ties go to the lowest index.
    """

    c = np.asarray(c, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    _check_active(z)
    return int(np.argmax(np.where(z > 0, c * z, -np.inf)))


def select_anchor_random(z: Tensor, rng: np.random.Generator) -> int:
    "Sample a node with probability proportional to its scope."

    z = np.asarray(z, dtype=np.float64)
    _check_active(z)
    return int(rng.choice(z.size, p=z / z.sum()))


def sbc_cluster_windows(
    lam: Tensor,
    scores: Tensor,
    policy: StopPolicy,
    anchor_mode: str = "compact",
    rngs: Optional[Sequence[np.random.Generator]] = None,
    initial_scope: Optional[Tensor] = None,
    erosion: str = "cumulative",
    areas: Optional[Tensor] = None,
) -> ClusterMasks:
    """Cluster a batch of windows.

    lam is (W, n, n), scores (W, n); rngs holds one generator per window
    and is required in random anchor mode.
    areas (W, n) weights the scope total of the area stop measure.
    """

    lam = np.asarray(lam, dtype=np.float64)
    if lam.ndim != 3 or lam.shape[1] != lam.shape[2]:
        raise CocaLibValueError(f"invalid affinity batch shape: {lam.shape}")
    n_windows, n, _ = lam.shape
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (n_windows, n):
        err_msg = f"invalid scores shape: {scores.shape} instead of {(n_windows, n)}"
        raise CocaLibValueError(err_msg)
    if anchor_mode not in ANCHOR_MODES:
        raise CocaLibValueError(f"invalid anchor mode: {anchor_mode}")
    if erosion not in EROSIONS:
        raise CocaLibValueError(f"invalid erosion: {erosion}")
    if anchor_mode == "random" and (rngs is None or len(rngs) != n_windows):
        raise CocaLibValueError("random anchor mode needs one generator per window")
    if policy.kind == "fixed" and policy.k > n + 1:
        raise CocaLibValueError(f"invalid k: {policy.k} for {n} nodes")

    if initial_scope is None:
        z = np.ones((n_windows, n))
    else:
        z = np.array(initial_scope, dtype=np.float64).reshape(n_windows, n)
    if policy.measure == "area":
        if areas is None:
            raise CocaLibValueError("area stop measure needs the node areas")
        weights = np.asarray(areas, dtype=np.float64).reshape(n_windows, n)
    else:
        weights = np.ones((n_windows, n))
    stop_level = policy.threshold * (z * weights).sum(axis=1)
    c = scores.copy()
    max_iter = policy.max_anchored(n)

    masks: List[Tensor] = []
    anchors: List[Tensor] = []
    for _ in range(max_iter):
        active = z.sum(axis=1) > 0
        if policy.kind == "dynamic":
            active &= (z * weights).sum(axis=1) >= stop_level
            if not np.any(active):
                break
        if erosion == "cumulative":
            c = c * z
            eroded = c
        else:
            eroded = scores * z
        omega = np.full(n_windows, NO_ANCHOR, dtype=np.int64)
        if anchor_mode == "compact":
            candidates = np.where(z > 0, eroded, -np.inf)
            omega[active] = np.argmax(candidates[active], axis=1)
        else:
            for w in np.flatnonzero(active):
                omega[w] = select_anchor_random(z[w], rngs[w])  # type: ignore
        rows = lam[np.arange(n_windows), np.maximum(omega, 0)]
        pi = np.where(active[:, None], rows * z, 0.0)
        z = z * (1.0 - pi)
        masks.append(pi)
        anchors.append(omega)
        if np.any(~active):
            LOGGER.debug("%d windows with exhausted scope", int((~active).sum()))

    if policy.kind == "dynamic" and policy.k:
        while len(masks) < policy.k - 1:
            masks.append(np.zeros((n_windows, n)))
            anchors.append(np.full(n_windows, NO_ANCHOR, dtype=np.int64))
    masks.append(z)

    pi_all = np.stack(masks, axis=1)
    if anchors:
        anchors_all = np.stack(anchors, axis=1)
    else:
        anchors_all = np.zeros((n_windows, 0), dtype=np.int64)
    return ClusterMasks(pi_all, anchors_all, check_validity=False)


def sbc_cluster(
    masks: AffinityMasks,
    scores: CompactnessScores,
    policy: StopPolicy,
    anchor_mode: str = "compact",
    rng: Optional[np.random.Generator] = None,
    initial_scope: Optional[Tensor] = None,
    erosion: str = "cumulative",
    areas: Optional[Tensor] = None,
) -> ClusterMasks:
    "Cluster a single window: (n, n) affinities and (n,) scores."

    lam = masks.lam
    if lam.ndim != 2:
        raise CocaLibValueError(f"invalid affinity shape: {lam.shape}")
    scope = None if initial_scope is None else np.asarray(initial_scope)[None, :]
    out = sbc_cluster_windows(
        lam[None],
        np.asarray(scores.c)[None],
        policy,
        anchor_mode,
        None if rng is None else [rng],
        scope,
        erosion,
        None if areas is None else np.asarray(areas)[None, :],
    )
    return ClusterMasks(out.pi[0], out.anchors[0], check_validity=False)
