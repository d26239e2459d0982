#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""A single clustering layer.

The node grid is partitioned into t x t non-overlapping windows;
within each window the nodes' affinity masks are scored by compactness
and clustered by stick-breaking; cluster features and attributes are
pooled, so that the layer's output is a t x t x k node grid.
"""

import logging
from dataclasses import dataclass
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Type,
    TypeVar,
)

import numpy as np

from cocalib.coca.affinity import AffinityConfig, build_affinities
from cocalib.coca.compactness import NodeAttrs, compactness_scores
from cocalib.coca.sbc import (
    ANCHOR_MODES,
    DEFAULT_THRESHOLD,
    NO_ANCHOR,
    ClusterMasks,
    StopPolicy,
    sbc_cluster_windows,
)
from cocalib.encoder import smooth_features
from cocalib.exceptions import CocaLibValueError
from cocalib.hierarchy.pooling import (
    INERTIA_POOLINGS,
    POOL_EPS,
    pool_attrs,
    pool_features,
)
from cocalib.tensor import FeatureMap, WindowLayout, fold_windows, unfold_windows
from cocalib.utils import chunk_ranges, parallel_map

LOGGER = logging.getLogger(__name__)

_LayerConfig = TypeVar("_LayerConfig", bound="LayerConfig")


@dataclass(frozen=True)
class LayerConfig:
    """Layout and clustering parameters of one layer.

    t is the number of windows per axis, k the number of output clusters
    per window (residual included); with dynamic stopping k caps the
    output, k = 0 leaving it uncapped, and measure chooses whether the
    stopping threshold counts nodes or their pixel area.
    """

    t: int
    k: int
    tau: float
    groups: int = 1
    dynamic: bool = False
    threshold: float = DEFAULT_THRESHOLD
    measure: str = "nodes"
    smoothing_radius: int = 0
    smoothing_strength: float = 1.0
    projection: str = "identity"
    projection_seed: int = 0
    inertia_pooling: str = "sum"

    def __init__(
        self,
        t: int,
        k: int,
        tau: float,
        groups: int = 1,
        dynamic: bool = False,
        threshold: float = DEFAULT_THRESHOLD,
        measure: str = "nodes",
        smoothing_radius: int = 0,
        smoothing_strength: float = 1.0,
        projection: str = "identity",
        projection_seed: int = 0,
        inertia_pooling: str = "sum",
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "t", int(t))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "tau", float(tau))
        object.__setattr__(self, "groups", int(groups))
        object.__setattr__(self, "dynamic", bool(dynamic))
        object.__setattr__(self, "threshold", float(threshold))
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "smoothing_radius", int(smoothing_radius))
        object.__setattr__(self, "smoothing_strength", float(smoothing_strength))
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "projection_seed", int(projection_seed))
        object.__setattr__(self, "inertia_pooling", inertia_pooling)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.t < 1:
            raise CocaLibValueError(f"invalid t: {self.t}")
        if self.smoothing_radius < 0:
            err_msg = f"invalid smoothing_radius: {self.smoothing_radius}"
            raise CocaLibValueError(err_msg)
        if not 0 <= self.smoothing_strength <= 1:
            err_msg = f"invalid smoothing_strength: {self.smoothing_strength}"
            raise CocaLibValueError(err_msg)
        if self.inertia_pooling not in INERTIA_POOLINGS:
            raise CocaLibValueError(f"invalid inertia_pooling: {self.inertia_pooling}")
        self.affinity_config().assert_valid()
        self.stop_policy().assert_valid()

    def affinity_config(self) -> AffinityConfig:
        return AffinityConfig(
            self.tau,
            self.groups,
            self.projection,
            self.projection_seed,
            check_validity=False,
        )

    def stop_policy(self) -> StopPolicy:
        kind = "dynamic" if self.dynamic else "fixed"
        return StopPolicy(
            kind, self.k, self.threshold, self.measure, check_validity=False
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "k": self.k,
            "tau": self.tau,
            "groups": self.groups,
            "dynamic": self.dynamic,
            "threshold": self.threshold,
            "measure": self.measure,
            "smoothing_radius": self.smoothing_radius,
            "smoothing_strength": self.smoothing_strength,
            "projection": self.projection,
            "projection_seed": self.projection_seed,
            "inertia_pooling": self.inertia_pooling,
        }

    @classmethod
    def from_dict(
        cls: Type[_LayerConfig], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _LayerConfig:
        return cls(**dict_, check_validity=check_validity)


@dataclass(frozen=True, eq=False)
class LayerState:
    """Node grid flowing between layers.

    features and attrs are aligned row by row with the (H', W', K) grid;
    masks_by_layer and layouts record the clustering of every layer run.
    """

    features: FeatureMap
    attrs: NodeAttrs
    masks_by_layer: Tuple[ClusterMasks, ...] = ()
    layouts: Tuple[WindowLayout, ...] = ()

    def __init__(
        self,
        features: FeatureMap,
        attrs: NodeAttrs,
        masks_by_layer: Sequence[ClusterMasks] = (),
        layouts: Sequence[WindowLayout] = (),
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "features", features)
        object.__setattr__(self, "attrs", attrs)
        object.__setattr__(self, "masks_by_layer", tuple(masks_by_layer))
        object.__setattr__(self, "layouts", tuple(layouts))

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.attrs.area.shape != (self.features.n,):
            err_msg = f"invalid attrs shape: {self.attrs.area.shape}, "
            err_msg += f"instead of ({self.features.n},)"
            raise CocaLibValueError(err_msg)
        if len(self.masks_by_layer) != len(self.layouts):
            raise CocaLibValueError("invalid state: masks and layouts mismatch")

    @property
    def grid(self) -> Tuple[int, int, int]:
        return self.features.grid


def _unfold_attrs(attrs: NodeAttrs, grid: Tuple[int, int, int], t: int) -> NodeAttrs:
    fields = [
        unfold_windows(getattr(attrs, field).reshape(grid), t)
        for field in ("area", "mass", "density", "inertia")
    ]
    position = unfold_windows(attrs.position.reshape(*grid, 2), t)
    return NodeAttrs(*fields, position, check_validity=False)


def _window_slice(attrs: NodeAttrs, start: int, stop: int) -> NodeAttrs:
    return NodeAttrs(
        attrs.area[start:stop],
        attrs.mass[start:stop],
        attrs.density[start:stop],
        attrs.inertia[start:stop],
        attrs.position[start:stop],
        check_validity=False,
    )


def _pad(masks: ClusterMasks, k: int) -> ClusterMasks:
    "Insert empty masks before the residual up to k masks per window."

    missing = k - masks.k
    if missing <= 0:
        return masks
    n_windows, _, n = masks.pi.shape
    pi = np.concatenate(
        [masks.pi[:, :-1], np.zeros((n_windows, missing, n)), masks.pi[:, -1:]], axis=1
    )
    filler = np.full((n_windows, missing), NO_ANCHOR, dtype=np.int64)
    anchors = np.concatenate([masks.anchors, filler], axis=1)
    return ClusterMasks(pi, anchors, check_validity=False)


def coca_layer(
    state: LayerState,
    cfg: LayerConfig,
    anchor_mode: str = "compact",
    seed: int = 0,
    threads: int = 1,
    erosion: str = "cumulative",
) -> LayerState:
    """Run one clustering layer over all windows of the node grid.

    Windows are processed in contiguous chunks, one per thread;
    results do not depend on the thread count.
    In random anchor mode window w of layer l draws its anchors
    from a generator seeded by (seed, l, w).
    """

    if anchor_mode not in ANCHOR_MODES:
        raise CocaLibValueError(f"invalid anchor mode: {anchor_mode}")
    grid = state.grid
    layout = WindowLayout.from_grid(grid, cfg.t)
    layer = len(state.layouts)
    d = state.features.d
    cfg.affinity_config().assert_valid(d)
    policy = cfg.stop_policy()
    if policy.kind == "fixed" and policy.k > layout.n + 1:
        raise CocaLibValueError(f"invalid k: {policy.k} for {layout.n} nodes")

    x = unfold_windows(state.features.as_grid(), cfg.t)
    attrs = _unfold_attrs(state.attrs, grid, cfg.t)
    acfg = cfg.affinity_config()

    def cluster_chunk(window_range: Tuple[int, int]) -> ClusterMasks:
        start, stop = window_range
        feats = x[start:stop]
        if cfg.smoothing_radius and cfg.smoothing_strength:
            feats = np.stack(
                [
                    smooth_features(
                        FeatureMap(f, (layout.h, layout.w, layout.k_in)),
                        cfg.smoothing_radius,
                        cfg.smoothing_strength,
                    ).data
                    for f in feats
                ]
            )
        chunk_attrs = _window_slice(attrs, start, stop)
        masks = build_affinities(feats, acfg)
        scores = compactness_scores(chunk_attrs, masks)
        scope = (chunk_attrs.area > POOL_EPS).astype(np.float64)
        rngs: Optional[List[np.random.Generator]] = None
        if anchor_mode == "random":
            rngs = [
                np.random.default_rng([seed, layer, w]) for w in range(start, stop)
            ]
        return sbc_cluster_windows(
            masks.lam,
            scores.c,
            policy,
            anchor_mode,
            rngs,
            scope,
            erosion,
            chunk_attrs.area,
        )

    bounds = chunk_ranges(layout.n_windows, threads)
    chunks = parallel_map(cluster_chunk, bounds, threads)
    k_out = max(chunk.k for chunk in chunks)
    chunks = [_pad(chunk, k_out) for chunk in chunks]
    cluster_masks = ClusterMasks(
        np.concatenate([chunk.pi for chunk in chunks]),
        np.concatenate([chunk.anchors for chunk in chunks]),
        check_validity=False,
    )

    pooled_x = pool_features(cluster_masks.pi, x)
    pooled = pool_attrs(cluster_masks.pi, attrs, cfg.inertia_pooling)
    out_layout = WindowLayout(layout.t, 1, 1, k_out, layout.t_cols)
    folded = fold_windows(pooled_x, out_layout)
    features = FeatureMap(folded.reshape(-1, d), out_layout.grid)
    new_attrs = NodeAttrs(
        pooled.area.ravel(),
        pooled.mass.ravel(),
        pooled.density.ravel(),
        pooled.inertia.ravel(),
        pooled.position.reshape(-1, 2),
        check_validity=False,
    )
    LOGGER.info(
        "layer %d: %d windows of %d nodes, %d clusters each, %d anchored",
        layer + 1,
        layout.n_windows,
        layout.n,
        k_out,
        int(cluster_masks.emitted.sum()),
    )
    return LayerState(
        features,
        new_attrs,
        state.masks_by_layer + (cluster_masks,),
        state.layouts + (layout,),
    )
