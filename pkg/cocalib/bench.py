#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Runtime scaling benchmark and scene-suite evaluation.

The scaling benchmark segments N x N scenes with a hierarchy of
U x U windows at every layer (the first layer has N/U windows per
axis, each following layer divides the window count by U, the last
layer being a single window), times every size, and fits the log-log
slope of the median times against N.

The suite evaluation segments generated scenes and reports
foreground ARI, background-included mSC, the compact versus random
anchor gap, and how well dynamic stopping counts the objects.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from dataclasses_json import DataClassJsonMixin

from cocalib.config import RunConfig
from cocalib.hierarchy.layer import LayerConfig
from cocalib.hierarchy.net import coca_net
from cocalib.metrics import score_segmentation
from cocalib.scene import SceneSpec, generate_scene
from cocalib.utils import resolve_threads

LOGGER = logging.getLogger(__name__)

DEFAULT_SIZES = (32, 64, 128, 256)
WINDOW_SIDE = 4


def bench_layers(
    size: int,
    window_side: int = WINDOW_SIDE,
    k: int = 2,
    k_final: int = 4,
    tau: float = 1.0,
) -> List[LayerConfig]:
    "Layer chain of window_side x window_side windows over a size x size image."

    layers: List[LayerConfig] = []
    t = size // window_side
    while t > 1:
        layers.append(LayerConfig(t, k, tau))
        if t % window_side:
            break
        t //= window_side
    layers.append(LayerConfig(1, k_final, tau))
    return layers


@dataclass
class BenchReport(DataClassJsonMixin):
    sizes: List[int]
    reps: int
    medians: List[float]
    slope: Optional[float] = None
    times: List[List[float]] = field(default_factory=list)


def loglog_slope(sizes: Sequence[int], times: Sequence[float]) -> Optional[float]:
    "Least-squares slope of log(time) against log(size); None below two sizes."
    if len(sizes) < 2:
        return None
    slope, _ = np.polyfit(np.log(sizes), np.log(times), 1)
    return float(slope)


def run_bench(
    sizes: Sequence[int] = DEFAULT_SIZES,
    reps: int = 3,
    threads: Optional[int] = None,
    seed: int = 0,
) -> BenchReport:
    "Time the segmentation of one generated scene per size, after a warm-up run."

    workers = resolve_threads(threads)
    medians: List[float] = []
    all_times: List[List[float]] = []
    for size in sizes:
        side = max(3, size // 8)
        spec = SceneSpec(size, size, size_range=(side, 2 * side), seed=seed)
        image = generate_scene(spec, 0).image
        layers = bench_layers(size)
        coca_net(image, layers, threads=workers)
        times: List[float] = []
        for _ in range(reps):
            start = time.perf_counter()
            coca_net(image, layers, threads=workers)
            times.append(time.perf_counter() - start)
        medians.append(float(np.median(times)))
        all_times.append(times)
        LOGGER.info("size %d: median %.3fs over %d runs", size, medians[-1], reps)
    slope = loglog_slope(sizes, medians)
    return BenchReport(list(sizes), reps, medians, slope, all_times)


@dataclass
class SceneScores(DataClassJsonMixin):
    fg_ari: List[float]
    bg_msc: List[float]
    anchored: List[int]
    objects: List[int]

    @property
    def mean_fg_ari(self) -> float:
        return float(np.mean(self.fg_ari))

    @property
    def mean_bg_msc(self) -> float:
        return float(np.mean(self.bg_msc))

    def slot_hit_rate(self, tolerance: int = 1) -> float:
        "Share of scenes whose anchored slot count is within tolerance."
        hits = [abs(a - o) <= tolerance for a, o in zip(self.anchored, self.objects)]
        return float(np.mean(hits))


def evaluate_scenes(
    cfg: RunConfig,
    spec: SceneSpec,
    n_scenes: int,
    anchor_mode: Optional[str] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> SceneScores:
    "Segment scenes 0..n_scenes-1 of spec and score them."

    scores = SceneScores([], [], [], [])
    layers = cfg.effective_layers()
    mode = cfg.anchor_mode if anchor_mode is None else anchor_mode
    run_seed = cfg.seed if seed is None else seed
    for index in range(n_scenes):
        scene = generate_scene(spec, index)
        result = coca_net(
            scene.image, layers, cfg.encoder, mode, run_seed, threads or cfg.threads
        )
        fg = score_segmentation(result.hard_labels, scene.gt, scene.bg_ids, "fg")
        bg = score_segmentation(result.hard_labels, scene.gt, scene.bg_ids, "bg")
        scores.fg_ari.append(fg.ari)
        scores.bg_msc.append(bg.msc)
        scores.anchored.append(result.final_anchored)
        scores.objects.append(scene.n_objects)
    return scores


@dataclass
class SuiteReport(DataClassJsonMixin):
    n_scenes: int
    mean_fg_ari: float
    mean_bg_msc: float
    random_fg_ari: List[float]
    random_median_fg_ari: float
    anchor_gap: float
    slot_hit_rate: Optional[float] = None


def evaluate_suite(
    cfg: RunConfig,
    n_scenes: int = 50,
    ras_seeds: int = 5,
    threads: Optional[int] = None,
    seed: int = 0,
) -> SuiteReport:
    """Evaluate cfg on generated 64x64 scenes.

    Compact anchors on 3-6 objects, random anchors on the same scenes
    for ras_seeds seeds and, when the final layer stops dynamically,
    slot counting on 2-8 objects.
    """

    spec = SceneSpec(n_objects=(3, 6), seed=seed)
    compact = evaluate_scenes(cfg, spec, n_scenes, "compact", threads=threads)
    random_means = [
        evaluate_scenes(cfg, spec, n_scenes, "random", s, threads).mean_fg_ari
        for s in range(ras_seeds)
    ]
    random_median = float(np.median(random_means)) if random_means else float("nan")
    hit_rate: Optional[float] = None
    if cfg.effective_layers()[-1].dynamic:
        counting = SceneSpec(n_objects=(2, 8), seed=seed + 1)
        scores = evaluate_scenes(cfg, counting, n_scenes, "compact", threads=threads)
        hit_rate = scores.slot_hit_rate()
    report = SuiteReport(
        n_scenes,
        compact.mean_fg_ari,
        compact.mean_bg_msc,
        random_means,
        random_median,
        compact.mean_fg_ari - random_median,
        hit_rate,
    )
    LOGGER.info(
        "suite: fg ARI %.3f, bg mSC %.3f, gap %.3f",
        report.mean_fg_ari,
        report.mean_bg_msc,
        report.anchor_gap,
    )
    return report
