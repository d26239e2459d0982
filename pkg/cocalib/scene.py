#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Synthetic multi-object scenes with ground truth.

Uniform-colored rectangles, disks and L-tetrominoes on a solid or
two-tone background. Scenes are generated from a counter-based
generator keyed by (seed, index), so that scene i of a suite can be
regenerated in isolation.

Ground-truth ids: objects 0..n-1 in placement order,
then the background id(s).
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Type, TypeVar

import numpy as np

from cocalib.alias import Color, Image, Labels, Tensor
from cocalib.exceptions import CocaLibRuntimeError, CocaLibValueError

LOGGER = logging.getLogger(__name__)

_SceneSpec = TypeVar("_SceneSpec", bound="SceneSpec")

SHAPES = ("rect", "disk", "tetromino")
OVERLAPS = ("forbidden", "allowed")
BACKGROUNDS = ("solid", "two-tone")

DEFAULT_PALETTE: Tuple[Color, ...] = (
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (1.0, 1.0, 0.0),
    (1.0, 0.0, 1.0),
    (0.0, 1.0, 1.0),
    (1.0, 0.5, 0.0),
    (0.5, 0.0, 1.0),
    (1.0, 1.0, 1.0),
    (0.0, 0.5, 0.5),
)
DEFAULT_BACKGROUND: Tuple[Color, ...] = ((0.0, 0.0, 0.0), (0.25, 0.25, 0.25))

MIN_COLOR_DISTANCE = 0.2
MAX_RETRIES = 200

# L-tetromino cells on a 3 x 2 grid
_TETROMINO = np.array([[1, 0], [1, 0], [1, 1]], dtype=bool)


def color_distance(a: Color, b: Color) -> float:
    "Largest per-channel difference."
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


@dataclass(frozen=True)
class SceneSpec:
    h: int = 64
    w: int = 64
    n_objects: Tuple[int, int] = (3, 6)
    shapes: Tuple[str, ...] = SHAPES
    palette: Tuple[Color, ...] = DEFAULT_PALETTE
    overlap: str = "forbidden"
    bg: str = "solid"
    background: Tuple[Color, ...] = DEFAULT_BACKGROUND
    size_range: Tuple[int, int] = (8, 16)
    seed: int = 0

    def __init__(
        self,
        h: int = 64,
        w: int = 64,
        n_objects: Sequence[int] = (3, 6),
        shapes: Sequence[str] = SHAPES,
        palette: Sequence[Color] = DEFAULT_PALETTE,
        overlap: str = "forbidden",
        bg: str = "solid",
        background: Sequence[Color] = DEFAULT_BACKGROUND,
        size_range: Sequence[int] = (8, 16),
        seed: int = 0,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "h", int(h))
        object.__setattr__(self, "w", int(w))
        lo, hi = n_objects
        object.__setattr__(self, "n_objects", (int(lo), int(hi)))
        object.__setattr__(self, "shapes", tuple(shapes))
        colors = tuple(tuple(float(c) for c in color) for color in palette)
        object.__setattr__(self, "palette", colors)
        object.__setattr__(self, "overlap", overlap)
        object.__setattr__(self, "bg", bg)
        bg_colors = tuple(tuple(float(c) for c in color) for color in background)
        object.__setattr__(self, "background", bg_colors)
        s_min, s_max = size_range
        object.__setattr__(self, "size_range", (int(s_min), int(s_max)))
        object.__setattr__(self, "seed", int(seed))

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        if self.h < 1 or self.w < 1:
            raise CocaLibValueError(f"invalid scene extent: {self.h}x{self.w}")
        lo, hi = self.n_objects
        if not 0 <= lo <= hi <= len(self.palette):
            raise CocaLibValueError(f"invalid n_objects: {self.n_objects}")
        if not self.shapes or any(s not in SHAPES for s in self.shapes):
            raise CocaLibValueError(f"invalid shapes: {self.shapes}")
        if self.overlap not in OVERLAPS:
            raise CocaLibValueError(f"invalid overlap: {self.overlap}")
        if self.bg not in BACKGROUNDS:
            raise CocaLibValueError(f"invalid bg: {self.bg}")
        if len(self.background) < (2 if self.bg == "two-tone" else 1):
            raise CocaLibValueError(f"invalid background: {self.background}")
        s_min, s_max = self.size_range
        if not 3 <= s_min <= s_max <= min(self.h, self.w):
            raise CocaLibValueError(f"invalid size_range: {self.size_range}")
        if not 0 <= self.seed < 2 ** 64:
            raise CocaLibValueError(f"invalid seed: {self.seed}")
        colors = list(self.palette) + list(self.background[: self.n_bg])
        for color in colors:
            if len(color) != 3 or min(color) < 0 or max(color) > 1:
                raise CocaLibValueError(f"invalid color: {color}")
        for i, a in enumerate(colors):
            for b in colors[i + 1 :]:
                if color_distance(a, b) < MIN_COLOR_DISTANCE:
                    raise CocaLibValueError(f"invalid palette: {a} too close to {b}")

    @property
    def n_bg(self) -> int:
        return 2 if self.bg == "two-tone" else 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h": self.h,
            "w": self.w,
            "n_objects": list(self.n_objects),
            "shapes": list(self.shapes),
            "palette": [list(c) for c in self.palette],
            "overlap": self.overlap,
            "bg": self.bg,
            "background": [list(c) for c in self.background],
            "size_range": list(self.size_range),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(
        cls: Type[_SceneSpec], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _SceneSpec:
        return cls(**dict_, check_validity=check_validity)


@dataclass(frozen=True, eq=False)
class SceneObject:
    shape: str
    color: Color
    top: int
    left: int
    mask: Tensor
    area: float
    perimeter: float


@dataclass(frozen=True, eq=False)
class Scene:
    image: Image
    gt: Labels
    bg_ids: Tuple[int, ...]
    objects: Tuple[SceneObject, ...]

    @property
    def n_objects(self) -> int:
        return len(self.objects)


def scene_rng(seed: int, index: int) -> np.random.Generator:
    "Counter-based generator of scene index of a suite."
    if not 0 <= index < 2 ** 64:
        raise CocaLibValueError(f"invalid scene index: {index}")
    return np.random.Generator(np.random.Philox(key=(index << 64) | seed))


def _shape_mask(
    shape: str, size: int, rng: np.random.Generator
) -> Tuple[Tensor, float, float]:
    "Return the mask, the analytic area, and the analytic perimeter."

    if shape == "rect":
        other = int(rng.integers(max(3, size // 2), size + 1))
        height, width = (size, other) if rng.integers(2) else (other, size)
        mask = np.ones((height, width), dtype=bool)
        return mask, float(height * width), 2.0 * (height + width)
    if shape == "disk":
        radius = size / 2
        center = (size - 1) / 2
        rows, cols = np.mgrid[:size, :size]
        mask = (rows - center) ** 2 + (cols - center) ** 2 <= radius ** 2
        return mask, np.pi * radius ** 2, 2 * np.pi * radius
    cell = max(1, size // 3)
    mask = np.repeat(np.repeat(_TETROMINO, cell, axis=0), cell, axis=1)
    mask = np.rot90(mask, int(rng.integers(4)))
    if rng.integers(2):
        mask = mask[:, ::-1]
    return np.ascontiguousarray(mask), 4.0 * cell * cell, 10.0 * cell


def _background(spec: SceneSpec, rng: np.random.Generator) -> Tuple[Tensor, Tensor]:
    "Return the background image and its 0/1 tone map."

    tone = np.zeros((spec.h, spec.w), dtype=np.int64)
    if spec.bg == "two-tone":
        if rng.integers(2):
            split = int(rng.integers(spec.h // 4, 3 * spec.h // 4 + 1))
            tone[split:, :] = 1
        else:
            split = int(rng.integers(spec.w // 4, 3 * spec.w // 4 + 1))
            tone[:, split:] = 1
    colors = np.asarray(spec.background[: spec.n_bg])
    return colors[tone], tone


def generate_scene(spec: SceneSpec, index: int = 0) -> Scene:
    "Return scene index of the suite defined by spec."

    rng = scene_rng(spec.seed, index)
    image, tone = _background(spec, rng)
    lo, hi = spec.n_objects
    n = int(rng.integers(lo, hi + 1))
    colors = rng.choice(len(spec.palette), size=n, replace=False)
    gt = np.full((spec.h, spec.w), -1, dtype=np.int64)
    objects: List[SceneObject] = []
    for i in range(n):
        for attempt in range(MAX_RETRIES):
            shape = spec.shapes[int(rng.integers(len(spec.shapes)))]
            size = int(rng.integers(spec.size_range[0], spec.size_range[1] + 1))
            mask, area, perimeter = _shape_mask(shape, size, rng)
            m_h, m_w = mask.shape
            if m_h > spec.h or m_w > spec.w:
                continue
            top = int(rng.integers(spec.h - m_h + 1))
            left = int(rng.integers(spec.w - m_w + 1))
            window = gt[top : top + m_h, left : left + m_w]
            if spec.overlap == "forbidden" and np.any(window[mask] >= 0):
                continue
            window[mask] = i
            color = spec.palette[int(colors[i])]
            image[top : top + m_h, left : left + m_w][mask] = color
            objects.append(SceneObject(shape, color, top, left, mask, area, perimeter))
            if attempt:
                LOGGER.debug("scene %d object %d: %d retries", index, i, attempt)
            break
        else:
            err_msg = f"scene {index}: cannot place object {i} "
            err_msg += f"after {MAX_RETRIES} attempts"
            raise CocaLibRuntimeError(err_msg)
    background = gt < 0
    gt[background] = n + tone[background]
    bg_ids = tuple(range(n, n + spec.n_bg))
    image = np.ascontiguousarray(image, dtype=np.float64)
    return Scene(image, gt, bg_ids, tuple(objects))
