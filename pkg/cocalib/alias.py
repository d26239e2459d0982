#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Aliases

mypy aliases, documenting also array input conventions.
"""

from typing import Tuple

import numpy as np

# Tensor is a C-contiguous numpy.ndarray of float64.
#
# Its shape is the ndarray shape (outer-to-inner extents) and storage is
# row-major, so that flattening, window unfolding, and reductions along
# the last axis visit entries in a fixed index-ascending order.
#
# Window-level operations accept arbitrary leading batch axes:
# features are (..., n, d), affinity masks (..., n, n),
# node attribute vectors (..., n), node positions (..., n, 2).
Tensor = np.ndarray

# RGB image as an (H, W, 3) Tensor with channels in [0, 1]
Image = np.ndarray

# (H, W) integer array of segment ids
Labels = np.ndarray

# RGB triple with channels in [0, 1]
Color = Tuple[float, float, float]
