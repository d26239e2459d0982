#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Exception classes.

These are only meant to discriminate between Exceptions being raised
by cocalib from those raised by other codebase.

Users are usually better off just dealing with the regular
ValueError, TypeError, RuntimeError, and OSError
from which the cocalib versions are derived.

The command line interface maps them to exit codes:
OSError (including CocaLibIOError) to 1,
CocaLibValueError and CocaLibTypeError to 2,
CocaLibRuntimeError to 3.
"""


class CocaLibValueError(ValueError):
    pass


class CocaLibTypeError(TypeError):
    pass


class CocaLibRuntimeError(RuntimeError):
    pass


class CocaLibIOError(OSError):
    pass
