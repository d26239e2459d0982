#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"__init__ module for the cocalib package."

name = "cocalib"
__version__ = "2026.10"
__author__ = "The cocalib developers"
__author_email__ = "devs@cocalib.org"
__copyright__ = "Copyright (C) 2025-2026 The cocalib developers"
__license__ = "MIT License"
