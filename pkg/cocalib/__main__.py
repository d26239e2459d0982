#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"Run the cocalib command line interface."

import sys

from cocalib.cli import main

if __name__ == "__main__":
    sys.exit(main())
