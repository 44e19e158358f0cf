"""Allow ``python -m zo_mopi``."""

from __future__ import annotations

import sys

from zo_mopi.harness.cli import main

if __name__ == "__main__":
    sys.exit(main())
