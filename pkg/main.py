"""Command-line entrypoint."""

import sys

from jobs.cli import main

__all__ = ["main"]


if __name__ == "__main__":
    sys.exit(main())
