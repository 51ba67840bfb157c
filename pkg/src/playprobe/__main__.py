"""Module entry point: ``python -m playprobe``."""

import sys

from playprobe.cli import main

if __name__ == "__main__":
    sys.exit(main())
