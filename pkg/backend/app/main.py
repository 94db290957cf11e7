#!/usr/bin/env python3
"""
RedunFlow - directional feature interaction and redundancy graphs

The main entry point for the ``redunflow`` command. Exit codes are set by
the command group: 0 success, 1 verification failure, 2 configuration
error, 3 adapter or runtime error.
"""

import sys
from typing import List, Optional

from backend.app.cli.commands import cli


def main(argv: Optional[List[str]] = None):
    """Main entry point"""
    cli.main(args=argv, prog_name="redunflow")


if __name__ == "__main__":
    main(sys.argv[1:])
