#!/usr/bin/env python
"""
Discrete L1 norms and compressed manifold modes of triangle meshes.
Run "l1_modes.py --help" for the list of commands.
"""
import sys

from manifold_l1 import cli


if __name__ == "__main__":
    sys.exit(cli.main())
