"""Run the command line interface with python -m hnc_navigation."""

import sys

from .cli import main

sys.exit(main())
