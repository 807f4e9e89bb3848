"""Entry point for ``python -m rfdi``."""  # numpydoc ignore=EX01,ES01

import sys

from .cli import main

sys.exit(main())
