"""Allow `python -m meta_ssm`."""

import sys

from .cli import main

sys.exit(main())
