import sys

from smelter.cli import main

sys.exit(main())
