import sys

from pnlkit.cli import main

sys.exit(main())
