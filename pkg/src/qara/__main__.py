import sys

from qara.cli import main

sys.exit(main())
