import sys

from mirs.cli import main

sys.exit(main())
