import sys

from omentangle.cli import main

sys.exit(main())
