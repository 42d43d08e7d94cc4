import sys

from dprcrypt.cli import main

sys.exit(main())
