import sys

from citesim.cli import main

sys.exit(main())
