import sys

from synthopt.cli import main

sys.exit(main())
