import sys

from tmgk.cli import main

sys.exit(main())
