import sys

from kbqd.cli import main

sys.exit(main())
