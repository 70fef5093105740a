import sys

from lrsinr.cli import main

sys.exit(main())
