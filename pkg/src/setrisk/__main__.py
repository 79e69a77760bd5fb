import sys

from setrisk.cli import main

sys.exit(main())
