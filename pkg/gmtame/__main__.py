import sys

from gmtame.cli import main

sys.exit(main())
