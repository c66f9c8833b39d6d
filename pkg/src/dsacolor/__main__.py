import sys

from dsacolor.cli import main

sys.exit(main())
