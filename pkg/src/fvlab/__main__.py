import sys

from fvlab.cli import main

sys.exit(main())
