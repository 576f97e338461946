import sys

from ptmrnn.cli import main

sys.exit(main())
