import sys

from vqgap.cli import main

sys.exit(main())
