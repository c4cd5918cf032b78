import sys

from fsdcd.cli import main

sys.exit(main())
