import sys

from ringbound.cli import main

sys.exit(main())
