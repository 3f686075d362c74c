import sys

from logoquant import cli

sys.exit(cli.main())
