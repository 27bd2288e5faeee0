import sys

from dismantler.cli import main

sys.exit(main())
