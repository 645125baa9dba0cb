import sys

from pdrelay.cli import main

sys.exit(main())
