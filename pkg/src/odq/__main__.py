import sys

from odq.cli import main

sys.exit(main())
