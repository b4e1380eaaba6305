import sys

from gosphere.app import main

sys.exit(main())
