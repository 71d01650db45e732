import sys

from measure_spectra.cli import main

sys.exit(main())
