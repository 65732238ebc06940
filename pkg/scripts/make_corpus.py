#!/usr/bin/env python3
"""Generate the bundled synthetic data tree (corpus, resources, sequences)."""

import sys

from rumourkit.datagen import main

if __name__ == "__main__":
    sys.exit(main())
