"""Run the ``xizero`` command line tool from a source checkout."""

from pathlib import Path
import os
import sys
import warnings

THIS_PATH = Path(os.path.dirname(os.path.realpath(__file__)))
sys.path.append(str(THIS_PATH.joinpath("src/main/python").absolute()))

from cli import main  # noqa: E402

if __name__ == "__main__":
    """This is executed when running from this script."""
    if sys.version_info < (3, 9):
        warnings.warn(
            f"Python {sys.version_info.major}.{sys.version_info.minor} is older than 3.9, "
            f"exceptional step function periods need math.lcm."
        )

    sys.exit(main())
