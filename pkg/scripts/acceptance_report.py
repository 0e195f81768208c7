"""Run the acceptance suite and print one PASS/FAIL line per criterion.

    python3 scripts/acceptance_report.py
"""

import pathlib
import runpy
import sys

if __name__ == "__main__":
    here = pathlib.Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.argv = [str(here)]
    runpy.run_path(str(here), run_name="__main__")
