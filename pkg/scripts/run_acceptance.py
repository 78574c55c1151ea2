#!/usr/bin/env python3
"""Run the acceptance suite with the ACCEPTANCE lines visible.

Extra arguments are handed straight to pytest, e.g.

    python3 scripts/run_acceptance.py -k transport
"""
import subprocess
import sys
from pathlib import Path


def main(argv=None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    target = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    cmd = [sys.executable, "-m", "pytest", str(target), "-s", "-v", *args]
    return subprocess.call(cmd)


if __name__ == "__main__":
    raise SystemExit(main())
