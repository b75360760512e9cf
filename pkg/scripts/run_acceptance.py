"""Run the acceptance module and print only the per-criterion lines.

    python scripts/run_acceptance.py [-k EXPR]
"""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main(argv):
    cmd = [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    proc = subprocess.run(cmd + argv, capture_output=True, text=True, cwd=ROOT)
    lines = proc.stdout.splitlines()
    try:
        start = next(i for i, l in enumerate(lines) if "acceptance criteria" in l)
    except StopIteration:
        print(proc.stdout + proc.stderr)
        return proc.returncode
    for line in lines[start + 1:]:
        if line.startswith("=") or line.startswith("FAILED"):
            break
        print(line)
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
