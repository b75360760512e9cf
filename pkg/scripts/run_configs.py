"""Run every INI in configs/ through the CLI and tabulate exit codes.

    python scripts/run_configs.py [OUT_ROOT]

fw_verify.ini is expected to exit 4: the gravity-sector comparison reports
six sign mismatches (see README).
"""

import sys
import time
from pathlib import Path

from gravdec import cli

ROOT = Path(__file__).resolve().parent.parent


def main(argv):
    out_root = Path(argv[0]) if argv else ROOT / "gravdec-out"
    rows = []
    for path in sorted((ROOT / "configs").glob("*.ini")):
        t = time.perf_counter()
        code = cli.main(["run", str(path), "--out-dir", str(out_root / path.stem)])
        rows.append((path.name, code, time.perf_counter() - t))
    print()
    for name, code, secs in rows:
        print(f"{name:28s} exit {code}  {secs:6.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
