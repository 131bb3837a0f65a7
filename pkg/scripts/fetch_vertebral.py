"""Download the UCI vertebral-column data and write data/vertebral.csv.

The file is not vendored. The script prints the SHA-256 of the downloaded
archive and of the written CSV so a run can be pinned afterwards.
"""

import argparse
import hashlib
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

from blindpca.dataio import load_vertebral, vertebral_to_csv

URL = "https://archive.ics.uci.edu/static/public/212/vertebral+column.zip"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--url", default=URL)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "vertebral.csv"))
    args = ap.parse_args(argv)
    try:
        with urllib.request.urlopen(args.url, timeout=60) as resp:
            blob = resp.read()
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    print(f"archive sha256 {hashlib.sha256(blob).hexdigest()}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    raw = out.with_name("column_3C.dat")
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        member = next(m for m in zf.namelist() if m.endswith("column_3C.dat"))
        raw.write_bytes(zf.read(member))
    table = load_vertebral(raw)
    vertebral_to_csv(table, out)
    print(f"{out} rows={table.shape[0]} sha256 {hashlib.sha256(out.read_bytes()).hexdigest()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
