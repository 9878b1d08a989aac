#!/usr/bin/env python3
"""Fetch MovieLens-100K interactions into data/ml-100k/u.data.

The GroupLens host is not always reachable, so this pulls the copy bundled in
the RecBole wheel from the package index and rewrites it in the original
``user<TAB>item<TAB>rating<TAB>timestamp`` layout (header stripped).
"""
import argparse
import pathlib
import subprocess
import sys
import tempfile
import zipfile

MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data/ml-100k/u.data"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    if out.exists():
        print(f"{out} already present")
        return 0
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "recbole==1.2.1", "--no-deps", "-d", tmp, "-q"],
                       check=True)
        wheel = next(pathlib.Path(tmp).glob("recbole-*.whl"))
        lines = zipfile.ZipFile(wheel).read(MEMBER).decode().splitlines()
    rows = [line for line in lines[1:] if line.strip()]
    if len(rows) != 100000:
        print(f"unexpected row count {len(rows)}", file=sys.stderr)
        return 1
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} interactions to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
