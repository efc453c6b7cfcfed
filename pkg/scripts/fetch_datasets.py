#!/usr/bin/env python3
"""Fetch the two UCI datasets used by the abalone and credit experiments.

Downloads the raw files, normalizes them to the CSV format the loader
expects (comma-delimited, one header row, label in the last column), and
records SHA-256 checksums.

Checksum policy: on the first successful fetch the digests of the raw
downloads are written to ``SHA256SUMS`` next to the data; later fetches are
verified against that record, so any upstream change is flagged.  If you have
independently known-good digests, put them in ``SHA256SUMS`` before running.

Usage:  python scripts/fetch_datasets.py [target-directory]   (default ./data)
"""

from __future__ import annotations

import csv
import hashlib
import io
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

SOURCES = {
    "abalone": f"{UCI}/abalone/abalone.data",
    "australian": f"{UCI}/statlog/australian/australian.dat",
}

ABALONE_HEADER = ["Sex", "Length", "Diameter", "Height", "WholeWeight",
                  "ShuckedWeight", "VisceraWeight", "ShellWeight", "Rings"]


def fetch(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as response:
        return response.read()


def digest(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def load_sums(path: Path) -> dict:
    sums = {}
    if path.exists():
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                value, name = line.split(maxsplit=1)
                sums[name.strip()] = value
    return sums


def save_sums(path: Path, sums: dict) -> None:
    lines = [f"{value}  {name}" for name, value in sorted(sums.items())]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def convert_abalone(blob: bytes) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(ABALONE_HEADER)
    for line in blob.decode("utf-8").splitlines():
        if line.strip():
            writer.writerow(line.strip().split(","))
    return out.getvalue()


def convert_australian(blob: bytes) -> str:
    # space-separated, no header, 14 features + binary label (0/1)
    out = io.StringIO()
    writer = csv.writer(out)
    rows = [line.split() for line in blob.decode("utf-8").splitlines() if line.strip()]
    width = len(rows[0])
    writer.writerow([f"A{i + 1}" for i in range(width - 1)] + ["label"])
    for row in rows:
        writer.writerow(row)
    return out.getvalue()


def main() -> int:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    target.mkdir(parents=True, exist_ok=True)
    sums_path = target / "SHA256SUMS"
    sums = load_sums(sums_path)

    raw = {}
    for name, url in SOURCES.items():
        blob = fetch(url)
        got = digest(blob)
        if name in sums and sums[name] != got:
            print(f"error: checksum mismatch for {name}: recorded {sums[name]}, got {got}",
                  file=sys.stderr)
            return 1
        if name not in sums:
            print(f"recording checksum for {name}: {got}")
            sums[name] = got
        raw[name] = blob

    (target / "abalone.csv").write_text(convert_abalone(raw["abalone"]), encoding="utf-8")
    (target / "australian.csv").write_text(convert_australian(raw["australian"]), encoding="utf-8")
    save_sums(sums_path, sums)
    print(f"wrote {target / 'abalone.csv'} and {target / 'australian.csv'}")
    print("point the experiments at them with --data or SQOPT_DATA_DIR")
    return 0


if __name__ == "__main__":
    sys.exit(main())
