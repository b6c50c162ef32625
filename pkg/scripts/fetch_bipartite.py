#!/usr/bin/env python3
"""Fetch small public bipartite membership datasets into data/bipartite/.

Needs network access. Datasets come from the KONECT archive's TSV bundles;
each becomes a two-column "group member" file in the format consumed by
`hyperrec bipartite`. The Davis Southern Women data is not fetched here
because it ships with networkx.

Usage: python scripts/fetch_bipartite.py [name ...]
"""

import io
import sys
import tarfile
import urllib.request
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "bipartite"

# KONECT internal names; all are person-x-group affiliation data, so the
# SECOND column of out.* (the right-hand node class) is the group
DEFAULT_DATASETS = [
    "brunson_club-membership",
    "brunson_corporate-leadership",
    "moreno_crime",
]

URL = "http://konect.cc/files/download.tsv.{name}.tar.bz2"


def fetch(name: str) -> None:
    data = urllib.request.urlopen(URL.format(name=name), timeout=120).read()
    with tarfile.open(fileobj=io.BytesIO(data), mode="r:bz2") as tf:
        member = next(m for m in tf.getmembers()
                      if m.name.split("/")[-1].startswith("out."))
        rows = tf.extractfile(member).read().decode().splitlines()
    lines = []
    for row in rows:
        if row.startswith("%") or not row.strip():
            continue
        left, right = row.split()[:2]
        # left/right id spaces are separate in KONECT bipartite data
        lines.append(f"g{right} m{left}")
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    out = OUT_DIR / f"{name.replace('-', '_')}.txt"
    out.write_text("\n".join(sorted(set(lines))) + "\n", encoding="utf-8")
    print(f"wrote {out}: {len(set(lines))} memberships")


def main() -> int:
    names = sys.argv[1:] or DEFAULT_DATASETS
    failures = 0
    for name in names:
        try:
            fetch(name)
        except Exception as exc:  # noqa: BLE001 - best-effort downloads
            print(f"{name} failed: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
