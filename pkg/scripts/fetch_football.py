#!/usr/bin/env python3
"""Fetch the American college football network (Fall 2000 season) and write
it as data/football.txt in hyperrec edge-list format.

Needs network access. Sources tried in order:
  1. M. Newman's network data archive (football.zip with football.gml)
  2. the Netzschleuder archive CSV endpoint

The expected result is 115 teams and 613 games; the script warns loudly if
the downloaded data disagrees.
"""

import io
import re
import sys
import urllib.request
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "football.txt"

NEWMAN_URL = "http://www-personal.umich.edu/~mejn/netdata/football.zip"
NETZSCHLEUDER_URL = "https://networks.skewed.de/net/football/files/football.csv.zip"


def parse_gml_edges(text: str) -> tuple[list[str], list[tuple[int, int]]]:
    labels: dict[int, str] = {}
    for m in re.finditer(
            r"node\s*\[\s*id\s+(\d+)\s+label\s+\"([^\"]*)\"", text):
        labels[int(m.group(1))] = m.group(2)
    edges = [(int(a), int(b)) for a, b in re.findall(
        r"edge\s*\[\s*source\s+(\d+)\s+target\s+(\d+)", text)]
    ordered = sorted(labels)
    remap = {node: i for i, node in enumerate(ordered)}
    return ([labels[n] for n in ordered],
            [(remap[a], remap[b]) for a, b in edges])


def from_newman() -> tuple[list[str], list[tuple[int, int]]]:
    data = urllib.request.urlopen(NEWMAN_URL, timeout=60).read()
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        name = next(n for n in zf.namelist() if n.endswith("football.gml"))
        return parse_gml_edges(zf.read(name).decode("utf-8", "replace"))


def from_netzschleuder() -> tuple[list[str], list[tuple[int, int]]]:
    data = urllib.request.urlopen(NETZSCHLEUDER_URL, timeout=60).read()
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        edges_name = next(n for n in zf.namelist() if "edges" in n)
        rows = zf.read(edges_name).decode().splitlines()
        edges = []
        for row in rows:
            if row.startswith("#") or not row.strip():
                continue
            a, b = row.split(",")[:2]
            edges.append((int(a), int(b)))
        n = max(max(e) for e in edges) + 1
        return [str(i) for i in range(n)], edges


def main() -> int:
    for fetch in (from_newman, from_netzschleuder):
        try:
            labels, edges = fetch()
            break
        except Exception as exc:  # noqa: BLE001 - best-effort downloads
            print(f"{fetch.__name__} failed: {exc}", file=sys.stderr)
    else:
        print("all sources failed", file=sys.stderr)
        return 1
    dedup = set()
    for a, b in edges:
        if a != b:
            dedup.add((min(a, b), max(a, b)))
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        for a, b in sorted(dedup):
            la = labels[a].replace(" ", "_")
            lb = labels[b].replace(" ", "_")
            fh.write(f"{la} {lb}\n")
    n_nodes = len({x for e in dedup for x in e})
    print(f"wrote {OUT}: {n_nodes} teams, {len(dedup)} games")
    if (n_nodes, len(dedup)) != (115, 613):
        print("WARNING: expected 115 teams and 613 games; check the source",
              file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
