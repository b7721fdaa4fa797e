#!/usr/bin/env python3
"""Download the benchmark graphs used by the dataset-gated tests.

Needs outbound network access. Files land in ./data by default, or in
$QSDWALK_DATA when set; tests that depend on them skip when absent.

    python3 scripts/fetch_datasets.py             # everything
    python3 scripts/fetch_datasets.py gnutella    # just one
"""

import sys

from qsdwalk.datasets import DATASETS, data_dir, fetch


def main(argv):
    names = argv or sorted(DATASETS)
    unknown = [n for n in names if n not in DATASETS]
    if unknown:
        print(f"unknown dataset(s): {', '.join(unknown)}", file=sys.stderr)
        print(f"known: {', '.join(sorted(DATASETS))}", file=sys.stderr)
        return 2
    print(f"target directory: {data_dir()}")
    failures = 0
    for name in names:
        url, nodes, edges = DATASETS[name]
        print(f"{name}: {url}")
        try:
            path = fetch(name)
        except Exception as exc:
            print(f"  failed: {exc}", file=sys.stderr)
            failures += 1
            continue
        print(f"  -> {path} (expect about {nodes} nodes, {edges} edges)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
