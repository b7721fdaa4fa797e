"""Locations and retrieval of the published benchmark graphs.

Nothing in the library or the test suite requires these files; tests
that depend on them skip with a pointer here when the files are
missing. Downloads need outbound network access, which not every
environment has.
"""

from __future__ import annotations

import gzip
import os
import shutil
import urllib.request
from pathlib import Path

#: name -> (download URL, expected nodes, expected edges) after cleanup.
DATASETS: dict[str, tuple[str, int, int]] = {
    "gnutella": ("https://snap.stanford.edu/data/p2p-Gnutella05.txt.gz", 8846, 31839),
    "slashdot": ("https://snap.stanford.edu/data/soc-Slashdot0902.txt.gz", 82168, 948464),
    "wiki-talk": ("https://snap.stanford.edu/data/wiki-Talk.txt.gz", 2394385, 5021410),
    "amazon": ("https://snap.stanford.edu/data/amazon0312.txt.gz", 400727, 3200440),
}


def data_dir() -> Path:
    """Directory datasets are looked up in; override with QSDWALK_DATA."""
    env = os.environ.get("QSDWALK_DATA")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "data"


def dataset_path(name: str) -> Path:
    if name not in DATASETS:
        raise KeyError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}")
    url, _, _ = DATASETS[name]
    return data_dir() / Path(url).name.removesuffix(".gz")


def find_dataset(name: str) -> Path | None:
    """Path to a locally available dataset file, or None."""
    path = dataset_path(name)
    return path if path.is_file() else None


def fetch(name: str, dest: Path | None = None, overwrite: bool = False) -> Path:
    """Download and decompress one dataset.

    Returns the path of the extracted edge list. Needs outbound
    network access; inside an offline sandbox this raises URLError.
    """
    url, _, _ = DATASETS[name] if name in DATASETS else (None, 0, 0)
    if url is None:
        raise KeyError(f"unknown dataset {name!r}; known: {sorted(DATASETS)}")
    directory = dest or data_dir()
    directory.mkdir(parents=True, exist_ok=True)
    out = directory / Path(url).name.removesuffix(".gz")
    if out.exists() and not overwrite:
        return out
    archive = directory / Path(url).name
    urllib.request.urlretrieve(url, archive)
    with gzip.open(archive, "rb") as src, open(out, "wb") as dst:
        shutil.copyfileobj(src, dst)
    archive.unlink()
    return out
