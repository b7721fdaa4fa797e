from pathlib import Path

import pytest

from qsdwalk.datasets import find_dataset

DATA = Path(__file__).parent / "data"


def require_dataset(name: str) -> Path:
    path = find_dataset(name)
    if path is None:
        pytest.skip(
            f"dataset {name!r} not present; run scripts/fetch_datasets.py"
        )
    return path


@pytest.fixture
def tiny_path() -> Path:
    return DATA / "tiny.txt"
