import os
from pathlib import Path

import pytest

from ihgnn.tud import load_dataset

TEST_DATA = Path(__file__).parent / "data"


def data_roots():
    """Directories searched for benchmark datasets, most specific first."""
    roots = []
    if os.environ.get("IHGNN_DATA_DIR"):
        roots.append(Path(os.environ["IHGNN_DATA_DIR"]))
    roots.append(TEST_DATA)
    return roots


def find_dataset(name):
    """Directory containing dataset ``name`` or ``None``."""
    for root in data_roots():
        for cand in (root / name, root):
            if (cand / f"{name}_A.txt").exists():
                return cand
    return None


@pytest.fixture(scope="session")
def mutag():
    return load_dataset(TEST_DATA, "MUTAG")
