import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

SAMPLE = Path(__file__).resolve().parents[1] / "data" / "sample"


@pytest.fixture
def sample_dir():
    return SAMPLE


@pytest.fixture
def sample_dataset():
    return SAMPLE / "dataset.jsonl"
