import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import fixturegen  # noqa: E402
from sieveqa.corpus import load_dataset  # noqa: E402
from sieveqa.kernels import warmup  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the jitted kernels up front so acceptance runtime limits
    # measure steady-state speed, not compilation
    warmup()


@pytest.fixture(scope="session")
def bundled_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def bundled_dataset():
    return load_dataset(DATA_DIR / "items.jsonl", DATA_DIR / "documents.jsonl")


@pytest.fixture(scope="session")
def planted_dataset():
    return fixturegen.planted_dataset()


@pytest.fixture(scope="session")
def adversarial_dataset():
    return fixturegen.adversarial_dataset()
