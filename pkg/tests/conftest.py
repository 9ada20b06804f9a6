import json
from pathlib import Path

import numpy as np
import pytest

from inhibnet.network import NetworkSpec

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def load_network(name: str) -> NetworkSpec:
    raw = json.loads((CONFIGS / f"{name}.json").read_text())["network"]
    return NetworkSpec.from_arrays(raw["alpha"], raw["beta"], raw["H"])


@pytest.fixture(scope="session")
def R():
    return NetworkSpec.homogeneous(3, 0.5, 1.5, 0.1)


@pytest.fixture(scope="session")
def Rg():
    """The reference network with a fixed seeded 1e-3 perturbation of H."""
    return load_network("generic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
