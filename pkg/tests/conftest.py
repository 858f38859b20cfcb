from pathlib import Path

import numpy as np
import pytest

from wignerlab import AlgebraDescriptor, ModuleDescriptor

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def desc21() -> AlgebraDescriptor:
    return AlgebraDescriptor((2, 1))


@pytest.fixture
def mdesc21(desc21) -> ModuleDescriptor:
    return ModuleDescriptor(desc21, 3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)
