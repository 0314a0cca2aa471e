"""Shared fixtures for the dq test suite."""

from pathlib import Path

import numpy as np
import pytest

from apps.dq_core.channels import BathModel
from apps.dq_core.concat import ConcatCode, default_concat_code
from apps.dq_core.dfs import CodeSpace, dfs_codewords_dephasing
from apps.dq_core.qecc import five_qubit_code

FIXTURES_DIR = Path(__file__).parent / "fixtures"
EXPECTED_DIR = FIXTURES_DIR / "expected"


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for randomized property tests."""
    return np.random.default_rng(20240601)


@pytest.fixture
def default_bath() -> BathModel:
    """Two-level spin bath: H_B = sigma_z, V_z = sigma_x, thermal at beta = 1."""
    return BathModel.default()


@pytest.fixture
def dephasing_code() -> CodeSpace:
    """Two-qubit f = 0 code {|01>, |10>}."""
    return dfs_codewords_dephasing(2)


@pytest.fixture(scope="session")
def perfect_code() -> CodeSpace:
    return five_qubit_code()


@pytest.fixture(scope="session")
def concat_code() -> ConcatCode:
    """Ten-qubit register: five 2-qubit DFS blocks under the 5-qubit code."""
    return default_concat_code()
