"""
Pytest configuration file for wrightlevy
"""
import os
import sys
from decimal import Decimal
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pytest

# Package root must precede any wrightlevy import
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "../..")))

from wrightlevy.app.schemas.params import CbiParams, FamilyParams
from wrightlevy.app.schemas.sim import SimConfig
from wrightlevy.app.services.caching import invalidate_cache

ASSETS = Path(__file__).parent / "assets"


@pytest.fixture
def gamma_params() -> FamilyParams:
    """(alpha, gamma) = (1.5, 0): the reference member of the gamma family"""
    return FamilyParams(alpha=1.5, gamma=0.0)


@pytest.fixture
def delta_params() -> FamilyParams:
    """(alpha, delta) = (1.5, 0.8): negative mean, outside the m_kappa window"""
    return FamilyParams(alpha=1.5, delta=0.8)


@pytest.fixture
def window_params() -> FamilyParams:
    """(alpha, delta) = (1.5, 0.5): m_kappa = 0.5"""
    return FamilyParams(alpha=1.5, delta=0.5)


@pytest.fixture
def cbi_params() -> CbiParams:
    return CbiParams(kappa=0.5, delta=0.8)


@pytest.fixture
def branching_params() -> CbiParams:
    """Pure branching, no immigration"""
    return CbiParams(kappa=0.5, delta=0.0)


@pytest.fixture
def small_sim_config() -> SimConfig:
    """Short, coarse runs for the fast unit tests"""
    return SimConfig(n_paths=200, horizon=5.0, step=0.05, seed=7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def fresh_cache():
    invalidate_cache()
    yield
    invalidate_cache()


def _load_reference_values() -> List[Tuple[str, Tuple[float, ...], Decimal]]:
    rows = []
    for line in (ASSETS / "reference_values.txt").read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, args, value = (part.strip() for part in line.split("|"))
        parsed = tuple(float(a) for a in args.split(",")) if args else ()
        rows.append((name, parsed, Decimal(value)))
    return rows


@pytest.fixture(scope="session")
def reference_values() -> Dict[str, Tuple[Tuple[float, ...], Decimal]]:
    return {name: (args, value) for name, args, value in _load_reference_values()}
