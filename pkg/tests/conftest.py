import math

import numpy as np
import pytest

from scripts.circle_sets import build_cantor_set
from scripts.harmonic_measure import WosConfig
from scripts.majorants import named_majorant


@pytest.fixture(autouse=True)
def _run_in_tmp(tmp_path, monkeypatch):
    # log files and default output directories land in the test's tmp dir
    monkeypatch.chdir(tmp_path)


@pytest.fixture(scope='session')
def sqrt_h():
    return named_majorant('sqrt')


@pytest.fixture(scope='session')
def x_log_h():
    return named_majorant('x_log')


@pytest.fixture(scope='session')
def depth4_set(sqrt_h):
    return build_cantor_set(sqrt_h, math.pi, 4)


@pytest.fixture
def small_wos():
    return WosConfig(eps_shell=1e-4, samples=4000, seed=11, block_size=1000)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))
