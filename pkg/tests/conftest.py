"""Shared fixtures; the package modules import each other by bare name from src/"""
import os
import sys

import numpy as np
import pytest

SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src')
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from systems import builtin  # noqa: E402


@pytest.fixture
def particle():
    return builtin('particle-r3-linear').definition


@pytest.fixture
def disk_harmonic():
    return builtin('disk-harmonic').definition


@pytest.fixture
def disk_linear():
    return builtin('disk-linear').definition


@pytest.fixture
def disk_free():
    return builtin('disk-free').definition


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
