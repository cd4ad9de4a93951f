#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Shared fixtures for the test suite
"""

import numpy as np
import pytest

import spatial_dopo as spatial
from models.mode_model import ModeGrid
from models.optics_model import DopoParams, SpatialParams


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Temporary output directory picked up by experiment configs"""
    monkeypatch.setenv("NCSQ_OUTPUT_DIR", str(tmp_path))
    return tmp_path


@pytest.fixture(scope="session")
def mode_grid():
    return ModeGrid(half_width=6.0, n_points=301)


@pytest.fixture
def dopo_params():
    """Twice above threshold with a weak nonlinearity"""
    return DopoParams.from_sigma(2.0, 1e-6)


@pytest.fixture(scope="session")
def spatial_params():
    return SpatialParams()


@pytest.fixture(scope="session")
def stripe_pattern(spatial_params):
    """Centred stripe pattern with its eigensystem"""
    pattern = spatial.pattern_solve(spatial_params, "stripe")
    return spatial.solve_eigensystem(spatial_params, pattern)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
