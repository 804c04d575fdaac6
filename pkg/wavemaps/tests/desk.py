# wavemaps/tests/desk.py
"""Small grids and data shared by the numerical tests; each is built once per test process."""
from functools import lru_cache

import numpy as np

from wavemaps.distorted_fourier import enforce_nonresonance
from wavemaps.grids import FrequencyGrid, RadialField, RadialGrid
from wavemaps.linear_evolution import WaveState
from wavemaps.profile_builder import build_profiles
from wavemaps.spectral_core import build_table


@lru_cache(maxsize=None)
def radial_grid():
    return RadialGrid.graded(1e-3, 48.0, 24, 0.05)


@lru_cache(maxsize=None)
def freq_grid():
    return FrequencyGrid.dyadic(-3, 2, 16)


@lru_cache(maxsize=None)
def table():
    return build_table(freq_grid(), radial_grid())


def datum(amplitude=0.02, amplitude_t=0.01):
    grid = radial_grid()
    r = grid.nodes
    w0 = RadialField(grid, amplitude * r ** 4 * np.exp(-r ** 2), "gauge")
    w1 = RadialField(grid, amplitude_t * r ** 2 * (1 - r ** 2 / 2) * np.exp(-r ** 2), "gauge")
    return enforce_nonresonance(w0), enforce_nonresonance(w1)


def zero_datum():
    z = RadialField(radial_grid(), np.zeros(radial_grid().size), "gauge")
    return z, z


@lru_cache(maxsize=None)
def state():
    w0, w1 = datum()
    return WaveState.from_data(w0, w1, table())


PROFILE_TIMES = (4.0, 8.0, 16.0)


@lru_cache(maxsize=None)
def profiles():
    return build_profiles(state(), PROFILE_TIMES, consistency_tol=1e-3)
