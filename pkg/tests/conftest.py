import hypothesis
import numpy as np
import pytest

from obslab import spectra

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def table_m1():
    return spectra.solve_spectrum(spectra.Monomial(1), 40, 1e-6)


@pytest.fixture(scope="session")
def table_m2():
    return spectra.solve_spectrum(spectra.Monomial(2), 40, 1e-6)


@pytest.fixture(scope="session")
def table_m3():
    return spectra.solve_spectrum(spectra.Monomial(3), 40, 1e-6)


@pytest.fixture(scope="session")
def dyn_grid():
    return spectra.Grid(14.0, 2801)


@pytest.fixture(scope="session")
def dyn_table(dyn_grid):
    return spectra.hermite_table(80, dyn_grid)


@pytest.fixture(scope="session")
def scan_table():
    """Large Hermite basis able to carry coherent states up to k = 40."""
    modes = 1100
    X = max(40 + 10.0, (2 * modes) ** 0.5 + 8.0)
    h = min(0.0135, 2 * np.pi / (2 * modes) ** 0.5 / 10.0)
    grid = spectra.Grid(X, int(np.ceil(2 * X / h)) | 1)
    return spectra.hermite_table(modes, grid)
