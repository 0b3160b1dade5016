import numpy as np
import pytest

from levysmooth.spectral import Field, GridSpec, fourier_inverse


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def grid():
    return GridSpec(1, 20.0, 512)


@pytest.fixture(scope="session")
def big_grid():
    return GridSpec(1, 20.0, 4096)


def random_field(grid: GridSpec, rng: np.random.Generator) -> Field:
    """Complex white noise with the unpaired Nyquist mode projected out."""
    shape = (grid.n,) * grid.d
    spec = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    spec = np.where(grid.nyquist_mask(), 0.0, spec)
    return fourier_inverse(Field(grid, spec, "frequency"))


def gaussian_field(grid: GridSpec) -> Field:
    x = grid.x_points()
    if grid.d == 1:
        return Field(grid, np.exp(-x**2 / 2.0).astype(complex))
    r2 = np.sum(x**2, axis=-1)
    return Field(grid, np.exp(-r2 / 2.0).astype(complex))
