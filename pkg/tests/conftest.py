import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20231015)


def gaussian_grid_pool(means, sigma=1.0, lo=-12.0, hi=14.0, n=26001):
    """Dense 1-D grid pool of Gaussian log-densities, one column per mean."""
    from mmfusion.pooling import DiscretePool

    x = np.linspace(lo, hi, n)
    dx = x[1] - x[0]
    cols = [-0.5 * np.log(2 * np.pi * sigma**2) - (x - m) ** 2 / (2 * sigma**2) for m in means]
    pts = np.column_stack([x, np.zeros_like(x), np.zeros_like(x)])
    return DiscretePool(np.column_stack(cols), None, dx, pts)
