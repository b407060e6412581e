import numpy as np
import pytest

from besselhardy import Grid, WeightedMeasure


@pytest.fixture(scope="session")
def m_half() -> WeightedMeasure:
    return WeightedMeasure(0.5)


@pytest.fixture(scope="session")
def grid_half(m_half) -> Grid:
    """Workhorse grid for alpha = 1/2 semigroup tests."""
    breaks = [k / 2 for k in range(1, 9)]
    return Grid.build(m_half, 420, 24.0, 80.0, breakpoints=breaks)


def fit_slope(xs, ys) -> float:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    a = np.vstack([xs, np.ones_like(xs)]).T
    sol, *_ = np.linalg.lstsq(a, ys, rcond=None)
    return float(sol[0])
