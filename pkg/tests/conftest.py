import numpy as np
import pytest

from sigcalc.tensor import TensorCoeffs, tables


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_tensor(rng, d, N, scale=0.5, complex_=True, zero_scalar=False):
    size = tables(d, N).size
    c = rng.normal(size=size) * scale
    if complex_:
        c = c + 1j * rng.normal(size=size) * scale
    out = TensorCoeffs(d, N, c)
    if zero_scalar:
        out[()] = 0.0
    return out


def random_path(rng, d, n_segments=4, scale=1.0):
    from sigcalc.signature import PiecewisePath

    times = np.sort(rng.uniform(0.0, 1.0, size=n_segments + 1))
    times[0] = 0.0
    points = rng.normal(size=(n_segments + 1, d)) * scale
    return PiecewisePath(times, points)
