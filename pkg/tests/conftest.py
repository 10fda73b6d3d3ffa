import numpy as np
import pytest

from fraceig import Domain, Field, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(108331)


def tiny_origin_field(datum, N=2, radius=0.2, counts=17):
    """Field on a small ball at the origin; quadrature samples beyond the
    near radius are all datum-backed (no interpolation error)."""
    dom = Domain.ball(np.zeros(N), radius)
    grid = Grid(dom, (counts,) * N)
    return Field.from_datum(grid, datum)
