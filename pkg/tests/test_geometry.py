import numpy as np
import pytest

from fraceig import Domain, ExteriorDatum, Field, Grid, sample_extended, signed_distance
from fraceig.datums import gaussian, plateau_bump


def test_signed_distance_ball():
    ball = Domain.ball([0.0, 0.0], 1.0)
    assert signed_distance(ball, np.zeros(2)) == pytest.approx(-1.0)
    on_sphere = np.array([np.cos(0.4), np.sin(0.4)])
    assert signed_distance(ball, on_sphere) == pytest.approx(0.0, abs=1e-15)
    assert signed_distance(ball, np.array([2.0, 0.0])) == pytest.approx(1.0)


def test_signed_distance_box():
    box = Domain.box([0.0, 0.0], [2.0, 1.0])
    assert signed_distance(box, np.array([3.0, 0.5])) == pytest.approx(1.0)
    assert signed_distance(box, np.array([1.0, 0.5])) == pytest.approx(-0.5)
    # corner region: Euclidean distance to the corner
    assert signed_distance(box, np.array([3.0, 2.0])) == pytest.approx(np.sqrt(2.0))


def test_signed_distance_interval():
    seg = Domain.interval(-1.0, 2.0)
    assert signed_distance(seg, np.array([0.5])) == pytest.approx(-1.5)
    assert signed_distance(seg, np.array([3.0])) == pytest.approx(1.0)
    assert signed_distance(seg, np.array([-1.0])) == pytest.approx(0.0)


def test_signed_distance_lipschitz(rng):
    for dom in (Domain.ball([0.3, -0.2], 0.8), Domain.box([-1.0, 0.0], [1.0, 2.0])):
        x = rng.uniform(-3, 3, size=(200, 2))
        y = rng.uniform(-3, 3, size=(200, 2))
        gap = np.abs(dom.signed_distance(x) - dom.signed_distance(y))
        assert np.all(gap <= np.linalg.norm(x - y, axis=-1) * (1 + 1e-12) + 1e-12)


def test_grid_nodes_reproducible():
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (17, 17))
    for a in range(2):
        again = grid.lo[a] + np.arange(grid.counts[a]) * grid.h[a]
        assert np.array_equal(grid.axes[a], again)
    assert np.all(grid.h > 0)


def test_grid_interior_strictly_inside():
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (21, 21))
    sd = grid.domain.signed_distance(grid.interior_nodes())
    assert np.all(sd < 0)
    assert 0 < grid.n_interior < np.prod(grid.shape)


def _constant_field(c, counts=9):
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (counts, counts))
    return Field.from_datum(grid, ExteriorDatum.constant(c))


def test_sample_extended_constant():
    f = _constant_field(3.5)
    pts = np.array([[0.0, 0.0], [0.3, 0.1], [0.9, 0.0], [2.0, 2.0]])
    assert sample_extended(f, pts) == pytest.approx([3.5] * 4, abs=1e-14)


def test_sample_extended_reproduces_nodes():
    datum = gaussian([0.0, 0.0], 1.0, 1.0)
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (15, 15))
    f = Field.from_datum(grid, datum)
    nodes = grid.interior_nodes()
    vals = sample_extended(f, nodes)
    assert vals == pytest.approx(f.interior_values, rel=1e-12, abs=1e-13)


def test_sample_extended_outside_is_datum():
    datum = gaussian([0.0, 0.0], 1.0, 2.0)
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (15, 15))
    f = Field.from_datum(grid, datum)
    pts = np.array([[1.5, 0.2], [0.0, -3.0]])
    assert sample_extended(f, pts) == pytest.approx(datum(pts), abs=0.0)
    # boundary points carry the datum too
    on_sphere = np.array([1.0, 0.0])
    assert sample_extended(f, on_sphere) == pytest.approx(float(datum(on_sphere)))


def test_affine_reproduction_interior():
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (33, 33))
    affine = lambda x: 0.7 * x[..., 0] - 1.3 * x[..., 1] + 0.25
    datum = ExteriorDatum(evaluate=affine, bound=10.0)
    f = Field.from_datum(grid, datum)
    # query points whose stencil is fully interior: stay well inside
    pts = np.array([[0.11, 0.07], [-0.33, 0.21], [0.402, -0.017]])
    assert sample_extended(f, pts) == pytest.approx(affine(pts), abs=1e-13)


def test_monotonicity_of_sampling(rng):
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (15, 15))
    low = gaussian([0.2, 0.0], 1.0, 1.0)
    bump = plateau_bump([0.0, 0.0], 4.0, 0.5)
    from fraceig.datums import add

    high = add(low, bump)  # high >= low everywhere
    f_low = Field.from_datum(grid, low)
    f_high = Field.from_datum(grid, high)
    pts = rng.uniform(-2.0, 2.0, size=(300, 2))
    assert np.all(sample_extended(f_low, pts) <= sample_extended(f_high, pts) + 1e-14)


def test_interpolation_weights_partition_of_unity(rng):
    f = _constant_field(1.0, counts=13)
    pts = rng.uniform(-0.7, 0.7, size=(500, 2))
    assert sample_extended(f, pts) == pytest.approx(np.ones(500), abs=1e-15)


def test_field_requires_matching_interior_count():
    grid = Grid(Domain.ball([0.0, 0.0], 1.0), (9, 9))
    with pytest.raises(ValueError):
        Field(grid, np.zeros(grid.n_interior + 1), ExteriorDatum.constant(0.0))


def test_3d_field_roundtrip():
    grid = Grid(Domain.ball([0.0, 0.0, 0.0], 1.0), (9, 9, 9))
    datum = gaussian([0.0, 0.0, 0.0], 1.0, 1.0)
    f = Field.from_datum(grid, datum)
    nodes = grid.interior_nodes()[:10]
    assert sample_extended(f, nodes) == pytest.approx(datum(nodes), rel=1e-12, abs=1e-13)
    # mid-cell interpolation error is O(h^2) with h = 0.25 here
    mid = np.array([0.05, 0.033, -0.021])
    assert float(sample_extended(f, mid)) == pytest.approx(float(datum(mid)), abs=0.05)


def test_exterior_datum_far_value_requires_radius():
    with pytest.raises(ValueError):
        ExteriorDatum(evaluate=lambda x: np.zeros(x.shape[:-1]), bound=1.0,
                      far_value=0.0, far_radius=np.inf)
    with pytest.raises(ValueError):
        ExteriorDatum(evaluate=lambda x: np.zeros(x.shape[:-1]), bound=np.inf)
