import itertools

import numpy as np
import pytest

from fraceig import (
    ConfigError,
    ExteriorDatum,
    Field,
    FractionalOrder,
    OperatorSpec,
    build_quadrature,
    evaluate,
    make_direction_set,
    make_subspace_set,
    pucci_combination,
)
from fraceig.datums import add, gaussian, plateau_bump, profile_saddle, scale
from tests.conftest import tiny_origin_field

S = 0.75
ORDER = FractionalOrder(S)


def _quad(**kw):
    base = dict(delta=0.3, T=12.0, nodes_per_decade=16)
    base.update(kw)
    return build_quadrature(ORDER, **base)


ALL_SPECS = [
    OperatorSpec("trace", ORDER),
    OperatorSpec("midrange", ORDER),
    OperatorSpec("weighted", ORDER, coefficients=(1.0, 2.0)),
    OperatorSpec("pucci_plus", ORDER, pucci_low=1.0, pucci_high=3.0),
    OperatorSpec("pucci_minus", ORDER, pucci_low=1.0, pucci_high=3.0),
    OperatorSpec("classical_mean", ORDER),
]


def test_constant_field_all_kinds_zero():
    f = tiny_origin_field(ExteriorDatum.constant(7.0))
    dirs = make_direction_set(2, 8)
    q = _quad(tail_mode="constant_tail")
    for spec in ALL_SPECS:
        ev = evaluate(spec, f, np.zeros(2), dirs, q=q)
        assert ev.lambdas == pytest.approx([0.0, 0.0], abs=0.0)
        assert ev.operator_value == 0.0


def test_saddle_trace_is_zero_with_axis_witnesses():
    datum = profile_saddle(S, 2.0)
    f = tiny_origin_field(datum)
    dirs = make_direction_set(2, 64)
    q = _quad(T=16.0)
    ev = evaluate(OperatorSpec("trace", ORDER), f, np.zeros(2), dirs, q=q)
    # Lambda_1 ~ -1 (witness on the y axis), Lambda_2 ~ +1 (x axis)
    assert ev.lambdas[0] == pytest.approx(-1.0, abs=0.02)
    assert ev.lambdas[1] == pytest.approx(1.0, abs=0.02)
    assert ev.operator_value == pytest.approx(0.0, abs=0.04)
    assert np.allclose(ev.witnesses[1], [1.0, 0.0], atol=1e-12)
    assert np.allclose(ev.witnesses[0], [0.0, 1.0], atol=1e-12)


def test_midrange_is_half_trace_in_2d(rng):
    dirs = make_direction_set(2, 16)
    q = _quad()
    for _ in range(10):
        center = rng.uniform(-1.0, 1.0, size=2)
        datum = gaussian(center, rng.uniform(0.5, 1.5), rng.uniform(-2.0, 2.0))
        f = tiny_origin_field(datum)
        f = Field(f.grid, rng.standard_normal(f.grid.n_interior) + f.interior_values,
                  datum)
        x = np.zeros(2)
        tr = evaluate(OperatorSpec("trace", ORDER), f, x, dirs, q=q)
        mid = evaluate(OperatorSpec("midrange", ORDER), f, x, dirs, q=q)
        assert mid.operator_value == pytest.approx(0.5 * tr.operator_value,
                                                   abs=1e-12)


def test_pucci_trivial_cases():
    assert pucci_combination(np.zeros(3), 1.0, 2.0, "+") == 0.0
    assert pucci_combination(np.zeros(3), 1.0, 2.0, "-") == 0.0
    lam = np.array([-0.3, 1.7, 0.4])
    assert pucci_combination(lam, 1.0, 1.0, "+") == pytest.approx(lam.sum())
    assert pucci_combination(lam, 1.0, 1.0, "-") == pytest.approx(lam.sum())


def test_pucci_derived_example_and_corner_oracle():
    lam = np.array([-1.0, 2.0])
    assert pucci_combination(lam, 1.0, 3.0, "+") == pytest.approx(5.0)
    assert pucci_combination(lam, 1.0, 3.0, "-") == pytest.approx(-1.0)
    # brute-force sup/inf of sum a_k Lambda_k over the coefficient box corners
    corners = [np.array(c) for c in itertools.product([1.0, 3.0], repeat=2)]
    vals = [float(a @ lam) for a in corners]
    assert max(vals) == pytest.approx(5.0)
    assert min(vals) == pytest.approx(-1.0)


def test_pucci_domain_errors():
    with pytest.raises(ValueError):
        pucci_combination(np.array([1.0]), 3.0, 1.0, "+")
    with pytest.raises(ValueError):
        pucci_combination(np.array([1.0]), 1.0, 3.0, "*")
    with pytest.raises(ConfigError):
        OperatorSpec("pucci_plus", ORDER, pucci_low=3.0, pucci_high=1.0)


def test_pucci_sandwich_random(rng):
    for _ in range(20):
        lam = rng.normal(size=3)
        lo, hi = sorted(rng.uniform(0.5, 4.0, size=2))
        p_plus = pucci_combination(lam, lo, hi, "+")
        p_minus = pucci_combination(lam, lo, hi, "-")
        for _ in range(20):
            a = rng.uniform(lo, hi, size=3)
            val = float(a @ lam)
            assert p_minus - 1e-12 <= val <= p_plus + 1e-12


def test_weighted_coefficient_validation():
    with pytest.raises(ConfigError):
        OperatorSpec("weighted", ORDER, coefficients=(0.0, 1.0))
    with pytest.raises(ConfigError):
        OperatorSpec("weighted", ORDER, coefficients=(1.0, -0.5, 1.0))
    with pytest.raises(ConfigError):
        OperatorSpec("weighted", ORDER)
    with pytest.raises(ConfigError):
        OperatorSpec("hessian", ORDER)
    # middle coefficient may vanish
    OperatorSpec("weighted", ORDER, coefficients=(1.0, 0.0, 2.0))


def test_positive_homogeneity_all_kinds(rng):
    datum = add(gaussian([0.4, -0.1], 0.9, 1.3), plateau_bump([1.0, 1.0], 1.0, 0.5))
    f = tiny_origin_field(datum)
    dirs = make_direction_set(2, 16)
    q = _quad()
    k = 3.7
    fk = Field(f.grid, k * f.interior_values, scale(datum, k))
    for spec in ALL_SPECS:
        base = evaluate(spec, f, np.zeros(2), dirs, q=q)
        scaled = evaluate(spec, fk, np.zeros(2), dirs, q=q)
        assert scaled.operator_value == pytest.approx(k * base.operator_value,
                                                      rel=1e-10, abs=1e-10)
        assert scaled.lambdas == pytest.approx(k * base.lambdas, rel=1e-10,
                                               abs=1e-10)


def test_negative_homogeneity_value_only():
    datum = gaussian([0.4, -0.1], 0.9, 1.3)
    f = tiny_origin_field(datum)
    dirs = make_direction_set(2, 16)
    q = _quad()
    k = -2.0
    fk = Field(f.grid, k * f.interior_values, scale(datum, k))
    for kind in ("trace", "midrange"):
        base = evaluate(OperatorSpec(kind, ORDER), f, np.zeros(2), dirs, q=q)
        flipped = evaluate(OperatorSpec(kind, ORDER), fk, np.zeros(2), dirs, q=q)
        # min and max witnesses swap; the value still scales by k
        assert flipped.operator_value == pytest.approx(k * base.operator_value,
                                                       rel=1e-10, abs=1e-12)


def test_degenerate_ellipticity_touching_point():
    low = gaussian([0.4, 0.2], 0.7, 1.0)
    high = add(low, plateau_bump([1.5, 1.5], 1.0, 0.7))  # equal at the origin
    f_low = tiny_origin_field(low)
    f_high = tiny_origin_field(high)
    dirs = make_direction_set(2, 16)
    q = _quad()
    lo_tr = evaluate(OperatorSpec("trace", ORDER), f_low, np.zeros(2), dirs, q=q)
    hi_tr = evaluate(OperatorSpec("trace", ORDER), f_high, np.zeros(2), dirs, q=q)
    assert np.all(lo_tr.lambdas <= hi_tr.lambdas + 1e-13)
    assert lo_tr.operator_value >= hi_tr.operator_value - 1e-13


def test_classical_mean_consistency():
    datum = gaussian([0.0, 0.0], 1.0, 1.0)  # radially symmetric
    f = tiny_origin_field(datum)
    dirs = make_direction_set(2, 16)
    q = _quad()
    ev = evaluate(OperatorSpec("classical_mean", ORDER), f, np.zeros(2), dirs, q=q)
    from fraceig.quad1d import directional_theta

    thetas = np.array(
        [directional_theta(f, np.zeros(2), z, q) for z in dirs.vectors]
    )
    assert ev.operator_value == pytest.approx(-thetas.mean(), abs=1e-14)
    # radial symmetry at the center: every direction agrees
    assert np.ptp(thetas) < 1e-10
    assert ev.operator_value == pytest.approx(-thetas[0], abs=1e-10)


def test_lambda_ordering_random_fields(rng):
    dirs = make_direction_set(2, 12)
    q = _quad()
    for _ in range(20):
        datum = gaussian(rng.uniform(-1, 1, 2), rng.uniform(0.6, 1.4),
                         rng.uniform(-2, 2))
        f = tiny_origin_field(datum)
        f = Field(f.grid, f.interior_values + rng.standard_normal(f.grid.n_interior),
                  datum)
        ev = evaluate(OperatorSpec("trace", ORDER), f, np.zeros(2), dirs, q=q)
        assert np.all(np.diff(ev.lambdas) >= -1e-14)


def test_n3_trace_needs_subspaces():
    datum = gaussian([0.0, 0.0, 0.0], 1.0, 1.0)
    f = tiny_origin_field(datum, N=3, counts=9)
    dirs = make_direction_set(3, 6)
    q = _quad()
    with pytest.raises(ConfigError):
        evaluate(OperatorSpec("trace", ORDER), f, np.zeros(3), dirs, q=q)
    # midrange needs only the extremes: no subspace set required
    ev = evaluate(OperatorSpec("midrange", ORDER), f, np.zeros(3), dirs, q=q)
    assert ev.lambdas.shape == (2,)


def test_n3_ordering_with_subspaces():
    A = np.diag([0.5, 1.0, 2.5])
    from fraceig.datums import quadratic_form

    datum = quadratic_form(A, inner=1.0, outer=2.0)
    f = tiny_origin_field(datum, N=3, radius=1e-3, counts=5)
    dirs = make_direction_set(3, 8)
    subs = make_subspace_set(8, 8)
    q = build_quadrature(ORDER, delta=2e-3, T=20.0, nodes_per_decade=32,
                         tail_mode="constant_tail")
    ev = evaluate(OperatorSpec("trace", ORDER), f, np.zeros(3), dirs, subs, q)
    assert np.all(np.diff(ev.lambdas) >= -1e-14)
    assert ev.witnesses.shape == (3, 3)


def test_rotation_equivariance_quarter_turn():
    # quarter turns map the M=16 direction set to itself; rotating the
    # input function leaves every eigenvalue unchanged
    datum = add(gaussian([0.5, 0.1], 0.8, 1.0), gaussian([-0.2, 0.6], 1.1, -0.7))
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    datum_rot = ExteriorDatum(
        evaluate=lambda x: datum(x @ rot),  # (R^T x) rows: function rotated
        bound=datum.bound,
    )
    f = tiny_origin_field(datum)
    f_rot = tiny_origin_field(datum_rot)
    dirs = make_direction_set(2, 16)
    q = _quad()
    ev = evaluate(OperatorSpec("trace", ORDER), f, np.zeros(2), dirs, q=q)
    ev_rot = evaluate(OperatorSpec("trace", ORDER), f_rot, np.zeros(2), dirs, q=q)
    assert ev_rot.lambdas == pytest.approx(ev.lambdas, abs=1e-10)
