import numpy as np
import pytest

from fraceig import (
    ConfigError,
    Domain,
    ExteriorDatum,
    Field,
    FractionalOrder,
    Grid,
    OperatorSpec,
    Problem,
    build_quadrature,
    directional_theta,
    make_direction_set,
    residual,
    solve_dirichlet,
)
from fraceig.datums import add, constant, gaussian, line_profile, plateau_bump

S = 0.75
ORDER = FractionalOrder(S)


def _ball_problem(datum, counts=16, M=8, s=S, kind="trace", rhs=0.0,
                  tail="zero_tail", T=30.0):
    order = FractionalOrder(s)
    dom = Domain.ball([0.0, 0.0], 1.0)
    grid = Grid(dom, (counts, counts))
    h = float(grid.h.max())
    q = build_quadrature(order, delta=4 * h, T=T, nodes_per_decade=16,
                         tail_mode=tail)
    return Problem(
        grid=grid,
        spec=OperatorSpec(kind, order),
        rhs=rhs,
        datum=datum,
        quadrature=q,
        directions=make_direction_set(2, M),
    )


def test_constant_datum_exact_fixed_point():
    prob = _ball_problem(constant(5.0), tail="constant_tail")
    rep = solve_dirichlet(prob, tol=1e-10)
    assert rep.converged
    assert rep.iterations <= 2
    assert rep.solution.interior_values == pytest.approx(5.0, abs=1e-9)


def test_residual_zero_for_constant():
    prob = _ball_problem(constant(2.0), tail="constant_tail")
    u = Field(prob.grid, np.full(prob.grid.n_interior, 2.0), prob.datum)
    r = residual(prob, u)
    assert np.abs(r).max() < 1e-12


def test_residual_nonzero_for_noise(rng):
    prob = _ball_problem(constant(0.0), tail="constant_tail")
    u = Field(prob.grid, rng.standard_normal(prob.grid.n_interior), prob.datum)
    assert np.abs(residual(prob, u)).max() > 1e-3


def test_kernel_matches_directional_theta(rng):
    datum = add(gaussian([0.5, -0.3], 1.0, 1.0), plateau_bump([2.0, 0.0], 1.0, 0.4))
    prob = _ball_problem(datum, counts=20, M=8)
    kernel = prob.kernel
    field = Field(prob.grid, rng.standard_normal(prob.grid.n_interior), datum)
    theta = kernel.theta_stack(field.values) * kernel.c_s
    nodes = prob.grid.interior_nodes()
    flat_idx = [tuple(i) for i in np.argwhere(prob.grid.interior_mask)]
    for pick in rng.choice(len(nodes), size=5, replace=False):
        x = nodes[pick]
        for j in (0, 3, 5):
            z = prob.directions.vectors[j]
            direct = directional_theta(field, x, z, prob.quadrature)
            fast = theta[(j,) + flat_idx[pick]]
            assert fast == pytest.approx(direct, rel=1e-10, abs=1e-12)


def test_interval_profile_recovery():
    # the 1-D constant-source profile solves (trace form) -Lambda_1 u = 1
    a = line_profile(S, 2.0)
    datum = ExteriorDatum(
        evaluate=lambda x: a(x[..., 0]), bound=float(a(np.zeros(1))[0]),
        far_value=0.0, far_radius=2.0,
    )
    dom = Domain.interval(-1.0, 1.0)
    grid = Grid(dom, (65,))
    h = float(grid.h.max())
    q = build_quadrature(ORDER, delta=2 * h, T=30.0, nodes_per_decade=32)
    prob = Problem(
        grid=grid,
        spec=OperatorSpec("trace", ORDER),
        rhs=1.0,
        datum=datum,
        quadrature=q,
        directions=make_direction_set(1, 2),
    )
    rep = solve_dirichlet(prob, tol=1e-8, max_iter=50000)
    assert rep.converged
    truth = a(grid.interior_nodes()[:, 0])
    err = np.abs(rep.solution.interior_values - truth).max()
    assert err < 5e-3 * truth.max()


def test_comparison_and_continuous_dependence(rng):
    g2 = add(gaussian([0.5, 0.5], 1.0, 0.8), constant(-0.2))
    g1 = add(g2, plateau_bump([1.5, 0.0], 1.0, 0.5))  # g1 >= g2
    tol = 1e-7
    u1 = solve_dirichlet(_ball_problem(g1), tol=tol).solution.interior_values
    u2 = solve_dirichlet(_ball_problem(g2), tol=tol).solution.interior_values
    assert np.all(u1 >= u2 - 10 * tol)
    pts = rng.uniform(-3, 3, size=(5000, 2))
    assert np.abs(u1 - u2).max() <= np.abs(g1(pts) - g2(pts)).max() + 10 * tol


def test_stability_bound():
    g = gaussian([0.3, 0.0], 0.8, 1.5)
    tol = 1e-8
    rep = solve_dirichlet(_ball_problem(g), tol=tol)
    assert np.abs(rep.solution.interior_values).max() <= g.bound + tol


def test_multi_start_unique_fixed_point():
    g = gaussian([0.4, -0.2], 1.0, 1.0)
    tol = 1e-8
    sols = [
        solve_dirichlet(_ball_problem(g), tol=tol, initial_guess=guess)
        for guess in (None, -1.0, 1.0)
    ]
    for rep in sols[1:]:
        gap = np.abs(sols[0].solution.interior_values
                     - rep.solution.interior_values).max()
        assert gap <= 10 * tol


def test_nonconvergence_reported_not_raised():
    prob = _ball_problem(gaussian([0.0, 0.0], 1.0, 1.0))
    rep = solve_dirichlet(prob, tol=0.0, max_iter=5)
    assert not rep.converged
    assert rep.iterations == 5
    assert len(rep.residual_history) == 5
    assert rep.final_residual > 0


def test_residual_history_decays():
    rep = solve_dirichlet(_ball_problem(gaussian([0.2, 0.1], 1.0, 1.0)), tol=1e-8)
    hist = np.asarray(rep.residual_history)
    # eventually monotone nonincreasing: check the last three quarters
    tail = hist[len(hist) // 4:]
    assert np.all(np.diff(tail) <= 1e-14)
    # geometric decay: a contraction factor strictly below 1
    rate = (tail[-1] / tail[0]) ** (1.0 / max(1, len(tail) - 1))
    assert rate < 1.0


def test_damping_validation_and_warning():
    prob = _ball_problem(constant(1.0), tail="constant_tail")
    with pytest.raises(ConfigError):
        solve_dirichlet(prob, damping=0.0)
    with pytest.raises(ConfigError):
        solve_dirichlet(prob, damping=1.2)
    with pytest.raises(ConfigError):
        solve_dirichlet(prob, tol=-1.0)
    with pytest.warns(UserWarning):
        _ball_problem(constant(1.0), s=0.4, tail="constant_tail")


def test_weighted_solve_matches_trace_for_unit_coefficients():
    g = gaussian([0.3, 0.2], 0.9, 1.0)
    tol = 1e-8
    u_tr = solve_dirichlet(_ball_problem(g, kind="trace"), tol=tol)
    dom = Domain.ball([0.0, 0.0], 1.0)
    grid = Grid(dom, (16, 16))
    h = float(grid.h.max())
    q = build_quadrature(ORDER, delta=4 * h, T=30.0, nodes_per_decade=16)
    prob_w = Problem(
        grid=grid,
        spec=OperatorSpec("weighted", ORDER, coefficients=(1.0, 1.0)),
        rhs=0.0,
        datum=g,
        quadrature=q,
        directions=make_direction_set(2, 8),
    )
    u_w = solve_dirichlet(prob_w, tol=tol)
    gap = np.abs(u_tr.solution.interior_values - u_w.solution.interior_values).max()
    assert gap <= 10 * tol


def test_pucci_solve_comparison(rng):
    # Pucci extremal problems are monotone too: ordered data, ordered solutions
    g2 = gaussian([0.2, -0.1], 1.0, 0.6)
    g1 = add(g2, plateau_bump([1.6, 0.4], 0.8, 0.3))
    tol = 1e-7
    sols = []
    for g in (g1, g2):
        dom = Domain.ball([0.0, 0.0], 1.0)
        grid = Grid(dom, (14, 14))
        h = float(grid.h.max())
        q = build_quadrature(ORDER, delta=4 * h, T=30.0, nodes_per_decade=16)
        prob = Problem(
            grid=grid,
            spec=OperatorSpec("pucci_plus", ORDER, pucci_low=1.0, pucci_high=2.0),
            rhs=0.0,
            datum=g,
            quadrature=q,
            directions=make_direction_set(2, 8),
        )
        sols.append(solve_dirichlet(prob, tol=tol))
    u1, u2 = (r.solution.interior_values for r in sols)
    assert np.all(u1 >= u2 - 10 * tol)


def test_box_domain_observational():
    # boxes are outside the smooth-domain hypotheses; the scheme still
    # converges and stays within the datum bounds (recorded, not assumed)
    g = gaussian([0.0, 0.0], 1.0, 1.0)
    dom = Domain.box([-1.0, -1.0], [1.0, 0.5])
    grid = Grid(dom, (18, 14))
    h = float(grid.h.max())
    q = build_quadrature(ORDER, delta=4 * h, T=30.0, nodes_per_decade=16)
    prob = Problem(
        grid=grid, spec=OperatorSpec("trace", ORDER), rhs=0.0, datum=g,
        quadrature=q, directions=make_direction_set(2, 8),
    )
    rep = solve_dirichlet(prob, tol=1e-7)
    assert rep.converged
    assert np.abs(rep.solution.interior_values).max() <= g.bound + 1e-7


def test_threads_do_not_change_result():
    g = gaussian([0.3, 0.1], 1.0, 1.0)
    dom = Domain.ball([0.0, 0.0], 1.0)
    grid = Grid(dom, (14, 14))
    h = float(grid.h.max())
    q = build_quadrature(ORDER, delta=4 * h, T=30.0, nodes_per_decade=16)

    def solve(threads):
        prob = Problem(
            grid=grid, spec=OperatorSpec("trace", ORDER), rhs=0.0, datum=g,
            quadrature=q, directions=make_direction_set(2, 8), threads=threads,
        )
        return solve_dirichlet(prob, tol=1e-8).solution.interior_values

    assert np.array_equal(solve(1), solve(4))


def test_n3_midrange_smoke():
    g = gaussian([0.0, 0.0, 0.0], 1.0, 1.0)
    dom = Domain.ball([0.0, 0.0, 0.0], 1.0)
    grid = Grid(dom, (9, 9, 9))
    h = float(grid.h.max())
    q = build_quadrature(ORDER, delta=4 * h, T=25.0, nodes_per_decade=8)
    prob = Problem(
        grid=grid, spec=OperatorSpec("midrange", ORDER), rhs=0.0, datum=g,
        quadrature=q, directions=make_direction_set(3, 4),
    )
    rep = solve_dirichlet(prob, tol=1e-6, max_iter=20000)
    assert rep.converged
    assert np.abs(rep.solution.interior_values).max() <= g.bound + 1e-6
