"""Monotone damped fixed-point solver for the nonlocal Dirichlet problem.

The iteration is

    u_{m+1}(x) = u_m(x) + tau * R(x) / W,

with R the equation-form residual sum_i a_i Lambda_i u - f and W the
maximal total quadrature weight over directions (2 sum w_k + tail mass,
times the coefficient sum, times c(s)).  Because every quadrature weight
is nonnegative and W dominates the diagonal, each update is a damped
convex combination of extended-field values: the sweep is monotone in
the current iterate and in the datum, which is what the discrete
comparison principle rests on.

Sweeps are Jacobi-style (simultaneous): every node update reads the same
immutable iterate, so results are order-independent and reproducible.

The per-sweep work is done by a precomputed stencil kernel: for a grid
node x and a quadrature offset t_k z, the interpolation stencil of
x + t_k z is the same integer shift and corner weights for every node,
so each (direction, node, sign) term is a handful of shifted-array
multiply-adds over the whole grid, masked to the nodes whose query point
lies strictly inside the domain (queries outside take exact datum
values, accumulated once at setup).  The kernel evaluates exactly the
same sums as :func:`fraceig.quad1d.directional_theta`, just batched.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .directions import DirectionSet, SubspaceSet
from .errors import ConfigError, NumericalError
from .geometry import BOUNDARY_TOL, ExteriorDatum, Field, Grid
from .operators import OperatorSpec, reduce_lambdas
from .quad1d import LineQuadrature
from .special import cs_constant

__all__ = ["Problem", "SolveReport", "residual", "solve_dirichlet"]


@dataclass
class Problem:
    """A nonlocal Dirichlet problem on a grid.

    ``rhs`` is the right-hand side of the posed problem in the operator's
    own form (see :class:`~fraceig.operators.OperatorSpec`); it may be a
    constant or a callable on (..., N) interior points.
    """

    grid: Grid
    spec: OperatorSpec
    rhs: Union[float, Callable[[np.ndarray], np.ndarray]]
    datum: ExteriorDatum
    quadrature: LineQuadrature
    directions: DirectionSet
    subspaces: Optional[SubspaceSet] = None
    threads: int = 1
    _kernel: Optional["_SweepKernel"] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        N = self.grid.dimension
        if self.directions.dimension != N:
            raise ConfigError("direction set dimension does not match the grid")
        if self.spec.requires_subspaces(N) and self.subspaces is None:
            raise ConfigError(
                f"operator {self.spec.kind!r} in N=3 requires a subspace set"
            )
        self.spec.dimension_coefficients(N)  # validates coefficient count
        if not self.spec.order.strict_band:
            warnings.warn(
                f"s={self.spec.s} is outside (1/2, 1): interior evaluation "
                "proceeds, but continuity of the solution up to the boundary "
                "is only guaranteed on the strict band",
                stacklevel=2,
            )

    @property
    def kernel(self) -> "_SweepKernel":
        if self._kernel is None:
            self._kernel = _SweepKernel(self)
        return self._kernel

    def rhs_equation_values(self) -> np.ndarray:
        """Equation-form rhs sampled at interior nodes."""
        pts = self.grid.interior_nodes()
        if callable(self.rhs):
            f = np.asarray(self.rhs(pts), dtype=float)
            f = np.broadcast_to(f, (pts.shape[0],)).astype(float)
        else:
            f = np.full(pts.shape[0], float(self.rhs))
        if not np.all(np.isfinite(f)):
            raise ConfigError("right-hand side is not finite on the grid")
        return self.spec.rhs_to_equation(f)

    def field(self, interior_values) -> Field:
        return Field(self.grid, interior_values, self.datum)


@dataclass
class SolveReport:
    """Outcome of a fixed-point solve."""

    solution: Field
    iterations: int
    residual_history: List[float]
    final_residual: float
    damping: float
    wall_time: float
    converged: bool
    tolerance: float


class _Term:
    """One (t_k, sign) interpolation stencil shared by every grid node."""

    __slots__ = ("target", "corners", "mask")

    def __init__(self, target, corners, mask):
        self.target = target  # tuple of slices into the full grid
        self.corners = corners  # list of (slices, combined weight)
        self.mask = mask  # float32 0/1 over the target slab


class _SweepKernel:
    """Precomputed per-direction stencils, datum vectors and masks."""

    def __init__(self, problem: Problem):
        grid = problem.grid
        domain = grid.domain
        q = problem.quadrature
        self.problem = problem
        self.c_s = cs_constant(problem.spec.order)
        self.shape = grid.shape
        self.N = grid.dimension
        self.interior = grid.interior_mask
        self.interior_idx = np.nonzero(self.interior)
        self.n_plain = len(problem.directions)

        vectors = problem.directions.vectors
        if self.N == 3 and problem.subspaces is not None:
            vectors = np.concatenate([vectors, problem.subspaces.all_vectors], axis=0)
        self.vectors = vectors

        self.mass = q.total_mass
        tail_term = 0.0
        if q.tail_mode == "constant_tail":
            datum = problem.datum
            if datum.far_value is None:
                raise ConfigError("constant_tail requires a datum with far_value")
            pts = grid.interior_nodes()
            reach = np.linalg.norm(pts, axis=-1).max() + datum.far_radius
            lo, hi = domain.bounding_box()
            center = 0.5 * (lo + hi)
            exit_bound = (
                np.linalg.norm(pts - center, axis=-1).max()
                + 0.5 * np.linalg.norm(hi - lo)
            )
            if q.T < max(reach, exit_bound):
                raise ConfigError(
                    f"T={q.T} does not reach the constant-datum zone from every "
                    "interior node; increase T or use zero_tail"
                )
            tail_term = q.tail_weight * datum.far_value

        nodes_int = grid.interior_nodes()
        reach_bound = domain.diameter
        self.terms: List[List[_Term]] = []
        self.datum_vec = np.zeros((len(vectors),) + grid.shape)
        counts = np.array(grid.shape)

        for j, z in enumerate(vectors):
            dir_terms: List[_Term] = []
            dvec_int = np.full(nodes_int.shape[0], tail_term)
            for t_k, w_k in zip(q.nodes, q.weights):
                for sign in (1.0, -1.0):
                    offset = sign * t_k * z
                    interp_nodes = None
                    if t_k <= reach_bound:
                        term = self._build_term(grid, domain, offset, w_k, counts)
                        if term is not None:
                            term_obj, covered = term
                            dir_terms.append(term_obj)
                            interp_nodes = covered
                    # datum side: interior nodes whose query is not interpolated
                    pts = nodes_int + offset
                    if interp_nodes is None:
                        need = np.ones(pts.shape[0], dtype=bool)
                    else:
                        need = ~interp_nodes
                    if np.any(need):
                        dvec_int[need] += w_k * problem.datum(pts[need])
            self.terms.append(dir_terms)
            self.datum_vec[j][self.interior_idx] = dvec_int

    def _build_term(self, grid: Grid, domain, offset, w_k, counts):
        """Stencil for one offset; returns (term, covered-interior-bool) or None."""
        o = offset / grid.h
        base = np.floor(o).astype(np.intp)
        frac = o - base
        lo_i = np.maximum(0, -base)
        hi_i = np.minimum(counts - 1, counts - 2 - base)  # inclusive
        if np.any(lo_i > hi_i):
            return None
        target = tuple(slice(int(a), int(b) + 1) for a, b in zip(lo_i, hi_i))
        slab_nodes = grid.nodes()[target]
        inside = domain.contains(slab_nodes + offset)
        if not np.any(inside & self.interior[target]):
            return None
        corners = []
        for corner in range(2 ** self.N):
            w = w_k
            src = []
            for a in range(self.N):
                bit = (corner >> a) & 1
                w = w * (frac[a] if bit else 1.0 - frac[a])
                lo = int(lo_i[a] + base[a] + bit)
                src.append(slice(lo, lo + int(hi_i[a] - lo_i[a]) + 1))
            if w != 0.0:
                corners.append((tuple(src), w))
        term = _Term(target, corners, inside.astype(np.float32))
        covered = np.zeros(grid.shape, dtype=bool)
        covered[target] = inside
        return term, covered[self.interior_idx]

    def _theta_one(self, j: int, values: np.ndarray) -> np.ndarray:
        acc = self.datum_vec[j] - self.mass * values
        for term in self.terms[j]:
            v = None
            for src, w in term.corners:
                v = w * values[src] if v is None else v + w * values[src]
            acc[term.target] += term.mask * v
        return acc

    def theta_stack(self, values: np.ndarray) -> np.ndarray:
        """Unscaled Theta for every direction; multiply by c(s) for physics."""
        n = len(self.vectors)
        threads = max(1, int(self.problem.threads))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(lambda j: self._theta_one(j, values), range(n)))
            return np.stack(rows)
        out = np.empty((n,) + tuple(self.shape))
        for j in range(n):
            out[j] = self._theta_one(j, values)
        return out

    def equation_values(self, values: np.ndarray) -> np.ndarray:
        """Equation-form operator values at interior nodes."""
        theta = self.theta_stack(values)
        eff_n = 2 if (self.N == 3 and self.problem.subspaces is None) else self.N
        lam = reduce_lambdas(
            theta, eff_n, subs=self.problem.subspaces, n_plain=self.n_plain
        )
        spec = self.problem.spec
        mean = (
            theta[: self.n_plain].mean(axis=0)
            if spec.kind == "classical_mean"
            else None
        )
        eq = spec.equation_value(
            self.c_s * lam, None if mean is None else self.c_s * mean
        )
        return eq[self.interior_idx]

    @property
    def normalization(self) -> float:
        """W: coefficient sum times c(s) times the per-direction mass."""
        N = self.problem.grid.dimension
        return self.problem.spec.coefficient_sum(N) * self.c_s * self.mass


def residual(problem: Problem, u: Field) -> np.ndarray:
    """Equation-form residual sum_i a_i Lambda_i u - f at interior nodes."""
    if u.grid is not problem.grid and u.grid.shape != problem.grid.shape:
        raise ConfigError("field grid does not match the problem grid")
    return problem.kernel.equation_values(u.values) - problem.rhs_equation_values()


def _datum_boundary_mean(problem: Problem) -> float:
    """Mean of the datum over exterior nodes within two spacings of the boundary."""
    grid = problem.grid
    sd = grid.domain.signed_distance(grid.nodes())
    shell = (~grid.interior_mask) & (sd <= 2.0 * float(np.max(grid.h)))
    if not np.any(shell):
        shell = ~grid.interior_mask
    return float(problem.datum(grid.nodes()[shell]).mean())


def solve_dirichlet(
    problem: Problem,
    tol: Optional[float] = None,
    max_iter: int = 10**6,
    damping: float = 0.9,
    initial_guess: Optional[float] = None,
) -> SolveReport:
    """Damped monotone fixed-point solve of the Dirichlet problem.

    Stops when the sup-norm of the equation-form residual drops below
    ``tol`` (default 1e-8 * (1 + datum bound)) or after ``max_iter``
    sweeps, in which case the report is flagged non-converged (no
    exception).  ``initial_guess`` overrides the default datum-consistent
    constant start (used by the multi-start uniqueness harness).

    Raises
    ------
    NumericalError
        If an iterate develops NaNs.
    """
    if tol is None:
        tol = 1e-8 * (1.0 + problem.datum.bound)
    if tol < 0:
        raise ConfigError(f"tolerance must be nonnegative, got {tol}")
    if not (0.0 < damping <= 1.0):
        raise ConfigError(f"damping must lie in (0, 1], got {damping}")

    start = time.perf_counter()
    kernel = problem.kernel
    grid = problem.grid
    guess = _datum_boundary_mean(problem) if initial_guess is None else float(initial_guess)

    values = np.empty(grid.shape)
    mask = grid.interior_mask
    if not np.all(mask):
        values[~mask] = problem.datum(grid.nodes()[~mask])
    values[mask] = guess

    f_eq = problem.rhs_equation_values()
    scale = damping / kernel.normalization
    history: List[float] = []
    converged = False
    iterations = 0

    for iterations in range(1, int(max_iter) + 1):
        res = kernel.equation_values(values) - f_eq
        sup = float(np.max(np.abs(res)))
        history.append(sup)
        if not np.isfinite(sup):
            raise NumericalError(f"residual became non-finite at sweep {iterations}")
        if sup <= tol:
            converged = True
            break
        values[mask] = values[mask] + scale * res

    solution = Field(grid, values[mask], problem.datum)
    return SolveReport(
        solution=solution,
        iterations=iterations,
        residual_history=history,
        final_residual=history[-1] if history else float("nan"),
        damping=damping,
        wall_time=time.perf_counter() - start,
        converged=converged,
        tolerance=tol,
    )
