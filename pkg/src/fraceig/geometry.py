"""Domains, grids, exterior data and extended fields.

A ``Field`` realizes the datum-extension of a grid function to all of
space: multilinear interpolation of nodal values strictly inside the
domain, exterior datum everywhere else.  Interpolation weights are
nonnegative and sum to one, so evaluation is monotone in the nodal
values and in the datum -- the discrete backbone of every comparison
argument downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "BOUNDARY_TOL",
    "Domain",
    "Grid",
    "ExteriorDatum",
    "Field",
    "signed_distance",
    "sample_extended",
]

# Nodes and query points with |signed distance| below this are treated as
# exterior (they carry the datum): the datum is attained with continuity.
BOUNDARY_TOL = 1e-12


class Domain:
    """Bounded domain of one of the supported closed-form shapes.

    Shapes: ``interval(a, b)`` (N=1), ``ball(center, radius)`` and
    ``box(lo, hi)`` (N in {1, 2, 3}).  The signed distance is the exact
    Euclidean one (negative inside, Lipschitz constant 1).
    """

    def __init__(self, kind: str, **params):
        if kind not in ("interval", "ball", "box"):
            raise ValueError(f"unsupported domain kind {kind!r}")
        self.kind = kind
        self.params = params
        if kind == "interval":
            a, b = float(params["a"]), float(params["b"])
            if not a < b:
                raise ValueError("interval requires a < b")
            self.dimension = 1
            self._lo = np.array([a])
            self._hi = np.array([b])
        elif kind == "ball":
            center = np.atleast_1d(np.asarray(params["center"], dtype=float))
            radius = float(params["radius"])
            if radius <= 0:
                raise ValueError("ball radius must be positive")
            self.dimension = center.size
            self._center = center
            self._radius = radius
            self._lo = center - radius
            self._hi = center + radius
        else:
            lo = np.atleast_1d(np.asarray(params["lo"], dtype=float))
            hi = np.atleast_1d(np.asarray(params["hi"], dtype=float))
            if lo.shape != hi.shape or not np.all(lo < hi):
                raise ValueError("box requires lo < hi componentwise")
            self.dimension = lo.size
            self._lo = lo
            self._hi = hi
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension {self.dimension} not supported (N <= 3)")

    @classmethod
    def interval(cls, a: float, b: float) -> "Domain":
        return cls("interval", a=a, b=b)

    @classmethod
    def ball(cls, center, radius: float) -> "Domain":
        return cls("ball", center=center, radius=radius)

    @classmethod
    def box(cls, lo, hi) -> "Domain":
        return cls("box", lo=lo, hi=hi)

    def bounding_box(self):
        return self._lo.copy(), self._hi.copy()

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self._hi - self._lo))

    def signed_distance(self, x) -> np.ndarray:
        """Exact signed distance to the boundary; shape (..., N) -> (...)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"points have dimension {x.shape[-1]}, domain has {self.dimension}"
            )
        if self.kind == "interval":
            a, b = self._lo[0], self._hi[0]
            t = x[..., 0]
            return np.maximum(a - t, t - b)
        if self.kind == "ball":
            r = np.linalg.norm(x - self._center, axis=-1)
            return r - self._radius
        # box: exact SDF, negative inside
        d = np.maximum(self._lo - x, x - self._hi)
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=-1)
        inside = np.minimum(np.max(d, axis=-1), 0.0)
        return outside + inside

    def contains(self, x) -> np.ndarray:
        """Strict interior test used throughout: sd < -BOUNDARY_TOL."""
        return self.signed_distance(x) < -BOUNDARY_TOL

    def __repr__(self):
        return f"Domain({self.kind}, {self.params})"


def signed_distance(domain: Domain, x) -> np.ndarray:
    """Module-level alias for :meth:`Domain.signed_distance`."""
    return domain.signed_distance(x)


class Grid:
    """Uniform tensor grid over the domain's bounding box.

    Node coordinates are reproducible bit-exactly from indices as
    ``lo[axis] + i * h[axis]``.  The interior mask marks nodes strictly
    inside the domain; all other nodes carry the datum.
    """

    def __init__(self, domain: Domain, counts: Sequence[int]):
        counts = tuple(int(c) for c in np.atleast_1d(counts))
        if len(counts) == 1 and domain.dimension > 1:
            counts = counts * domain.dimension
        if len(counts) != domain.dimension:
            raise ValueError("one node count per axis required")
        if any(c < 2 for c in counts):
            raise ValueError("need at least 2 nodes per axis")
        self.domain = domain
        self.counts = counts
        self.lo, self.hi = domain.bounding_box()
        self.h = (self.hi - self.lo) / (np.array(counts, dtype=float) - 1.0)
        self.axes = [
            self.lo[a] + np.arange(counts[a]) * self.h[a]
            for a in range(domain.dimension)
        ]
        self._nodes = None
        self._interior = None

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def shape(self):
        return self.counts

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape counts + (N,)."""
        if self._nodes is None:
            mesh = np.meshgrid(*self.axes, indexing="ij")
            self._nodes = np.stack(mesh, axis=-1)
        return self._nodes

    @property
    def interior_mask(self) -> np.ndarray:
        if self._interior is None:
            self._interior = self.domain.contains(self.nodes())
        return self._interior

    @property
    def n_interior(self) -> int:
        return int(self.interior_mask.sum())

    def interior_nodes(self) -> np.ndarray:
        """Coordinates of interior nodes, shape (n_interior, N)."""
        return self.nodes()[self.interior_mask]


@dataclass
class ExteriorDatum:
    """Exterior values g on R^N \\ Omega.

    ``evaluate`` must accept an (..., N) array and return (...,) values.
    ``far_value`` (with its radius) declares that g is exactly constant
    beyond |x| >= far_radius, which enables the closed-form quadrature
    tail.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    bound: float
    far_value: Optional[float] = None
    far_radius: float = np.inf

    def __post_init__(self):
        if not np.isfinite(self.bound):
            raise ValueError("datum bound must be finite")
        if self.far_value is not None and not np.isfinite(self.far_radius):
            raise ValueError("a far_value requires a finite far_radius")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.evaluate(x), dtype=float)

    @classmethod
    def constant(cls, value: float) -> "ExteriorDatum":
        v = float(value)
        return cls(
            evaluate=lambda x: np.full(x.shape[:-1], v),
            bound=abs(v),
            far_value=v,
            far_radius=0.0,
        )


class Field:
    """Grid-sampled interior values glued to an exterior datum.

    ``values`` holds the full nodal array: interior nodes carry the field
    unknowns, every other node carries the datum evaluated at its own
    coordinates (so interpolation stencils straddling the boundary mix
    interior values with datum values, keeping the extension continuous
    at grid resolution).
    """

    def __init__(self, grid: Grid, interior_values, datum: ExteriorDatum):
        self.grid = grid
        self.datum = datum
        interior_values = np.asarray(interior_values, dtype=float)
        if interior_values.shape == grid.shape:
            interior_values = interior_values[grid.interior_mask]
        if interior_values.shape != (grid.n_interior,):
            raise ValueError(
                f"expected {grid.n_interior} interior values, got {interior_values.shape}"
            )
        values = np.empty(grid.shape, dtype=float)
        mask = grid.interior_mask
        if not np.all(mask):
            values[~mask] = datum(grid.nodes()[~mask])
        values[mask] = interior_values
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid, func, datum: ExteriorDatum) -> "Field":
        """Sample ``func`` at interior nodes (func takes (..., N) arrays)."""
        vals = np.asarray(func(grid.interior_nodes()), dtype=float)
        return cls(grid, vals, datum)

    @classmethod
    def from_datum(cls, grid: Grid, datum: ExteriorDatum) -> "Field":
        """Interior values sampled from the datum's own formula."""
        return cls.from_function(grid, datum, datum)

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[self.grid.interior_mask]

    def with_interior(self, interior_values) -> "Field":
        """Fresh field sharing grid/datum with replaced interior values."""
        return Field(self.grid, interior_values, self.datum)

    def interpolate(self, x) -> np.ndarray:
        """Multilinear interpolation of the nodal array; x within the bbox."""
        x = np.asarray(x, dtype=float)
        grid = self.grid
        base = []
        frac = []
        for a in range(grid.dimension):
            xi = (x[..., a] - grid.lo[a]) / grid.h[a]
            b = np.clip(np.floor(xi).astype(np.intp), 0, grid.counts[a] - 2)
            base.append(b)
            frac.append(np.clip(xi - b, 0.0, 1.0))
        out = np.zeros(x.shape[:-1])
        for corner in range(2 ** grid.dimension):
            w = 1.0
            idx = []
            for a in range(grid.dimension):
                bit = (corner >> a) & 1
                idx.append(base[a] + bit)
                w = w * (frac[a] if bit else 1.0 - frac[a])
            out += w * self.values[tuple(idx)]
        return out

    def __call__(self, x) -> np.ndarray:
        return sample_extended(self, x)


def sample_extended(f: Field, x) -> np.ndarray:
    """Evaluate the datum-extension of ``f`` anywhere in R^N.

    Strictly inside the domain: multilinear interpolation of the nodal
    array.  On the boundary and outside: the exterior datum.  Accepts a
    single point of shape (N,) or a batch (..., N).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    inside = f.grid.domain.contains(x)
    out = np.empty(x.shape[:-1])
    if np.any(inside):
        out[inside] = f.interpolate(x[inside])
    if not np.all(inside):
        out[~inside] = f.datum(x[~inside])
    return out[0] if single else out
