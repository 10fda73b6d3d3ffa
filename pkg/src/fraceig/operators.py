"""Operator variants assembled from directional values.

Every operator here is a combination of the directional eigenvalues
Lambda_1 <= ... <= Lambda_N obtained by max-min searches of the
directional value Theta(z) over the discrete direction/subspace sets.

Sign conventions are centralized in :class:`OperatorSpec`: problems are
always reduced internally to the equation form

    sum_i a_i Lambda_i u = f_eq,

while the *reported* operator value follows each operator's own
convention (the "(-Delta)"-type operators carry a leading minus:
trace -> -sum Lambda_i, mid-range -> -(Lambda_1 + Lambda_N)/2,
classical mean -> -average of Theta; weighted sums and Pucci extremals
are reported in equation form).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .directions import DirectionSet, SubspaceSet, extremize
from .errors import ConfigError
from .geometry import Field
from .quad1d import LineQuadrature, directional_theta
from .special import FractionalOrder

__all__ = [
    "OperatorSpec",
    "PointEvaluation",
    "evaluate",
    "pucci_combination",
    "reduce_lambdas",
    "OPERATOR_KINDS",
]

OPERATOR_KINDS = (
    "trace",
    "midrange",
    "weighted",
    "pucci_plus",
    "pucci_minus",
    "classical_mean",
)


@dataclass(frozen=True)
class OperatorSpec:
    """Which combination of directional eigenvalues to apply."""

    kind: str
    order: FractionalOrder
    coefficients: Optional[tuple] = None  # weighted only
    pucci_low: Optional[float] = None
    pucci_high: Optional[float] = None

    def __post_init__(self):
        if self.kind not in OPERATOR_KINDS:
            raise ConfigError(f"unknown operator kind {self.kind!r}")
        if self.kind == "weighted":
            if not self.coefficients:
                raise ConfigError("weighted operator requires coefficients")
            a = tuple(float(c) for c in self.coefficients)
            if any(c < 0 for c in a):
                raise ConfigError("weighted coefficients must be nonnegative")
            if a[0] <= 0 or a[-1] <= 0:
                raise ConfigError(
                    "weighted operator needs a_1 > 0 and a_N > 0 for well-posedness"
                )
            object.__setattr__(self, "coefficients", a)
        if self.kind in ("pucci_plus", "pucci_minus"):
            lo, hi = self.pucci_low, self.pucci_high
            if lo is None or hi is None or not (0.0 < lo <= hi):
                raise ConfigError("pucci operators need bounds 0 < low <= high")

    @property
    def s(self) -> float:
        return self.order.s

    def dimension_coefficients(self, N: int) -> np.ndarray:
        """Nonnegative eigenvalue coefficients of the equation form."""
        if self.kind == "weighted":
            if len(self.coefficients) != N:
                raise ConfigError(
                    f"weighted operator has {len(self.coefficients)} coefficients "
                    f"for dimension {N}"
                )
            return np.asarray(self.coefficients, dtype=float)
        a = np.zeros(N)
        if self.kind in ("trace", "classical_mean"):
            a[:] = 1.0
        else:  # midrange, pucci bounds handled separately
            a[0] = 1.0
            a[-1] = 1.0
        return a

    def coefficient_sum(self, N: int) -> float:
        """Upper bound on the total eigenvalue coefficient (normalization)."""
        if self.kind == "weighted":
            return float(sum(self.dimension_coefficients(N)))
        if self.kind in ("pucci_plus", "pucci_minus"):
            return N * float(self.pucci_high)
        if self.kind == "midrange":
            return 2.0
        if self.kind == "classical_mean":
            return 1.0
        return float(N)

    def requires_subspaces(self, N: int) -> bool:
        """True when an intermediate eigenvalue is needed (N=3 only)."""
        if N != 3:
            return False
        if self.kind in ("trace", "pucci_plus", "pucci_minus"):
            return True
        if self.kind == "weighted":
            return self.coefficients[1] > 0
        return False

    def equation_value(self, lambdas: np.ndarray, theta_mean=None):
        """sum_i a_i Lambda_i (or its Pucci / mean analogue).

        ``lambdas`` may hold either all N eigenvalues or just the two
        extremes (operators that never look at intermediate ones are
        evaluated without a subspace search in N=3).
        """
        lambdas = np.asarray(lambdas, dtype=float)
        N = lambdas.shape[0]
        if self.kind == "classical_mean":
            if theta_mean is None:
                raise ValueError("classical_mean needs the direction-set mean")
            return theta_mean
        if self.kind in ("pucci_plus", "pucci_minus"):
            sign = "+" if self.kind == "pucci_plus" else "-"
            return pucci_combination(lambdas, self.pucci_low, self.pucci_high, sign)
        if self.kind == "weighted":
            a = np.asarray(self.coefficients, dtype=float)
            if N == 2 and a.size > 2:
                a = np.array([a[0], a[-1]])  # interior coefficients vanish
            elif a.size != N:
                raise ConfigError(
                    f"weighted operator has {a.size} coefficients for {N} "
                    "eigenvalues"
                )
        else:
            a = self.dimension_coefficients(N)
        return np.tensordot(a, lambdas, axes=(0, 0))

    def rhs_to_equation(self, f):
        """Right-hand side of the posed problem -> equation-form rhs."""
        if self.kind in ("trace", "classical_mean"):
            return -1.0 * np.asarray(f, dtype=float)
        if self.kind == "midrange":
            return -2.0 * np.asarray(f, dtype=float)
        return np.asarray(f, dtype=float)

    def operator_value(self, lambdas: np.ndarray, theta_mean=None):
        """Reported value in the operator's own sign convention."""
        eq = self.equation_value(lambdas, theta_mean)
        if self.kind in ("trace", "classical_mean"):
            return -eq
        if self.kind == "midrange":
            return -0.5 * eq
        return eq


@dataclass(frozen=True)
class PointEvaluation:
    """All directional eigenvalues and the operator value at one point."""

    x: np.ndarray
    lambdas: np.ndarray  # (N,), nondecreasing
    witnesses: np.ndarray  # (N, dim) extremal directions per k
    operator_value: float
    kind: str


def pucci_combination(lambdas, low: float, high: float, sign: str):
    """Pucci extremal combination of an eigenvalue vector.

    P+ = high * sum(Lambda_k > 0) + low * sum(Lambda_k < 0); P- swaps the
    bounds across the sign split.  Vectorized over trailing axes.
    """
    if not (0.0 < low <= high):
        raise ValueError(f"pucci bounds need 0 < low <= high, got {low}, {high}")
    lam = np.asarray(lambdas, dtype=float)
    pos = np.clip(lam, 0.0, None).sum(axis=0)
    neg = np.clip(lam, None, 0.0).sum(axis=0)
    if sign == "+":
        return high * pos + low * neg
    if sign == "-":
        return low * pos + high * neg
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def reduce_lambdas(theta: np.ndarray, N: int, subs: Optional[SubspaceSet] = None,
                   n_plain: Optional[int] = None) -> np.ndarray:
    """Directional eigenvalues from a stack of Theta values.

    ``theta`` has shape (n_directions,) or (n_directions, ...); the first
    ``n_plain`` rows come from the plain direction set, the rest (N=3)
    from the flattened in-plane directions of ``subs``.  Returns an array
    of shape (N,) + trailing shape, nondecreasing in k by construction:
    Lambda_1 is the min over every sampled direction, Lambda_N the max,
    and the intermediate Lambda_2 (N=3) is a max of per-plane minima, all
    of which sit between the global extremes.
    """
    theta = np.asarray(theta, dtype=float)
    lam_lo = theta.min(axis=0)
    lam_hi = theta.max(axis=0)
    if N == 1:
        return theta[None, 0] if theta.shape[0] == 1 else lam_lo[None]
    if N == 2:
        return np.stack([lam_lo, lam_hi])
    if subs is None:
        raise ConfigError("intermediate eigenvalue in N=3 requires a subspace set")
    if n_plain is None:
        n_plain = theta.shape[0] - subs.all_vectors.shape[0]
    m = subs.plane_vectors.shape[1]
    plane_theta = theta[n_plain:].reshape((subs.n_planes, m) + theta.shape[1:])
    lam_mid = plane_theta.min(axis=1).max(axis=0)
    return np.stack([lam_lo, lam_mid, lam_hi])


def _witnesses(theta: np.ndarray, vectors: np.ndarray, N: int,
               subs: Optional[SubspaceSet], n_plain: int) -> np.ndarray:
    wit = []
    d_lo, _ = extremize(vectors, theta, "min")
    d_hi, _ = extremize(vectors, theta, "max")
    wit.append(d_lo)
    if N == 3 and subs is not None:
        m = subs.plane_vectors.shape[1]
        plane_theta = theta[n_plain:].reshape(subs.n_planes, m)
        per_plane_min = plane_theta.min(axis=1)
        j = int(np.argmax(per_plane_min))
        i = int(np.argmin(plane_theta[j]))
        wit.append(subs.plane_vectors[j, i])
    if N >= 2:
        wit.append(d_hi)
    return np.asarray(wit)


def evaluate(
    spec: OperatorSpec,
    f: Field,
    x,
    dirs: DirectionSet,
    subs: Optional[SubspaceSet] = None,
    q: LineQuadrature = None,
) -> PointEvaluation:
    """Evaluate an operator at a strictly interior point.

    Theta is computed once per direction (the N=3 union stacks the plain
    set with every in-plane direction) and shared across all eigenvalue
    searches; witnesses are recorded per k.
    """
    if q is None:
        raise ConfigError("evaluate requires a LineQuadrature")
    N = f.grid.dimension
    if dirs.dimension != N:
        raise ConfigError("direction set dimension does not match the field")
    if spec.requires_subspaces(N) and subs is None:
        raise ConfigError(
            f"operator {spec.kind!r} in N=3 needs a SubspaceSet for Lambda_2"
        )
    x = np.asarray(x, dtype=float)
    vectors = dirs.vectors
    n_plain = vectors.shape[0]
    if N == 3 and subs is not None:
        vectors = np.concatenate([vectors, subs.all_vectors], axis=0)
    theta = np.array([directional_theta(f, x, z, q) for z in vectors])
    # without a subspace set only the two extremes are requested (N=3)
    eff_n = 2 if (N == 3 and subs is None) else N
    lambdas = reduce_lambdas(theta, eff_n, subs=subs, n_plain=n_plain)
    theta_mean = float(theta[:n_plain].mean()) if spec.kind == "classical_mean" else None
    value = float(spec.operator_value(lambdas, theta_mean))
    witnesses = _witnesses(theta, vectors, N, subs, n_plain)
    return PointEvaluation(
        x=x, lambdas=lambdas, witnesses=witnesses, operator_value=value, kind=spec.kind
    )
