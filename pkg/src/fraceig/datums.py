"""Catalog of exterior data with known far-field behavior.

Every builtin is a vectorized formula on all of R^N together with the
metadata the quadrature tail needs (sup bound, exact far constant and
the radius beyond which it holds).  Data can be scaled and summed; the
far metadata combines accordingly.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import ConfigError, ProfileError
from .geometry import ExteriorDatum
from .quad1d import oracle_theta

__all__ = [
    "constant",
    "gaussian",
    "plateau_bump",
    "truncated_saddle",
    "quadratic_form",
    "profile_constant",
    "line_profile",
    "profile_saddle",
    "scale",
    "add",
    "BUILTIN_DATUMS",
]


def smootherstep(t: np.ndarray) -> np.ndarray:
    """C^2 ramp: 0 below 0, 1 above 1, 6t^5 - 15t^4 + 10t^3 between."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def constant(value: float) -> ExteriorDatum:
    return ExteriorDatum.constant(value)


def gaussian(center, width: float = 1.0, amplitude: float = 1.0) -> ExteriorDatum:
    """amplitude * exp(-|x - center|^2 / width^2); never exactly constant."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if width <= 0:
        raise ConfigError("gaussian width must be positive")

    def evaluate(x):
        r2 = np.sum((x - c) ** 2, axis=-1)
        return amplitude * np.exp(-r2 / width**2)

    return ExteriorDatum(evaluate=evaluate, bound=abs(amplitude))


def plateau_bump(center, radius: float, amplitude: float = 1.0) -> ExteriorDatum:
    """Radially non-increasing bump: amplitude on the inner half, 0 outside.

    C^2: constant plateau for rho <= radius/2, smootherstep down to 0 at
    rho = radius, exactly 0 beyond.
    """
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if radius <= 0:
        raise ConfigError("bump radius must be positive")

    def evaluate(x):
        rho = np.linalg.norm(x - c, axis=-1)
        return amplitude * (1.0 - smootherstep(2.0 * rho / radius - 1.0))

    return ExteriorDatum(
        evaluate=evaluate,
        bound=abs(amplitude),
        far_value=0.0,
        far_radius=float(np.linalg.norm(c) + radius),
    )


def truncated_saddle(inner: float = 2.0, outer: float = 3.0) -> ExteriorDatum:
    """(x^2 - y^2) kept exact for |x| <= inner, smoothly cut to 0 by |x| >= outer.

    The boundary trace on the unit circle is the harmonic saddle itself,
    which is what the s -> 1 study compares against.
    """
    if not 0 < inner < outer:
        raise ConfigError("need 0 < inner < outer")

    def evaluate(x):
        if x.shape[-1] != 2:
            raise ConfigError("truncated_saddle is two-dimensional")
        rho = np.linalg.norm(x, axis=-1)
        cut = 1.0 - smootherstep((rho - inner) / (outer - inner))
        return (x[..., 0] ** 2 - x[..., 1] ** 2) * cut

    return ExteriorDatum(
        evaluate=evaluate, bound=inner**2, far_value=0.0, far_radius=float(outer)
    )


def quadratic_form(matrix, inner: float = 1.0, outer: float = 2.0) -> ExteriorDatum:
    """<A x, x> kept exact for |x| <= inner, smoothly cut to 0 by |x| >= outer."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError("quadratic form needs a square matrix")
    if not np.allclose(A, A.T):
        raise ConfigError("quadratic form matrix must be symmetric")
    if not 0 < inner < outer:
        raise ConfigError("need 0 < inner < outer")
    gain = float(np.abs(np.linalg.eigvalsh(A)).max())

    def evaluate(x):
        rho = np.linalg.norm(x, axis=-1)
        cut = 1.0 - smootherstep((rho - inner) / (outer - inner))
        q = np.einsum("...i,ij,...j->...", x, A, x)
        return q * cut

    return ExteriorDatum(
        evaluate=evaluate, bound=gain * outer**2, far_value=0.0, far_radius=float(outer)
    )


def _raw_profile(x, r: float, s: float) -> np.ndarray:
    return np.maximum(r * r - x * x, 0.0) ** s


@lru_cache(maxsize=32)
def profile_constant(s: float, r: float = 2.0) -> float:
    """Directional singular integral of (r^2 - x^2)_+^s, verified constant.

    The profile divided by this constant solves the 1-D constant-source
    problem: its fractional Laplacian is identically 1 on (-r, r).  The
    constant is measured with the reference integrator at five interior
    points and required to agree to 1e-3 relative; it is never hardcoded.

    Raises
    ------
    ProfileError
        If the measured values fail the constancy check.
    """
    s = float(s)
    r = float(r)
    if r <= 0:
        raise ConfigError("profile radius must be positive")
    values = []
    for x0 in (0.0, 0.25 * r, -0.25 * r, 0.5 * r, -0.5 * r):
        profile = lambda t: _raw_profile(x0 + t, r, s)
        values.append(
            oracle_theta(profile, s, T=r + abs(x0) + 1.0, far_value=0.0, tol=1e-8)
        )
    values = np.asarray(values)
    spread = values.max() - values.min()
    mean = values.mean()
    if not np.isfinite(mean) or spread > 1e-3 * abs(mean):
        raise ProfileError(
            f"profile integral not constant: values {values.tolist()}"
        )
    if mean >= 0:
        raise ProfileError("profile integral should be negative (concave bump)")
    # Theta = -B on the support, so dividing by B gives  -Theta = 1.
    return float(-mean)


def line_profile(s: float, r: float = 2.0):
    """Vectorized 1-D profile a with (-Delta)^s a = 1 on (-r, r), 0 outside [-r, r]."""
    B = profile_constant(float(s), float(r))

    def a(x):
        return _raw_profile(np.asarray(x, dtype=float), r, float(s)) / B

    return a


def profile_saddle(s: float, r: float = 2.0) -> ExteriorDatum:
    """Separable saddle built from two copies of the constant-source profile.

    Its directional value along a unit vector (v_x, v_y) is exactly
    |v_x|^(2s) - |v_y|^(2s) at every point of (-r, r)^2 (the profile a has
    directional integral -1, so the combination a(y) - a(x) carries the
    plus sign on the x slot).  Extremes sit on the coordinate axes; the
    function vanishes on the diagonal and is not constant far out along
    the axis strips (no far_value).
    """
    a = line_profile(s, r)

    def evaluate(x):
        if x.shape[-1] != 2:
            raise ConfigError("profile_saddle is two-dimensional")
        return a(x[..., 1]) - a(x[..., 0])

    bound = float(a(np.zeros(1))[0])
    return ExteriorDatum(evaluate=evaluate, bound=bound)


def scale(datum: ExteriorDatum, k: float) -> ExteriorDatum:
    """k * datum, with far metadata scaled along."""
    k = float(k)
    return ExteriorDatum(
        evaluate=lambda x: k * datum(x),
        bound=abs(k) * datum.bound,
        far_value=None if datum.far_value is None else k * datum.far_value,
        far_radius=datum.far_radius,
    )


def add(*datums: ExteriorDatum) -> ExteriorDatum:
    """Pointwise sum; far metadata combines when every term has it."""
    if not datums:
        raise ConfigError("add needs at least one datum")

    def evaluate(x):
        out = datums[0](x)
        for d in datums[1:]:
            out = out + d(x)
        return out

    if all(d.far_value is not None for d in datums):
        far_value = float(sum(d.far_value for d in datums))
        far_radius = float(max(d.far_radius for d in datums))
    else:
        far_value, far_radius = None, np.inf
    return ExteriorDatum(
        evaluate=evaluate,
        bound=float(sum(d.bound for d in datums)),
        far_value=far_value,
        far_radius=far_radius,
    )


BUILTIN_DATUMS = {
    "constant": constant,
    "gaussian": gaussian,
    "bump": plateau_bump,
    "truncated_saddle": truncated_saddle,
    "quadratic_form": quadratic_form,
    "profile_saddle": profile_saddle,
}
