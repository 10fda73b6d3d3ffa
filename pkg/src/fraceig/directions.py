"""Discrete direction sets on the half-sphere and 2-plane sets in R^3.

Directional values are even in z (symmetric pairing), so every search
runs on antipodal representatives: a half-circle for N=2 and a
deterministic low-discrepancy half-sphere for N=3.  The max-min that
defines the k-th directional eigenvalue is exact over these finite sets;
set resolution M is the accuracy knob.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "DirectionSet",
    "SubspaceSet",
    "make_direction_set",
    "make_subspace_set",
    "extremize",
    "lambda_k_search",
]

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class DirectionSet:
    """Unit vectors covering a half-sphere (no antipodal duplicates)."""

    dimension: int
    resolution: int
    vectors: np.ndarray  # (n, N)

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class SubspaceSet:
    """2-planes in R^3, each with an orthonormal basis pair and in-plane directions.

    Planes are parameterized by their unit normals on the half-sphere, so
    no two planes coincide.  ``plane_vectors[j]`` holds the M in-plane
    half-circle directions of plane j.
    """

    normals: np.ndarray  # (n_planes, 3)
    bases: np.ndarray  # (n_planes, 2, 3) orthonormal pairs
    plane_vectors: np.ndarray  # (n_planes, M, 3)

    @property
    def n_planes(self) -> int:
        return self.normals.shape[0]

    @property
    def all_vectors(self) -> np.ndarray:
        """In-plane directions flattened to one (n_planes * M, 3) array."""
        return self.plane_vectors.reshape(-1, 3)


def _half_sphere(m: int) -> np.ndarray:
    """Deterministic Fibonacci lattice of m^2 points on the open upper hemisphere."""
    n = m * m
    k = np.arange(n)
    z = (k + 0.5) / n  # strictly inside (0, 1): no equator, no antipodes
    phi = k * GOLDEN_ANGLE
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def make_direction_set(N: int, M: int) -> DirectionSet:
    """Deterministic half-sphere direction set.

    N=1: the single direction {+1}.  N=2: M equispaced angles in [0, pi).
    N=3: a Fibonacci half-sphere lattice of size M^2.  Bit-exactly
    repeatable for fixed (N, M).
    """
    M = int(M)
    if M < 2:
        raise ConfigError(f"direction resolution M must be >= 2, got {M}")
    if N == 1:
        vectors = np.array([[1.0]])
    elif N == 2:
        angles = np.arange(M) * (np.pi / M)
        vectors = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    elif N == 3:
        vectors = _half_sphere(M)
    else:
        raise ConfigError(f"unsupported dimension N={N} (directions need N <= 3)")
    return DirectionSet(dimension=N, resolution=M, vectors=vectors)


def _plane_basis(normal: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the plane normal to ``normal``."""
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(normal)))] = 1.0
    e1 = np.cross(normal, axis)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    e2 /= np.linalg.norm(e2)
    return np.stack([e1, e2])


def make_subspace_set(M_planes: int, M_inplane: int) -> SubspaceSet:
    """2-planes of R^3 with normals on the Fibonacci half-sphere.

    ``M_planes**2`` planes; each carries ``M_inplane`` equispaced
    half-circle directions, reusing the same discretization primitive as
    the N=2 direction set.
    """
    normals = _half_sphere(int(M_planes))
    bases = np.stack([_plane_basis(n) for n in normals])
    angles = np.arange(int(M_inplane)) * (np.pi / int(M_inplane))
    circle = np.stack([np.cos(angles), np.sin(angles)], axis=-1)  # (M, 2)
    plane_vectors = np.einsum("ma,pak->pmk", circle, bases)
    return SubspaceSet(normals=normals, bases=bases, plane_vectors=plane_vectors)


def extremize(directions: np.ndarray, values: np.ndarray, mode: str):
    """Extremal value with its witness direction; ties break to the smallest index.

    Returns ``(direction, value)``.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("extremize needs a nonempty value set")
    if mode == "min":
        i = int(np.argmin(values))
    elif mode == "max":
        i = int(np.argmax(values))
    else:
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    return np.asarray(directions)[i], float(values[i])


def lambda_k_search(values_by_subspace, k: int, N: int) -> float:
    """k-th directional eigenvalue from per-subspace directional values.

    ``values_by_subspace`` is a sequence of per-direction value arrays,
    one per subspace of dimension N-k+1.  Degenerate cases: k=1 has the
    whole space as the only subspace (plain min), k=N has 1-D subspaces
    (plain max over single directions).
    """
    if not 1 <= k <= N:
        raise ValueError(f"eigenvalue index k={k} outside [1, {N}]")
    mins = [float(np.min(np.asarray(v, dtype=float))) for v in values_by_subspace]
    if not mins:
        raise ValueError("lambda_k_search needs a nonempty subspace family")
    return max(mins)
