"""Hyperplane geometry: signed margins, perpendicular projection and the lambda shift.

A hyperplane is the affine set ``{z : w.z + b = 0}``. The coefficients are used
exactly as given (``w`` is never normalised internally), so rescaling ``(w, b)``
by a positive constant leaves every result unchanged up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_LAMBDA_GRID = tuple(1.0 + 0.5 * i for i in range(13))


def as_embedding(z, dim: int | None = None) -> np.ndarray:
    """Validate ``z`` as a finite 1-D float vector, optionally of length ``dim``."""
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"embedding must be a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("embedding contains non-finite values")
    return arr


@dataclass(frozen=True)
class Hyperplane:
    """Decision boundary ``w.z + b = 0``."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = as_embedding(self.w)
        if not np.isfinite(self.b):
            raise ValueError("hyperplane offset must be finite")
        if not np.any(w):
            raise ValueError("hyperplane normal has zero norm")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.w.size

    def score(self, z) -> float:
        """Raw affine score ``w.z + b``."""
        return float(self.w @ as_embedding(z, self.dim) + self.b)


@dataclass(frozen=True)
class TransferConfig:
    lambda_grid: tuple[float, ...] = field(default=DEFAULT_LAMBDA_GRID)

    def __post_init__(self):
        grid = tuple(float(v) for v in self.lambda_grid)
        if not grid:
            raise ValueError("lambda grid is empty")
        if any(v < 0 or not np.isfinite(v) for v in grid):
            raise ValueError("lambda values must be finite and >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda grid must be strictly ascending")
        object.__setattr__(self, "lambda_grid", grid)


def signed_margin(h: Hyperplane, z) -> float:
    """Signed Euclidean distance from ``z`` to ``h``; positive where ``w.z + b > 0``."""
    return h.score(z) / float(np.linalg.norm(h.w))


def project(h: Hyperplane, z) -> np.ndarray:
    """Perpendicular projection of ``z`` onto ``h``."""
    z = as_embedding(z, h.dim)
    beta = -(z @ h.w + h.b) / (h.w @ h.w)
    return z + beta * h.w


def transfer(h: Hyperplane, z, lam: float) -> np.ndarray:
    """Shift ``z`` through ``h`` to ``lam`` times its original distance on the far side.

    ``lam = 0`` lands on the plane and ``lam = 1`` is the mirror image. A point
    already on the plane is returned unchanged for every ``lam``.
    """
    if not np.isfinite(lam) or lam < 0:
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    z = as_embedding(z, h.dim)
    z_perp = project(h, z)
    return z_perp + lam * (z_perp - z)
