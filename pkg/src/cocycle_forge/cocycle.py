"""Periodic linear cocycles and the sup-distance between them."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidCocycle, ShapeMismatch


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared across modules.

    ``modulus`` and ``exponent`` are the equality tolerances exposed on the
    command line; the others are internal margins of the verification layer.
    """

    modulus: float = 1e-9
    exponent: float = 1e-9
    imag: float = 1e-10
    conservation: float = 1e-8
    monotone: float = 1e-9
    endpoint: float = 1e-8
    separation: float = 1e-6
    other_exponent: float = 1e-4
    defective_cond: float = 1e8
    invariance: float = 1e-9

    def with_tol(self, tol: float) -> "Tolerances":
        return replace(self, modulus=tol, exponent=tol)


DEFAULT_TOL = Tolerances()


def _as_stack(matrices) -> np.ndarray:
    arr = np.array(matrices, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvalidCocycle(f"expected a stack of square matrices, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class PeriodicCocycle:
    """Invertible matrices A_0, ..., A_{l-1} along one periodic orbit.

    The stack is copied and frozen at construction.  Derived quantities
    (bound, inverses) are computed lazily from the stored matrices.
    """

    matrices: np.ndarray
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = _as_stack(self.matrices)
        if not np.all(np.isfinite(arr)):
            raise InvalidCocycle("matrices contain non-finite entries")
        ell, d, _ = arr.shape
        if d < 2:
            raise InvalidCocycle(f"dimension must be at least 2, got {d}")
        if ell < 1:
            raise InvalidCocycle("period must be at least 1")
        norms = np.linalg.norm(arr, 2, axis=(1, 2))
        sign, logdet = np.linalg.slogdet(arr)
        bad = (sign == 0) | (logdet <= np.log(1e-12) + d * np.log(np.maximum(norms, 1e-300)))
        if np.any(bad):
            raise InvalidCocycle(f"matrix A_{int(np.flatnonzero(bad)[0])} is numerically singular")
        arr.setflags(write=False)
        object.__setattr__(self, "matrices", arr)

    @classmethod
    def constant(cls, matrix, period: int, label: str | None = None) -> "PeriodicCocycle":
        return cls(np.repeat(np.asarray(matrix, dtype=float)[None], period, axis=0), label)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def period(self) -> int:
        return self.matrices.shape[0]

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = np.linalg.inv(self.matrices)
        inv.setflags(write=False)
        return inv

    @cached_property
    def bound(self) -> float:
        fwd = np.linalg.norm(self.matrices, 2, axis=(1, 2))
        bwd = np.linalg.norm(self.inverses, 2, axis=(1, 2))
        return float(max(fwd.max(), bwd.max()))

    @cached_property
    def log_abs_det(self) -> float:
        """log|det B| of the return product, summed factor by factor."""
        return float(np.linalg.slogdet(self.matrices)[1].sum())

    def return_product(self) -> np.ndarray:
        """B = A_{l-1} ... A_0 formed explicitly (only sensible for short, tame orbits)."""
        out = np.eye(self.dim)
        for a in self.matrices:
            out = a @ out
        return out

    def shifted(self, shift: int) -> "PeriodicCocycle":
        """Same orbit read from the point x_shift."""
        return PeriodicCocycle(np.roll(self.matrices, -shift, axis=0), self.label)

    def inverse_cocycle(self) -> "PeriodicCocycle":
        """The cocycle of f^{-1} along the reversed orbit: A_{l-1}^{-1} first."""
        return PeriodicCocycle(self.inverses[::-1].copy(), self.label)

    def conjugated(self, q: np.ndarray) -> "PeriodicCocycle":
        """Conjugate every A_n by one fixed invertible matrix."""
        q = np.asarray(q, dtype=float)
        return PeriodicCocycle(np.linalg.solve(q, self.matrices @ q), self.label)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PeriodicCocycle):
            return NotImplemented
        return np.array_equal(self.matrices, other.matrices)

    def __hash__(self) -> int:
        return hash(self.matrices.tobytes())

    def __repr__(self) -> str:
        return f"PeriodicCocycle(dim={self.dim}, period={self.period}, label={self.label!r})"


def cocycle_distance(a: PeriodicCocycle, b: PeriodicCocycle) -> float:
    """sup_n max(|A_n - B_n|, |A_n^{-1} - B_n^{-1}|) in the operator 2-norm."""
    if a.matrices.shape != b.matrices.shape:
        raise ShapeMismatch(f"cannot compare shapes {a.matrices.shape} and {b.matrices.shape}")
    if a == b:
        return 0.0
    return site_distances(a.matrices, a.inverses, b.matrices, b.inverses).max().item()


def site_distances(a, a_inv, b, b_inv) -> np.ndarray:
    fwd = np.linalg.norm(a - b, 2, axis=(-2, -1))
    bwd = np.linalg.norm(a_inv - b_inv, 2, axis=(-2, -1))
    return np.maximum(fwd, bwd)


def random_cocycle(rng: np.random.Generator, dim: int, period: int, scale: float = 3.0,
                   min_sv: float = 1e-3) -> PeriodicCocycle:
    """Entries uniform in [-scale, scale], redrawn until every factor is tame."""
    mats = []
    while len(mats) < period:
        m = rng.uniform(-scale, scale, size=(dim, dim))
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] >= min_sv * s[0]:
            mats.append(m)
    return PeriodicCocycle(np.array(mats))


def as_cocycle(obj: PeriodicCocycle | Sequence | np.ndarray) -> PeriodicCocycle:
    return obj if isinstance(obj, PeriodicCocycle) else PeriodicCocycle(np.asarray(obj, dtype=float))
