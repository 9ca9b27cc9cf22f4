"""Affine model of a two-dimensional centre-stable block.

A real 2x2 contraction whose eigenvalues share one modulus is a homothety,
a parabolic (Jordan) map, or a rotation-homothety.  Normalized iterates of a
parabolic map creep towards its eigenline at rate O(1/s); that limit is the
linear picture behind strong stable connections.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IndexOutOfRange, InvalidArgument, InvariantViolation, PreconditionViolated, ZeroSeed
from .properties import Verdict, _verdict
from .spectrum import SpectrumReport

DIRECTION_TOL = 1e-6
_EQUAL_MODULI = 1e-9
_HOMOTHETY = 1e-9
_GAP = 1e-9


class CenterKind(str, Enum):
    HOMOTHETY = "Homothety"
    PARABOLIC = "Parabolic"
    COMPLEX = "Complex"


def _discriminant(m: np.ndarray) -> tuple[float, float]:
    """(tr^2 - 4 det, scale) with scale = |det| so the ratio is dimensionless."""
    tr, det = float(np.trace(m)), float(np.linalg.det(m))
    return tr * tr - 4.0 * det, abs(det)


@dataclass(frozen=True)
class CenterStableModel:
    block: np.ndarray
    seed: np.ndarray

    def __post_init__(self):
        block = np.array(self.block, dtype=float)
        seed = np.array(self.seed, dtype=float).reshape(-1)
        if block.shape != (2, 2) or seed.shape != (2,):
            raise InvalidArgument("the model needs a 2x2 block and a 2-vector seed")
        if not (np.all(np.isfinite(block)) and np.all(np.isfinite(seed))):
            raise InvalidArgument("non-finite entries in the model")
        disc, scale = _discriminant(block)
        if scale == 0.0:
            raise InvariantViolation("the block is singular")
        # real 2x2: equal moduli <=> non-positive discriminant (the +-lambda case has disc > 0)
        if disc > _EQUAL_MODULI * scale:
            raise InvariantViolation("the eigenvalue moduli of the block differ")
        if np.sqrt(scale) >= 1.0:
            raise InvariantViolation("the block is not a contraction (spectral radius >= 1)")
        block.setflags(write=False)
        seed.setflags(write=False)
        object.__setattr__(self, "block", block)
        object.__setattr__(self, "seed", seed)

    @property
    def modulus(self) -> float:
        return float(np.sqrt(abs(np.linalg.det(self.block))))


def classify_center(m: CenterStableModel) -> CenterKind:
    disc, scale = _discriminant(m.block)
    if disc < -_EQUAL_MODULI * scale:
        return CenterKind.COMPLEX
    lam = float(np.trace(m.block)) / 2
    if np.abs(m.block - lam * np.eye(2)).max() <= _HOMOTHETY:
        return CenterKind.HOMOTHETY
    return CenterKind.PARABOLIC


def eigendirection(m: CenterStableModel) -> np.ndarray:
    """Unit vector spanning the invariant line of a parabolic block."""
    lam = float(np.trace(m.block)) / 2
    n = m.block - lam * np.eye(2)
    # the image of a nilpotent 2x2 matrix is its kernel; take its largest column
    col = n[:, int(np.argmax(np.linalg.norm(n, axis=0)))]
    return canonical(col)


def canonical(v: np.ndarray) -> np.ndarray:
    """Unit vector with nonnegative first coordinate (second positive on the axis)."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v + 0.0


def line_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in [0, pi/2] between the lines spanned by u and v."""
    cross = abs(u[0] * v[1] - u[1] * v[0])
    return float(np.arctan2(cross, abs(float(u @ v))))


@dataclass(frozen=True)
class NormalizedLimit:
    kind: CenterKind
    steps: int
    vector: np.ndarray
    angle: float
    direction: np.ndarray

    def to_record(self) -> dict:
        return {"classification": self.kind.value, "steps": self.steps,
                "vector": [float(x) for x in self.vector], "angle": self.angle,
                "direction": [float(x) for x in self.direction]}


def _unit_power(m: CenterStableModel, steps: int) -> np.ndarray:
    """block^steps divided by modulus^steps, so nothing underflows."""
    return np.linalg.matrix_power(m.block / m.modulus, steps)


def normalized_iteration_limit(m: CenterStableModel, steps: int) -> NormalizedLimit:
    if int(steps) != steps or steps < 1:
        raise InvalidArgument("steps must be a positive integer")
    if not np.any(m.seed):
        raise ZeroSeed("the seed vector is zero")
    kind = classify_center(m)
    if kind is CenterKind.COMPLEX:
        raise PreconditionViolated("a rotation-homothety block has no invariant line")
    if kind is CenterKind.HOMOTHETY:
        v = canonical(m.seed)
        return NormalizedLimit(kind, int(steps), v, 0.0, v)
    e = eigendirection(m)
    v = canonical(_unit_power(m, int(steps)) @ m.seed)
    return NormalizedLimit(kind, int(steps), v, line_angle(v, e), e)


def angle_curve(m: CenterStableModel, steps) -> np.ndarray:
    """Angle to the invariant line after each of the given step counts."""
    return np.array([normalized_iteration_limit(m, int(s)).angle for s in steps])


def steps_to_angle(m: CenterStableModel, threshold: float = DIRECTION_TOL, cap: int = 2 ** 40) -> int:
    """Smallest step count with angle below ``threshold`` (angles decrease monotonically)."""
    lo, hi = 0, 1
    while normalized_iteration_limit(m, hi).angle >= threshold:
        lo, hi = hi, hi * 2
        if hi > cap:
            raise PreconditionViolated(f"angle stays above {threshold:g} for {cap} steps")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if normalized_iteration_limit(m, mid).angle < threshold:
            hi = mid
        else:
            lo = mid
    return hi


def check_pss_spectral_and_directional(spectrum: SpectrumReport, i: int, direction_angle: float,
                                       angle_tol: float = DIRECTION_TOL) -> Verdict:
    """Strong-stable property at index i: exponent gap, plus the model-level direction clause."""
    d = spectrum.dim
    if not 2 <= i <= d - 1:
        raise IndexOutOfRange(f"i={i} outside 2..{d - 1}")
    chi = spectrum.exponents
    clauses = {
        f"chi_{i - 1} < chi_{i}": bool(chi[i - 2] < chi[i - 1] - _GAP),
        "direction in strong-stable line (model-level)": bool(direction_angle < angle_tol),
    }
    return _verdict(f"P_ss({i})", clauses,
                    f"model-level: angle {direction_angle:.3g} against tolerance {angle_tol:g}")
