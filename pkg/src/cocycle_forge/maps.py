"""Low-dimensional maps for chain-recurrence experiments.

A map is a vectorized callable on (N, m) point arrays together with the box
domain it acts on and which axes wrap around.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgument

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Domain:
    low: tuple[float, ...]
    high: tuple[float, ...]
    periodic: tuple[bool, ...] = ()

    def __post_init__(self):
        low = tuple(float(x) for x in self.low)
        high = tuple(float(x) for x in self.high)
        periodic = tuple(bool(p) for p in self.periodic) or (False,) * len(low)
        if not 1 <= len(low) <= 3 or len(high) != len(low) or len(periodic) != len(low):
            raise InvalidArgument("domain must be a box in 1 to 3 dimensions")
        if any(not h > l for l, h in zip(low, high)):
            raise InvalidArgument("domain bounds must satisfy low < high on every axis")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)
        object.__setattr__(self, "periodic", periodic)

    @property
    def dim(self) -> int:
        return len(self.low)

    @property
    def width(self) -> np.ndarray:
        return np.array(self.high) - np.array(self.low)

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        out = np.array(pts, dtype=float)
        low, width = np.array(self.low), self.width
        for a, per in enumerate(self.periodic):
            if per:
                out[:, a] = low[a] + np.mod(out[:, a] - low[a], width[a])
        return out

    def displacement(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """b - a, taking the short way round on periodic axes."""
        diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        width = self.width
        for ax, per in enumerate(self.periodic):
            if per:
                diff[..., ax] = np.mod(diff[..., ax] + width[ax] / 2, width[ax]) - width[ax] / 2
        return diff

    def to_record(self) -> dict:
        return {"low": list(self.low), "high": list(self.high), "periodic": list(self.periodic)}


@dataclass(frozen=True)
class SampledMap:
    name: str
    domain: Domain
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, self.domain.dim)
        return np.asarray(self.func(pts), dtype=float).reshape(pts.shape)


def _north_south(p: np.ndarray) -> np.ndarray:
    # 2 atan(tan(theta/2) / 2), written with atan2 so theta = pi is regular
    half = p / 2
    return np.mod(2 * np.arctan2(np.sin(half), 2 * np.cos(half)), TWO_PI)


def _baker(p: np.ndarray) -> np.ndarray:
    x, y = p[:, 0], p[:, 1]
    left = x < 0.5
    return np.column_stack([np.where(left, 2 * x, 2 * x - 1), np.where(left, y / 2, (y + 1) / 2)])


ZOO: dict[str, SampledMap] = {
    "identity": SampledMap("identity", Domain((0.0,), (1.0,)), lambda p: p.copy()),
    "rotation": SampledMap("rotation", Domain((0.0,), (1.0,), (True,)), lambda p: np.mod(p + GOLDEN, 1.0)),
    "north_south": SampledMap("north_south", Domain((0.0,), (TWO_PI,), (True,)), _north_south),
    "contraction": SampledMap("contraction", Domain((-1.0,), (1.0,)), lambda p: p / 2),
    "baker": SampledMap("baker", Domain((0.0, 0.0), (1.0, 1.0)), _baker),
}


def zoo_map(name: str) -> SampledMap:
    try:
        return ZOO[name]
    except KeyError:
        raise InvalidArgument(f"unknown map {name!r}; choose from {', '.join(sorted(ZOO))}") from None


def map_from_samples(inputs: np.ndarray, outputs: np.ndarray, periodic=(), name: str = "samples") -> SampledMap:
    """Nearest-sample map; the domain is the grid cell hull of the inputs."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    outputs = np.atleast_2d(np.asarray(outputs, dtype=float))
    if inputs.shape != outputs.shape or inputs.shape[0] < 2:
        raise InvalidArgument("need at least two (input, output) samples of equal dimension")
    m = inputs.shape[1]
    low, high = [], []
    for a in range(m):
        u = np.unique(inputs[:, a])
        h = float(np.min(np.diff(u))) if len(u) > 1 else 1.0
        low.append(u[0] - h / 2)
        high.append(u[-1] + h / 2)
    dom = Domain(tuple(low), tuple(high), tuple(periodic) or (False,) * m)
    tree = cKDTree(inputs)
    outs = outputs.copy()

    def func(p: np.ndarray) -> np.ndarray:
        _, idx = tree.query(p)
        return outs[idx]

    return SampledMap(name, dom, func)


def read_samples_csv(path: str | Path, periodic=()) -> SampledMap:
    """CSV rows x_1..x_m, y_1..y_m; a non-numeric first row is treated as a header."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    try:
        [float(x) for x in rows[0]]
    except (ValueError, IndexError):
        rows = rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise InvalidArgument(f"malformed sample CSV: {exc}") from None
    if data.ndim != 2 or data.shape[1] % 2 or data.shape[1] == 0:
        raise InvalidArgument("sample CSV needs an even number of columns (inputs then outputs)")
    m = data.shape[1] // 2
    return map_from_samples(data[:, :m], data[:, m:], periodic, name=str(path))
