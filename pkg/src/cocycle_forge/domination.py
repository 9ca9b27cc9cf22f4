"""k-domination of invariant splittings along a periodic orbit.

The ratio |A^(k)|E_x| / m(A^(k)|F_x)| is evaluated exactly: the numerator is
the operator norm on an orthonormal basis of E_x, and the conorm is the
reciprocal of the norm of the inverse composition on F at the end point.
Both are largest singular values, which survive accumulation of long
products without loss of accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances
from .decomposition import InvariantDecomposition, SplittingAlongOrbit, invariant_decomposition
from .errors import InvalidPartition, InvalidSplitting, NoInvariantSplitting

DEFAULT_KMAX = 64
_HALF = np.log(0.5)
_SLACK = 1e-12


def _accumulate_log_norms(mats: np.ndarray, bases: np.ndarray, k_max: int, backward: bool) -> np.ndarray:
    """out[k-1, n]: log operator norm of the k-step composition applied to bases[n].

    Forward: A_{n+k-1} ... A_n on bases[n].  Backward (``mats`` are inverses):
    A_{n-k}^{-1} ... A_{n-1}^{-1} on bases[n].
    """
    ell = len(mats)
    g = bases.copy()
    scale = np.zeros(ell)
    out = np.empty((k_max, ell))
    sites = np.arange(ell)
    for k in range(1, k_max + 1):
        idx = (sites + k - 1) % ell if not backward else (sites - k) % ell
        g = mats[idx] @ g
        mx = np.abs(g).max(axis=(1, 2))
        g /= mx[:, None, None]
        scale += np.log(mx)
        if g.shape[2] == 1:
            norms = np.linalg.norm(g[:, :, 0], axis=1)
        else:
            norms = np.linalg.norm(g, 2, axis=(1, 2))
        out[k - 1] = np.log(norms) + scale
    return out


def log_ratio_table(c: PeriodicCocycle, s: SplittingAlongOrbit, k_max: int) -> np.ndarray:
    """table[k-1, n] = log of the domination ratio at x_n for k steps."""
    ell = c.period
    log_e = _accumulate_log_norms(np.asarray(c.matrices), s.E, k_max, backward=False)
    log_finv = _accumulate_log_norms(np.asarray(c.inverses), s.F, k_max, backward=True)
    table = np.empty_like(log_e)
    for k in range(1, k_max + 1):
        table[k - 1] = log_e[k - 1] + log_finv[k - 1][(np.arange(ell) + k) % ell]
    return table


def _passes(log_ratios: np.ndarray) -> bool:
    return bool(np.all(log_ratios <= _HALF + _SLACK))


def validate_splitting(c: PeriodicCocycle, s: SplittingAlongOrbit, tol: Tolerances = DEFAULT_TOL) -> None:
    if s.E.shape[0] != c.period or s.E.shape[1] != c.dim:
        raise InvalidSplitting("splitting is not defined on this orbit")
    for name, bases in (("E", s.E), ("F", s.F)):
        gram = np.swapaxes(bases, 1, 2) @ bases
        if not np.allclose(gram, np.eye(bases.shape[2]), atol=1e-10):
            raise InvalidSplitting(f"{name} bases are not orthonormal")
    defect = s.invariance_defect(c)
    if defect >= tol.invariance:
        raise InvalidSplitting(f"splitting is not invariant (image distance {defect:.2e})")


def domination_ratios(c: PeriodicCocycle, s: SplittingAlongOrbit, k: int) -> np.ndarray:
    """Domination ratio at every orbit point for k-step compositions."""
    return np.exp(log_ratio_table(c, s, k)[k - 1])


def check_k_domination(c: PeriodicCocycle, s: SplittingAlongOrbit, k: int,
                       tol: Tolerances = DEFAULT_TOL) -> bool:
    if k < 1:
        raise ValueError("k must be a positive integer")
    validate_splitting(c, s, tol)
    return _passes(log_ratio_table(c, s, k)[k - 1])


def canonical_splitting(c: PeriodicCocycle, i: int, tol: Tolerances = DEFAULT_TOL,
                        decomposition: InvariantDecomposition | None = None) -> SplittingAlongOrbit:
    """The eigenspace splitting of the return product at index i, carried along the orbit."""
    dec = decomposition or invariant_decomposition(c, tol)
    return dec.splitting(i, tol)


@dataclass(frozen=True)
class IndexDomination:
    index: int
    k: int | None
    reason: str | None = None
    best_log_ratio: float | None = None

    def to_record(self) -> dict:
        return {"index": self.index, "k": self.k, "reason": self.reason}


@dataclass(frozen=True)
class InterfaceVerdict:
    index: int
    dominated: bool
    max_ratio: float | None
    reason: str | None = None

    def to_record(self) -> dict:
        return {"index": self.index, "dominated": self.dominated,
                "max_ratio": self.max_ratio, "reason": self.reason}


@dataclass(frozen=True)
class DominationReport:
    k_max: int
    indices: tuple[IndexDomination, ...]
    chain_results: tuple[InterfaceVerdict, ...] | None = field(default=None)

    def minimal_k(self, i: int) -> int | None:
        return self.indices[i - 1].k

    def to_record(self) -> dict:
        rec = {"k_max": self.k_max, "indices": [r.to_record() for r in self.indices]}
        if self.chain_results is not None:
            rec["chain"] = [v.to_record() for v in self.chain_results]
        return rec


def minimal_k(c: PeriodicCocycle, s: SplittingAlongOrbit, k_max: int) -> tuple[int | None, float]:
    table = log_ratio_table(c, s, k_max)
    worst = table.max(axis=1)
    ok = np.flatnonzero(worst <= _HALF + _SLACK)
    return (int(ok[0]) + 1 if ok.size else None), float(worst.min())


def domination_scan(c: PeriodicCocycle, k_max: int = DEFAULT_KMAX, tol: Tolerances = DEFAULT_TOL,
                    decomposition: InvariantDecomposition | None = None) -> DominationReport:
    """Minimal k at every index 1..d-1, or None (with reason) up to the cap."""
    if k_max < 1:
        raise ValueError("k_max must be a positive integer")
    dec = decomposition or invariant_decomposition(c, tol)
    rows = []
    for i in range(1, c.dim):
        try:
            s = dec.splitting(i, tol)
        except NoInvariantSplitting as exc:
            rows.append(IndexDomination(i, None, f"no invariant splitting: {exc}"))
            continue
        k, best = minimal_k(c, s, k_max)
        reason = None if k is not None else f"not dominated for any k <= {k_max}"
        rows.append(IndexDomination(i, k, reason, best))
    return DominationReport(k_max, tuple(rows))


def interfaces(dims: Sequence[int], d: int) -> list[int]:
    dims = list(dims)
    if any(int(x) != x or x < 1 for x in dims):
        raise InvalidPartition(f"bundle dimensions must be positive integers, got {dims}")
    if sum(dims) != d:
        raise InvalidPartition(f"bundle dimensions {dims} do not sum to {d}")
    if len(dims) < 2:
        raise InvalidPartition("a partition into one bundle has no interface")
    return [int(x) for x in np.cumsum(dims)[:-1]]


def check_chain_domination(c: PeriodicCocycle, dims: Sequence[int], k: int,
                           tol: Tolerances = DEFAULT_TOL,
                           decomposition: InvariantDecomposition | None = None) -> tuple[InterfaceVerdict, ...]:
    """One k-domination verdict per interface E_1..E_j | E_{j+1}..E_s of the partition."""
    cuts = interfaces(dims, c.dim)
    dec = decomposition or invariant_decomposition(c, tol)
    out = []
    for i in cuts:
        try:
            s = dec.splitting(i, tol)
        except NoInvariantSplitting as exc:
            out.append(InterfaceVerdict(i, False, None, f"no invariant splitting: {exc}"))
            continue
        ratios = domination_ratios(c, s, k)
        out.append(InterfaceVerdict(i, _passes(np.log(ratios)), float(ratios.max())))
    return tuple(out)
