"""Lyapunov spectra of periodic cocycles.

The return product of a long orbit is usually far too ill-conditioned to be
formed and diagonalized.  Instead we run orthogonal (QR) iteration around the
orbit until every invariant flag that can converge has converged, and only
diagonalize the small diagonal blocks ("clusters") between converged flags.
Moduli are tracked in log space, so the determinant identity holds to
rounding error regardless of how large the exponents are.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import lapack

from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances
from .errors import SingularProduct

_OFF_BLOCK_TOL = 1e-12
# iteration continues until no cluster spans more than this many nats of
# modulus: eigenvalues inside a cluster are then all resolved to near working
# precision by one small dense eigensolve
_SPREAD_MAX = 8.0
_MAX_PERIODS = 64


def _qr_packed(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Q and the packed factor whose upper triangle is R.

    Raw LAPACK is several times faster than ``np.linalg.qr`` on tiny
    matrices; callers take ``np.triu`` of whole stacks at once.
    """
    a, tau, _, _ = lapack.dgeqrf(m)
    q, _, _ = lapack.dorgqr(a, tau)
    return q, a


def qr_small(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, a = _qr_packed(m)
    return q, np.triu(a)


@lru_cache(maxsize=None)
def _start_frame(d: int) -> np.ndarray:
    # a fixed generic frame: deterministic, and transverse to every flag of
    # structured inputs (diagonal, permutation, block) with probability one
    rng = np.random.default_rng(7919 + d)
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    q.setflags(write=False)
    return q


@dataclass(frozen=True)
class Sweep:
    """Result of orthogonal iteration around the orbit.

    ``frames[n]`` is the orthonormal frame at the n-th visited site of the
    last period, ``r[n]`` the triangular factor of that step, ``converged[k]``
    whether the span of the first k columns is invariant (k = 1..d-1 stored at
    index k-1), and ``clusters`` the column ranges between converged flags
    with the log-moduli (descending) of each cluster's eigenvalues.
    """

    frames: np.ndarray
    r: np.ndarray
    overlap: np.ndarray
    converged: np.ndarray
    clusters: tuple[tuple[int, int], ...]
    eigenvalues: tuple[np.ndarray, ...]
    log_moduli: tuple[np.ndarray, ...]
    periods: int


def _segments(converged: np.ndarray, d: int) -> list[tuple[int, int]]:
    cuts = [0] + [k + 1 for k in np.flatnonzero(converged)] + [d]
    return list(zip(cuts[:-1], cuts[1:]))


def _cluster_eigs(overlap, rs, lo, hi):
    blocks = rs[:, lo:hi, lo:hi]
    if hi - lo == 1:
        vals = np.append(blocks[:, 0, 0], overlap[lo, lo])
        if not np.all(vals):
            return np.array([0j]), np.array([-np.inf])
        sign = float(np.prod(np.sign(vals)))
        return np.array([complex(sign)]), np.array([float(np.log(np.abs(vals)).sum())])
    scales = np.abs(blocks).max(axis=(1, 2))
    if not np.all(scales > 0):
        raise SingularProduct("return product has a vanishing factor")
    log_scale = float(np.log(scales).sum())
    blocks = blocks / scales[:, None, None]
    prod = np.eye(hi - lo)
    for n, b in enumerate(blocks):
        prod = b @ prod
        if n % 8 == 7:
            s = np.abs(prod).max()
            if s == 0:
                break
            prod /= s
            log_scale += math.log(s)
    t = overlap[lo:hi, lo:hi] @ prod
    mu = np.linalg.eigvals(t)
    with np.errstate(divide="ignore"):
        logm = np.log(np.abs(mu)) + log_scale
    order = np.argsort(-logm, kind="stable")
    return mu[order], logm[order]


def orthogonal_iteration(mats: np.ndarray, max_periods: int = _MAX_PERIODS,
                         spread_max: float = _SPREAD_MAX) -> Sweep:
    """Periodic QR iteration of the sequence ``mats`` (applied in order)."""
    ell, d, _ = mats.shape
    check_every = max(1, 4 // ell)
    q = _start_frame(d)
    frames = np.empty((ell + 1, d, d))
    rs = np.empty((ell, d, d))
    for period in range(1, max_periods + 1):
        frames[0] = q
        for n in range(ell):
            q, rs[n] = _qr_packed(mats[n] @ q)
            frames[n + 1] = q
        if period % check_every and period < max_periods:
            continue
        rs = np.triu(rs)
        overlap = frames[0].T @ q
        off = np.array([np.linalg.norm(overlap[k:, :k]) for k in range(1, d)])
        converged = off <= _OFF_BLOCK_TOL
        clusters = _segments(converged, d)
        spectra = [_cluster_eigs(overlap, rs, lo, hi) for lo, hi in clusters]
        # an unresolved (infinite) modulus also means "keep iterating"
        pending = any(not np.all(np.isfinite(logm)) or logm[0] - logm[-1] > spread_max
                      for _, logm in spectra)
        if not pending or period == max_periods:
            break
    if not all(np.all(np.isfinite(s[1])) for s in spectra):
        raise SingularProduct("a multiplier of the return product vanished at working precision")
    return Sweep(
        frames=frames[:ell].copy(),
        r=rs.copy(),
        overlap=overlap,
        converged=converged,
        clusters=tuple(clusters),
        eigenvalues=tuple(s[0] for s in spectra),
        log_moduli=tuple(s[1] for s in spectra),
        periods=period,
    )


def tie_sorted(mu: np.ndarray, logm: np.ndarray, rel: float = 1e-12) -> np.ndarray:
    """Indices ordering multipliers by modulus with the deterministic tie rule.

    Equal moduli: real before complex, then increasing real part, then the
    member of a conjugate pair with positive imaginary part first.
    """
    order = list(np.argsort(logm, kind="stable"))
    out: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and abs(logm[order[j]] - logm[order[j - 1]]) <= rel * max(1.0, abs(logm[order[j]])):
            j += 1
        group = order[i:j]
        group.sort(key=lambda k: (mu[k].imag != 0, mu[k].real, -mu[k].imag))
        out.extend(group)
        i = j
    return np.array(out, dtype=int)


@dataclass(frozen=True)
class SpectrumReport:
    period: int
    multipliers: np.ndarray
    exponents: np.ndarray
    log_moduli: np.ndarray
    stable_index: int
    hyperbolic: bool

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def moduli(self) -> np.ndarray:
        return np.exp(self.log_moduli)

    def is_real(self, k: int, tol: float = 1e-10) -> bool:
        lam = self.multipliers[k]
        return abs(lam.imag) <= tol * max(1.0, abs(lam))

    def to_record(self) -> dict:
        return {
            "period": self.period,
            "multipliers": [[float(z.real), float(z.imag)] for z in self.multipliers],
            "exponents": [float(x) for x in self.exponents],
            "stable_index": int(self.stable_index),
            "hyperbolic": bool(self.hyperbolic),
        }

    @classmethod
    def from_multipliers(cls, multipliers, period: int, tol: Tolerances = DEFAULT_TOL) -> "SpectrumReport":
        """Build a report from a bare multiplier list (for checks on hypothetical spectra)."""
        mu = np.asarray(multipliers, dtype=complex)
        with np.errstate(divide="ignore"):
            logm = np.log(np.abs(mu))
        return _report(mu, logm, period, tol)


def _report(mu, logm, period, tol: Tolerances) -> SpectrumReport:
    order = tie_sorted(mu, logm)
    mu, logm = mu[order], logm[order]
    # put exact conjugates back where LAPACK produced them as such
    mags = np.exp(np.clip(logm, -700, 700))
    phase = np.where(np.abs(mu) > 0, mu / np.where(np.abs(mu) > 0, np.abs(mu), 1), 1)
    multipliers = phase * mags
    multipliers.setflags(write=False)
    exps = logm / period
    exps.setflags(write=False)
    logm.setflags(write=False)
    stable = int(np.sum(logm < 0))
    hyperbolic = bool(np.all(np.abs(np.expm1(np.clip(logm, -700, 700))) > tol.modulus))
    return SpectrumReport(period, multipliers, exps, logm, stable, hyperbolic)


def lyapunov_spectrum(c: PeriodicCocycle, tol: Tolerances = DEFAULT_TOL) -> SpectrumReport:
    """Multipliers and exponents of the return product, smallest modulus first."""
    sweep = orthogonal_iteration(np.asarray(c.matrices))
    mu = np.concatenate(sweep.eigenvalues)
    logm = np.concatenate(sweep.log_moduli)
    return _report(mu, logm, c.period, tol)
