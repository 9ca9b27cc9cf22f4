"""Invariant block decomposition of a periodic cocycle along its orbit.

Forward QR iteration yields, at every site, the flag of "top" invariant
subspaces (largest moduli first); iterating the inverse cocycle yields the
"bottom" flag.  Intersecting the two gives the invariant subspace of each
cluster of nearby moduli, on which the cocycle is a small well-conditioned
matrix sequence.  Each cluster is then split into elementary blocks (real
lines, rotation planes, repeated-eigenvalue blocks) by diagonalizing its
return map and transporting the pieces around the orbit with QR.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances
from .errors import InternalError, NoInvariantSplitting
from .spectrum import SpectrumReport, _report, orthogonal_iteration, qr_small, tie_sorted

_COINCIDENT = 1e-6
_TRANSVERSAL = 1e-8


@dataclass(frozen=True)
class Block:
    """An invariant sub-bundle carried by orthonormal frames along the orbit.

    ``bases[n]`` is a d x m orthonormal frame at x_n and ``steps[n]`` the
    m x m matrix of A_n in those frames: A_n bases[n] = bases[n+1] steps[n],
    with bases[l] = bases[0].
    """

    kind: str
    positions: tuple[int, ...]
    bases: np.ndarray
    steps: np.ndarray
    eigenvalues: np.ndarray
    log_moduli: np.ndarray

    @property
    def dim(self) -> int:
        return self.bases.shape[2]

    def return_map(self) -> tuple[np.ndarray, float]:
        """(Z, s) with the block return map equal to exp(s) * Z."""
        return scaled_product(self.steps)


@dataclass(frozen=True)
class SplittingAlongOrbit:
    """Complementary subspace fields E (dim i) and F (dim d-i) along the orbit."""

    index: int
    E: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        if self.E.shape[0] != self.F.shape[0] or self.E.shape[1] != self.F.shape[1]:
            raise ValueError("E and F must be given at the same sites in the same dimension")
        if self.E.shape[2] + self.F.shape[2] != self.E.shape[1]:
            raise ValueError("dim E + dim F must equal the ambient dimension")
        if self.E.shape[2] != self.index:
            raise ValueError("dim E must equal the splitting index")

    def invariance_defect(self, c: PeriodicCocycle) -> float:
        """Largest sine of a principal angle between A_n E_n and E_{n+1} (same for F)."""
        return max(_image_defect(c.matrices, self.E), _image_defect(c.matrices, self.F))


def _orth(x: np.ndarray) -> np.ndarray:
    return qr_small(x)[0][:, : x.shape[1]]


def _image_defect(mats: np.ndarray, bases: np.ndarray) -> float:
    ell = len(mats)
    worst = 0.0
    for n in range(ell):
        img = _orth(mats[n] @ bases[n])
        target = _orth(bases[(n + 1) % ell])
        resid = img - target @ (target.T @ img)
        worst = max(worst, float(np.linalg.norm(resid, 2)))
    return worst


def scaled_product(steps: np.ndarray) -> tuple[np.ndarray, float]:
    """Ordered product steps[-1] @ ... @ steps[0] as (unit-scaled matrix, log scale)."""
    m = steps.shape[1]
    prod = np.eye(m)
    log_scale = 0.0
    for s in steps:
        prod = s @ prod
        mx = np.abs(prod).max()
        prod /= mx
        log_scale += math.log(mx)
    return prod, log_scale


def _valid_flags(sweep, d: int) -> np.ndarray:
    """valid[k] for k = 0..d: the first k columns span the k dominant directions."""
    logm = np.concatenate(sweep.log_moduli)
    valid = np.zeros(d + 1, dtype=bool)
    valid[0] = valid[d] = True
    for k in range(1, d):
        if sweep.converged[k - 1]:
            lo, hi = logm[:k].min(), logm[k:].max()
            valid[k] = lo >= hi - 1e-12 * max(1.0, abs(hi))
    return valid


def _min_sine(bottom: np.ndarray, top: np.ndarray, i: int) -> float:
    """Smallest sine between span(bottom[:, :i]) and span(top[:, :d-i]) over all sites."""
    d = bottom.shape[1]
    worst = 1.0
    for qb, qf in zip(bottom, top):
        s = np.linalg.svd(qb[:, i:].T @ qf[:, : d - i], compute_uv=False)
        worst = min(worst, float(s.min()))
    return worst


def _intersection(qb: np.ndarray, qf: np.ndarray, a: int, b: int) -> np.ndarray:
    """Orthonormal basis of bottom-b ∩ top-(d-a) at one site."""
    d = qb.shape[0]
    if a == 0:
        return qb[:, :b]
    if b == d:
        return qf[:, : d - a]
    m = qb[:, b:].T @ qf[:, : d - a]
    _, _, vt = np.linalg.svd(m)
    return _orth(qf[:, : d - a] @ vt[d - b:].T)


def _sub_blocks(z: np.ndarray) -> list[tuple[str, np.ndarray]]:
    """Split a cluster return map into real invariant pieces (kind, basis)."""
    m = z.shape[0]
    if m == 1:
        return [("line", np.ones((1, 1)))]
    w, v = np.linalg.eig(z)
    scale = np.abs(w).max()
    # a conjugate pair this close to the axis is a split double real eigenvalue
    w = np.where(np.abs(w.imag) <= _COINCIDENT * scale, w.real + 0j, w)
    used = np.zeros(m, dtype=bool)
    pieces: list[tuple[str, np.ndarray, complex]] = []
    for k in np.argsort(-np.abs(w), kind="stable"):
        if used[k]:
            continue
        if w[k].imag != 0:
            dist = np.where(used | (np.arange(m) == k), np.inf, np.abs(w - np.conj(w[k])))
            partner = int(np.argmin(dist))
            used[k] = used[partner] = True
            vec = v[:, k] if w[k].imag > 0 else v[:, partner]
            pieces.append(("plane", np.column_stack([vec.real, vec.imag]), w[k]))
            continue
        group = [j for j in range(m) if not used[j] and w[j].imag == 0
                 and abs(w[j] - w[k]) <= _COINCIDENT * scale]
        used[group] = True
        lam = float(np.mean(w[group].real))
        if len(group) == 1:
            pieces.append(("line", v[:, [k]].real, lam))
            continue
        shifted = np.linalg.matrix_power(z - lam * np.eye(m), len(group))
        _, _, vt = np.linalg.svd(shifted)
        basis = vt[m - len(group):].T
        defect = np.linalg.norm((z - lam * np.eye(m)) @ basis, 2)
        kind = "scalar" if defect <= 1e-8 * scale else "jordan"
        pieces.append((kind, basis, lam))
    full = np.hstack([p[1] for p in pieces])
    if np.linalg.cond(full) > DEFAULT_TOL.defective_cond:
        return [("cluster", np.eye(m))]
    return [(kind, basis) for kind, basis, _ in pieces]


def _transport(cs: np.ndarray, basis: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Carry an invariant basis around the cluster sequence; return frames, steps, wrap residual."""
    ell, m, _ = cs.shape
    k = basis.shape[1]
    frames = np.empty((ell, m, k))
    steps = np.empty((ell, k, k))
    frames[0] = _orth(basis)
    for n in range(ell - 1):
        q, r = qr_small(cs[n] @ frames[n])
        frames[n + 1], steps[n] = q[:, :k], r[:k]
    last = cs[ell - 1] @ frames[ell - 1]
    steps[ell - 1] = frames[0].T @ last
    resid = np.linalg.norm(last - frames[0] @ steps[ell - 1]) / max(np.linalg.norm(last), 1e-300)
    return frames, steps, float(resid)


def _block_spectrum(kind: str, steps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = steps.shape[1]
    if k == 1:
        vals = steps[:, 0, 0]
        return (np.array([complex(np.prod(np.sign(vals)))]),
                np.array([float(np.log(np.abs(vals)).sum())]))
    unit, log_scale = scaled_product(steps)
    mu = np.linalg.eigvals(unit)
    logm = np.log(np.abs(mu)) + log_scale
    if kind in ("plane", "scalar", "jordan"):
        # all members share one modulus; the determinant fixes it exactly
        common = float(np.linalg.slogdet(steps)[1].sum()) / k
        logm = np.full(k, common)
    phase = mu / np.abs(mu)
    if kind == "plane":
        phase = np.array([phase[np.argmax(phase.imag)], np.conj(phase[np.argmax(phase.imag)])])
    return phase, logm


@dataclass(frozen=True)
class InvariantDecomposition:
    cocycle: PeriodicCocycle
    blocks: tuple[Block, ...]
    frames: np.ndarray
    coframes: np.ndarray
    spectrum: SpectrumReport
    defect: float

    def block_of(self, position: int) -> int:
        for b, blk in enumerate(self.blocks):
            if position in blk.positions:
                return b
        raise IndexError(position)

    def splitting(self, i: int, tol: Tolerances = DEFAULT_TOL) -> SplittingAlongOrbit:
        """E = sum of blocks at positions < i, F = the rest (i counts from 1)."""
        d = self.cocycle.dim
        if not 1 <= i <= d - 1:
            raise NoInvariantSplitting(f"index {i} outside 1..{d - 1}")
        if any(min(b.positions) < i <= max(b.positions) for b in self.blocks):
            raise NoInvariantSplitting(f"index {i} cuts through an indecomposable block")
        chi = self.spectrum.exponents
        if chi[i] - chi[i - 1] <= tol.exponent:
            raise NoInvariantSplitting(f"no exponent gap at index {i}")
        below = [b for b in self.blocks if max(b.positions) < i]
        above = [b for b in self.blocks if min(b.positions) >= i]
        ell = self.cocycle.period
        E = np.stack([_orth(np.hstack([b.bases[n] for b in below])) for n in range(ell)])
        F = np.stack([_orth(np.hstack([b.bases[n] for b in above])) for n in range(ell)])
        for e, f in zip(E, F):
            sine = np.linalg.svd(f - e @ (e.T @ f), compute_uv=False).min()
            if sine < _TRANSVERSAL:
                raise NoInvariantSplitting(f"E and F nearly parallel at index {i} (sine {sine:.1e})")
        return SplittingAlongOrbit(i, E, F)


def invariant_decomposition(c: PeriodicCocycle, tol: Tolerances = DEFAULT_TOL) -> InvariantDecomposition:
    mats = np.asarray(c.matrices)
    ell, d, _ = mats.shape
    fw = orthogonal_iteration(mats)
    bw = orthogonal_iteration(np.ascontiguousarray(c.inverses[::-1]))
    top = fw.frames
    bottom = np.stack([bw.frames[(ell - s) % ell] for s in range(ell)])
    fvalid, bvalid = _valid_flags(fw, d), _valid_flags(bw, d)
    cuts = [0]
    for i in range(1, d):
        if fvalid[d - i] and bvalid[i] and _min_sine(bottom, top, i) >= _TRANSVERSAL:
            cuts.append(i)
    cuts.append(d)

    raw: list[tuple[str, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
    defect = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        S = np.stack([_intersection(bottom[n], top[n], a, b) for n in range(ell)])
        S_next = np.roll(S, -1, axis=0)
        cs = np.einsum("nji,njk,nkl->nil", S_next, mats, S)
        resid = mats @ S - S_next @ cs
        rel = np.linalg.norm(resid, axis=(1, 2)) / np.linalg.norm(mats, axis=(1, 2))
        defect = max(defect, float(rel.max()))
        z, _ = scaled_product(cs)
        pieces = _sub_blocks(z)
        cluster_blocks = []
        for kind, basis in pieces:
            frames, steps, wrap = _transport(cs, basis)
            defect = max(defect, wrap)
            phase, logm = _block_spectrum(kind, steps)
            cluster_blocks.append((kind, np.einsum("nij,njk->nik", S, frames), steps, phase, logm))
        raw.extend(cluster_blocks)

    # global positions: sort all eigenvalues with the report's tie rule
    mu = np.concatenate([blk[3] for blk in raw])
    logm = np.concatenate([blk[4] for blk in raw])
    owner = np.concatenate([[k] * len(blk[3]) for k, blk in enumerate(raw)])
    order = tie_sorted(mu, logm)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    blocks = []
    for k, (kind, bases, steps, phase, lm) in enumerate(raw):
        pos = tuple(sorted(int(r) for r in rank[owner == k]))
        if pos != tuple(range(pos[0], pos[0] + len(pos))):
            raise InternalError("block eigenvalues are not contiguous in the spectrum")
        local = np.argsort([rank[j] for j in np.flatnonzero(owner == k)])
        blocks.append(Block(kind, pos, bases, steps, phase[local], lm[local]))
    blocks.sort(key=lambda blk: blk.positions[0])
    frames = np.concatenate([blk.bases for blk in blocks], axis=2)
    coframes = np.linalg.inv(frames)
    spectrum = _report(mu, logm, ell, tol)
    return InvariantDecomposition(c, tuple(blocks), frames, coframes, spectrum, defect)


def merge_lines(dec: InvariantDecomposition, b: int, tol: Tolerances = DEFAULT_TOL) -> InvariantDecomposition:
    """Fuse lines b and b+1 carrying the same real multiplier into one scalar block.

    Orthogonal iteration already splits a repeated semisimple multiplier into
    independent lines; fusing them exposes the plane on which any rotation
    commutes with the return map.
    """
    first, second = dec.blocks[b], dec.blocks[b + 1]
    if first.kind != "line" or second.kind != "line":
        raise NoInvariantSplitting("only two line blocks can be fused")
    if first.eigenvalues[0] != second.eigenvalues[0] or abs(
            first.log_moduli[0] - second.log_moduli[0]) > tol.modulus * dec.cocycle.period:
        raise NoInvariantSplitting("the two lines carry different multipliers")
    ell = dec.cocycle.period
    steps = np.zeros((ell, 2, 2))
    steps[:, 0, 0] = first.steps[:, 0, 0]
    steps[:, 1, 1] = second.steps[:, 0, 0]
    common = float(first.log_moduli[0] + second.log_moduli[0]) / 2
    fused = Block("scalar", first.positions + second.positions,
                  np.concatenate([first.bases, second.bases], axis=2), steps,
                  np.concatenate([first.eigenvalues, second.eigenvalues]), np.array([common, common]))
    blocks = dec.blocks[:b] + (fused,) + dec.blocks[b + 2:]
    return InvariantDecomposition(dec.cocycle, blocks, dec.frames, dec.coframes, dec.spectrum, dec.defect)
