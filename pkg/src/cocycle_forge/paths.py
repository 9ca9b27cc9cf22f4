"""One-parameter families of cocycles with prescribed spectral behaviour.

All constructions share one mechanism.  Let V_n be the frame of invariant
blocks at x_n (W_n its inverse), and for a block b let Psi_{b,n} be the block
cocycle transported from x_0 to x_n.  Replacing A_n by A_n M_n(s) with

    M_n(s) = V_n  diag_b( Psi_{b,n} exp(s a_n L_b) Psi_{b,n}^{-1} )  W_n,

where the weights a_n >= 0 sum to one, makes the products telescope: the
return map of block b becomes exactly Z_b exp(s L_b).  Choosing generators
L_b that commute with Z_b therefore moves multipliers along closed-form
curves (moduli linearly in log scale, arguments linearly in angle), which is
what gives sum conservation and monotonicity by construction.  The weights
are proportional to the inverse sensitivity of each site so that the
perturbation is spread evenly along the orbit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances, site_distances
from .decomposition import Block, InvariantDecomposition, invariant_decomposition
from .errors import (EndpointMismatch, IndexOutOfRange, InsufficientBudget, InvalidArgument,
                     NotHyperbolic, PreconditionViolated, SignObstruction)
from .spectrum import SpectrumReport, lyapunov_spectrum

DEFAULT_GRID = 101
_SEPARATION_TARGET = 3e-6
_MAX_COLLAPSE_STAGES = 64


# --------------------------------------------------------------------- types

@dataclass(frozen=True)
class PathContract:
    """What a path promises; ``kind`` is blend, realify, weaken, collapse or complexify."""

    kind: str
    epsilon: float
    j: int | None = None
    i: int | None = None
    delta: float | None = None
    target: str | None = None

    def to_record(self) -> dict:
        rec = {"kind": self.kind, "epsilon": self.epsilon}
        for key in ("j", "i", "delta", "target"):
            if getattr(self, key) is not None:
                rec[key] = getattr(self, key)
        return rec


@dataclass(frozen=True, eq=False)
class CocyclePath:
    """Cocycles sampled on an increasing grid of t in [0, 1]; sample 0 is ``base``."""

    base: PeriodicCocycle
    grid: np.ndarray
    stacks: np.ndarray
    contract: PathContract | None = None
    meta: dict = field(default_factory=dict)
    family: Callable[[float], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        stacks = np.asarray(self.stacks, dtype=float)
        if grid.ndim != 1 or grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0):
            raise InvalidArgument("grid must increase from 0 to 1")
        if stacks.shape != (len(grid),) + self.base.matrices.shape:
            raise InvalidArgument("one cocycle per grid point, shaped like the base")
        if not np.array_equal(stacks[0], self.base.matrices):
            raise InvalidArgument("the t=0 sample must equal the base exactly")
        grid.setflags(write=False)
        stacks.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "stacks", stacks)

    def __len__(self) -> int:
        return len(self.grid)

    def cocycle(self, k: int) -> PeriodicCocycle:
        return PeriodicCocycle(self.stacks[k])

    @property
    def samples(self) -> dict[float, PeriodicCocycle]:
        return {float(t): self.cocycle(k) for k, t in enumerate(self.grid)}

    @property
    def endpoint(self) -> PeriodicCocycle:
        return self.cocycle(len(self.grid) - 1)

    def at(self, t: float) -> PeriodicCocycle:
        """Cocycle at any t in [0, 1] from the closed-form family (grid lookup otherwise)."""
        if self.family is not None:
            return PeriodicCocycle(self.family(float(t)))
        k = int(np.flatnonzero(np.isclose(self.grid, t))[0])
        return self.cocycle(k)

    @cached_property
    def site_radii(self) -> np.ndarray:
        """Distance from the base of every sample."""
        inv = np.linalg.inv(self.stacks)
        per_site = site_distances(self.base.matrices, self.base.inverses, self.stacks, inv)
        out = per_site.max(axis=1)
        out[0] = 0.0
        return out

    @property
    def radius(self) -> float:
        return float(self.site_radii.max())

    @cached_property
    def spectra(self) -> tuple[SpectrumReport, ...]:
        return tuple(lyapunov_spectrum(self.cocycle(k)) for k in range(len(self.grid)))

    def exponent_curves(self) -> np.ndarray:
        """(grid, d) array of exponents along the path."""
        return np.array([s.exponents for s in self.spectra])


def constant_path(c: PeriodicCocycle, grid: int = DEFAULT_GRID, contract: PathContract | None = None,
                  note: str = "constant") -> CocyclePath:
    ts = np.linspace(0.0, 1.0, grid)
    stacks = np.broadcast_to(c.matrices, (grid,) + c.matrices.shape).copy()
    return CocyclePath(c, ts, stacks, contract, {"note": note, "stages": 0},
                       family=lambda t: np.array(c.matrices))


def concatenate(p: CocyclePath, q: CocyclePath) -> CocyclePath:
    """p on [0, 1/2] followed by q on [1/2, 1]."""
    if not np.array_equal(p.stacks[-1], q.base.matrices):
        raise EndpointMismatch("the endpoint of the first path is not the base of the second")
    grid = np.concatenate([p.grid / 2, 0.5 + q.grid[1:] / 2])
    stacks = np.concatenate([p.stacks, q.stacks[1:]])
    family = None
    if p.family is not None and q.family is not None:
        pf, qf = p.family, q.family

        def family(t: float) -> np.ndarray:
            return pf(2 * t) if t <= 0.5 else qf(2 * t - 1)

    meta = {"note": "concatenation", "stages": p.meta.get("stages", 1) + q.meta.get("stages", 1)}
    return CocyclePath(p.base, grid, stacks, None, meta, family)


def _chain(paths: Sequence[CocyclePath]) -> CocyclePath:
    """Concatenate stages so that each gets an equal share of [0, 1]."""
    if len(paths) == 1:
        return paths[0]
    n = len(paths)
    grids, stacks = [], []
    for k, p in enumerate(paths):
        if k and not np.array_equal(paths[k - 1].stacks[-1], p.base.matrices):
            raise EndpointMismatch("stage endpoints do not match")
        g = (k + p.grid) / n
        grids.append(g if k == 0 else g[1:])
        stacks.append(p.stacks if k == 0 else p.stacks[1:])
    fams = [p.family for p in paths]
    family = None
    if all(f is not None for f in fams):
        def family(t: float) -> np.ndarray:
            k = min(int(t * n), n - 1)
            return fams[k](t * n - k)

    meta = {"note": "staged", "stages": sum(p.meta.get("stages", 1) for p in paths)}
    return CocyclePath(paths[0].base, np.concatenate(grids), np.concatenate(stacks), None, meta, family)


def _with(p: CocyclePath, contract: PathContract, **meta) -> CocyclePath:
    return CocyclePath(p.base, p.grid, p.stacks, contract, {**p.meta, **meta}, p.family)


# ------------------------------------------------------------------ steering

def _transport(steps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ell, m, _ = steps.shape
    psi = np.empty_like(steps)
    psi[0] = np.eye(m)
    for n in range(ell - 1):
        x = steps[n] @ psi[n]
        psi[n + 1] = x / np.abs(x).max()
    return psi, np.linalg.inv(psi)


@dataclass
class _Plan:
    """A single steering stage: block generators plus per-site weights."""

    base: PeriodicCocycle
    terms: list = field(default_factory=list)
    alpha: np.ndarray | None = None
    warp: Callable[[float], float] = staticmethod(lambda t: t)

    def matrices(self, s: float) -> np.ndarray:
        out = np.array(self.base.matrices)
        if s == 0.0:
            return out
        for left, gen, right in self.terms:
            m = gen.shape[0]
            if m == 1:
                e = np.expm1(s * self.alpha * gen[0, 0])[:, None, None]
            else:
                e = expm(s * self.alpha[:, None, None] * gen) - np.eye(m)
            out += left @ e @ right
        return out

    def at(self, t: float) -> np.ndarray:
        return self.matrices(self.warp(t))


def _plan(dec: InvariantDecomposition, gens: dict[int, np.ndarray], sites: Iterable[int] | None) -> _Plan:
    c = dec.cocycle
    ell, d = c.period, c.dim
    mats, invs = np.asarray(c.matrices), np.asarray(c.inverses)
    offsets = np.cumsum([0] + [b.dim for b in dec.blocks])
    terms = []
    fwd = np.zeros((ell, d, d))
    bwd = np.zeros((ell, d, d))
    for b, gen in gens.items():
        if not np.any(gen):
            continue
        blk = dec.blocks[b]
        psi, psi_inv = _transport(blk.steps)
        v = blk.bases @ psi
        w = psi_inv @ dec.coframes[:, offsets[b]:offsets[b + 1], :]
        terms.append((mats @ v, gen, w))
        fwd += mats @ v @ gen @ w
        bwd += v @ gen @ w @ invs
    if not terms:
        return _Plan(c, [], np.zeros(ell))
    sens = np.maximum(np.linalg.norm(fwd, 2, axis=(1, 2)), np.linalg.norm(bwd, 2, axis=(1, 2)))
    allowed = np.zeros(ell, dtype=bool)
    allowed[list(range(ell)) if sites is None else [s % ell for s in sites]] = True
    weights = np.where(allowed, 1.0 / np.maximum(sens, 1e-300), 0.0)
    if not weights.sum() > 0:
        raise InvalidArgument("no site is available for the perturbation")
    return _Plan(c, terms, weights / weights.sum())


def _sample(plan: _Plan, grid: int) -> tuple[np.ndarray, np.ndarray]:
    ts = np.linspace(0.0, 1.0, grid)
    stacks = np.stack([plan.at(t) for t in ts])
    stacks[0] = plan.base.matrices
    return ts, stacks


def _zero_crossing_warp(s_star: float, grid: int) -> Callable[[float], float]:
    """Monotone piecewise-linear reparametrization putting s_star midway between grid points."""
    h = 1.0 / (grid - 1)
    k = min(int(s_star / h), grid - 2)
    t_mid = (k + 0.5) * h

    def warp(t: float) -> float:
        if t <= t_mid:
            return t * s_star / t_mid
        return s_star + (t - t_mid) * (1 - s_star) / (1 - t_mid)

    return warp


def _stage_path(dec: InvariantDecomposition, gens: dict[int, np.ndarray], grid: int,
                sites=None, warp=None, scale: float = 1.0) -> CocyclePath:
    plan = _plan(dec, {b: scale * g for b, g in gens.items()}, sites)
    if warp is not None:
        plan.warp = warp
    ts, stacks = _sample(plan, grid)
    return CocyclePath(dec.cocycle, ts, stacks, None, {"stages": 1}, family=plan.at)


# -------------------------------------------------------------- generators

def _log_unit_rotation(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Real logarithm of a 2x2 matrix with determinant 1 and eigenvalues e^{+-i phi}."""
    cos_phi = float(np.clip(np.trace(m) / 2, -1.0, 1.0))
    phi = float(np.arccos(cos_phi))
    sinc = phi / np.sin(phi) if phi > 1e-12 else 1.0
    return sinc * (m - cos_phi * np.eye(2)), phi


def realify_generator(blk: Block) -> np.ndarray:
    """Generator turning a rotation block into +-rho*I while keeping its modulus."""
    z, _ = blk.return_map()
    m = z / np.sqrt(abs(np.linalg.det(z)))
    phi = float(np.arccos(np.clip(np.trace(m) / 2, -1.0, 1.0)))
    if phi > np.pi / 2:
        m = -m
    log_m, _ = _log_unit_rotation(m)
    return -log_m


def _shift_generator(blk: Block, shifts: Sequence[float]) -> np.ndarray:
    """Generator changing the log-moduli of a block's members by ``shifts`` (per period)."""
    shifts = np.asarray(shifts, dtype=float)
    if blk.kind in ("line", "scalar"):
        return np.diag(shifts)
    if np.ptp(shifts) > 0:
        raise PreconditionViolated(f"cannot move members of a {blk.kind} block independently")
    return shifts[0] * np.eye(blk.dim)


def _rotation_generator(blk: Block, theta: float) -> np.ndarray:
    if blk.dim != 2:
        raise PreconditionViolated("rotation needs a two-dimensional block")
    return theta * np.array([[0.0, -1.0], [1.0, 0.0]])


def _is_real_spectrum(s: SpectrumReport, tol: Tolerances) -> bool:
    return all(abs(z.imag) <= tol.imag * max(1.0, abs(z)) for z in s.multipliers)


def _complex_blocks(dec: InvariantDecomposition) -> list[int]:
    out = []
    for b, blk in enumerate(dec.blocks):
        if blk.kind == "plane":
            out.append(b)
        elif blk.kind == "cluster" and np.any(blk.eigenvalues.imag != 0):
            raise PreconditionViolated("near-defective block with non-real multipliers")
    return out


def _separation_shifts(dec: InvariantDecomposition, pair: tuple[int, int], mean_logm: float,
                       tol: Tolerances) -> dict[int, float]:
    """Tiny log-modulus shifts keeping other exponents away from the merged pair."""
    ell = dec.cocycle.period
    logm = dec.spectrum.log_moduli
    out: dict[int, float] = {}
    target = _SEPARATION_TARGET * ell
    for p in range(len(logm)):
        if p in pair:
            continue
        gap = logm[p] - mean_logm
        if abs(gap) <= 2 * tol.separation * ell:
            direction = 1.0 if gap >= 0 else -1.0
            out[p] = direction * target - gap
    return out


def _block_shifts(dec: InvariantDecomposition, shifts: dict[int, float]) -> dict[int, np.ndarray]:
    gens: dict[int, np.ndarray] = {}
    for b, blk in enumerate(dec.blocks):
        values = [shifts.get(p, 0.0) for p in blk.positions]
        if any(values):
            if blk.kind not in ("line", "scalar"):
                # equal-modulus members move together
                values = [float(np.mean(values))] * blk.dim
            gens[b] = _shift_generator(blk, values)
    return gens


def _merge(gens: dict[int, np.ndarray], extra: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    out = dict(gens)
    for b, g in extra.items():
        out[b] = out[b] + g if b in out else g
    return out


# ------------------------------------------------------------------- checks

def _check_budget(path: CocyclePath, eps: float, what: str) -> None:
    r = path.radius
    if r > eps:
        raise InsufficientBudget(f"{what} needs radius {r:.6g} > eps={eps:.6g}")


def _require_hyperbolic(s: SpectrumReport) -> None:
    if not s.hyperbolic:
        raise NotHyperbolic("the return product has a multiplier of modulus 1")


def _pair_blocks_need_realify(dec: InvariantDecomposition, positions: Iterable[int]) -> list[int]:
    return sorted({dec.block_of(p) for p in positions if dec.blocks[dec.block_of(p)].kind == "plane"})


# -------------------------------------------------------------- operations

def realify(c: PeriodicCocycle, eps: float, grid: int = DEFAULT_GRID, tol: Tolerances = DEFAULT_TOL,
            sites=None) -> CocyclePath:
    """Path to a cocycle with only real multipliers; every exponent stays constant."""
    contract = PathContract("realify", eps)
    dec = invariant_decomposition(c, tol)
    if _is_real_spectrum(dec.spectrum, tol):
        return constant_path(c, grid, contract, "already real")
    _require_hyperbolic(dec.spectrum)
    gens = {b: realify_generator(dec.blocks[b]) for b in _complex_blocks(dec)}
    path = _stage_path(dec, gens, grid, sites)
    _check_budget(path, eps, "realify")
    return _with(path, contract)


def _realify_stage(dec, blocks, grid, sites):
    gens = {b: realify_generator(dec.blocks[b]) for b in blocks}
    return _stage_path(dec, gens, grid, sites)


def _pair_stage(dec: InvariantDecomposition, p: int, q: int, target_p: float, target_q: float,
                grid: int, tol: Tolerances, *, realify_others: bool, separate: bool,
                sites=None, scale: float = 1.0) -> CocyclePath:
    """Move log-moduli at positions p, q (0-based) linearly to the targets (at scale 1)."""
    logm = dec.spectrum.log_moduli
    shifts = {p: target_p - logm[p], q: target_q - logm[q]}
    if separate:
        shifts.update(_separation_shifts(dec, (p, q), (target_p + target_q) / 2, tol))
    gens = _block_shifts(dec, shifts)
    if realify_others:
        gens = _merge(gens, {b: realify_generator(dec.blocks[b]) for b in _complex_blocks(dec)})
    warp = None
    # a member changing sign of its log-modulus must not land on a grid point
    for pos in (p, q):
        start, end = logm[pos], logm[pos] + scale * shifts[pos]
        if start * end < 0:
            warp = _zero_crossing_warp(-start / (end - start), grid)
    return _stage_path(dec, gens, grid, sites, warp, scale)


def blend_exponents(c: PeriodicCocycle, j: int, eps: float, grid: int = DEFAULT_GRID,
                    tol: Tolerances = DEFAULT_TOL, sites=None, realify_others: bool = True,
                    separate: bool = True) -> CocyclePath:
    """Merge chi_j and chi_{j+1} (1-based) into their mean, ending with real multipliers."""
    contract = PathContract("blend", eps, j=j)
    if not 1 <= j <= c.dim - 1:
        raise IndexOutOfRange(f"j={j} outside 1..{c.dim - 1}")
    dec = invariant_decomposition(c, tol)
    s = dec.spectrum
    if abs(s.exponents[j] - s.exponents[j - 1]) <= tol.exponent and (
            _is_real_spectrum(s, tol) or not s.hyperbolic):
        return constant_path(c, grid, contract, "degenerate: exponents already equal")
    # an equal but non-real pair still needs the realifying half of the path
    _require_hyperbolic(s)
    mean = float(s.log_moduli[j - 1] + s.log_moduli[j]) / 2
    stages = []
    inside = _pair_blocks_need_realify(dec, (j - 1, j))
    if inside:
        first = _realify_stage(dec, inside, grid, sites)
        stages.append(first)
        dec = invariant_decomposition(first.endpoint, tol)
    for p in (j - 1, j):
        blk = dec.blocks[dec.block_of(p)]
        if blk.kind in ("jordan", "cluster"):
            raise PreconditionViolated(f"position {p + 1} lies in a near-defective block")
    stages.append(_pair_stage(dec, j - 1, j, mean, mean, grid, tol,
                              realify_others=realify_others, separate=separate, sites=sites))
    path = _chain(stages)
    _check_budget(path, eps, "blend")
    # the budget is checked first: a merged pair of modulus one is reachable, just not hyperbolic
    if abs(np.expm1(mean)) <= tol.modulus:
        raise NotHyperbolic("the merged pair would have modulus 1")
    return _with(path, contract, stages=len(stages))


def weaken_target(tau: float, delta: float) -> float:
    return min((tau - delta) / 2, -delta / 2)


def weaken_exponent(c: PeriodicCocycle, i: int, delta: float, eps: float, grid: int = DEFAULT_GRID,
                    tol: Tolerances = DEFAULT_TOL, sites=None) -> CocyclePath:
    """Push a negative chi_i into (-delta, 0) while keeping chi_i + chi_{i+1} fixed."""
    contract = PathContract("weaken", eps, i=i, delta=delta)
    if not 1 <= i <= c.dim - 1:
        raise IndexOutOfRange(f"i={i} outside 1..{c.dim - 1}")
    if not delta > 0:
        raise InvalidArgument("delta must be positive")
    dec = invariant_decomposition(c, tol)
    s = dec.spectrum
    chi = s.exponents
    if not chi[i - 1] < 0 < chi[i]:
        raise PreconditionViolated(f"need chi_{i} < 0 < chi_{i + 1}, got {chi[i - 1]:.6g}, {chi[i]:.6g}")
    tau = float(chi[i - 1] + chi[i])
    if tau <= -delta:
        raise PreconditionViolated(f"tau = {tau:.6g} <= -delta")
    if -delta < chi[i - 1] < 0:
        return constant_path(c, grid, contract, "trivial: exponent already weak")
    _require_hyperbolic(s)
    ell = c.period
    target = weaken_target(tau, delta)
    mean = tau / 2
    u0 = (target - chi[i - 1]) / (mean - chi[i - 1])
    stages = []
    inside = _pair_blocks_need_realify(dec, (i - 1, i))
    if inside:
        first = _realify_stage(dec, inside, grid, sites)
        stages.append(first)
        dec = invariant_decomposition(first.endpoint, tol)
    logm = dec.spectrum.log_moduli
    lm_mean = float(logm[i - 1] + logm[i]) / 2
    stages.append(_pair_stage(dec, i - 1, i, lm_mean, lm_mean, grid, tol, realify_others=False,
                              separate=False, sites=sites, scale=u0))
    path = _chain(stages)
    _check_budget(path, eps, "weaken")
    return _with(path, contract, target=float(target), u0=float(u0), tau=tau, ell=ell)


def _collapse_pair(chi: np.ndarray, sink: bool, tol: Tolerances) -> int | None:
    """0-based lower index of the next pair to blend, smallest gap first."""
    d = len(chi)
    candidates = []
    for k in range(d - 1):
        gap = chi[k + 1] - chi[k]
        if gap <= tol.exponent:
            continue
        wrong = chi[k + 1] >= 0 if sink else chi[k] <= 0
        if wrong:
            candidates.append((gap, k))
    return min(candidates)[1] if candidates else None


def collapse_to_sink_or_source(c: PeriodicCocycle, target: str, eps: float, grid: int = DEFAULT_GRID,
                               tol: Tolerances = DEFAULT_TOL, sites=None) -> CocyclePath:
    """Cascade of pair blends until every exponent has the sign of the mean."""
    if target not in ("sink", "source"):
        raise InvalidArgument("target must be 'sink' or 'source'")
    sink = target == "sink"
    contract = PathContract("collapse", eps, target=target)
    s = lyapunov_spectrum(c, tol)
    total = float(s.exponents.sum())
    if (sink and total >= 0) or (not sink and total <= 0):
        raise SignObstruction(f"sum of exponents {total:.6g} has the wrong sign for a {target}")
    done = (lambda e: np.all(e < 0)) if sink else (lambda e: np.all(e > 0))
    if done(s.exponents) and s.hyperbolic:
        return constant_path(c, grid, contract, f"already a {target}")
    _require_hyperbolic(s)
    stages: list[CocyclePath] = []
    current = c
    for _ in range(_MAX_COLLAPSE_STAGES):
        dec = invariant_decomposition(current, tol)
        chi = dec.spectrum.exponents
        if done(chi):
            break
        k = _collapse_pair(chi, sink, tol)
        if k is None:
            raise InsufficientBudget("no pair left to blend")
        inside = _pair_blocks_need_realify(dec, (k, k + 1))
        if inside:
            stage = _realify_stage(dec, inside, grid, sites)
        else:
            mean = float(dec.spectrum.log_moduli[k] + dec.spectrum.log_moduli[k + 1]) / 2
            if abs(np.expm1(mean)) <= tol.modulus:
                raise NotHyperbolic("an intermediate merged pair would have modulus 1")
            stage = _pair_stage(dec, k, k + 1, mean, mean, grid, tol, realify_others=False,
                                separate=False, sites=sites)
        stages.append(stage)
        current = stage.endpoint
        if _chain(stages).radius > eps:
            raise InsufficientBudget(f"collapse exceeds eps={eps:.6g} after {len(stages)} stages")
    else:
        raise InsufficientBudget(f"collapse did not finish within {_MAX_COLLAPSE_STAGES} stages")
    path = _chain(stages)
    _check_budget(path, eps, "collapse")
    return _with(path, contract, stages=len(stages))


# ------------------------------------------------------------ verification

@dataclass(frozen=True)
class ClauseResult:
    name: str
    passed: bool
    margin: float

    def to_record(self) -> dict:
        return {"clause": self.name, "passed": self.passed, "margin": self.margin}


@dataclass(frozen=True)
class ContractVerdict:
    kind: str
    passed: bool
    clauses: tuple[ClauseResult, ...]

    def __bool__(self) -> bool:
        return self.passed

    def clause(self, name: str) -> ClauseResult:
        return next(c for c in self.clauses if c.name == name)

    def to_record(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "clauses": [c.to_record() for c in self.clauses]}


def _clause(name: str, margin: float, strict: bool = True) -> ClauseResult:
    margin = float(margin)
    return ClauseResult(name, bool(margin > 0 if strict else margin >= 0), margin)


def _hyperbolic_margin(spectra, tol: Tolerances) -> float:
    worst = min(float(np.abs(np.expm1(np.clip(s.log_moduli, -700, 700))).min()) for s in spectra)
    return worst - tol.modulus


def _others_margin(chi: np.ndarray, keep: Sequence[int], tol: Tolerances) -> float:
    others = [m for m in range(chi.shape[1]) if m not in keep]
    if not others:
        return tol.other_exponent
    drift = np.abs(chi[:, others] - chi[0, others]).max()
    return tol.other_exponent - drift


def _real_margin(s: SpectrumReport, tol: Tolerances) -> float:
    worst = max(abs(z.imag) / max(1.0, abs(z)) for z in s.multipliers)
    return tol.imag - worst


def _separation_margin(chi: np.ndarray, k: int, tol: Tolerances) -> float:
    others = np.delete(chi, [k, k + 1])
    if others.size == 0:
        return np.inf
    return float(np.abs(others - chi[k]).min()) - tol.separation


def verify_contract(p: CocyclePath, contract: PathContract, tol: Tolerances = DEFAULT_TOL) -> ContractVerdict:
    """Evaluate every clause of ``contract`` on the sampled grid of ``p``."""
    spectra = p.spectra
    chi = np.array([s.exponents for s in spectra])
    end = spectra[-1]
    clauses = [
        _clause("radius <= eps", contract.epsilon - p.radius, strict=False),
        _clause("hyperbolic on grid", _hyperbolic_margin(spectra, tol)),
    ]
    kind = contract.kind
    if kind == "blend":
        k = contract.j - 1
        pair = chi[:, k] + chi[:, k + 1]
        clauses += [
            _clause("other exponents near start", _others_margin(chi, (k, k + 1), tol)),
            _clause("pair sum conserved", tol.conservation - np.abs(pair - pair[0]).max()),
            _clause("chi_j nondecreasing", tol.monotone + min(0.0, np.diff(chi[:, k]).min(initial=0.0))),
            _clause("chi_j+1 nonincreasing", tol.monotone - max(0.0, np.diff(chi[:, k + 1]).max(initial=0.0))),
            _clause("endpoint equal exponents", tol.endpoint - abs(chi[-1, k + 1] - chi[-1, k])),
            _clause("endpoint multipliers real", _real_margin(end, tol)),
            _clause("endpoint separation", _separation_margin(chi[-1], k, tol)),
        ]
    elif kind == "realify":
        clauses += [
            _clause("exponents constant", tol.conservation - np.abs(chi - chi[0]).max()),
            _clause("endpoint multipliers real", _real_margin(end, tol)),
        ]
    elif kind == "weaken":
        k, delta = contract.i - 1, contract.delta
        tau = chi[:, k] + chi[:, k + 1]
        target = weaken_target(float(tau[0]), delta)
        clauses += [
            _clause("signs kept", min((-chi[:, k]).min(), chi[:, k + 1].min())),
            _clause("tau conserved", tol.conservation - np.abs(tau - tau[0]).max()),
            _clause("endpoint value", tol.endpoint - abs(chi[-1, k] - target)),
            _clause("endpoint in (-delta, 0)", min(chi[-1, k] + delta, -chi[-1, k])),
            _clause("other exponents near start", _others_margin(chi, (k, k + 1), tol)),
        ]
    elif kind == "collapse":
        total = chi.sum(axis=1)
        sign = -1.0 if contract.target == "sink" else 1.0
        clauses += [
            _clause("volume conserved", tol.conservation - np.abs(total - total[0]).max()),
            _clause(f"endpoint is a {contract.target}", (sign * chi[-1]).min()),
        ]
    elif kind == "complexify":
        k = contract.j - 1
        lam = end.multipliers
        im = min(abs(lam[k].imag), abs(lam[k + 1].imag))
        clauses += [
            _clause("endpoint non-real pair", im - tol.modulus),
            _clause("endpoint conjugate pair", 1e-12 * max(1.0, abs(lam[k])) - abs(lam[k] - np.conj(lam[k + 1]))),
            _clause("endpoint separation", _separation_margin(chi[-1], k, tol)),
        ]
    else:
        raise InvalidArgument(f"unknown contract kind {kind!r}")
    return ContractVerdict(kind, all(c.passed for c in clauses), tuple(clauses))
