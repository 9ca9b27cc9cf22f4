"""Two-loop orbits around a fixed saddle, complexification of a central pair,
and domination scans over locally constant cocycles on subshifts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .cocycle import DEFAULT_TOL, PeriodicCocycle, Tolerances
from .decomposition import InvariantDecomposition, invariant_decomposition, merge_lines
from .domination import DEFAULT_KMAX, log_ratio_table
from .errors import (EmptyLanguage, InvalidArgument, InvalidCocycle, IndexOutOfRange,
                     InsufficientBudget, NoCentralPlane, NoInvariantSplitting, NotHyperbolic,
                     OrientationObstruction)
from .paths import (DEFAULT_GRID, CocyclePath, PathContract, _block_shifts, _chain, _check_budget,
                    _merge, _pair_stage, _require_hyperbolic, _rotation_generator,
                    _separation_shifts, _stage_path, _with, constant_path)

MAX_WORD_LENGTH = 20
_MIN_ANGLE = 1e-6


# ------------------------------------------------------------------ two loops

@dataclass(frozen=True)
class TwoLoopSpec:
    fixed: np.ndarray
    transition: tuple[np.ndarray, ...]
    n: int

    def __post_init__(self):
        fixed = np.array(self.fixed, dtype=float)
        if fixed.ndim != 2 or fixed.shape[0] != fixed.shape[1]:
            raise InvalidCocycle("fixed must be a square matrix")
        trans = tuple(np.array(t, dtype=float) for t in self.transition)
        if not trans:
            raise InvalidCocycle("at least one transition matrix is required")
        if any(t.shape != fixed.shape for t in trans):
            raise InvalidCocycle("transition matrices must match the fixed matrix in shape")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "transition", trans)
        object.__setattr__(self, "n", int(self.n))

    @property
    def r(self) -> int:
        return len(self.transition)

    @property
    def period(self) -> int:
        return 2 * self.n + 2 + 2 * self.r

    def fixed_sites(self) -> list[int]:
        """Orbit positions spent at the fixed matrix (0-based)."""
        n1, r = self.n + 1, self.r
        return list(range(n1)) + list(range(n1 + r, 2 * n1 + r))

    def one_loop(self) -> PeriodicCocycle:
        return PeriodicCocycle(np.array([self.fixed] * (self.n + 1) + list(self.transition)))


def build_two_loop_cocycle(spec: TwoLoopSpec, tol: Tolerances = DEFAULT_TOL) -> PeriodicCocycle:
    w = np.linalg.eigvals(spec.fixed)
    if np.any(w == 0):
        raise InvalidCocycle("the fixed matrix is singular")
    if np.any(np.abs(np.log(np.abs(w))) <= tol.modulus):
        raise NotHyperbolic("the fixed matrix has an eigenvalue of modulus 1")
    loop = [spec.fixed] * (spec.n + 1) + list(spec.transition)
    return PeriodicCocycle(np.array(loop + loop))


def _central_blocks(dec: InvariantDecomposition, j: int) -> list[int]:
    """Blocks making up exactly positions j-1, j (0-based), or NoCentralPlane."""
    d = dec.cocycle.dim
    if not 1 <= j <= d - 1:
        raise IndexOutOfRange(f"j={j} outside 1..{d - 1}")
    blocks = sorted({dec.block_of(j - 1), dec.block_of(j)})
    covered = sorted(p for b in blocks for p in dec.blocks[b].positions)
    if covered != [j - 1, j]:
        raise NoCentralPlane(f"positions {j}, {j + 1} do not span an invariant plane field")
    if any(dec.blocks[b].kind == "cluster" for b in blocks):
        raise NoCentralPlane("the central plane field degenerates along the orbit")
    return blocks


def central_orientation_sign(c: PeriodicCocycle, j: int, tol: Tolerances = DEFAULT_TOL,
                             decomposition: InvariantDecomposition | None = None) -> int:
    """Sign of the determinant of the return map restricted to the central plane (j, j+1)."""
    dec = decomposition or invariant_decomposition(c, tol)
    blocks = _central_blocks(dec, j)
    sign = 1.0
    for b in blocks:
        # det of the block return map = product of the per-step determinants
        sign *= float(np.prod(np.sign(np.linalg.det(dec.blocks[b].steps))))
    return 1 if sign > 0 else -1


def make_complex(c: PeriodicCocycle, j: int, eps: float, grid: int = DEFAULT_GRID,
                 tol: Tolerances = DEFAULT_TOL, sites: Sequence[int] | None = None) -> CocyclePath:
    """Path ending with lambda_j, lambda_{j+1} a non-real conjugate pair.

    The pair is first merged to a common real multiplier (a blend without
    realifying anything else), then rotated inside its plane.  The rotation
    angle starts at pi/2 and is halved until the path fits the budget.
    """
    contract = PathContract("complexify", eps, j=j)
    dec = invariant_decomposition(c, tol)
    blocks = _central_blocks(dec, j)
    s = dec.spectrum
    if len(blocks) == 1 and dec.blocks[blocks[0]].kind == "plane":
        return constant_path(c, grid, contract, "already a non-real pair")
    _require_hyperbolic(s)
    if central_orientation_sign(c, j, tol, dec) < 0:
        lam = s.multipliers[j - 1: j + 1].real
        raise OrientationObstruction(f"central multipliers have opposite signs ({lam[0]:.6g}, {lam[1]:.6g})")
    stages: list[CocyclePath] = []
    logm = s.log_moduli
    mean = float(logm[j - 1] + logm[j]) / 2
    if abs(np.expm1(mean)) <= tol.modulus:
        raise NotHyperbolic("the merged central pair would have modulus 1")
    if len(blocks) == 2:
        first = _pair_stage(dec, j - 1, j, mean, mean, grid, tol, realify_others=False,
                            separate=False, sites=sites)
        _check_budget(first, eps, "complexify")
        stages.append(first)
        dec = invariant_decomposition(first.endpoint, tol)
        blocks = _central_blocks(dec, j)
    if len(blocks) == 2:
        try:
            dec = merge_lines(dec, blocks[0], tol)
        except NoInvariantSplitting as exc:
            raise NoCentralPlane(f"the merged central pair is not a scalar plane: {exc}") from None
        blocks = [blocks[0]]
    if dec.blocks[blocks[0]].kind != "scalar":
        raise NoCentralPlane("the merged central pair does not form a scalar plane block")
    b = blocks[0]
    sep = _block_shifts(dec, _separation_shifts(dec, (j - 1, j), mean, tol))
    theta = np.pi / 2
    while theta >= _MIN_ANGLE:
        gens = _merge(sep, {b: _rotation_generator(dec.blocks[b], theta)})
        rot = _stage_path(dec, gens, grid, sites)
        path = _chain(stages + [rot])
        if path.radius <= eps:
            return _with(path, contract, theta=float(theta), stages=len(stages) + 1)
        theta /= 2
    raise InsufficientBudget(f"no rotation above {_MIN_ANGLE:g} rad fits eps={eps:.6g}")


# ------------------------------------------------------------------ subshifts

@dataclass(frozen=True)
class SftCocycle:
    """Locally constant cocycle over a subshift of finite type.

    ``transitions[a][b]`` allows symbol b to follow symbol a.
    """

    alphabet: tuple[str, ...]
    transitions: np.ndarray
    assignment: dict = field(hash=False)

    def __post_init__(self):
        alphabet = tuple(str(a) for a in self.alphabet)
        if not alphabet or len(set(alphabet)) != len(alphabet):
            raise InvalidCocycle("alphabet must be a nonempty list of distinct symbols")
        t = np.array(self.transitions, dtype=bool)
        if t.shape != (len(alphabet), len(alphabet)):
            raise InvalidCocycle("transition table must be square over the alphabet")
        if set(self.assignment) != set(alphabet):
            raise InvalidCocycle("every symbol needs exactly one matrix")
        mats = {a: np.array(self.assignment[a], dtype=float) for a in alphabet}
        shapes = {m.shape for m in mats.values()}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2 or len(set(next(iter(shapes)))) != 1:
            raise InvalidCocycle("symbol matrices must be square and of one size")
        for a, m in mats.items():
            if not np.all(np.isfinite(m)) or abs(np.linalg.det(m)) < 1e-12 * max(np.abs(m).max(), 1e-300) ** m.shape[0]:
                raise InvalidCocycle(f"matrix for symbol {a!r} is not invertible")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "assignment", mats)

    @classmethod
    def full_shift(cls, assignment: dict) -> "SftCocycle":
        k = len(assignment)
        return cls(tuple(assignment), np.ones((k, k), dtype=bool), assignment)

    @property
    def dim(self) -> int:
        return next(iter(self.assignment.values())).shape[0]

    def word_cocycle(self, word: Sequence[str]) -> PeriodicCocycle:
        return PeriodicCocycle(np.array([self.assignment[a] for a in word]))

    def periodic_words(self, max_period: int) -> Iterator[tuple[str, ...]]:
        """Primitive periodic words up to rotation (Lyndon words), in lexicographic order.

        Powers and rotations of a word induce the same orbit, so this is a
        complete list of periodic orbits of period <= max_period.
        """
        if not 1 <= max_period <= MAX_WORD_LENGTH:
            raise InvalidArgument(f"max_period must lie in 1..{MAX_WORD_LENGTH}")
        t = self.transitions
        k = len(self.alphabet)
        order = sorted(range(k), key=lambda i: self.alphabet[i])
        rank = {s: r for r, s in enumerate(order)}
        word: list[int] = []

        # Fredricksen-Kessler-Maiorana recursion with the transition table as a pruning filter
        def extend(p: int) -> Iterator[tuple[str, ...]]:
            n = len(word)
            if n and p == n and t[word[-1], word[0]]:
                yield tuple(self.alphabet[i] for i in word)
            if n == max_period:
                return
            floor = rank[word[n - p]] if n else 0
            for r in range(floor, k):
                sym = order[r]
                if n and not t[word[-1], sym]:
                    continue
                word.append(sym)
                yield from extend(p if n and r == floor else n + 1)
                word.pop()

        yield from extend(1)


@dataclass(frozen=True)
class WordVerdict:
    word: str
    index: int
    dominated: bool
    max_ratio: float
    reason: str | None = None

    def to_record(self) -> dict:
        return {"word": self.word, "index": self.index, "dominated": self.dominated,
                "max_ratio": self.max_ratio, "reason": self.reason}


@dataclass(frozen=True)
class SftIndexSummary:
    index: int
    uniform: bool
    worst_word: str
    worst_ratio: float
    first_violation: str | None

    def to_record(self) -> dict:
        return {"index": self.index, "uniform": self.uniform, "worst_word": self.worst_word,
                "worst_ratio": self.worst_ratio, "first_violation": self.first_violation}


@dataclass(frozen=True)
class SftScanReport:
    k: int
    max_period: int
    words: int
    summaries: tuple[SftIndexSummary, ...]
    verdicts: tuple[WordVerdict, ...]

    @property
    def uniform(self) -> bool:
        return all(s.uniform for s in self.summaries)

    def summary(self, index: int) -> SftIndexSummary:
        return self.summaries[index - 1]

    def to_record(self, details: bool = False) -> dict:
        rec = {"k": self.k, "max_period": self.max_period, "words": self.words,
               "uniform": self.uniform, "indices": [s.to_record() for s in self.summaries]}
        if details:
            rec["verdicts"] = [v.to_record() for v in self.verdicts]
        return rec


def word_domination(c: PeriodicCocycle, k: int, tol: Tolerances = DEFAULT_TOL,
                    label: str = "") -> list[WordVerdict]:
    """k-domination verdict of the canonical splitting at every index of one periodic word."""
    dec = invariant_decomposition(c, tol)
    out = []
    for i in range(1, c.dim):
        try:
            s = dec.splitting(i, tol)
        except NoInvariantSplitting as exc:
            out.append(WordVerdict(label, i, False, float("inf"), f"no invariant splitting: {exc}"))
            continue
        worst = float(log_ratio_table(c, s, k)[k - 1].max())
        out.append(WordVerdict(label, i, worst <= np.log(0.5) + 1e-12, float(np.exp(worst))))
    return out


def sft_domination_scan(sft: SftCocycle, k: int, max_period: int,
                        tol: Tolerances = DEFAULT_TOL) -> SftScanReport:
    if int(k) != k or k < 1:
        raise InvalidArgument("k must be a positive integer")
    if k > DEFAULT_KMAX * 16:
        raise InvalidArgument(f"k={k} is beyond the supported range")
    verdicts: list[WordVerdict] = []
    count = 0
    for word in sft.periodic_words(max_period):
        count += 1
        verdicts += word_domination(sft.word_cocycle(word), int(k), tol, "".join(word) if all(
            len(a) == 1 for a in sft.alphabet) else " ".join(word))
    if not count:
        raise EmptyLanguage(f"no periodic word of length <= {max_period}")
    summaries = []
    for i in range(1, sft.dim):
        rows = [v for v in verdicts if v.index == i]
        # strict comparison keeps the lexicographically first word among ties
        worst = rows[0]
        for v in rows[1:]:
            if v.max_ratio > worst.max_ratio:
                worst = v
        bad = next((v.word for v in rows if not v.dominated), None)
        summaries.append(SftIndexSummary(i, bad is None, worst.word, worst.max_ratio, bad))
    return SftScanReport(int(k), max_period, count, tuple(summaries), tuple(verdicts))
