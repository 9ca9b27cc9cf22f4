"""Spectral predicates evaluated on SpectrumReports.

Indices follow the usual 1-based convention: chi_1 <= ... <= chi_d.
Every predicate returns a verdict carrying the clause-by-clause outcome, so a
failure says which condition broke.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cocycle import DEFAULT_TOL, Tolerances
from .errors import IndexOutOfRange, InvalidArgument
from .spectrum import SpectrumReport


@dataclass(frozen=True)
class Verdict:
    name: str
    holds: bool
    clauses: dict[str, bool] = field(default_factory=dict)
    witness: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def to_record(self) -> dict:
        return {"property": self.name, "holds": self.holds,
                "clauses": dict(self.clauses), "witness": self.witness}


def _verdict(name: str, clauses: dict[str, bool], extra: str = "") -> Verdict:
    failed = [k for k, ok in clauses.items() if not ok]
    holds = not failed
    witness = ("all clauses hold" if holds else "violated: " + ", ".join(failed))
    if extra:
        witness += f" ({extra})"
    return Verdict(name, holds, clauses, witness)


def _check_index(j: int, lo: int, hi: int, what: str) -> None:
    if not lo <= j <= hi:
        raise IndexOutOfRange(f"{what}={j} outside {lo}..{hi}")


def _nonreal(s: SpectrumReport, k: int, tol: Tolerances) -> bool:
    lam = s.multipliers[k]
    return abs(lam.imag) > tol.modulus * max(1.0, abs(lam))


def _separated(chi: np.ndarray, j: int, tol: Tolerances) -> bool:
    """chi_m != chi_j (beyond tolerance) for all m other than j, j+1 (0-based j)."""
    others = np.delete(chi, [j, j + 1])
    return bool(np.all(np.abs(others - chi[j]) > tol.exponent))


# ---------------------------------------------------------------- dissipativity

@dataclass(frozen=True)
class DissipativityReport:
    dissipative_forward: bool
    dissipative_backward: bool
    uniform_alpha: float | None
    uniform_alpha_backward: float | None
    alphas: tuple[float, ...]
    alphas_backward: tuple[float, ...]

    def to_record(self) -> dict:
        return {
            "dissipative_forward": self.dissipative_forward,
            "dissipative_backward": self.dissipative_backward,
            "uniform_alpha": self.uniform_alpha,
            "uniform_alpha_backward": self.uniform_alpha_backward,
        }


def check_sectional_dissipativity(spectra: Sequence[SpectrumReport]) -> DissipativityReport:
    """Consecutive multiplier products against alpha^period, forward and for the inverse.

    For one report the admissible alphas are exactly those above
    exp(max_k (chi_k + chi_{k+1})); that infimum is what ``alphas`` lists,
    and ``uniform_alpha`` is the largest of them when all are below 1.
    """
    if not spectra:
        raise InvalidArgument("at least one spectrum is required")
    fwd, bwd = [], []
    for s in spectra:
        pair = s.exponents[:-1] + s.exponents[1:]
        fwd.append(float(np.exp(pair.max())))
        # the inverse spectrum is the negated, reversed list
        bwd.append(float(np.exp(-pair.min())))
    forward = all(a < 1 for a in fwd)
    backward = all(a < 1 for a in bwd)
    return DissipativityReport(
        forward, backward,
        max(fwd) if forward else None,
        max(bwd) if backward else None,
        tuple(fwd), tuple(bwd),
    )


# ------------------------------------------------------------ named properties

def equal_pair_real(s: SpectrumReport, j: int, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """chi_j = chi_{j+1}, no other exponent equal to them, every multiplier real."""
    _check_index(j, 1, s.dim - 1, "j")
    chi, k = s.exponents, j - 1
    clauses = {
        "equal exponents": abs(chi[k + 1] - chi[k]) <= tol.exponent,
        "other exponents differ": _separated(chi, k, tol),
        "all multipliers real": all(not _nonreal(s, m, tol) for m in range(s.dim)),
    }
    return _verdict(f"P_{{{j},{j + 1}}}", clauses)


def weak_exponent(s: SpectrumReport, i: int, delta: float, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """chi_i lies in the open interval (-delta, 0)."""
    _check_index(i, 1, s.dim, "i")
    if not delta > 0:
        raise InvalidArgument(f"delta must be positive, got {delta}")
    x = s.exponents[i - 1]
    clauses = {"above -delta": x > -delta, "negative": x < 0}
    return _verdict(f"P_{{{i},delta}}", clauses, f"chi_{i}={x:.12g}, delta={delta:g}")


def complex_pair(s: SpectrumReport, j: int, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """lambda_j, lambda_{j+1} non-real conjugates whose exponent no other one shares."""
    _check_index(j, 1, s.dim - 1, "j")
    chi, k = s.exponents, j - 1
    lam = s.multipliers
    clauses = {
        "non-real pair": _nonreal(s, k, tol) and _nonreal(s, k + 1, tol),
        "conjugate": abs(lam[k] - np.conj(lam[k + 1])) <= 1e-9 * max(1.0, abs(lam[k])),
        "equal exponents": abs(chi[k + 1] - chi[k]) <= tol.exponent,
        "other exponents differ": _separated(chi, k, tol),
    }
    return _verdict(f"P_{{{j},{j + 1},C}}", clauses)


def strong_stable_gap(s: SpectrumReport, i: int, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """chi_{i-1} < chi_i (the spectral half of the strong-stable property)."""
    _check_index(i, 2, s.dim, "i")
    chi = s.exponents
    return _verdict(f"P_ss({i}) spectral", {"strict gap": chi[i - 2] < chi[i - 1] - tol.exponent})


def central_sum_nonnegative(s: SpectrumReport, i: int | None = None, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """chi_i + chi_{i+1} >= 0; i defaults to the stable index."""
    if i is None:
        i = s.stable_index
    _check_index(i, 1, s.dim - 1, "i")
    total = float(s.exponents[i - 1] + s.exponents[i])
    return _verdict("central sum", {"sum nonnegative": total >= -tol.exponent},
                    f"chi_{i}+chi_{i + 1}={total:.12g}")


def viral_spectral(spectra: Sequence[SpectrumReport], tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Spectral clauses (1) and (4) of the viral property over a set of periodic points.

    (1) for every j some point has a non-real pair at j, j+1 with chi_k != chi_j
    elsewhere; (4) some point has chi_1 + chi_2 < 0 and some has
    chi_{d-1} + chi_d > 0.
    """
    if not spectra:
        raise InvalidArgument("at least one spectrum is required")
    d = spectra[0].dim
    if any(s.dim != d for s in spectra):
        raise InvalidArgument("all spectra must have the same dimension")
    clauses: dict[str, bool] = {}
    notes = []
    for j in range(1, d):
        hits = [n for n, s in enumerate(spectra)
                if _nonreal(s, j - 1, tol) and _nonreal(s, j, tol) and _separated(s.exponents, j - 1, tol)]
        clauses[f"(1) non-real pair at {j},{j + 1}"] = bool(hits)
        if hits:
            notes.append(f"j={j}: point {hits[0]}")
    minus = [n for n, s in enumerate(spectra) if s.exponents[0] + s.exponents[1] < -tol.exponent]
    plus = [n for n, s in enumerate(spectra) if s.exponents[-2] + s.exponents[-1] > tol.exponent]
    clauses["(4) chi_1+chi_2<0 somewhere"] = bool(minus)
    clauses["(4) chi_{d-1}+chi_d>0 somewhere"] = bool(plus)
    if minus:
        notes.append(f"Q- = point {minus[0]}")
    if plus:
        notes.append(f"Q+ = point {plus[0]}")
    return _verdict("V'' spectral", clauses, "; ".join(notes))


def check_named_property(which: str, spectra: SpectrumReport | Sequence[SpectrumReport], *,
                         index: int | None = None, delta: float | None = None,
                         tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Dispatch by short name: pjj1, pid, pjjc, pss, thm3, vprime."""
    if which == "vprime":
        return viral_spectral(spectra if isinstance(spectra, (list, tuple)) else [spectra], tol)
    s = spectra[0] if isinstance(spectra, (list, tuple)) else spectra
    if which == "thm3":
        return central_sum_nonnegative(s, index, tol)
    if index is None:
        raise InvalidArgument(f"property {which} needs an index")
    if which == "pjj1":
        return equal_pair_real(s, index, tol)
    if which == "pjjc":
        return complex_pair(s, index, tol)
    if which == "pss":
        return strong_stable_gap(s, index, tol)
    if which == "pid":
        if delta is None:
            raise InvalidArgument("property pid needs delta")
        return weak_exponent(s, index, delta, tol)
    raise InvalidArgument(f"unknown property {which!r}")
