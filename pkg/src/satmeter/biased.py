"""The sqrt(2)/2 approximation: exact bias arithmetic and biased search.

All bias quantities are exact fixed-point integers scaled by 2^r, so the
branch on b_F <= b* and the family parameters ceil(m - b_F),
ceil(2m - 4 b_F) never move on float error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from satmeter.formula import (
    Assignment,
    Formula,
    all_const_assignment,
    clause_histogram,
    eval_assignment,
)
from satmeter.hashfam import HashFamilySpec, field_size_for
from satmeter.metering import Stream, meter_scope, note_pass, tracked
from satmeter.twosat import (
    DEFAULT_SCAN_CAP,
    SearchOutcome,
    SolveResult,
    _batched_family_search,
)


@dataclass(frozen=True)
class BiasProfile:
    """Per-variable and total bias of a formula, scaled by 2^r.

    ``per_var[i] / 2^r`` is sum over widths j of
    (#j-clauses with literal x_i - #j-clauses with literal -x_i) / 2^j.
    ``b_f`` is the total bias (sum of absolute per-variable biases) and
    ``b_star`` the branch threshold 4 * sum_i (1 - (i+1)/2^i) m_i, both in
    the same scaled units.
    """

    r: int
    scale: int  # 2^r
    per_var: dict[int, int]
    b_f: int
    b_star: int
    histogram: dict[int, int]
    neg_vars: frozenset[int]

    def b_f_fraction(self) -> Fraction:
        return Fraction(self.b_f, self.scale)

    def b_star_fraction(self) -> Fraction:
        return Fraction(self.b_star, self.scale)


def bias_profile(formula: Formula) -> BiasProfile:
    r = max(formula.r, 1)
    scale = 1 << r
    per_var = {i: 0 for i in range(1, formula.n + 1)}
    for clause in formula.clauses:
        unit = scale >> len(clause)  # 2^(r-j)
        for lit in clause:
            per_var[abs(lit)] += unit if lit > 0 else -unit
    hist = clause_histogram(formula)
    b_f = sum(abs(v) for v in per_var.values())
    b_star = 4 * sum(
        count * (scale - (width + 1) * (scale >> width))
        for width, count in hist.items()
    )
    neg_vars = frozenset(i for i, v in per_var.items() if v < 0)
    return BiasProfile(
        r=r,
        scale=scale,
        per_var=per_var,
        b_f=b_f,
        b_star=b_star,
        histogram=hist,
        neg_vars=neg_vars,
    )


def to_positively_biased(formula: Formula, neg_vars: frozenset[int]) -> Stream:
    """Stream of clauses with every literal over a neg-bias variable flipped."""

    def produce() -> Iterator[tuple[int, ...]]:
        note_pass("input")
        for clause in formula.clauses:
            yield tuple(
                -lit if abs(lit) in neg_vars else lit for lit in clause
            )

    return Stream("posbias", produce)


def flipped_formula(formula: Formula, neg_vars: frozenset[int]) -> Formula:
    return Formula(
        n=formula.n,
        clauses=tuple(to_positively_biased(formula, neg_vars).scan()),
        r=formula.r,
    )


def random_assignment_floor(profile: BiasProfile) -> Fraction:
    """sum_i (1 - 1/2^i) m_i, the biased-assignment expectation base term."""
    return sum(
        (Fraction(count) * (1 - Fraction(1, 1 << width))
         for width, count in profile.histogram.items()),
        Fraction(0),
    )


def expectation_target(profile: BiasProfile) -> Fraction:
    """The acceptance target sum_i (1 - 1/2^i) m_i + b_F^2 / (4 b*)."""
    base = random_assignment_floor(profile)
    if profile.b_star == 0:
        return base  # b_F <= b* forces b_F = 0 here, the bias term vanishes
    bias_term = Fraction(profile.b_f, profile.scale) ** 2 / (
        4 * Fraction(profile.b_star, profile.scale)
    )
    return base + bias_term


def search_marginal(profile: BiasProfile, m: int) -> Fraction:
    """(m - b_F) / (2m - 4 b_F), clamped into [1/2, 1]."""
    num = m * profile.scale - profile.b_f
    den = 2 * m * profile.scale - 4 * profile.b_f
    if den <= 0:
        raise ZeroDivisionError("degenerate marginal denominator")
    p = Fraction(num, den)
    return min(max(p, Fraction(1, 2)), Fraction(1))


def chou_search(
    fprime: Formula,
    profile: BiasProfile,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> SearchOutcome:
    """r-wise family search over the positively-biased formula.

    Family parameters a = ceil(m - b_F), b = ceil(2m - 4 b_F); accepts the
    first candidate reaching the expectation target minus the threshold
    rounding slack m*r/(2q).
    """
    m = fprime.m
    n = fprime.n
    r = max(fprime.r, 1)
    bf = profile.b_f_fraction()
    a = math.ceil(m - bf)
    b = math.ceil(2 * m - 4 * bf)
    if b <= 0 or a <= 0:
        raise ZeroDivisionError("degenerate family parameters")
    k = min(r, n)
    q = field_size_for(n, b, m, r)
    # Thresholding uses the clamped marginal, not the raw a/b ratio.
    p = search_marginal(profile, m)
    t = (2 * q * p.numerator + p.denominator) // (2 * p.denominator)

    slack = Fraction(m * r, 2 * q)
    target = expectation_target(profile)
    threshold = math.ceil(target - slack)

    def accept(counts: np.ndarray) -> np.ndarray:
        return counts >= threshold

    outcome = _batched_family_search(
        _spec_with_threshold(n, k, min(a, b), b, q, t),
        list(fprime.clauses),
        accept,
        scan_cap,
        "posbias",
    )
    outcome.threshold_desc = f"c >= ceil({float(target):.4f} - {float(slack):.4f}) = {threshold}"
    return outcome


def _spec_with_threshold(n, k, a, b, q, t) -> HashFamilySpec:
    """Family spec whose threshold is pinned to t (clamped marginal)."""

    class _Pinned(HashFamilySpec):
        @property
        def threshold(self) -> int:
            return t

    return _Pinned(n=n, k=k, a=a, b=b, q=q)


def chou_solve(formula: Formula, scan_cap: int = DEFAULT_SCAN_CAP) -> SolveResult:
    """sqrt(2)/2-approximate Max-SAT assignment via the bias branch."""
    with meter_scope("chou_solve") as sc:
        with tracked(10):  # b_F, b*, m_i accumulators, loop registers
            profile = bias_profile(formula)
            fprime = flipped_formula(formula, profile.neg_vars)
            m = formula.m
            branch = None
            outcome = None
            if m == 0:
                phi_fprime = all_const_assignment(formula.n, 1)
                branch = "empty"
            elif profile.b_f > profile.b_star:
                phi_fprime = all_const_assignment(formula.n, 1)
                branch = "all-ones(b_F > b*)"
            elif 2 * m * profile.scale - 4 * profile.b_f <= 0:
                phi_fprime = all_const_assignment(formula.n, 1)
                branch = "all-ones(degenerate denominator)"
            else:
                with tracked(max(formula.r, 1)):  # candidate coefficients
                    outcome = chou_search(fprime, profile, scan_cap=scan_cap)
                branch = "family-search"
                candidate = {
                    i: outcome.function.bit(i) for i in range(1, formula.n + 1)
                }
                ones = all_const_assignment(formula.n, 1)
                note_pass("posbias", 2)
                c_cand = eval_assignment(fprime, candidate)
                c_ones = eval_assignment(fprime, ones)
                phi_fprime = candidate if c_cand >= c_ones else ones
            # back-transform: un-flip the negatively-biased variables
            phi: Assignment = {
                i: 1 - v if i in profile.neg_vars else v
                for i, v in phi_fprime.items()
            }
            count = eval_assignment(formula, phi)
    details = {
        "branch": branch,
        "b_f": str(profile.b_f_fraction()),
        "b_star": str(profile.b_star_fraction()),
        "neg_vars": sorted(profile.neg_vars),
    }
    if outcome is not None:
        details.update(
            {
                "threshold": outcome.threshold_desc,
                "family_index": outcome.family_index,
                "family_size": outcome.family_size,
                "q": outcome.q,
                "fallback": outcome.fallback,
                "search_count": outcome.count,
            }
        )
    return SolveResult(assignment=phi, count=count, details=details, report=sc.report)
