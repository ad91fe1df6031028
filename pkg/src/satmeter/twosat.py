"""The 1/2 approximation and the 0.618 hash-family search.

The 0.618 pipeline: rewrite the input into a 2-satisfiable formula whose
unit clauses are all positive (flipping polarity of variables that occur as
negative unit clauses, with a #NEG marker recording which variables the
back-transform must un-flip), search an enumerated pairwise-independent
family of 618/1000-biased assignments for one satisfying more than 0.618 of
the transformed clauses, and translate the winner back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from satmeter.formula import (
    Assignment,
    Formula,
    all_const_assignment,
    eval_assignment,
    pack_clauses,
)
from satmeter.hashfam import (
    HashFamilySpec,
    HashFunction,
    batch_assignments,
    field_size_for,
)
from satmeter.metering import (
    SpaceReport,
    Stream,
    meter_scope,
    note_pass,
    tracked,
)

import numpy as np

import itertools

LS_NUM, LS_DEN = 618, 1000

# Scan budget for the family search.  The threshold candidate is found within
# the first few coefficient blocks on every instance class we generate; the
# cap only guards against pathological full-family fallbacks on large fields.
DEFAULT_SCAN_CAP = 5_000_000

NEG_MARKER = "#NEG"


@dataclass
class SolveResult:
    """Assignment-producing solver output plus audit details."""

    assignment: Assignment
    count: int
    details: dict[str, Any] = field(default_factory=dict)
    report: SpaceReport | None = None

    def __iter__(self):
        return iter((self.assignment, self.count))


def half_approx(formula: Formula) -> SolveResult:
    """Better of the all-1s / all-0s assignments (ties favor all-1s)."""
    with meter_scope("half_approx") as sc:
        with tracked(4):  # two counters, loop index, choice flag
            ones = all_const_assignment(formula.n, 1)
            zeros = all_const_assignment(formula.n, 0)
            note_pass("input", 2)
            c1 = eval_assignment(formula, ones)
            c0 = eval_assignment(formula, zeros)
    if c1 >= c0:
        return SolveResult(ones, c1, {"choice": "all-ones"}, sc.report)
    return SolveResult(zeros, c0, {"choice": "all-zeros"}, sc.report)


@dataclass
class TwoSatStream:
    """Restartable event stream of the 2-satisfiable transform.

    Events: ("clause", lits) for transformed clauses (wide clauses and unit
    clauses, in that order, all emitted units positive), ("marker", "#NEG"),
    then ("flipped_var", i) for every variable whose value the back-transform
    must invert.  Variables emitted after the marker also stand for the unit
    clause (x_i) of the transformed formula.
    """

    source: Formula
    stream: Stream
    dropped_pairs: frozenset[int]

    def scan(self) -> Iterator[tuple]:
        return self.stream.scan()

    def clauses(self) -> list[tuple[int, ...]]:
        out = []
        for event in self.scan():
            if event[0] == "clause":
                out.append(event[1])
            elif event[0] == "flipped_var":
                out.append((event[1],))
        return out

    def flipped_vars(self) -> frozenset[int]:
        return frozenset(
            event[1] for event in self.scan() if event[0] == "flipped_var"
        )

    def formula(self) -> Formula:
        return Formula(n=self.source.n, clauses=tuple(self.clauses()))


def _unit_occurrences(formula: Formula) -> tuple[set[int], set[int]]:
    pos_units: set[int] = set()
    neg_units: set[int] = set()
    for clause in formula.clauses:
        if len(clause) == 1:
            (pos_units if clause[0] > 0 else neg_units).add(abs(clause[0]))
    return pos_units, neg_units


def to_two_satisfiable(formula: Formula) -> TwoSatStream:
    """Transform into a 2-satisfiable formula with all units positive.

    Wide clauses have every literal over a flipped variable inverted;
    positive units are re-emitted once per variable; after #NEG, the flipped
    variables (negative unit, no positive unit) are emitted, standing both
    for their positive unit clause and for the back-transform's inversion
    set.  Complementary unit pairs keep only their positive side.
    """
    pos_units, neg_units = _unit_occurrences(formula)
    dropped = frozenset(pos_units & neg_units)
    # flip exactly the variables whose polarity the back-transform inverts;
    # a variable with both unit polarities keeps its orientation (its pair
    # contributes one satisfied clause no matter what)
    flip = neg_units - pos_units

    def produce() -> Iterator[tuple]:
        note_pass("input", 2)  # unit-occurrence prepass + clause pass
        for clause in formula.clauses:
            if len(clause) < 2:
                continue
            lits = tuple(
                -lit if abs(lit) in flip else lit for lit in clause
            )
            yield ("clause", lits)
        for var in range(1, formula.n + 1):
            if var in pos_units:
                yield ("clause", (var,))
        yield ("marker", NEG_MARKER)
        for var in range(1, formula.n + 1):
            if var in neg_units and var not in pos_units:
                yield ("flipped_var", var)

    return TwoSatStream(
        source=formula,
        stream=Stream("twosat", produce),
        dropped_pairs=dropped,
    )


@dataclass
class SearchOutcome:
    function: HashFunction | None
    count: int
    family_index: int
    fallback: bool
    scanned: int
    family_size: int
    q: int
    threshold_desc: str


def _batched_family_search(
    spec: HashFamilySpec,
    clauses: list[tuple[int, ...]],
    accept,
    scan_cap: int,
    stream_label: str,
) -> SearchOutcome:
    """Scan the family in enumeration order, vectorized per constant-term
    block, returning the first accepted candidate or the best seen.

    ``accept(counts) -> bool mask`` decides acceptance per candidate.  Pass
    counts over the scanned clause stream are recorded per candidate
    examined.
    """
    packed = pack_clauses(Formula(n=spec.n, clauses=tuple(clauses)))
    q = spec.q
    # chunk the constant-term range so the candidate bit matrix stays small
    chunk = max(1, 2_000_000 // max(spec.n, 1))
    best_count = -1
    best_coeffs: tuple[int, ...] | None = None
    best_index = -1
    scanned = 0
    for block_no, high in enumerate(itertools.product(range(q), repeat=spec.k - 1)):
        block_base = block_no * q
        for c0_start in range(0, q, chunk):
            c0_stop = min(c0_start + chunk, q)
            bits = batch_assignments(spec, high, c0_start, c0_stop)
            counts = packed.count_satisfied(bits)
            hits = np.flatnonzero(accept(counts))
            if hits.size:
                row = int(hits[0])
                note_pass(stream_label, row + 1)
                coeffs = high + (c0_start + row,)
                return SearchOutcome(
                    function=HashFunction(coeffs, q, spec.threshold),
                    count=int(counts[row]),
                    family_index=block_base + c0_start + row,
                    fallback=False,
                    scanned=scanned + row + 1,
                    family_size=spec.size,
                    q=q,
                    threshold_desc="",
                )
            note_pass(stream_label, c0_stop - c0_start)
            row = int(np.argmax(counts))
            if int(counts[row]) > best_count:
                best_count = int(counts[row])
                best_coeffs = high + (c0_start + row,)
                best_index = block_base + c0_start + row
            scanned += c0_stop - c0_start
            if scanned >= scan_cap:
                break
        else:
            continue
        break
    assert best_coeffs is not None
    return SearchOutcome(
        function=HashFunction(best_coeffs, q, spec.threshold),
        count=best_count,
        family_index=best_index,
        fallback=True,
        scanned=scanned,
        family_size=spec.size,
        q=q,
        threshold_desc="",
    )


def ls_search(
    ts: TwoSatStream, scan_cap: int = DEFAULT_SCAN_CAP
) -> SearchOutcome:
    """Search Univ(n, 2, 618, 1000) for a candidate with c > 0.618 m'."""
    clauses = ts.clauses()
    m_prime = len(clauses)
    n = ts.source.n
    r = max((len(c) for c in clauses), default=1)

    if m_prime == 0 or n == 0:
        return SearchOutcome(None, 0, -1, False, 0, 0, 0, "empty")
    if n < 2:
        # Family needs n >= k = 2; a single variable has only two assignments.
        packed = pack_clauses(Formula(n=max(n, 1), clauses=tuple(clauses)))
        counts = packed.count_satisfied(np.array([[0], [1]], dtype=np.int64))
        pick = 1 if counts[1] >= counts[0] else 0
        f = HashFunction((0, 0), 2, 2 if pick else 0)  # constant function
        return SearchOutcome(f, int(counts[pick]), pick, False, 2, 2, 2, "tiny")

    q = field_size_for(n, LS_DEN, m_prime, r)
    spec = HashFamilySpec(n=n, k=2, a=LS_NUM, b=LS_DEN, q=q)

    def accept(counts: np.ndarray) -> np.ndarray:
        return counts * LS_DEN > LS_NUM * m_prime

    outcome = _batched_family_search(spec, clauses, accept, scan_cap, "twosat")
    outcome.threshold_desc = f"c > {LS_NUM}/{LS_DEN} * {m_prime}"
    return outcome


def ls_solve(formula: Formula, scan_cap: int = DEFAULT_SCAN_CAP) -> SolveResult:
    """0.618-approximate Max-SAT assignment via the 2-satisfiable transform."""
    with meter_scope("ls_solve") as sc:
        with tracked(12):  # m', thresholds, best count/index, loop registers
            ts = to_two_satisfiable(formula)
            m_prime = len(ts.clauses())
            with tracked(2):  # candidate coefficient pair
                outcome = ls_search(ts, scan_cap=scan_cap)
            flipped = ts.flipped_vars()
            phi_prime: Assignment = {}
            for var in range(1, formula.n + 1):
                if outcome.function is None:
                    v = 1  # unset by the search: default to 1
                else:
                    v = outcome.function.bit(var)
                phi_prime[var] = 1 - v if var in flipped else v
            count = eval_assignment(formula, phi_prime)
    return SolveResult(
        assignment=phi_prime,
        count=count,
        details={
            "m_prime": m_prime,
            "threshold": outcome.threshold_desc,
            "family_index": outcome.family_index,
            "family_size": outcome.family_size,
            "q": outcome.q,
            "fallback": outcome.fallback,
            "search_count": outcome.count,
        },
        report=sc.report,
    )
