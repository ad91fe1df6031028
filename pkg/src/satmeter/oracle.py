"""Ground-truth engines: brute-force Max-SAT and analytic expectations.

``exact_maxsat`` enumerates all 2^n assignments (vectorized, capped at
n <= 26) and defines OPT for every ratio check in the test suite.
``expected_satisfied`` computes the exact rational expectation of the
satisfied-clause count under independent p-biased variables; for clauses of
width <= k it coincides with the average over any enumerated k-universal
family with marginal p = t/q.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from satmeter.formula import Assignment, Formula, pack_clauses

ORACLE_VAR_CAP = 26
_BLOCK_BITS = 20  # enumerate assignments in blocks of 2^20 rows


class OracleCapError(ValueError):
    """Raised when a formula exceeds the brute-force variable cap."""


def _mask_to_assignment(mask: int, n: int) -> Assignment:
    # x1 is the most significant bit so that ascending masks are ascending
    # lexicographic assignments (phi(1), ..., phi(n)).
    return {i: (mask >> (n - i)) & 1 for i in range(1, n + 1)}


def exact_maxsat(formula: Formula) -> tuple[int, Assignment]:
    """(OPT, witness); ties broken by lexicographically smallest witness."""
    n = formula.n
    if n > ORACLE_VAR_CAP:
        raise OracleCapError(f"n={n} exceeds oracle cap {ORACLE_VAR_CAP}")
    if formula.m == 0:
        return 0, {i: 0 for i in range(1, n + 1)}
    packed = pack_clauses(formula)
    best_count = -1
    best_mask = 0
    block = 1 << min(n, _BLOCK_BITS)
    bit_cols = np.arange(n - 1, -1, -1, dtype=np.uint32)  # x1 is MSB
    for start in range(0, 1 << n, block):
        masks = np.arange(start, start + block, dtype=np.uint32)
        assigns = (masks[:, None] >> bit_cols[None, :]) & 1
        counts = packed.count_satisfied(assigns)
        idx = int(np.argmax(counts))
        if counts[idx] > best_count:
            best_count = int(counts[idx])
            best_mask = start + idx
    return best_count, _mask_to_assignment(best_mask, n)


def expected_satisfied(formula: Formula, p: Fraction) -> Fraction:
    """Exact E[#satisfied clauses] when each variable is 1 w.p. p.

    Per clause: 1 - prod(miss), miss = 1-p for a positive literal, p for a
    negative one.  Exact for any independence order >= the clause width.
    """
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    total = Fraction(0)
    for clause in formula.clauses:
        miss = Fraction(1)
        for lit in clause:
            miss *= (1 - p) if lit > 0 else p
        total += 1 - miss
    return total
