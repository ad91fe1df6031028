"""Shared corpus generators for the test suite.

Generators emit formulas with pairwise-distinct clauses: the 2-satisfiable
transform reads duplicated complementary unit clauses at their literal
count, which is exactly the accounting ambiguity the pipeline does not
promise to resolve, so the corpus stays inside the no-duplicates contract
that ``Formula`` itself enforces.
"""

from __future__ import annotations

import math
import random

from satmeter.formula import Formula


def random_formula(
    rng: random.Random, n: int, m: int, r: int, min_width: int = 1
) -> Formula:
    """m distinct non-tautological clauses of widths min_width..r on n vars."""
    seen: set[tuple[int, ...]] = set()
    clauses: list[tuple[int, ...]] = []
    budget = 0
    for w in range(min_width, r + 1):
        budget += math.comb(n, w) * (1 << w)
    m = min(m, budget)
    while len(clauses) < m:
        w = rng.randint(min_width, r)
        vs = rng.sample(range(1, n + 1), min(w, n))
        clause = tuple(sorted(v if rng.random() < 0.5 else -v for v in vs))
        if clause in seen:
            continue
        seen.add(clause)
        clauses.append(clause)
    return Formula(n=n, clauses=tuple(clauses), r=r)


def random_positive_units_formula(
    rng: random.Random, n: int, m: int, r: int
) -> Formula:
    """2-satisfiable formula: units all positive, other clauses width >= 2.

    Any two clauses are simultaneously satisfiable: two positive units
    always are, and a width->=2 clause always has a literal avoiding any
    single unit's variable constraint.
    """
    seen: set[tuple[int, ...]] = set()
    clauses: list[tuple[int, ...]] = []
    budget = n + sum(math.comb(n, w) * (1 << w) for w in range(2, r + 1))
    m = min(m, budget)
    while len(clauses) < m:
        if rng.random() < 0.3:
            clause = (rng.randint(1, n),)
        else:
            w = rng.randint(2, max(r, 2))
            vs = rng.sample(range(1, n + 1), min(w, n))
            if len(vs) < 2:
                continue
            clause = tuple(
                sorted(v if rng.random() < 0.5 else -v for v in vs)
            )
        if clause in seen:
            continue
        seen.add(clause)
        clauses.append(clause)
    return Formula(n=n, clauses=tuple(clauses), r=r)
