"""Enumerable k-universal hash families of boolean functions.

The construction is the standard one: degree-(k-1) polynomials over a prime
field GF(q), thresholded to {0,1}.  For any k distinct points of [n] the
evaluation vector is uniform over [0,q)^k, so the thresholded bits are k-wise
independent with marginal t/q, where t = round(q*a/b) approximates the target
marginal a/b to within 1/(2q).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from satmeter.formula import Assignment
from satmeter.metering import Stream, tick


def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x < 4:
        return True
    if x % 2 == 0:
        return False
    f = 3
    while f * f <= x:
        if x % f == 0:
            return False
        f += 2
    return True


def smallest_prime_geq(x: int) -> int:
    """Least prime >= x (x >= 2)."""
    if x < 2:
        raise ValueError("x must be >= 2")
    while not is_prime(x):
        x += 1
    return x


@dataclass(frozen=True)
class HashFamilySpec:
    """Parameters of a family Univ(n, k, a, b) realized over GF(q).

    n: domain size, k: independence order, a/b: target marginal, q: prime
    field size.  q must satisfy q >= max(n, b); a/b can exceed what the paper
    construction nominally allows (b > n) because q absorbs both bounds.
    """

    n: int
    k: int
    a: int
    b: int
    q: int

    def __post_init__(self):
        if not (self.n >= self.k >= 1):
            raise ValueError("need n >= k >= 1")
        if not (self.b >= self.a >= 1):
            raise ValueError("need b >= a >= 1")
        if self.q < max(self.n, self.b, 2) or not is_prime(self.q):
            raise ValueError("q must be prime and >= max(n, b)")

    @property
    def threshold(self) -> int:
        # round-half-up of q*a/b
        return (2 * self.q * self.a + self.b) // (2 * self.b)

    @property
    def size(self) -> int:
        return self.q**self.k


def field_size_for(n: int, b: int, m: int, r: int) -> int:
    """Field size used by the solvers: q = min prime >= max(n, b, 20*m*r).

    The 20*m*r term keeps the threshold-rounding perturbation of the
    expected satisfied-clause count below m*r/(2q) <= 1/40 of a clause.
    """
    return smallest_prime_geq(max(n, b, 20 * m * r, 2))


@dataclass(frozen=True)
class HashFunction:
    """A thresholded polynomial over GF(q): bit(i) = 1 iff eval(i) < t.

    ``coeffs`` is leading-coefficient first: (c_{k-1}, ..., c_1, c_0).
    """

    coeffs: tuple[int, ...]
    q: int
    threshold: int

    def eval(self, i: int) -> int:
        acc = 0
        for c in self.coeffs:
            acc = (acc * i + c) % self.q
        return acc

    def bit(self, i: int) -> int:
        return 1 if self.eval(i) < self.threshold else 0


def enum_family(spec: HashFamilySpec) -> Stream:
    """Restartable stream of all q^k functions, lexicographic in coeffs."""

    def produce() -> Iterator[HashFunction]:
        coeffs = [0] * spec.k
        t = spec.threshold
        while True:
            tick()
            yield HashFunction(coeffs=tuple(coeffs), q=spec.q, threshold=t)
            # odometer increment, last (constant) coefficient fastest
            pos = spec.k - 1
            while pos >= 0:
                coeffs[pos] += 1
                if coeffs[pos] < spec.q:
                    break
                coeffs[pos] = 0
                pos -= 1
            if pos < 0:
                return

    return Stream(f"hashfam(n={spec.n},k={spec.k},q={spec.q})", produce)


def assignment_from_hash(f: HashFunction, n: int) -> Assignment:
    """Total assignment over [n] with values(i) = bit_f(i)."""
    return {i: f.bit(i) for i in range(1, n + 1)}


def batch_assignments(
    spec: HashFamilySpec,
    high_coeffs: tuple[int, ...],
    c0_start: int = 0,
    c0_stop: int | None = None,
) -> np.ndarray:
    """Bit matrix for the functions sharing the given non-constant coeffs.

    Row i is the assignment of the function with coefficients
    (*high_coeffs, c0_start + i); columns are variables 1..n (0-based).
    Matches the enumeration order of ``enum_family`` restricted to that
    coefficient prefix.  The constant-term range defaults to the whole
    block [0, q); callers chunk it to bound working-set size.
    """
    q, n, t = spec.q, spec.n, spec.threshold
    if c0_stop is None:
        c0_stop = q
    points = np.arange(1, n + 1, dtype=np.int64)
    acc = np.zeros(n, dtype=np.int64)
    for c in high_coeffs:
        acc = (acc * points + c) % q
    acc = (acc * points) % q  # still missing the constant term
    c0 = np.arange(c0_start, c0_stop, dtype=np.int64)
    evals = (acc[None, :] + c0[:, None]) % q
    return evals < t
