"""Independent reference computations used by the tests.

Everything here is written from the definitions with plain loops, floats
from mpmath, or brute-force enumeration, and shares no code paths with the
library beyond the cover constructors.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np

CTX = mpmath.MPContext()
CTX.prec = 200


def words(alphabet: str, n: int):
    return ("".join(t) for t in itertools.product(alphabet, repeat=n))


def all_addresses(alphabet: str, depth: int):
    for n in range(depth + 1):
        yield from words(alphabet, n)


def brute_maximal_antichain(addrs) -> set[str]:
    """O(n^2) filter: drop anything with a proper prefix in the input."""
    pool = list(set(addrs))
    keep = set()
    for a in pool:
        if not any(b != a and a.startswith(b) for b in pool):
            keep.add(a)
    return keep


def is_antichain(addrs) -> bool:
    pool = list(addrs)
    return not any(a != b and b.startswith(a) for a in pool for b in pool)


def diam_s(base: int, level: int, s) -> mpmath.mpf:
    return CTX.power(base, -level * CTX.mpf(Fraction(s).numerator) / Fraction(s).denominator)


def dk_direct(base: int, branching: int, target, s, addr: str) -> mpmath.mpf:
    """d_k from its definition, in 200-bit floats."""
    n = len(addr)
    for m in range(n):
        if addr[:m] in target:
            # Capital diam(W)**s split evenly over branching**(n - m) descendants.
            return diam_s(base, m, s) / (branching ** (n - m)) / diam_s(base, n, s)
    total = CTX.mpf(0)
    for w in target:
        if w.startswith(addr):
            total += diam_s(base, len(w), s)
    return total / diam_s(base, n, s)


def brute_supergale_violations(alphabet: str, base: int, gale, depth: int, rel=CTX.mpf(2) ** -60) -> list[str]:
    """Check the inequality at every node of the full tree above ``depth``."""
    bad = []
    s = gale.s
    for addr in all_addresses(alphabet, depth - 1):
        n = len(addr)
        v0 = gale.value(addr)
        lhs = v0.to_mpf(CTX) if gale.exact else CTX.mpf(v0)
        lhs *= diam_s(base, n, s)
        rhs = CTX.mpf(0)
        for ch in alphabet:
            v = gale.value(addr + ch)
            rhs += (v.to_mpf(CTX) if gale.exact else CTX.mpf(v)) * diam_s(base, n + 1, s)
        if rhs > lhs * (1 + rel) + CTX.mpf(2) ** -150:
            bad.append(addr)
    return bad


def all_antichains(nodes) -> list[tuple[str, ...]]:
    """Every antichain (including the empty one) inside a small node set."""
    nodes = sorted(set(nodes))
    out = []

    def rec(i, chosen):
        if i == len(nodes):
            out.append(tuple(chosen))
            return
        rec(i + 1, chosen)
        a = nodes[i]
        if all(not a.startswith(b) and not b.startswith(a) for b in chosen):
            rec(i + 1, chosen + [a])

    rec(0, [])
    return out


def extendable_words(alphabet: str, forbidden, n: int, extra: int) -> int:
    """Words of length n avoiding every forbidden substring that extend by ``extra`` more symbols."""
    forbidden = list(forbidden)

    def ok(w):
        return not any(p in w for p in forbidden)

    def extends(w, left):
        if left == 0:
            return True
        return any(ok(w + ch) and extends(w + ch, left - 1) for ch in alphabet)

    return sum(1 for w in words(alphabet, n) if ok(w) and extends(w, extra))


def memory_one_dimension(alphabet: str, forbidden) -> float:
    """Dimension of a set cut out by forbidden words of length <= 2, from the symbol graph."""
    k = len(alphabet)
    forb = set(forbidden)
    alive = [a for a in alphabet if a not in forb]
    if not alive:
        return 0.0
    idx = {a: i for i, a in enumerate(alive)}
    mat = np.zeros((len(alive), len(alive)))
    for a in alive:
        for b in alive:
            if a + b not in forb:
                mat[idx[a], idx[b]] = 1.0
    rho = max(abs(np.linalg.eigvals(mat)))
    return 0.0 if rho <= 1 + 1e-12 else math.log(rho) / math.log(k)
