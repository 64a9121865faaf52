"""Hausdorff dimension of automaton-described sets.

Counts ``N_n`` of level-n elements meeting a set come from the transfer
matrix of its trimmed automaton.  The dimension estimate is the critical
exponent of the uniform level-n cover: ``log N_n / (n log(1/zeta))``, the
box-counting dimension, which equals the Hausdorff dimension for these
subshift-of-finite-type sets.  The limit is read off the spectral radius of
the transfer matrix; the finite-n values and a Richardson pair bracket it.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cover import NiceCover, PeriodicPoint
from .gale import SupergaleTable, evaluate_success, validate_supergale
from .compiler import UnvalidatedGaleError
from .numbers import Arith, LogExponent, make_arith
from .sft import Automaton, SetDescription

LABEL = "box-dimension estimate, = Hausdorff for SFT sets"


@dataclass
class DimEstimate:
    estimate: float
    lower: float
    upper: float
    counts: list[tuple[int, int]]
    s_grid: list[tuple[float, float]] = field(default_factory=list)
    spectral: float | None = None
    log_count: float | None = None
    richardson: float | None = None
    bisection: float | None = None
    flags: list[str] = field(default_factory=list)
    label: str = LABEL

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "lower": self.lower,
            "upper": self.upper,
            "spectral": self.spectral,
            "log_count": self.log_count,
            "richardson": self.richardson,
            "bisection": self.bisection,
            "flags": self.flags,
            "label": self.label,
            "counts": [[n, str(c)] for n, c in self.counts],
            "s_grid": [[s, h] for s, h in self.s_grid],
        }


def _automaton(cover: NiceCover, set_: SetDescription | Automaton) -> Automaton:
    a = set_ if isinstance(set_, Automaton) else set_.automaton(cover)
    return a.trim()


def count_elements(cover: NiceCover, set_: SetDescription | Automaton, n: int) -> int:
    """Number of level-n addresses meeting the set."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _automaton(cover, set_).counts(n)[n]


def hausdorff_sum(cover: NiceCover, set_: SetDescription | Automaton, s, n: int, arith: Arith | None = None):
    """``N_n * diam_n**s``: the uniform level-n cover sum.

    ``s`` may be a :class:`LogExponent` ``log_b(a)``, in which case
    ``diam_n**s = a**-n`` and the result is an exact Fraction.
    """
    count = count_elements(cover, set_, n)
    if isinstance(s, LogExponent):
        if s.base != cover.base:
            raise ValueError("log exponent base must match the cover base")
        return Fraction(count) / s.numerator**n
    arith = arith or make_arith(cover.base, s)
    return arith.value(count) * arith.diam_power(n, s)


def _log_scale(cover: NiceCover) -> float:
    return math.log(1 / cover.zeta)


def dim_search(cover: NiceCover, set_: SetDescription | Automaton, n_max: int, grid_points: int = 11) -> DimEstimate:
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    auto = _automaton(cover, set_)
    counts = auto.counts(n_max)
    pairs = list(enumerate(counts))
    if counts[-1] == 0:
        return DimEstimate(0.0, 0.0, 0.0, pairs, spectral=0.0, log_count=0.0, richardson=0.0, bisection=0.0, flags=["empty"])
    scale = _log_scale(cover)

    def f(n: int) -> float:
        return math.log(counts[n]) / (n * scale)

    log_count = f(n_max)
    # f(n) ~ a + C/n; eliminate C from the pair (n_max/2, n_max).
    half = n_max // 2
    richardson = (n_max * f(n_max) - half * f(half)) / (n_max - half)
    lam = auto.spectral_radius()
    spectral = math.log(lam) / scale if lam > 1 + 1e-12 else 0.0
    bisect = _bisect_critical(counts[n_max], n_max, scale, max_s=math.log(cover.branching) / scale)
    top = math.log(cover.branching) / scale
    grid = [top * i / (grid_points - 1) for i in range(grid_points)]
    s_grid = [(s, counts[n_max] * math.exp(-n_max * s * scale)) for s in grid]
    flags = []
    if abs(bisect - log_count) > 2 / n_max:
        flags.append("bisection-disagrees")
    estimate = spectral
    return DimEstimate(
        estimate=estimate,
        lower=min(spectral, richardson),
        upper=max(spectral, richardson),
        counts=pairs,
        s_grid=s_grid,
        spectral=spectral,
        log_count=log_count,
        richardson=richardson,
        bisection=bisect,
        flags=flags,
    )


def _bisect_critical(count: int, n: int, scale: float, max_s: float, iters: int = 200) -> float:
    """s where ``count * zeta**(n s)`` crosses 1, by bisection in log space."""
    log_count = math.log(count)
    lo, hi = 0.0, max_s
    if log_count <= 0:
        return 0.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        if log_count - n * mid * scale > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# -- gales for sets ------------------------------------------------------------------


class AutomatonGale:
    """``d_k`` of the surviving level-``level`` antichain of a set, computed lazily.

    For ``|w| <= level``: ``d(w) = C(w) * diam_level**s / diam(w)**s`` where
    ``C(w)`` counts surviving level-``level`` extensions of ``w``; below
    ``level`` the capital is split uniformly.  Equal to
    ``cover_to_supergale`` on the materialized antichain, without storing
    ``N_level`` addresses.
    """

    extension = "uniform-split"

    def __init__(self, cover: NiceCover, set_: SetDescription | Automaton, s, level: int, exact: bool | None = None):
        self.cover = cover
        self.s = s
        self.level = level
        self.auto = _automaton(cover, set_)
        if self.auto.empty:
            raise ValueError("empty set has no covering gale")
        self.arith = make_arith(cover.base, s, exact=exact)
        self._cont = self.auto.continuation_counts(level)

    def value(self, addr: str):
        arith = self.arith
        head = addr[: self.level]
        state = self.auto.run(head)
        if state is None:
            return arith.zero
        remaining = self.level - len(head)
        v = arith.value(self._cont[remaining][state]) * arith.base_power(-remaining * self.s)
        extra = len(addr) - len(head)
        if extra:
            v = v * arith.base_power(extra * self.s) / (self.cover.branching**extra)
        return v

    @property
    def root_capital(self):
        return self.value("")

    def materialize(self) -> SupergaleTable:
        """Explicit table over all prefixes of surviving words (small levels only)."""
        entries = {}
        frontier = [("", self.auto.start)]
        while frontier:
            addr, q = frontier.pop()
            entries[addr] = self.value(addr)
            if len(addr) < self.level:
                for ch in self.cover.alphabet:
                    nxt = self.auto.delta[q].get(ch)
                    if nxt is None:
                        entries[addr + ch] = self.arith.zero
                    else:
                        frontier.append((addr + ch, nxt))
        return SupergaleTable(self.cover, self.s, entries, "uniform-split", arith=self.arith)


def sample_points(cover: NiceCover, set_: SetDescription | Automaton, count: int, depth: int, seed: int = 0) -> list[PeriodicPoint]:
    """Deterministic seeded walks through the automaton, as points."""
    auto = _automaton(cover, set_)
    rng = random.Random(seed)
    points = []
    for _ in range(count):
        word = auto.random_word(rng, depth)
        # Continue with any live cycle so the point lies in the set.
        q = auto.run(word)
        tail = ""
        seen = {}
        while q not in seen:
            seen[q] = len(tail)
            ch = sorted(auto.delta[q])[0]
            tail += ch
            q = auto.delta[q][ch]
        start = seen[q]
        points.append(PeriodicPoint(word + tail[:start], tail[start:]))
    return points


@dataclass
class UpperBoundReport:
    s: object
    depth: int
    samples: int
    fractions: dict[int, float]
    first_levels: list[dict[int, int | None]]
    certified_k: int
    certified: bool
    note: str = "empirical evidence that A is inside the success set; not a proof"

    def to_dict(self) -> dict:
        return {
            "s": str(self.s),
            "depth": self.depth,
            "samples": self.samples,
            "fraction_exceeding": {f"2^{k}": v for k, v in self.fractions.items()},
            "certified_k": self.certified_k,
            "certified": self.certified,
            "note": self.note,
        }


def gale_upper_bound(
    cover: NiceCover,
    gale,
    set_: SetDescription | Automaton,
    sample_count: int,
    depth: int,
    ks: Sequence[int] = (1, 2, 4, 8),
    certify_k: int = 1,
    seed: int = 0,
    threads: int = 1,
) -> UpperBoundReport:
    """Fraction of sampled points of the set on which the gale multiplies its
    initial capital by more than ``2**k`` within ``depth`` levels."""
    if isinstance(gale, SupergaleTable):
        report = validate_supergale(cover, gale, min(depth, gale.support_depth + 1))
        if not report.ok:
            raise UnvalidatedGaleError("gale_upper_bound needs a valid supergale")
    ks = sorted(set(ks) | {certify_k})
    points = sample_points(cover, set_, sample_count, depth, seed)
    capital = gale.root_capital
    thresholds = {k: gale.arith.value(Fraction(2) ** k) * capital for k in ks}

    def run(point):
        trace = evaluate_success(cover, gale, point, depth, thresholds=())
        return {k: trace.first_exceeding(t) for k, t in thresholds.items()}

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            levels = list(pool.map(run, points))
    else:
        levels = [run(p) for p in points]
    fractions = {k: sum(lv[k] is not None for lv in levels) / len(points) for k in ks}
    return UpperBoundReport(
        s=gale.s,
        depth=depth,
        samples=len(points),
        fractions=fractions,
        first_levels=levels,
        certified_k=certify_k,
        certified=fractions[certify_k] == 1.0,
    )


@dataclass
class StabilityReport:
    union: DimEstimate
    members: list[DimEstimate]
    difference: float

    def to_dict(self) -> dict:
        return {
            "union": self.union.estimate,
            "members": [m.estimate for m in self.members],
            "max_member": max(m.estimate for m in self.members),
            "difference": self.difference,
        }


def stability_check(cover: NiceCover, sets: Sequence[SetDescription], n_max: int) -> StabilityReport:
    """Compare the dimension of a finite union with the largest member's."""
    if len(sets) < 2:
        raise ValueError("need at least two sets")
    members = [dim_search(cover, s, n_max) for s in sets]
    union = dim_search(cover, sets[0].union(*sets[1:]), n_max)
    return StabilityReport(union, members, union.estimate - max(m.estimate for m in members))
