"""Acceptance criteria, one test each, with stated tolerances and time limits.

Every test records a PASS/FAIL line that is printed in the terminal summary.
"""

import math
import random
import time
from fractions import Fraction

from galedim.compiler import cover_to_supergale, kraft_exponent, kraft_sum, maximal_antichain, supergale_to_cover
from galedim.complexity import (
    BoundViolation,
    CompressorEstimator,
    TableOracle,
    cdim_point_estimate,
    cdim_via_gales,
    counting_bounds,
    kr_profile,
)
from galedim.cover import PeriodicPoint, StreamPoint, cube, symbolic
from galedim.dimension import AutomatonGale, dim_search, gale_upper_bound, hausdorff_sum, stability_check
from galedim.gale import is_validated, validate_supergale
from galedim.numbers import LogExponent
from galedim.sft import SetDescription

from conftest import EXPONENTS
from corpus import random_antichain, random_supergale
from oracles import CTX, brute_maximal_antichain, diam_s, is_antichain

RESULTS: list[str] = []
LN23 = math.log(2) / math.log(3)
MIDDLE = SetDescription.allowing("02")
ALPHAS = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]

# Gales shared with the counting-bound criterion.
CORPUS: dict[str, list] = {"claims": [], "oracle": []}


def record(n: int, ok: bool, elapsed: float, limit: float, detail: str) -> None:
    status = "PASS" if ok and elapsed < limit else "FAIL"
    line = f"{status} criterion {n}: {detail} ({elapsed:.2f}s, limit {limit:g}s)"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert elapsed < limit, line


def _claim_failures(cover, target, s):
    failures = []
    k = kraft_exponent(cover, kraft_sum(cover, target, s), s) if target else 0
    g = cover_to_supergale(cover, target, s, k)
    if not g.exact:
        failures.append("not exact")
    # Full validation of the stored region and one level below, cached on the table.
    if not is_validated(cover, g):
        failures.append("claim 1")
    if any(g.value(w) != 1 for w in target):
        failures.append("claim 2")
    kraft = kraft_sum(cover, target, s).to_mpf(CTX) if target else CTX.mpf(0)
    bound = CTX.power(cover.c, 1 + CTX.mpf(s.numerator) / s.denominator) * kraft
    nodes = set(g.region())
    nodes |= {a + ch for a in list(nodes) for ch in cover.alphabet}
    for u in nodes:
        cap = g.value(u).to_mpf(CTX) * diam_s(cover.base, len(u), s)
        if cap > bound * (1 + CTX.mpf(2) ** -100):
            failures.append(f"claim 3 at {u!r}")
            break
    return g, failures


def test_criterion_1_claim_suite():
    start = time.perf_counter()
    bad = []
    for cover in (symbolic(2), symbolic(3), cube(2, 2)):
        rng = random.Random(f"claims-{cover}")
        for i in range(200):
            s = rng.choice(EXPONENTS)
            target = random_antichain(cover, rng, depth=8)
            g, failures = _claim_failures(cover, target, s)
            CORPUS["claims"].append((cover, g))
            if failures:
                bad.append((str(cover), i, failures))
    elapsed = time.perf_counter() - start
    record(1, not bad, elapsed, 30, f"600 antichains, {len(bad)} failing")


def test_criterion_2_kraft_and_antichains():
    start = time.perf_counter()
    rng = random.Random("kraft")
    covers = [symbolic(2), symbolic(3), cube(2, 2)]
    kraft_bad = 0
    for _ in range(100):
        cover = rng.choice(covers)
        s = rng.choice(EXPONENTS)
        k = rng.randint(0, 6)
        g = random_supergale(cover, s, rng, depth=6)
        assert validate_supergale(cover, g, g.support_depth + 1).ok
        out = supergale_to_cover(cover, g, k, g.support_depth + 1)
        if len(out) and kraft_sum(cover, out, s, arith=g.arith) * Fraction(2) ** k >= 1:
            kraft_bad += 1
    anti_bad = 0
    for size in list(range(0, 60, 3)) + [100, 200, 300, 400, 500]:
        cover = rng.choice(covers)
        addrs = ["".join(rng.choice(cover.alphabet) for _ in range(rng.randint(0, 9))) for _ in range(size)]
        got = maximal_antichain(addrs)
        if got != brute_maximal_antichain(addrs) or not is_antichain(got):
            anti_bad += 1
    elapsed = time.perf_counter() - start
    record(2, kraft_bad == 0 and anti_bad == 0, elapsed, 10, f"kraft violations {kraft_bad}/100, antichain mismatches {anti_bad}")


def test_criterion_3_dimension_oracles():
    start = time.perf_counter()
    full = dim_search(symbolic(2), SetDescription.full(), 60).estimate
    middle = dim_search(symbolic(3), MIDDLE, 60).estimate
    exact_sums = all(hausdorff_sum(symbolic(3), MIDDLE, LogExponent(2, 3), n) == 1 for n in range(0, 61))
    carpet = dim_search(cube(2, 3), SetDescription.forbidding(["4"]), 60).estimate
    err_mid = abs(middle - LN23)
    err_carpet = abs(carpet - math.log(8) / math.log(3))
    ok = full == 1.0 and err_mid <= 1e-6 and exact_sums and err_carpet <= 1e-6
    elapsed = time.perf_counter() - start
    record(3, ok, elapsed, 5, f"full={full!r}, middle err={err_mid:.1e}, symbolic sums={exact_sums}, carpet err={err_carpet:.1e}")


def test_criterion_4_correspondence():
    start = time.perf_counter()
    c = symbolic(3)
    above = gale_upper_bound(c, AutomatonGale(c, MIDDLE, LN23 + 0.02, 40), MIDDLE, 64, 40, seed=0)
    below = gale_upper_bound(c, AutomatonGale(c, MIDDLE, LN23 - 0.05, 40), MIDDLE, 64, 40, seed=0)
    ok = above.samples == 64 and above.certified and not below.certified
    elapsed = time.perf_counter() - start
    detail = f"success fraction {above.fractions[1]:.3f} above, {below.fractions[1]:.3f} below"
    record(4, ok, elapsed, 30, detail)


def test_criterion_5_oracle_coherence():
    start = time.perf_counter()
    grid = [Fraction(i, 20) for i in range(1, 21)]
    parts = []
    ok = True
    for alpha in ALPHAS:
        oracle = TableOracle.linear(alpha)
        point = StreamPoint(int(alpha * 100))
        est = cdim_point_estimate(kr_profile(symbolic(2), point, 1, 1024, oracle)).estimate
        rep = cdim_via_gales(symbolic(2), point, grid, 1024, oracle, keep_gales=True)
        CORPUS["oracle"].extend((symbolic(2), g) for g in rep.gales)
        valid = all(is_validated(symbolic(2), g) for g in rep.gales)
        good = valid and rep.coherent and alpha - Fraction(1, 100) <= est <= alpha and rep.upper_source == "gale" and alpha <= rep.upper <= alpha + Fraction(1, 10)
        ok = ok and good
        parts.append(f"a={alpha}: est={float(est):.4f} s={rep.upper}")
    elapsed = time.perf_counter() - start
    record(5, ok, elapsed, 60, ", ".join(parts))


def test_criterion_6_compressor():
    start = time.perf_counter()
    z = CompressorEstimator()
    zeros = cdim_point_estimate(kr_profile(symbolic(2), PeriodicPoint("", "0"), 1, 4096, z)).estimate
    prng = cdim_point_estimate(kr_profile(symbolic(2), StreamPoint(2024), 1, 4096, z)).estimate
    elapsed = time.perf_counter() - start
    record(6, zeros <= 0.15 and prng >= 0.85, elapsed, 60, f"zeros={float(zeros):.4f}, prng={float(prng):.4f} ({z.id})")


def test_criterion_7_counting_bound():
    if not CORPUS["claims"]:
        test_criterion_1_claim_suite()
    if not CORPUS["oracle"]:
        test_criterion_5_oracle_coherence()
    start = time.perf_counter()
    gales = CORPUS["claims"] + CORPUS["oracle"]
    violations = 0
    checks = 0
    for cover, g in gales:
        if not is_validated(cover, g):
            violations += 1
            continue
        try:
            bounds = counting_bounds(cover, g, range(0, 9), range(1, 17))
        except BoundViolation:
            violations += 1
            continue
        checks += len(bounds)
        violations += sum(cb.count > cb.bound * (1 + 1e-12) for cb in bounds)
    elapsed = time.perf_counter() - start
    record(7, violations == 0, elapsed, 10, f"{len(gales)} gales, {checks} (k, r) checks, {violations} violations")


def _random_sft(rng, alphabet):
    patterns = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 3))) for _ in range(rng.randint(0, 3))]
    return SetDescription.forbidding(patterns)


def test_criterion_8_stability():
    start = time.perf_counter()
    rng = random.Random("stability")
    worst = 0.0
    for _ in range(20):
        cover = rng.choice([symbolic(2), symbolic(3), cube(2, 2)])
        rep = stability_check(cover, [_random_sft(rng, cover.alphabet), _random_sft(rng, cover.alphabet)], 40)
        worst = max(worst, abs(rep.difference))
    elapsed = time.perf_counter() - start
    record(8, worst <= 0.01, elapsed, 20, f"20 pairs, worst |union - max| = {worst:.2e}")

