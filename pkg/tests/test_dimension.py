import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from galedim.compiler import cover_to_supergale
from galedim.cover import cube, symbolic
from galedim.dimension import (
    AutomatonGale,
    count_elements,
    dim_search,
    gale_upper_bound,
    hausdorff_sum,
    sample_points,
    stability_check,
)
from galedim.gale import uniform_gale, validate_supergale
from galedim.numbers import LogExponent
from galedim.sft import Automaton, SetDescription

from oracles import extendable_words, memory_one_dimension

MIDDLE = SetDescription.allowing("02")
CARPET = SetDescription.forbidding(["4"])
LN23 = math.log(2) / math.log(3)


def test_count_examples():
    assert count_elements(symbolic(3), SetDescription.forbidding(["1"]), 4) == 16
    assert count_elements(symbolic(2), SetDescription.full(), 10) == 1024
    assert count_elements(cube(2, 3), CARPET, 3) == 512


def test_carpet_counts_by_enumeration():
    alphabet = cube(2, 3).alphabet
    for n in range(4):
        assert count_elements(cube(2, 3), CARPET, n) == extendable_words(alphabet, ["4"], n, 0)


@given(st.lists(st.text("012", min_size=1, max_size=2), max_size=4), st.integers(0, 7))
def test_counts_match_brute_force(forbidden, n):
    desc = SetDescription.forbidding(forbidden)
    got = count_elements(symbolic(3), desc, n)
    # Memory-one rules: a word extends forever iff it extends by 4 more symbols.
    assert got == extendable_words("012", forbidden, n, 4)


def test_hausdorff_sum_examples():
    b2, b3 = symbolic(2), symbolic(3)
    for n in (1, 5, 9):
        assert hausdorff_sum(b2, SetDescription.full(), 1, n) == 1
    for n in range(0, 12):
        assert hausdorff_sum(b3, MIDDLE, LogExponent(2, 3), n) == 1
    assert abs(float(hausdorff_sum(b3, MIDDLE, 1, 5)) - (2 / 3) ** 5) < 1e-15


def test_dim_examples():
    assert dim_search(symbolic(2), SetDescription.full(), 40).estimate == 1.0
    est = dim_search(symbolic(3), MIDDLE, 60)
    assert abs(est.estimate - LN23) < 1e-9
    assert est.lower <= est.estimate <= est.upper
    assert "bisection-disagrees" not in est.flags
    carpet = dim_search(cube(2, 3), CARPET, 40)
    assert abs(carpet.estimate - math.log(8) / math.log(3)) < 1e-9


def test_empty_and_singleton():
    empty = SetDescription.forbidding(["0", "1"])
    e = dim_search(symbolic(2), empty, 10)
    assert e.estimate == 0 and "empty" in e.flags
    assert dim_search(symbolic(2), SetDescription.singleton("1", "01"), 20).estimate == 0


def test_product_counts():
    b = 3
    for n in range(6):
        one = count_elements(cube(1, b), SetDescription.full(), n)
        assert count_elements(cube(2, b), SetDescription.full(), n) == one**2
    assert dim_search(cube(2, 2), SetDescription.full(), 20).estimate == pytest.approx(2 * dim_search(cube(1, 2), SetDescription.full(), 20).estimate, abs=1e-12)


@given(st.lists(st.text("012", min_size=1, max_size=2), max_size=5))
def test_dimension_against_symbol_graph(forbidden):
    est = dim_search(symbolic(3), SetDescription.forbidding(forbidden), 40)
    assert est.estimate == pytest.approx(memory_one_dimension("012", forbidden), abs=1e-9)
    assert abs(est.bisection - est.log_count) <= 2 / 40


@given(st.lists(st.text("01", min_size=1, max_size=3), max_size=3), st.lists(st.text("01", min_size=1, max_size=3), max_size=2))
def test_monotone_under_inclusion(base_patterns, extra):
    big = SetDescription.forbidding(base_patterns)
    small = SetDescription.forbidding(base_patterns + extra)
    c = symbolic(2)
    assert small.automaton(c).included_in(big.automaton(c))
    assert dim_search(c, small, 30).estimate <= dim_search(c, big, 30).estimate + 1e-9


def test_stability_examples():
    c = symbolic(3)
    r = stability_check(c, [MIDDLE, SetDescription.singleton("", "0")], 40)
    assert r.union.estimate == pytest.approx(LN23, abs=1e-9)
    r = stability_check(symbolic(2), [SetDescription.full(), SetDescription.singleton("", "1")], 20)
    assert r.union.estimate == pytest.approx(1.0)
    # Same rule under two different first symbols: N_n doubles, dimension unchanged.
    first0 = SetDescription.from_transitions([{"0": 1}, {"0": 1, "1": 2}, {"0": 1}])
    first1 = SetDescription.from_transitions([{"1": 1}, {"0": 1, "1": 2}, {"0": 1}])
    r = stability_check(symbolic(2), [first0, first1], 40)
    assert r.difference == pytest.approx(0, abs=1e-9)


def test_automaton_gale_matches_compiled_table():
    c = symbolic(3)
    s = Fraction(2, 3)
    lazy = AutomatonGale(c, MIDDLE, s, 3)
    level3 = ["".join(t) for t in itertools.product("02", repeat=3)]
    table = cover_to_supergale(c, level3, s, -5)
    for addr in ["", "0", "02", "022", "0220", "1", "11", "2201"]:
        assert lazy.value(addr) == table.value(addr)
    mat = lazy.materialize()
    assert validate_supergale(c, mat, 5).ok


def test_sample_points_lie_in_set():
    c = symbolic(3)
    auto = MIDDLE.automaton(c)
    for p in sample_points(c, MIDDLE, 10, 30, seed=4):
        assert auto.accepts_prefix(p.symbols(c, 60))
    a = sample_points(c, MIDDLE, 5, 20, seed=4)
    b = sample_points(c, MIDDLE, 5, 20, seed=4)
    assert a == b


def test_upper_bound_certifies_above_and_fails_below():
    c = symbolic(3)
    above = AutomatonGale(c, MIDDLE, LN23 + 0.02, 40)
    rep = gale_upper_bound(c, above, MIDDLE, 16, 40, seed=1)
    assert rep.certified and rep.fractions[1] == 1.0
    below = AutomatonGale(c, MIDDLE, 0.4, 40)
    rep = gale_upper_bound(c, below, MIDDLE, 16, 40, seed=1)
    assert not rep.certified


def test_uniform_gale_certifies_nothing():
    c = symbolic(2)
    rep = gale_upper_bound(c, uniform_gale(c, 1), SetDescription.full(), 8, 20)
    assert all(v == 0 for v in rep.fractions.values())


def test_threads_give_same_report():
    c = symbolic(3)
    g = AutomatonGale(c, MIDDLE, LN23 + 0.02, 30)
    a = gale_upper_bound(c, g, MIDDLE, 12, 30, seed=3, threads=1)
    b = gale_upper_bound(c, g, MIDDLE, 12, 30, seed=3, threads=4)
    assert a.first_levels == b.first_levels


def test_automaton_validation():
    with pytest.raises(ValueError):
        Automaton("01", [{"2": 0}])
    rng = random.Random(0)
    word = MIDDLE.automaton(symbolic(3)).random_word(rng, 10)
    assert set(word) <= {"0", "2"}


def test_set_description_round_trip():
    c = symbolic(3)
    for d in [MIDDLE, CARPET, SetDescription.forbidding(["11"], ["2"]), MIDDLE.union(SetDescription.singleton("1", "0"))]:
        again = SetDescription.from_dict(d.to_dict())
        assert again == d
    with pytest.raises(ValueError):
        SetDescription.from_dict({"mode": "allowed", "base": 2, "allowed": ["0"]}, c)
