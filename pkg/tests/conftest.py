import os
import sys
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from galedim.cover import cube, symbolic  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

COVERS = [symbolic(2), symbolic(3), cube(2, 2), cube(1, 3)]
EXPONENTS = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1)]


def address_strategy(cover, max_len=6, min_len=0):
    return st.text(alphabet=cover.alphabet, min_size=min_len, max_size=max_len)


@st.composite
def cover_and_addresses(draw, max_len=6, max_size=12, min_size=0):
    cover = draw(st.sampled_from(COVERS))
    addrs = draw(st.lists(address_strategy(cover, max_len), min_size=min_size, max_size=max_size))
    return cover, addrs


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in acceptance.RESULTS:
        terminalreporter.write_line(line)
