"""Covers to supergales and back.

``cover_to_supergale`` turns an antichain ``D`` of cover elements into the
supergale ``d_k``: above or beside ``D`` the value of ``U`` is
``sum(diam(W)**s for W in D below U) / diam(U)**s``, and strictly below an
element of ``D`` the capital is split among siblings in proportion to
``diam**s``.  Built-in covers have equal sibling diameters, so that split is
the ``uniform-split`` extension of :mod:`galedim.gale`.

``supergale_to_cover`` goes the other way: it collects the elements where a
supergale has multiplied its initial capital by more than ``2**k`` and keeps
the maximal ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .cover import NiceCover, check_address
from .gale import GaleError, SupergaleTable, _exponent, combine, validate_supergale
from .numbers import DEFAULT_TOLERANCE, Arith, make_arith, mp, mpf_of


class NotAntichainError(ValueError):
    pass


class UnvalidatedGaleError(GaleError):
    pass


class Antichain:
    """A finite set of pairwise prefix-incomparable addresses."""

    __slots__ = ("elements", "meta")

    def __init__(self, elements: Iterable[str] = (), meta: dict | None = None):
        elems = frozenset(elements)
        ordered = sorted(elems)
        # Lexicographic order puts every extension of ``a`` right after ``a``.
        for a, b in zip(ordered, ordered[1:]):
            if b.startswith(a):
                raise NotAntichainError(f"{a!r} is a prefix of {b!r}; call maximal_antichain first")
        self.elements = elems
        self.meta = dict(meta or {})

    def __iter__(self):
        return iter(sorted(self.elements, key=lambda a: (len(a), a)))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, addr) -> bool:
        return addr in self.elements

    def __eq__(self, other) -> bool:
        if isinstance(other, Antichain):
            return self.elements == other.elements
        if isinstance(other, (set, frozenset)):
            return self.elements == other
        return NotImplemented

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"Antichain({sorted(self.elements)!r})"

    def covers(self, addr: str) -> bool:
        """True when some element is a prefix of ``addr`` (contains it)."""
        return any(addr[:m] in self.elements for m in range(len(addr) + 1))


@dataclass(frozen=True)
class WeightedCover:
    """Cover elements, possibly comparable, all at level >= ``target_level``."""

    elements: tuple[str, ...]
    target_level: int = 0

    def __post_init__(self):
        for a in self.elements:
            if len(a) < self.target_level:
                raise ValueError(f"{a!r} lies above level {self.target_level}")


def maximal_antichain(addresses: Iterable[str]) -> Antichain:
    """Keep the addresses with no proper prefix in the input."""
    pool = set(addresses)
    keep = [a for a in pool if not any(a[:m] in pool for m in range(len(a)))]
    return Antichain(keep)


def _as_antichain(target) -> Antichain:
    return target if isinstance(target, Antichain) else Antichain(target)


def kraft_sum(cover: NiceCover, antichain, s, exact: bool | None = None, arith: Arith | None = None):
    """``sum(diam(U)**s for U in antichain)``."""
    antichain = _as_antichain(antichain)
    arith = arith or make_arith(cover.base, s, exact=exact)
    total = arith.zero
    for a in antichain.elements:
        check_address(cover, a)
        total = total + arith.diam_power(len(a), s)
    return total


def kraft_exponent(cover: NiceCover, kraft, s) -> int:
    """Largest k with ``kraft < c**(1+s) * 2**-k``."""
    ctx = mp()
    s_m = mpf_of(ctx, _exponent(s))
    value = mpf_of(ctx, kraft)
    if value <= 0:
        raise ValueError("Kraft sum of an empty antichain has no exponent")
    bound = ctx.log(ctx.power(cover.c, 1 + s_m) / value, 2)
    k = int(ctx.floor(bound))
    if k == bound:
        k -= 1
    return k


def _kraft_ok(cover: NiceCover, kraft, s, k: int) -> bool:
    ctx = mp()
    value = mpf_of(ctx, kraft)
    return value < ctx.power(cover.c, 1 + mpf_of(ctx, _exponent(s))) * ctx.ldexp(1, -k)


def cover_to_supergale(
    cover: NiceCover,
    target,
    s,
    k: int,
    extension: str = "uniform-split",
    exact: bool | None = None,
) -> SupergaleTable:
    """Compile an antichain into the supergale ``d_k``.

    The table stores ``d_k`` on the target elements, their ancestors and the
    ancestors' other children (as explicit zeros).  With the default
    ``uniform-split`` extension the values below each target are exactly the
    proportional split; ``extension="zero"`` drops that mass instead.
    """
    s = _exponent(s)
    if s == 0:
        raise ValueError("s = 0 is not supported: zero-diameter substitutions are undefined there")
    try:
        target = _as_antichain(target)
    except NotAntichainError as exc:
        raise NotAntichainError(f"target is not an antichain ({exc})") from None
    arith = make_arith(cover.base, s, exact=exact)
    kraft = kraft_sum(cover, target, s, arith=arith)
    if target.elements and not _kraft_ok(cover, kraft, s, k):
        raise ValueError(f"Kraft sum {arith.format(kraft)} is not below c^(1+s) 2^-{k}; pick k <= {kraft_exponent(cover, kraft, s)}")
    caps: dict[str, object] = {}
    for w in target.elements:
        check_address(cover, w)
        weight = arith.diam_power(len(w), s)
        for m in range(len(w) + 1):
            prefix = w[:m]
            caps[prefix] = caps[prefix] + weight if prefix in caps else weight
    entries: dict[str, object] = {}
    for addr, cap in caps.items():
        entries[addr] = cap * arith.base_power(len(addr) * s)
        if addr not in target.elements:
            for ch in cover.alphabet:
                kid = addr + ch
                if kid not in caps:
                    entries[kid] = arith.zero
    if not entries:
        entries[""] = arith.zero
    meta = {"k": k, "kraft_sum": arith.format(kraft), "targets": len(target)}
    return SupergaleTable(cover, s, entries, extension, arith=arith, meta=meta)


def dk_value(cover: NiceCover, target, s, addr: str, arith: Arith | None = None):
    """``d_k(addr)`` straight from the three-case definition, no table.

    Independent of :func:`cover_to_supergale`; used to cross-check it.
    """
    target = _as_antichain(target)
    arith = arith or make_arith(cover.base, s)
    n = len(addr)
    if _is_zero_diameter(cover, addr):
        return arith.value(1)
    # Case 1: strictly below some target W; recurse through the parent V.
    below = [addr[:m] for m in range(n) if addr[:m] in target.elements]
    if below:
        par = addr[:-1]
        siblings = arith.zero
        for _ in cover.alphabet:
            siblings = siblings + arith.diam_power(n, s)
        return dk_value(cover, target, s, par, arith) * arith.diam_power(n - 1, s) / siblings
    # Case 2: sum over targets inside addr at level >= n.
    total = arith.zero
    for w in target.elements:
        if w.startswith(addr):
            total = total + arith.diam_power(len(w), s)
    return total / arith.diam_power(n, s)


def _is_zero_diameter(cover: NiceCover, addr: str) -> bool:
    # Built-in covers have diameter base**-level > 0 everywhere.
    from .cover import diam

    return diam(cover, addr).is_zero


def combine_compiled(cover: NiceCover, s, layers: Sequence, exact: bool | None = None, k0: int = 1) -> SupergaleTable:
    """``sum_r 2**k_r * d_{2 k_r}`` from antichains ``D_{2 k_r}``.

    Layers are ``(k, antichain)`` pairs or bare antichains; the r-th bare
    layer (from 1) gets ``k_r = r + k0``.
    """
    gales = []
    for r, layer in enumerate(layers, start=1):
        if isinstance(layer, tuple) and len(layer) == 2 and isinstance(layer[0], int):
            k, antichain = layer
        else:
            k, antichain = r + k0, layer
        gales.append((Fraction(2) ** k, cover_to_supergale(cover, antichain, s, 2 * k, exact=exact)))
    return combine(gales)


def supergale_to_cover(
    cover: NiceCover,
    gale: SupergaleTable,
    k: int,
    depth: int,
    tol=DEFAULT_TOLERANCE,
) -> Antichain:
    """Maximal elements of ``C_k = {U : d(U) > 2**k * root capital}``.

    ``C_k`` is enumerated over the stored region plus one extension level,
    down to ``depth``.  ``meta["complete"]`` is False when the extension
    could still push deeper unstored addresses over the threshold.
    """
    report = validate_supergale(cover, gale, max(depth, gale.support_depth + 1), tol)
    if not report.ok:
        first = report.violations[0]
        raise UnvalidatedGaleError(f"not a supergale: violation at {first.address!r} ({first.detail})")
    arith = gale.arith
    threshold = arith.value(Fraction(2) ** k) * gale.root_capital
    region = gale.region()
    candidates = set(a for a in region if len(a) <= depth)
    for a in region:
        if len(a) < depth:
            candidates.update(a + ch for ch in cover.alphabet)
    hits = [a for a in candidates if gale.value(a) > threshold]
    result = maximal_antichain(hits)
    growth = gale.extension == "uniform-split" and arith.base_power(gale.s) > cover.branching
    complete = not (growth and depth > gale.support_depth + 1)
    result.meta.update({"k": k, "depth": depth, "complete": complete, "candidates": len(candidates)})
    return result
