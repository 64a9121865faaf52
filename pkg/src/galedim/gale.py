"""Finitely supported s-supergales on a nice cover.

A table stores ``d`` on finitely many addresses.  Outside the table the
value comes from the extension policy:

* ``zero``: every unstored address is 0, so the supergale inequality can
  only loosen below the stored region;
* ``uniform-split``: an unstored address inherits the capital
  ``d * diam**s`` of its nearest stored ancestor split evenly among the
  ``branching`` children at each level, which keeps gale equality.

Under either policy an unstored subtree with no stored descendants satisfies
the inequality by construction, so validation only visits the stored
region, its ancestors, and their children.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .cover import NiceCover, ValidationReport, check_address, representation, PointRep
from .numbers import DEFAULT_TOLERANCE, Arith, as_fraction, make_arith

EXTENSIONS = ("zero", "uniform-split")


class GaleError(ValueError):
    pass


class MalformedGaleError(GaleError):
    pass


class IncompatibleExponentError(GaleError):
    pass


def _exponent(s):
    if isinstance(s, float):
        if s < 0:
            raise GaleError("s must be nonnegative")
        return s
    s = as_fraction(s)
    if s < 0:
        raise GaleError("s must be nonnegative")
    return s


class SupergaleTable:
    """Immutable table ``address -> d(address)`` plus an extension policy."""

    def __init__(
        self,
        cover: NiceCover,
        s,
        entries: Mapping[str, object] | Iterable[tuple[str, object]],
        extension: str = "zero",
        exact: bool | None = None,
        arith: Arith | None = None,
        meta: dict | None = None,
    ):
        if extension not in EXTENSIONS:
            raise GaleError(f"unknown extension policy {extension!r}")
        self.cover = cover
        self.s = _exponent(s)
        self.extension = extension
        self.arith = arith or make_arith(cover.base, self.s, exact=exact)
        items = entries.items() if isinstance(entries, Mapping) else entries
        table: dict[str, object] = {}
        for addr, value in items:
            addr = check_address(cover, addr)
            v = self.arith.value(value)
            if v < 0:
                raise MalformedGaleError(f"negative value {value} at {addr!r}")
            table[addr] = v
        self._entries = table
        self.meta = dict(meta or {})
        self._region = None
        self._validated: dict = {}
        self._levels: dict = {}

    @property
    def entries(self) -> Mapping[str, object]:
        return dict(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, addr: str) -> bool:
        return addr in self._entries

    @property
    def support_depth(self) -> int:
        return max((len(a) for a in self._entries), default=0)

    @property
    def exact(self) -> bool:
        return self.arith.exact

    def diam_power(self, level: int):
        return self.arith.diam_power(level, self.s)

    def _split_factor(self, levels: int):
        # d(child)/d(parent) under uniform split: base**s / branching per level.
        return self.arith.base_power(self.s * levels) / (self.cover.branching**levels)

    def stored_ancestor(self, addr: str) -> str | None:
        for m in range(len(addr), -1, -1):
            if addr[:m] in self._entries:
                return addr[:m]
        return None

    def value(self, addr: str):
        v = self._entries.get(addr)
        if v is not None:
            return v
        if self.extension == "zero":
            return self.arith.zero
        anc = self.stored_ancestor(addr)
        if anc is None:
            return self.arith.zero
        base = self._entries[anc]
        if base == 0:
            return base
        return base * self._split_factor(len(addr) - len(anc))

    __getitem__ = value

    def capital(self, addr: str):
        return self.value(addr) * self.diam_power(len(addr))

    @property
    def root_capital(self):
        return self.value("")

    def region(self) -> set[str]:
        """Stored addresses together with all their ancestors."""
        if self._region is None:
            out: set[str] = set()
            for addr in sorted(self._entries, key=len, reverse=True):
                for m in range(len(addr), -1, -1):
                    if addr[:m] in out:
                        break
                    out.add(addr[:m])
            self._region = frozenset(out)
        return set(self._region)

    def replace(self, entries=None, extension=None, meta=None) -> "SupergaleTable":
        return SupergaleTable(
            self.cover,
            self.s,
            self._entries if entries is None else entries,
            extension or self.extension,
            arith=self.arith,
            meta=self.meta if meta is None else meta,
        )

    def scaled(self, factor) -> "SupergaleTable":
        f = self.arith.value(factor)
        return self.replace({a: v * f for a, v in self._entries.items()})

    def truncated(self, depth: int) -> "SupergaleTable":
        """Drop entries deeper than ``depth`` and zero-extend."""
        return self.replace({a: v for a, v in self._entries.items() if len(a) <= depth}, extension="zero")

    def format_value(self, v) -> str:
        return self.arith.format(v)

    def __repr__(self) -> str:
        return f"SupergaleTable({self.cover}, s={self.s}, {len(self)} entries, {self.extension})"


def _check_nodes(gale: SupergaleTable, depth: int) -> list[str]:
    return sorted((a for a in gale.region() if len(a) < depth), key=lambda a: (len(a), a))


def _inequality_report(cover: NiceCover, gale: SupergaleTable, depth: int, tol, equality: bool) -> ValidationReport:
    if gale.cover != cover:
        raise GaleError(f"gale is defined on {gale.cover}, not {cover}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    tol = as_fraction(tol)
    arith = gale.arith
    report = ValidationReport()
    for addr, v in gale._entries.items():
        if v < 0:
            raise MalformedGaleError(f"negative value at {addr!r}")
    for addr in _check_nodes(gale, depth):
        report.checked += 1
        n = len(addr)
        lhs = gale.value(addr) * gale.diam_power(n)
        total = arith.zero
        for kid in (addr + ch for ch in cover.alphabet):
            total = total + gale.value(kid)
        rhs = total * gale.diam_power(n + 1)
        if equality:
            if not arith.eq(lhs, rhs, tol):
                report.add(addr, "gale-equality", f"{arith.format(lhs)} != {arith.format(rhs)}")
        elif not arith.le(rhs, lhs, tol):
            report.add(addr, "supergale", f"{arith.format(lhs)} < {arith.format(rhs)}")
    all_nodes = sum(cover.branching**m for m in range(depth))
    report.notes.update(
        {
            "root_capital": arith.format(gale.root_capital),
            "root_capital_float": float(gale.root_capital),
            "mode": "exact" if arith.exact else "float",
            "precision_bits": None if arith.exact else arith.ctx.prec,
            "tolerance": "0" if arith.exact else str(tol),
            "explicit_nodes": report.checked,
            "extension_certified_nodes": all_nodes - report.checked,
            "depth": depth,
            "support_depth": gale.support_depth,
        }
    )
    return report


def validate_supergale(cover: NiceCover, gale: SupergaleTable, depth: int, tol=DEFAULT_TOLERANCE) -> ValidationReport:
    """Check ``d(U) diam(U)^s >= sum of children`` at every node above ``depth``.

    Exact-mode tables are compared without tolerance.
    """
    return _inequality_report(cover, gale, depth, tol, equality=False)


def is_validated(cover: NiceCover, gale: SupergaleTable, tol=DEFAULT_TOLERANCE) -> bool:
    """Validate the whole stored region once per tolerance; tables are immutable."""
    key = (cover, as_fraction(tol))
    if key not in gale._validated:
        gale._validated[key] = validate_supergale(cover, gale, gale.support_depth + 1, tol).ok
    return gale._validated[key]


def is_gale(cover: NiceCover, gale: SupergaleTable, depth: int, tol=DEFAULT_TOLERANCE) -> bool:
    return _inequality_report(cover, gale, depth, tol, equality=True).ok


@dataclass
class SuccessTrace:
    values: list
    running_max: list
    verdict_at_threshold: dict = field(default_factory=dict)
    root_capital: object = None

    def first_exceeding(self, threshold) -> int | None:
        for n, m in enumerate(self.running_max):
            if m > threshold:
                return n
        return None

    def floats(self) -> list[float]:
        return [float(v) for v in self.values]


def evaluate_success(
    cover: NiceCover,
    gale: SupergaleTable,
    point: PointRep,
    depth: int,
    thresholds: Sequence = (2,),
) -> SuccessTrace:
    """Gale values along the point's canonical representation."""
    arith = gale.arith
    values = [gale.value(w) for w in representation(cover, point, depth)]
    running = []
    best = None
    for v in values:
        best = v if best is None or v > best else best
        running.append(best)
    trace = SuccessTrace(values, running, root_capital=gale.root_capital)
    for t in thresholds:
        trace.verdict_at_threshold[t] = trace.first_exceeding(arith.value(t))
    return trace


def combine(gales: Sequence[tuple[object, SupergaleTable]]) -> SupergaleTable:
    """Pointwise weighted sum ``sum_i w_i d_i`` on the union of supports."""
    if not gales:
        raise GaleError("nothing to combine")
    first = gales[0][1]
    for _, g in gales:
        if g.s != first.s:
            raise IncompatibleExponentError(f"exponents differ: {first.s} vs {g.s}")
        if g.cover != first.cover:
            raise GaleError("gales live on different covers")
        if g.extension != first.extension:
            raise GaleError("cannot combine gales with different extension policies")
    exact = all(g.exact for _, g in gales)
    arith = first.arith if exact == first.exact else make_arith(first.cover.base, first.s, exact=exact)
    weights = []
    for w, _ in gales:
        wv = arith.value(w)
        if wv < 0:
            raise GaleError("weights must be nonnegative")
        weights.append(wv)
    support: set[str] = set()
    for _, g in gales:
        support.update(g._entries)
    entries = {}
    for addr in support:
        total = arith.zero
        for wv, (_, g) in zip(weights, gales):
            if wv != 0:
                total = total + wv * arith.value(g.value(addr))
        entries[addr] = total
    return SupergaleTable(first.cover, first.s, entries, first.extension, arith=arith)


def uniform_gale(cover: NiceCover, s, value=1, exact: bool | None = None) -> SupergaleTable:
    """The gale with ``d(root) = value`` and capital split evenly below it."""
    return SupergaleTable(cover, s, {"": value}, "uniform-split", exact=exact)


def doubling_gale(cover: NiceCover, s, depth: int, symbol: str = "0", exact: bool | None = None) -> SupergaleTable:
    """Bet all capital on ``symbol`` at every level, so ``d(w+symbol) = base**s * d(w)``.

    Stored to ``depth``; the losing siblings are explicit zeros.  For
    symbolic(2) and s = 1/2 this is ``d(w0) = 2**(1-s) d(w)``.
    """
    s = _exponent(s)
    arith = make_arith(cover.base, s, exact=exact)
    growth = arith.base_power(s)
    entries = {"": arith.value(1)}
    v = entries[""]
    for m in range(1, depth + 1):
        parent = symbol * (m - 1)
        v = v * growth
        for ch in cover.alphabet:
            entries[parent + ch] = v if ch == symbol else arith.zero
    return SupergaleTable(cover, s, entries, "zero", arith=arith)
