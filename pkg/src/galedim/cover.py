"""Nice covers: addresses, the two built-in families, points and validators.

Addresses are plain strings over the digits ``0..alphabet_size-1``; the
empty string is the single level-0 element (the whole space).

``symbolic(k)`` is the sequence space over k symbols with the metric
``k**-lcp``; level-m cylinders have diameter ``k**-m``.

``cube(n, b)`` is ``[0, 1)**n`` under the sup-norm, cut into half-open
b-adic cubes.  A child digit packs one b-ary digit per axis as
``sum(a_i * b**i)`` with axis 0 least significant.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import TYPE_CHECKING, Iterator, Sequence

from .numbers import ExactScale

if TYPE_CHECKING:
    from .compiler import WeightedCover

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class CoverError(ValueError):
    pass


class MalformedAddressError(CoverError):
    pass


class OutOfDomainError(CoverError):
    pass


class RefinementError(CoverError):
    def __init__(self, message: str, required_r: int | None = None):
        super().__init__(message)
        self.required_r = required_r


@dataclass(frozen=True)
class NiceCover:
    """Descriptor of a built-in nice cover.

    ``zeta`` and ``c`` default to the correct constants for the family; they
    can be overridden to build deliberately broken descriptors for the
    validators.
    """

    kind: str
    base: int
    dim: int = 1
    zeta: Fraction | None = None
    c: int | None = None

    def __post_init__(self):
        if self.kind not in ("symbolic", "cube"):
            raise CoverError(f"unknown cover kind {self.kind!r}")
        if self.base < 2:
            raise CoverError("base must be >= 2")
        if self.dim < 1 or (self.kind == "symbolic" and self.dim != 1):
            raise CoverError(f"bad dimension {self.dim} for {self.kind} cover")
        if self.branching > len(DIGITS):
            raise CoverError(f"branching {self.branching} exceeds the digit alphabet")
        if self.zeta is None:
            object.__setattr__(self, "zeta", Fraction(1, self.base))
        else:
            object.__setattr__(self, "zeta", Fraction(self.zeta))
            if not 0 < self.zeta < 1:
                raise CoverError("zeta must lie in (0, 1)")
        if self.c is None:
            # One cylinder (symbolic) or at most 2 grid cubes per axis (cube);
            # the strict bound diam(U) < c*diam(A) also needs c >= base.
            default = self.base if self.kind == "symbolic" else max(2**self.dim, self.base)
            object.__setattr__(self, "c", default)

    @property
    def branching(self) -> int:
        return self.base**self.dim

    @property
    def alphabet_size(self) -> int:
        return self.branching

    @property
    def alphabet(self) -> str:
        return DIGITS[: self.branching]

    def to_dict(self) -> dict:
        if self.kind == "symbolic":
            return {"kind": "symbolic", "k": self.base}
        return {"kind": "cube", "n": self.dim, "base": self.base}

    def __str__(self) -> str:
        if self.kind == "symbolic":
            return f"symbolic:{self.base}"
        return f"cube:{self.dim}:{self.base}"


def symbolic(k: int) -> NiceCover:
    return NiceCover("symbolic", k)


def cube(n: int, base: int) -> NiceCover:
    return NiceCover("cube", base, n)


def cover_from_dict(d: dict) -> NiceCover:
    kind = d.get("kind")
    if kind == "symbolic":
        return symbolic(int(d["k"]))
    if kind == "cube":
        return cube(int(d["n"]), int(d["base"]))
    raise CoverError(f"unknown cover record {d!r}")


def parse_cover(spec: str) -> NiceCover:
    """``symbolic:2`` or ``cube:2:3`` (dimension, base)."""
    parts = spec.split(":")
    try:
        if parts[0] == "symbolic" and len(parts) == 2:
            return symbolic(int(parts[1]))
        if parts[0] == "cube" and len(parts) == 3:
            return cube(int(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise CoverError(f"bad cover spec {spec!r}: {exc}") from None
    raise CoverError(f"bad cover spec {spec!r}; expected symbolic:K or cube:N:B")


# -- addresses -----------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Address:
    symbols: str

    @property
    def level(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return self.symbols


def check_address(cover: NiceCover, addr: str) -> str:
    if isinstance(addr, Address):
        addr = addr.symbols
    if not isinstance(addr, str):
        raise MalformedAddressError(f"address must be a string, got {type(addr).__name__}")
    alphabet = cover.alphabet
    if set(addr) <= set(alphabet):
        return addr
    for ch in addr:
        if ch not in alphabet:
            raise MalformedAddressError(f"symbol {ch!r} not in alphabet of {cover} (address {addr!r})")
    return addr


def children(cover: NiceCover, addr: str) -> list[str]:
    addr = check_address(cover, addr)
    return [addr + ch for ch in cover.alphabet]


def parent(cover: NiceCover, addr: str) -> str | None:
    addr = check_address(cover, addr)
    return addr[:-1] if addr else None


def diam(cover: NiceCover, addr: str) -> ExactScale:
    addr = check_address(cover, addr)
    return ExactScale(len(addr), cover.base)


def addresses(cover: NiceCover, level: int) -> Iterator[str]:
    for tup in product(cover.alphabet, repeat=level):
        yield "".join(tup)


def cube_bounds(cover: NiceCover, addr: str) -> list[tuple[Fraction, Fraction]]:
    """Per-axis half-open interval ``[lo, hi)`` of a cube address."""
    addr = check_address(cover, addr)
    b = cover.base
    lows = [Fraction(0)] * cover.dim
    side = Fraction(1)
    for ch in addr:
        digit = DIGITS.index(ch)
        side /= b
        for axis in range(cover.dim):
            digit, a = divmod(digit, b)
            lows[axis] += a * side
    return [(lo, lo + side) for lo in lows]


# -- points ----------------------------------------------------------------------


class PointRep:
    """A computable point; subclasses generate its canonical representation."""

    def symbols(self, cover: NiceCover, depth: int) -> str:
        raise NotImplementedError

    def identity(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class PeriodicPoint(PointRep):
    """The symbol sequence ``prefix + period + period + ...``."""

    prefix: str = ""
    period: str = "0"

    def __post_init__(self):
        if not self.period:
            raise CoverError("period must be nonempty")

    def symbols(self, cover: NiceCover, depth: int) -> str:
        check_address(cover, self.prefix + self.period)
        if depth <= len(self.prefix):
            return self.prefix[:depth]
        rest = depth - len(self.prefix)
        reps = -(-rest // len(self.period))
        return self.prefix + (self.period * reps)[:rest]

    def identity(self) -> str:
        return f"periodic:{self.prefix}({self.period})"


@dataclass(frozen=True)
class RationalPoint(PointRep):
    """A point of ``[0, 1)**n`` with rational coordinates (cube covers)."""

    coords: tuple[Fraction, ...]

    def __init__(self, *coords):
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        coords = tuple(Fraction(c) for c in coords)
        for x in coords:
            if not 0 <= x < 1:
                raise OutOfDomainError(f"coordinate {x} outside [0, 1)")
        object.__setattr__(self, "coords", coords)

    def symbols(self, cover: NiceCover, depth: int) -> str:
        if cover.kind != "cube":
            raise CoverError("rational coordinates need a cube cover")
        if len(self.coords) != cover.dim:
            raise CoverError(f"point has {len(self.coords)} coordinates, cover has dim {cover.dim}")
        b = cover.base
        fracs = list(self.coords)
        out = []
        for _ in range(depth):
            digit = 0
            for axis in reversed(range(cover.dim)):
                a = int(fracs[axis] * b)
                fracs[axis] = fracs[axis] * b - a
                digit = digit * b + a
            out.append(DIGITS[digit])
        return "".join(out)

    def identity(self) -> str:
        return "rational:" + ",".join(str(c) for c in self.coords)


@dataclass(frozen=True)
class StreamPoint(PointRep):
    """Seeded pseudorandom symbols, uniform over the cover alphabet."""

    seed: int = 0

    def symbols(self, cover: NiceCover, depth: int) -> str:
        rng = random.Random(self.seed)
        alphabet = cover.alphabet
        return "".join(alphabet[rng.randrange(len(alphabet))] for _ in range(depth))

    def identity(self) -> str:
        return f"stream:{self.seed}"


def parse_point(spec: str) -> PointRep:
    """``periodic:PREFIX(PERIOD)``, ``rational:x,y`` or ``stream:SEED``."""
    kind, _, body = spec.partition(":")
    if kind == "periodic":
        if not body.endswith(")") or "(" not in body:
            raise CoverError(f"bad periodic point {spec!r}; expected periodic:PREFIX(PERIOD)")
        pre, _, per = body[:-1].partition("(")
        return PeriodicPoint(pre, per)
    if kind == "rational":
        return RationalPoint(*(Fraction(x) for x in body.split(",")))
    if kind == "stream":
        return StreamPoint(int(body))
    raise CoverError(f"unknown point spec {spec!r}")


def representation(cover: NiceCover, point: PointRep, depth: int) -> list[str]:
    """Addresses ``w_0 .. w_depth`` of the point's canonical representation."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    word = point.symbols(cover, depth)
    check_address(cover, word)
    return [word[:m] for m in range(depth + 1)]


def contains(cover: NiceCover, addr: str, point: PointRep) -> bool:
    """Brute-force membership of the point in the element ``addr``."""
    if cover.kind == "cube" and isinstance(point, RationalPoint):
        return all(lo <= x < hi for x, (lo, hi) in zip(point.coords, cube_bounds(cover, addr)))
    return point.symbols(cover, len(addr)) == addr


def dense_sample(cover: NiceCover, depth: int) -> list[PointRep]:
    """One canonical point (the all-zeros extension) per level-``depth`` element."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    points: list[PointRep] = []
    for addr in addresses(cover, depth):
        if cover.kind == "cube":
            points.append(RationalPoint(*(lo for lo, _ in cube_bounds(cover, addr))))
        else:
            points.append(PeriodicPoint(addr, "0"))
    return points


# -- validation ------------------------------------------------------------------


@dataclass
class Violation:
    address: str
    kind: str
    detail: str


@dataclass
class ValidationReport:
    ok: bool = True
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, address: str, kind: str, detail: str) -> None:
        self.ok = False
        self.violations.append(Violation(address, kind, detail))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked": self.checked,
            "violations": [v.__dict__ for v in self.violations],
            "notes": self.notes,
        }


def _subset(cover: NiceCover, child: str, par: str) -> bool:
    if cover.kind == "cube":
        return all(plo <= clo and chi <= phi for (clo, chi), (plo, phi) in zip(cube_bounds(cover, child), cube_bounds(cover, par)))
    return child.startswith(par)


def validate_nice_axioms(cover: NiceCover, depth: int) -> ValidationReport:
    """Exhaustively check finite branching, unique ancestry and small size."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    report = ValidationReport()
    for level in range(depth + 1):
        bound = cover.zeta**level
        for addr in addresses(cover, level):
            report.checked += 1
            d = diam(cover, addr).value()
            if d > bound:
                report.add(addr, "small-size", f"diam {d} > zeta^{level} = {bound}")
            if level < depth:
                kids = children(cover, addr)
                if len(set(kids)) != cover.branching:
                    report.add(addr, "branching", f"{len(set(kids))} children, expected {cover.branching}")
                for kid in kids:
                    if parent(cover, kid) != addr or not _subset(cover, kid, addr):
                        report.add(kid, "ancestry", f"parent of {kid!r} is not {addr!r}")
    report.notes["c"] = cover.c
    report.notes["c-cover"] = "certified analytically"
    return report


def refine_to_nice(cover: NiceCover, raw: Sequence[tuple[PointRep, Fraction]], r: int) -> "WeightedCover":
    """Replace small balls by at most ``c`` cover elements of level > r.

    Each ball is treated as a set of diameter ``2*radius`` around its centre;
    it is covered by the elements of the deepest level whose diameter is at
    least ``2*radius``.
    """
    from .compiler import WeightedCover

    eps = cover.zeta ** (r + 1)
    out: list[str] = []
    for center, radius in raw:
        radius = Fraction(radius)
        if radius <= 0:
            raise ValueError("radius must be positive")
        width = 2 * radius
        if width >= eps:
            need = 0
            while cover.zeta ** (need + 1) > width:
                need += 1
            raise RefinementError(
                f"ball of radius {radius} too large for level > {r}; need r <= {need - 1}",
                required_r=need - 1,
            )
        m = 0
        while Fraction(1, cover.base ** (m + 1)) >= width:
            m += 1
        if cover.kind == "symbolic" or not isinstance(center, RationalPoint):
            out.append(center.symbols(cover, m))
            continue
        side = Fraction(1, cover.base**m)
        per_axis = []
        for x in center.coords:
            lo, hi = x - radius, x + radius
            first = max(int(lo / side) if lo >= 0 else 0, 0)
            idx = [j for j in (first, first + 1) if j < cover.base**m and j * side < hi and (j + 1) * side > lo]
            per_axis.append(idx)
        for combo in product(*per_axis):
            out.append(_cube_address(cover, combo, m))
    return WeightedCover(tuple(out), r + 1)


def _cube_address(cover: NiceCover, indices: Sequence[int], m: int) -> str:
    b = cover.base
    digits = []
    for level in range(m):
        shift = b ** (m - 1 - level)
        digit = 0
        for axis in reversed(range(cover.dim)):
            digit = digit * b + (indices[axis] // shift) % b
        digits.append(DIGITS[digit])
    return "".join(digits)
