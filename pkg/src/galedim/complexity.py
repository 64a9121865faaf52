"""Kolmogorov complexity at precision r and constructive dimension estimates.

True prefix complexity is uncomputable, so every result here is relative to
a :class:`ComplexityEstimator`: a compressor adapter for realistic data, or
a table oracle with assigned complexities for sharp synthetic checks.
"""

from __future__ import annotations

import bz2
import lzma
import math
import threading
import zlib
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .cover import NiceCover, PointRep, check_address
from .gale import SupergaleTable, _exponent, evaluate_success, is_validated
from .compiler import UnvalidatedGaleError
from .numbers import DEFAULT_TOLERANCE, _context, make_arith, mp, mpf_of


def encode_address(addr: str, alphabet_size: int) -> bytes:
    """Length-prefixed packing of an address as a base-``alphabet_size`` integer.

    For binary alphabets this is plain bit packing.
    """
    n = len(addr)
    header = bytearray()
    v = n
    while True:
        byte, v = v & 0x7F, v >> 7
        header.append(byte | (0x80 if v else 0))
        if not v:
            break
    if not n:
        return bytes(header)
    value = int(addr, alphabet_size) if alphabet_size <= 36 else 0
    width = math.ceil(n * math.log2(alphabet_size) / 8)
    return bytes(header) + value.to_bytes(width, "big")


class ComplexityEstimator:
    """Estimated description length in bits."""

    id = "abstract"
    thread_safe = True

    def estimate(self, data: bytes) -> float:
        raise NotImplementedError

    def address_bits(self, addr: str, alphabet_size: int) -> float:
        return self.estimate(encode_address(addr, alphabet_size))


_COMPRESSORS: dict[str, Callable[[bytes], bytes]] = {
    "zlib": lambda b: zlib.compress(b, 9),
    "bz2": lambda b: bz2.compress(b, 9),
    "lzma": lambda b: lzma.compress(b, format=lzma.FORMAT_RAW, filters=[{"id": lzma.FILTER_LZMA2, "preset": 9}]),
}


class CompressorEstimator(ComplexityEstimator):
    """``8 * len(compress(data))`` minus the compressor's empty-input overhead."""

    def __init__(self, name: str = "zlib"):
        if name not in _COMPRESSORS:
            raise ValueError(f"unknown compressor {name!r}; choose from {sorted(_COMPRESSORS)}")
        self.name = name
        self.id = f"compressor:{name}"
        self._compress = _COMPRESSORS[name]
        self.correction = 8 * len(self._compress(b""))

    def estimate(self, data: bytes) -> float:
        return float(max(0, 8 * len(self._compress(data)) - self.correction))


class TableOracle(ComplexityEstimator):
    """Assigned complexities per address, with an optional rule for the rest."""

    def __init__(self, table: Mapping[str, float] | None = None, default: Callable[[str], float] | None = None, id: str = "oracle"):
        self.table = dict(table or {})
        self.default = default
        self.id = id

    @classmethod
    def linear(cls, alpha) -> "TableOracle":
        """K(w) = alpha * |w| for every address."""
        alpha = Fraction(alpha)
        return cls(default=lambda w: float(alpha * len(w)), id=f"oracle:linear:{alpha}")

    @classmethod
    def from_file(cls, path: str | Path) -> "TableOracle":
        """Lines ``address bits``; blank lines and ``#`` comments skipped."""
        table = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                table[""] = float(parts[0])
            elif len(parts) == 2:
                table[parts[0]] = float(parts[1])
            else:
                raise ValueError(f"{path}:{lineno}: expected 'address bits'")
        return cls(table, id=f"oracle:{path}")

    def address_bits(self, addr: str, alphabet_size: int) -> float:
        if addr in self.table:
            return self.table[addr]
        if self.default is not None:
            return self.default(addr)
        return math.inf

    def estimate(self, data: bytes) -> float:
        raise TypeError("table oracles are keyed by address, use address_bits")


class SerialEstimator(ComplexityEstimator):
    """Wrap an estimator that is not safe for concurrent calls."""

    def __init__(self, inner: ComplexityEstimator):
        self.inner = inner
        self.id = inner.id
        self._lock = threading.Lock()

    def estimate(self, data: bytes) -> float:
        with self._lock:
            return self.inner.estimate(data)

    def address_bits(self, addr: str, alphabet_size: int) -> float:
        with self._lock:
            return self.inner.address_bits(addr, alphabet_size)


def parse_estimator(spec: str) -> ComplexityEstimator:
    """``compressor:NAME``, ``oracle:FILE`` or ``oracle:linear:ALPHA``."""
    kind, _, rest = spec.partition(":")
    if kind == "compressor":
        return CompressorEstimator(rest or "zlib")
    if kind == "oracle":
        if rest.startswith("linear:"):
            return TableOracle.linear(Fraction(rest.split(":", 1)[1]))
        return TableOracle.from_file(rest)
    raise ValueError(f"unknown estimator {spec!r}")


# -- precision windows -----------------------------------------------------------------


def level_for_precision(cover: NiceCover, r: int) -> int | None:
    """The level m with ``2**-r < diam <= 2**(1-r)``, i.e. ``base**m`` has bit length r.

    None when no level lands in the window.
    """
    b = cover.base
    # Levels scale with a = 1/log2(1/zeta) per bit of precision.
    a = 1 / math.log2(b)
    guess = max(0, int((r - 1) * a))
    for m in range(max(0, guess - 2), guess + 3):
        if (b**m).bit_length() == r:
            return m
    return None


@dataclass
class ProfileEntry:
    r: int
    bits: float | None
    witness: str | None

    @property
    def skipped(self) -> bool:
        return self.witness is None

    @property
    def ratio(self) -> float | None:
        return None if self.bits is None else self.bits / self.r


@dataclass
class PrecisionProfile:
    entries: list[ProfileEntry]
    estimator_id: str
    point_id: str

    def table(self) -> list[tuple[int, float | None, float | None]]:
        return [(e.r, e.bits, e.ratio) for e in self.entries]

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator_id,
            "point": self.point_id,
            "note": "estimator-relative",
            "entries": [
                {"r": e.r, "bits": e.bits, "ratio": e.ratio, "witness_level": None if e.witness is None else len(e.witness)}
                for e in self.entries
            ],
        }


def kr_profile(cover: NiceCover, point: PointRep, r_min: int, r_max: int, est: ComplexityEstimator) -> PrecisionProfile:
    """Estimated ``K_r(x)`` for r in ``[r_min, r_max]``.

    Built-in covers partition each level, so the only candidate name is the
    point's own address at the window level.
    """
    if r_min < 1 or r_max < r_min:
        raise ValueError("need 1 <= r_min <= r_max")
    levels = {r: level_for_precision(cover, r) for r in range(r_min, r_max + 1)}
    depth = max((m for m in levels.values() if m is not None), default=0)
    word = point.symbols(cover, depth)
    check_address(cover, word)
    entries = []
    for r, m in levels.items():
        if m is None:
            entries.append(ProfileEntry(r, None, None))
            continue
        w = word[:m]
        entries.append(ProfileEntry(r, est.address_bits(w, cover.alphabet_size), w))
    return PrecisionProfile(entries, est.id, point.identity())


class NoEstimateError(ValueError):
    pass


@dataclass
class PointEstimate:
    estimate: float
    ratios: list[tuple[int, float]]
    tail_from: int
    note: str = "min over the tail window stands in for liminf"


def cdim_point_estimate(profile: PrecisionProfile, tail_fraction=Fraction(1, 2)) -> PointEstimate:
    """Minimum of ``K_r / r`` over the final ``tail_fraction`` of the entries."""
    ratios = [(e.r, e.ratio) for e in profile.entries if not e.skipped]
    if not ratios:
        raise NoEstimateError("every profile entry was skipped")
    tail_fraction = Fraction(tail_fraction)
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    keep = max(1, math.ceil(len(ratios) * tail_fraction))
    tail = ratios[-keep:]
    return PointEstimate(min(v for _, v in tail), ratios, tail[0][0])


# -- the two directions --------------------------------------------------------------


@dataclass
class Enumeration:
    """Finite stage of ``{w : K(w) <= s' * (-log2 diam(w))}`` as (address, budget)."""

    pairs: list[tuple[str, float]]
    s_prime: object = None

    def addresses(self) -> list[str]:
        return [w for w, _ in self.pairs]

    def kraft_total(self, cover: NiceCover) -> float:
        ctx = mp()
        sp = mpf_of(ctx, self.s_prime)
        return float(sum(ctx.power(cover.base, -len(w) * sp) for w, _ in self.pairs))

    def within_budget(self, cover: NiceCover, slack: float = 0.0) -> bool:
        return self.kraft_total(cover) <= 1 + slack


def build_enumeration(cover: NiceCover, candidates: Sequence[str], est: ComplexityEstimator, s_prime, bits: Mapping[str, float] | None = None) -> Enumeration:
    """Keep the candidates whose estimated complexity fits the budget."""
    sp = float(s_prime)
    scale = math.log2(cover.base)
    pairs = []
    for w in candidates:
        budget = sp * len(w) * scale
        k = bits[w] if bits is not None and w in bits else est.address_bits(w, cover.alphabet_size)
        if k <= budget:
            pairs.append((w, budget))
    return Enumeration(pairs, s_prime)


def enumeration_to_supergale(cover: NiceCover, enum: Enumeration | Sequence[str], s, s_prime, exact: bool | None = None) -> SupergaleTable:
    """``d(U) = sum(diam(V)**s' for V in enum inside U) / diam(U)**s``.

    Zero extension is exact here: below the deepest enumerated address the
    defining sum is empty.
    """
    s = _exponent(s)
    s_prime = _exponent(s_prime)
    if s <= s_prime:
        raise ValueError(f"need s > s' (got s={s}, s'={s_prime})")
    addrs = enum.addresses() if isinstance(enum, Enumeration) else list(enum)
    arith = make_arith(cover.base, s, s_prime, exact=exact)
    caps: dict[str, object] = {}
    # Accumulate s'-capital bottom-up: each address contributes to its prefixes.
    own: dict[str, object] = {}
    for w in set(addrs):
        check_address(cover, w)
        own[w] = arith.diam_power(len(w), s_prime)
    region_set: set[str] = set()
    for w in sorted(own, key=len, reverse=True):
        # Stop climbing once a prefix is known: its ancestors are too.
        for m in range(len(w), -1, -1):
            if w[:m] in region_set:
                break
            region_set.add(w[:m])
    region = sorted(region_set, key=len, reverse=True)
    for u in region:
        total = own.get(u, arith.zero)
        for ch in cover.alphabet:
            kid = caps.get(u + ch)
            if kid is not None:
                total = total + kid
        caps[u] = total
    entries = {}
    for u, cap in caps.items():
        entries[u] = cap * arith.base_power(len(u) * s)
        for ch in cover.alphabet:
            if u + ch not in caps:
                entries[u + ch] = arith.zero
    if not entries:
        entries[""] = arith.zero
    return SupergaleTable(cover, s, entries, "zero", arith=arith, meta={"s_prime": str(s_prime)})


class BoundViolation(ArithmeticError):
    pass


@dataclass
class CountingBound:
    count: int
    bound: float
    level: int | None
    r: int
    k: int

    def __iter__(self):
        return iter((self.count, self.bound))


# Exact comparisons are decided by a 256-bit approximation unless the two
# sides agree to within this relative margin.
_APPROX_BITS = 256
_MARGIN_BITS = 64


@dataclass
class _Level:
    """Nonzero extended values at one level, sorted by approximation, largest first."""

    neg: list  # negated approximations, ascending
    cum: list  # cum[i] = total multiplicity of the first i entries
    exact: list  # thunks building the exact values


def _window_values(cover: NiceCover, gale: SupergaleTable, m: int) -> _Level:
    cache = gale._levels
    if m in cache:
        return cache[m]
    region = gale.region()
    ctx = _context(_APPROX_BITS)
    items = []
    approx_of: dict[str, object] = {}

    def approx(a):
        if a not in approx_of:
            approx_of[a] = mpf_of(ctx, gale.value(a)) if gale.exact else gale.value(a)
        return approx_of[a]

    uniform = gale.extension != "zero"
    split = mpf_of(ctx, gale._split_factor(1)) if gale.exact else None
    for a in region:
        if len(a) == m:
            if approx(a) != 0:
                items.append((approx(a), 1, lambda a=a: gale.value(a)))
        elif len(a) < m and uniform and approx(a) != 0:
            # Unstored children: the whole subtree at level m shares one value.
            missing = sum(1 for ch in cover.alphabet if a + ch not in region)
            if missing:
                levels = m - len(a)
                mult = missing * cover.branching ** (levels - 1)
                v = approx(a) * split**levels if gale.exact else gale.value(a + cover.alphabet[0] * levels)
                items.append((v, mult, lambda a=a, levels=levels: gale.value(a) * gale._split_factor(levels)))
    items.sort(key=lambda t: t[0], reverse=True)
    cum = [0]
    for _, mult, _ in items:
        cum.append(cum[-1] + mult)
    level = _Level([-t[0] for t in items], cum, [t[2] for t in items])
    cache[m] = level
    return level


def _count_at_least(gale: SupergaleTable, level: _Level, k: int) -> int:
    """Total multiplicity of values ``>= 2**k * root capital``."""
    if not gale.exact:
        threshold = gale.arith.value(Fraction(2) ** k) * gale.root_capital
        return level.cum[bisect_right(level.neg, -threshold)]
    cache = gale._levels
    if "root" not in cache:
        cache["root"] = mpf_of(_context(_APPROX_BITS), gale.root_capital)
    ctx = _context(_APPROX_BITS)
    t = ctx.ldexp(cache["root"], k)
    # Entries before i_hi clear the threshold for sure; entries from i_lo on miss it.
    i_hi = bisect_right(level.neg, -t * (1 + ctx.ldexp(1, -_MARGIN_BITS)))
    i_lo = bisect_right(level.neg, -t * (1 - ctx.ldexp(1, -_MARGIN_BITS)))
    count = level.cum[i_hi]
    if i_lo > i_hi:
        threshold = gale.arith.value(Fraction(2) ** k) * gale.root_capital
        for i in range(i_hi, i_lo):
            if level.exact[i]() >= threshold:
                count += level.cum[i + 1] - level.cum[i]
    return count


def counting_bounds(cover: NiceCover, gale: SupergaleTable, ks: Sequence[int], rs: Sequence[int], tol=DEFAULT_TOLERANCE) -> list[CountingBound]:
    """Count ``A_k = {w : d(w) >= 2**k * capital}`` in each precision-r window.

    Unstored subtrees are counted in closed form: every address at a given
    depth below a common stored ancestor has the same extended value.
    A zero-capital gale is identically zero and counts 0. Raises
    ``BoundViolation`` if any count exceeds ``2**(-k + r s)``.
    """
    if not is_validated(cover, gale, tol):
        raise UnvalidatedGaleError("counting bound needs a valid supergale")
    ctx = mp()
    s_m = mpf_of(ctx, gale.s)
    slack = 1 + mpf_of(ctx, Fraction(tol))
    nonzero = gale.root_capital != 0
    out = []
    for r in rs:
        m = level_for_precision(cover, r)
        level = _window_values(cover, gale, m) if m is not None and nonzero else None
        for k in ks:
            bound = ctx.ldexp(ctx.power(2, r * s_m), -k)
            count = _count_at_least(gale, level, k) if level is not None else 0
            if count > bound * slack:
                raise BoundViolation(f"{count} addresses in window r={r} exceed 2^(-{k}+r s) = {ctx.nstr(bound, 12)}")
            out.append(CountingBound(count, float(bound), m, r, k))
    return out


def supergale_to_counting_bound(cover: NiceCover, gale: SupergaleTable, k: int, r: int, tol=DEFAULT_TOLERANCE) -> CountingBound:
    """Counting bound for a single ``(k, r)``; see ``counting_bounds``."""
    return counting_bounds(cover, gale, [k], [r], tol)[0]


@dataclass
class GaleVerdict:
    s: Fraction
    s_prime: Fraction
    enumerated: int
    succeeded: bool
    first_level: int | None


@dataclass
class CdimReport:
    upper: Fraction | None
    lower: float
    verdicts: list[GaleVerdict]
    depth: int
    estimator_id: str
    point_id: str
    k: int
    upper_source: str = "gale"
    gales: list = field(default_factory=list, repr=False)
    slack_bits: float = 0.0
    coherent: bool = True
    note: str = "estimator-relative; success means the gale multiplied its initial capital by more than 2^k within depth"

    def to_dict(self) -> dict:
        return {
            "upper": None if self.upper is None else str(self.upper),
            "upper_float": None if self.upper is None else float(self.upper),
            "upper_source": self.upper_source,
            "lower": self.lower,
            "slack_bits": self.slack_bits,
            "coherent": self.coherent,
            "depth": self.depth,
            "k": self.k,
            "estimator": self.estimator_id,
            "point": self.point_id,
            "note": self.note,
            "grid": [
                {"s": str(v.s), "s_prime": str(v.s_prime), "enumerated": v.enumerated, "succeeded": v.succeeded, "first_level": v.first_level}
                for v in self.verdicts
            ],
        }


def cdim_via_gales(
    cover: NiceCover,
    point: PointRep,
    s_grid: Sequence,
    depth: int,
    est: ComplexityEstimator,
    k: int = 1,
    tail_fraction=Fraction(1, 2),
    exact: bool | None = False,
    keep_gales: bool = False,
    slack_constant: float = 16.0,
) -> CdimReport:
    """Two-sided constructive dimension estimate for one point.

    For each grid value s, enumerate the point's own prefixes w with
    ``K(w) <= s' * (-log2 diam(w))`` (s' one grid step below s), compile
    them into an s-supergale and test success along the point.  Restricting
    the enumeration to the point's prefixes gives a pointwise smaller
    supergale, so a success is still a witness.

    The two sides are coherent when ``lower <= upper + slack / r`` at the
    largest precision r, with ``slack = 2 log2(k r) + slack_constant`` bits
    absorbing self-delimiting overhead.
    """
    grid = sorted(Fraction(s) for s in s_grid)
    if not grid:
        raise ValueError("empty s grid")
    step = grid[1] - grid[0] if len(grid) > 1 else grid[0]
    word = point.symbols(cover, depth)
    prefixes = [word[:m] for m in range(depth + 1)]
    bits = {w: est.address_bits(w, cover.alphabet_size) for w in prefixes}
    verdicts = []
    kept = []
    upper = None
    for s in grid:
        s_prime = s - step
        if s_prime < 0:
            verdicts.append(GaleVerdict(s, s_prime, 0, False, None))
            continue
        enum = build_enumeration(cover, prefixes, est, s_prime, bits)
        gale = enumeration_to_supergale(cover, enum, s, s_prime, exact=exact)
        if keep_gales:
            kept.append(gale)
        trace = evaluate_success(cover, gale, point, depth, thresholds=())
        threshold = gale.arith.value(Fraction(2) ** k) * gale.root_capital
        first = trace.first_exceeding(threshold) if gale.root_capital != 0 else None
        ok = first is not None
        verdicts.append(GaleVerdict(s, s_prime, len(enum.pairs), ok, first))
        if ok and upper is None:
            upper = s
    source = "gale"
    if upper is None:
        # No grid gale succeeded: fall back to the dimension of the whole space.
        ambient = math.log(cover.branching) / math.log(cover.base)
        upper = Fraction(ambient).limit_denominator(10**6)
        source = "ambient"
    r_max = (cover.base**depth).bit_length()
    profile = kr_profile(cover, point, 1, r_max, est)
    lower = cdim_point_estimate(profile, tail_fraction).estimate
    slack = 2 * math.log2(max(k, 1) * r_max) + slack_constant
    coherent = float(lower) <= float(upper) + slack / r_max
    return CdimReport(upper, lower, verdicts, depth, est.id, point.identity(), k, source, kept, slack, coherent)
