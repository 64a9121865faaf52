"""Exact and extended-precision arithmetic for diameter powers.

Every built-in cover has level-m diameters ``base**-m``, so the quantities
``diam(U)**s`` are powers of a single integer base with rational exponents.
For rational ``s`` with a modest denominator these live in the number field
``Q(base**(-1/q))`` and can be compared exactly; :class:`Surd` implements
that field.  Everything else falls back to mpmath at ``P`` bits
(``GALEDIM_PRECISION``, default 128).
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Union

import mpmath

DEFAULT_PRECISION = 128
DEFAULT_TOLERANCE = Fraction(1, 2**64)
# Exponent denominators above this switch the automatic mode to floats.
MAX_EXACT_DENOMINATOR = 12


def precision() -> int:
    """Mantissa precision in bits, honouring ``GALEDIM_PRECISION``."""
    raw = os.environ.get("GALEDIM_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    try:
        bits = int(raw)
    except ValueError:
        raise ValueError(f"GALEDIM_PRECISION must be an integer, got {raw!r}") from None
    if bits < 53:
        raise ValueError(f"GALEDIM_PRECISION must be >= 53, got {bits}")
    return bits


@lru_cache(maxsize=None)
def _context(bits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


def mp() -> mpmath.ctx_mp.MPContext:
    """Private mpmath context at the configured precision."""
    return _context(precision())


def as_fraction(x) -> Fraction:
    """Parse ints, Fractions and decimal or ``p/q`` strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _integer_root(n: int, g: int) -> int | None:
    """Exact ``g``-th root of ``n`` or None."""
    r = round(n ** (1.0 / g))
    for cand in (r - 1, r, r + 1):
        if cand > 0 and cand**g == n:
            return cand
    return None


class SurdField:
    """The field ``Q(u)`` with ``u = base**(-1/q)``.

    ``u`` has degree ``q' = q/g`` over Q, where ``g`` is the largest divisor
    of ``q`` for which ``base`` is a perfect ``g``-th power (Capelli); then
    ``u**q' = 1/root_g(base)`` is rational and ``1, u, ..., u**(q'-1)`` is a
    basis.
    """

    _cache: dict[tuple[int, int], "SurdField"] = {}

    def __new__(cls, base: int, q: int):
        key = (base, q)
        field = cls._cache.get(key)
        if field is None:
            if base < 2 or q < 1:
                raise ValueError(f"invalid surd field base={base} q={q}")
            field = super().__new__(cls)
            field.base = base
            field.q = q
            g = max(d for d in range(1, q + 1) if q % d == 0 and _integer_root(base, d) is not None)
            field.degree = q // g
            field.reduction = Fraction(1, _integer_root(base, g))
            cls._cache[key] = field
        return field

    def __repr__(self) -> str:
        return f"SurdField({self.base}, {self.q})"

    def __reduce__(self):
        return (SurdField, (self.base, self.q))

    def u_power(self, j: int) -> "Surd":
        a, i = divmod(j, self.degree)
        coeffs = [Fraction(0)] * self.degree
        coeffs[i] = self.reduction**a
        return Surd(self, coeffs)

    def base_power(self, e: Fraction) -> "Surd":
        """``base**e``; ``e*q`` must be an integer."""
        j = -e * self.q
        if j.denominator != 1:
            raise ValueError(f"exponent {e} not representable in {self!r}")
        return self.u_power(int(j))

    def rational(self, x) -> "Surd":
        coeffs = [Fraction(0)] * self.degree
        coeffs[0] = as_fraction(x)
        return Surd(self, coeffs)


@lru_cache(maxsize=None)
def _u_powers(base: int, q: int, bits: int) -> tuple:
    """``base**(-i/q)`` for ``i < q`` at ``bits`` of precision."""
    ctx = _context(bits)
    u = ctx.power(ctx.mpf(base), -ctx.mpf(1) / q)
    return tuple(u**i for i in range(q))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class Surd:
    """Element of a :class:`SurdField`, immutable, exactly comparable."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: SurdField, coeffs: Iterable[Fraction]):
        self.field = field
        self.coeffs = tuple(coeffs)

    @classmethod
    def of(cls, x, base: int) -> "Surd":
        if isinstance(x, Surd):
            return x
        return SurdField(base, 1).rational(x)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def _promote(self, other) -> tuple["Surd", "Surd"]:
        if not isinstance(other, Surd):
            other = self.field.rational(other)
        if other.field is self.field:
            return self, other
        if other.field.base != self.field.base:
            raise ValueError("cannot mix surds of different bases")
        target = SurdField(self.field.base, _lcm(self.field.q, other.field.q))
        return self.embed(target), other.embed(target)

    def embed(self, target: SurdField) -> "Surd":
        if target is self.field:
            return self
        if target.q % self.field.q:
            raise ValueError(f"{self.field!r} does not embed in {target!r}")
        step = target.q // self.field.q
        acc = [Fraction(0)] * target.degree
        for i, c in enumerate(self.coeffs):
            if c:
                a, j = divmod(i * step, target.degree)
                acc[j] += c * target.reduction**a
        return Surd(target, acc)

    def __add__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        a, b = self._promote(other)
        return Surd(a.field, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Surd(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return self + (-other if isinstance(other, Surd) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.field, [c * other for c in self.coeffs])
        if not isinstance(other, Surd):
            return NotImplemented
        a, b = self._promote(other)
        n = a.field.degree
        r = a.field.reduction
        acc = [Fraction(0)] * n
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                if y:
                    k = i + j
                    if k >= n:
                        acc[k - n] += x * y * r
                    else:
                        acc[k] += x * y
        return Surd(a.field, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out, sq = self.field.rational(1), self
        while n:
            if n & 1:
                out = out * sq
            sq = sq * sq
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Surd(self.field, [c / other for c in self.coeffs])
        if isinstance(other, Surd) and other.is_rational():
            return self / other.coeffs[0]
        if isinstance(other, Surd):
            nz = [i for i, c in enumerate(other.coeffs) if c]
            if len(nz) == 1:
                # Monomial c*u**i: multiply by its inverse c**-1 * u**-i.
                i = nz[0]
                inv = other.field.u_power(-i) * (1 / other.coeffs[i])
                return self * inv
            raise ValueError("division by a non-monomial surd is not supported")
        return NotImplemented

    def to_mpf(self, ctx=None):
        ctx = ctx or mp()
        powers = _u_powers(self.field.base, self.field.q, ctx.prec)
        total = ctx.mpf(0)
        for c, p in zip(self.coeffs, powers):
            if c:
                total += ctx.mpf(c.numerator) * p / c.denominator
        return total

    def __float__(self):
        return float(self.to_mpf())

    def sign(self) -> int:
        if self.is_rational():
            c = self.coeffs[0]
            return (c > 0) - (c < 0)
        # Nonzero in the field means a nonzero real; raise precision until
        # the evaluation clears its own error bound.
        bits = max(precision(), 64)
        while True:
            ctx = _context(bits)
            u = ctx.power(ctx.mpf(self.field.base), -ctx.mpf(1) / self.field.q)
            total = ctx.mpf(0)
            mag = ctx.mpf(0)
            for i, c in enumerate(self.coeffs):
                if c:
                    term = ctx.mpf(c.numerator) / c.denominator * u**i
                    total += term
                    mag += abs(term)
            if abs(total) > mag * ctx.ldexp(1, 16 - bits):
                return 1 if total > 0 else -1
            bits *= 2

    def _cmp(self, other) -> int:
        a, b = self._promote(other)
        return (a - b).sign()

    def __eq__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        a, b = self._promote(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.field.base, self.field.q, self.coeffs))

    def __lt__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if not isinstance(other, (Surd, int, Fraction)):
            return NotImplemented
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __repr__(self):
        return f"Surd({format_surd(self)!r})"

    def __str__(self):
        return format_surd(self)


_TERM = re.compile(r"^\s*(?P<c>[+-]?\d+(?:/\d+)?)\s*(?:\*\s*(?P<b>\d+)\^\((?P<e>[+-]?\d+(?:/\d+)?)\))?\s*$")


def format_surd(x: Surd) -> str:
    """Canonical text form, e.g. ``"1/2*2^(1/2)"`` or ``"3/4"``."""
    if x.is_rational():
        return str(x.coeffs[0])
    terms = []
    for i, c in enumerate(x.coeffs):
        if not c:
            continue
        if i == 0:
            terms.append(str(c))
        else:
            terms.append(f"{c}*{x.field.base}^({Fraction(-i, x.field.q)})")
    return " + ".join(terms)


def parse_surd(text: str) -> Surd | Fraction:
    """Inverse of :func:`format_surd`; plain rationals come back as Fraction."""
    parts = [p for p in re.split(r"\s\+\s", text.strip())]
    if len(parts) == 1 and "^" not in parts[0]:
        return Fraction(parts[0].strip())
    total = None
    for part in parts:
        m = _TERM.match(part)
        if not m:
            raise ValueError(f"malformed surd term {part!r} in {text!r}")
        c = Fraction(m["c"])
        if m["b"] is None:
            term = c
        else:
            e = Fraction(m["e"])
            term = SurdField(int(m["b"]), e.denominator).base_power(e) * c
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------


class Arith:
    """Value domain for gale tables over one cover base.

    In exact mode values are :class:`Surd`; otherwise mpmath ``mpf`` at the
    configured precision.
    """

    def __init__(self, base: int, exact: bool):
        self.base = base
        self.exact = exact
        self.ctx = mp()

    def __repr__(self):
        return f"Arith(base={self.base}, exact={self.exact})"

    @property
    def zero(self):
        return self.value(0)

    def value(self, x):
        """Coerce a stored or parsed value into this domain."""
        if self.exact:
            if isinstance(x, Surd):
                if x.field.base != self.base and not x.is_rational():
                    raise ValueError("surd base does not match cover base")
                return x if x.field.base == self.base else SurdField(self.base, 1).rational(x.coeffs[0])
            if isinstance(x, str):
                x = parse_surd(x)
                return self.value(x)
            return SurdField(self.base, 1).rational(as_fraction(x))
        if isinstance(x, Surd):
            return x.to_mpf(self.ctx)
        if isinstance(x, str):
            x = x.strip()
            if "^" in x:
                return parse_surd(x).to_mpf(self.ctx)
            if "/" in x:
                x = Fraction(x)
            else:
                return self.ctx.mpf(x)
        if isinstance(x, Fraction):
            return self.ctx.mpf(x.numerator) / x.denominator
        return self.ctx.mpf(x)

    def base_power(self, e):
        """``base**e`` for a rational exponent ``e``."""
        e = as_fraction(e) if not isinstance(e, float) else e
        if self.exact:
            return SurdField(self.base, e.denominator).base_power(e)
        if isinstance(e, Fraction):
            return self.ctx.power(self.ctx.mpf(self.base), self.ctx.mpf(e.numerator) / e.denominator)
        return self.ctx.power(self.ctx.mpf(self.base), self.ctx.mpf(e))

    def diam_power(self, level: int, s) -> object:
        """``diam**s`` for a level-``level`` element (diam = base**-level)."""
        return self.base_power(-level * as_fraction(s))

    def is_zero(self, x) -> bool:
        return x == 0

    def to_float(self, x) -> float:
        return float(x)

    def to_mpf(self, x):
        return x.to_mpf(self.ctx) if isinstance(x, Surd) else self.ctx.mpf(x)

    def format(self, x) -> str:
        if self.exact:
            return format_surd(x)
        return self.ctx.nstr(x, int(self.ctx.prec * 0.30103) + 2, min_fixed=-4, max_fixed=20)

    def le(self, a, b, tol=DEFAULT_TOLERANCE) -> bool:
        """``a <= b`` exactly, or up to relative tolerance in float mode."""
        if self.exact:
            return a <= b
        slack = self.ctx.mpf(tol.numerator) / tol.denominator * max(abs(a), abs(b))
        return a <= b + slack

    def eq(self, a, b, tol=DEFAULT_TOLERANCE) -> bool:
        if self.exact:
            return a == b
        slack = self.ctx.mpf(tol.numerator) / tol.denominator * max(abs(a), abs(b))
        return abs(a - b) <= slack


def mpf_of(ctx, x):
    """Any supported scalar as an ``mpf`` of ``ctx``."""
    if isinstance(x, Surd):
        return x.to_mpf(ctx)
    if isinstance(x, Fraction):
        return ctx.mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return mpf_of(ctx, parse_surd(x))
    return ctx.mpf(x)


def exact_supported(*exponents, limit: int = MAX_EXACT_DENOMINATOR) -> bool:
    """True when all exponents are rationals with denominator <= ``limit``."""
    for e in exponents:
        if isinstance(e, float):
            return False
        try:
            f = as_fraction(e)
        except (TypeError, ValueError):
            return False
        if f.denominator > limit:
            return False
    return True


def make_arith(base: int, *exponents, exact: bool | None = None) -> Arith:
    """Pick exact mode when requested or when every exponent allows it."""
    supported = exact_supported(*exponents)
    if exact is None:
        exact = supported
    elif exact and not supported:
        raise ValueError(f"exact mode needs rational exponents with denominator <= {MAX_EXACT_DENOMINATOR}")
    return Arith(base, exact)


@dataclass(frozen=True)
class LogExponent:
    """The exponent ``log(numerator) / log(base)``, kept symbolic.

    With it, ``base**(-n * s) == numerator**-n`` exactly.
    """

    numerator: int
    base: int

    def __float__(self) -> float:
        return math.log(self.numerator) / math.log(self.base)

    def __str__(self) -> str:
        return f"log{self.numerator}/log{self.base}"


Number = Union[Surd, Fraction, int, "mpmath.mpf"]


@dataclass(frozen=True, order=False)
class ExactScale:
    """A diameter ``base**-level``, or zero when ``level`` is None."""

    level: int | None
    base: int

    @classmethod
    def zero(cls, base: int) -> "ExactScale":
        return cls(None, base)

    @property
    def is_zero(self) -> bool:
        return self.level is None

    def value(self) -> Fraction:
        if self.level is None:
            return Fraction(0)
        return Fraction(1, self.base**self.level)

    @property
    def log2_value(self) -> float:
        if self.level is None:
            return -math.inf
        return -self.level * math.log2(self.base)

    def power(self, s, arith: Arith | None = None):
        arith = arith or make_arith(self.base, s)
        if self.level is None:
            return arith.value(1 if as_fraction(s) == 0 else 0)
        return arith.diam_power(self.level, s)

    def __lt__(self, other: "ExactScale") -> bool:
        return self.value() < other.value()

    def __le__(self, other: "ExactScale") -> bool:
        return self.value() <= other.value()

    def __gt__(self, other: "ExactScale") -> bool:
        return self.value() > other.value()

    def __ge__(self, other: "ExactScale") -> bool:
        return self.value() >= other.value()

    def __float__(self) -> float:
        return float(self.value())

    def __str__(self) -> str:
        if self.level is None:
            return "0"
        return f"{self.base}^-{self.level}"
