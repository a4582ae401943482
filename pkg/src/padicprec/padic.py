"""Scalars of Q_p with two backends.

An exact scalar wraps a rational number (``fractions.Fraction``).  A tracked
scalar stores ``unit * p**val`` known modulo ``p**prec`` and follows the
usual coordinate-wise precision rules of capped p-adic arithmetic.  Exact
zeros and inexact zeros ``O(p^N)`` are represented explicitly.

Text forms (used by the JSON formats)::

    "12", "-3/5"            exact
    "0"                     exact zero
    "11*2^0 + O(2^5)"       tracked
    "O(2^7)"                inexact zero
"""

import math
import re
from fractions import Fraction
from functools import lru_cache

from .errors import (
    NonUnitDenominator,
    PAdicDivisionByZero,
    PrecisionUnderflow,
)

INF = math.inf

__all__ = [
    "INF",
    "PAdic",
    "from_rational",
    "valuation",
    "val_int",
    "val_rational",
    "ppow",
]


@lru_cache(maxsize=8192)
def _ppow_cached(p, k):
    return p**k


def ppow(p, k):
    """Return ``p**k`` for an integer ``k >= 0``."""
    if p == 2:
        return 1 << k
    if k < 64:
        return _ppow_cached(p, k)
    return p**k


def val_int(x, p):
    """Valuation of a nonzero integer."""
    if p == 2:
        return (x & -x).bit_length() - 1
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def val_rational(q, p):
    """Valuation of a rational number (``INF`` for zero)."""
    if not q:
        return INF
    q = Fraction(q)
    v = val_int(q.numerator, p)
    if q.denominator != 1:
        v -= val_int(q.denominator, p)
    return v


def _unit_mod(q, v, p, k):
    """Residue mod p**k of the unit part ``q / p**v`` of a nonzero rational."""
    m = ppow(p, k)
    num, den = q.numerator, q.denominator
    if v > 0:
        num //= ppow(p, v)
    elif v < 0:
        den //= ppow(p, -v)
    if den == 1:
        return num % m
    return num * pow(den, -1, m) % m


class PAdic:
    """An immutable element of Q_p (exact or tracked)."""

    __slots__ = ("p", "_q", "_u", "_v", "_N")

    # construction -----------------------------------------------------

    @classmethod
    def exact(cls, value, p):
        self = object.__new__(cls)
        q = value if type(value) is Fraction else Fraction(value)
        self.p = p
        self._q = q
        self._u = None
        self._v = val_rational(q, p)
        self._N = INF
        return self

    @classmethod
    def zero(cls, p):
        return cls.exact(0, p)

    @classmethod
    def one(cls, p):
        return cls.exact(1, p)

    @classmethod
    def inexact_zero(cls, p, prec):
        self = object.__new__(cls)
        self.p = p
        self._q = None
        self._u = 0
        self._v = prec
        self._N = prec
        return self

    @classmethod
    def tracked(cls, p, x, e, prec):
        """The tracked scalar ``x * p**e + O(p**prec)`` for an integer ``x``."""
        k = prec - e
        if k <= 0:
            return cls.inexact_zero(p, prec)
        x %= ppow(p, k)
        if not x:
            return cls.inexact_zero(p, prec)
        t = val_int(x, p)
        if t:
            x = x >> t if p == 2 else x // ppow(p, t)
        self = object.__new__(cls)
        self.p = p
        self._q = None
        self._u = x
        self._v = e + t
        self._N = prec
        return self

    @classmethod
    def from_value(cls, value, p, prec=INF):
        """Coerce ints, Fractions, text or PAdic to a scalar capped at ``prec``."""
        if isinstance(value, PAdic):
            if value.p != p:
                raise ValueError("prime mismatch: %d != %d" % (value.p, p))
            return value if prec == INF else value.with_precision(prec)
        if isinstance(value, str):
            return cls.parse(value, p) if prec == INF else cls.parse(value, p).with_precision(prec)
        x = cls.exact(value, p)
        return x if prec == INF else x.with_precision(prec)

    # basic accessors --------------------------------------------------

    @property
    def is_exact(self):
        return self._q is not None

    @property
    def is_zero(self):
        """True only for the exact zero."""
        return self._q is not None and not self._q

    @property
    def is_inexact_zero(self):
        return self._q is None and self._u == 0

    @property
    def is_nonzero(self):
        """True when the scalar is certainly nonzero."""
        if self._q is not None:
            return bool(self._q)
        return self._u != 0

    @property
    def valuation(self):
        """Valuation; for ``O(p^N)`` this is the lower bound ``N``."""
        return self._v

    @property
    def precision(self):
        """Absolute precision (``INF`` for exact scalars)."""
        return self._N

    @property
    def relative_precision(self):
        if self._q is not None:
            return INF
        return self._N - self._v

    @property
    def unit(self):
        """Unit part; an integer for tracked scalars, a Fraction for exact ones."""
        if self._q is not None:
            if not self._q:
                return Fraction(0)
            return self._q / Fraction(self.p) ** self._v
        return self._u

    @property
    def value(self):
        """The exact rational value, or None for tracked scalars."""
        return self._q

    def lift(self):
        """A rational representative of the scalar."""
        if self._q is not None:
            return self._q
        if not self._u:
            return Fraction(0)
        return Fraction(self._u) * Fraction(self.p) ** self._v

    def unit_residue(self, k):
        """Unit part reduced modulo ``p**k`` (requires a nonzero scalar)."""
        if self._q is not None:
            return _unit_mod(self._q, self._v, self.p, k)
        if k > self._N - self._v:
            raise PrecisionUnderflow("unit only known to %d digits" % (self._N - self._v))
        return self._u % ppow(self.p, k)

    def with_precision(self, prec):
        """Cap the absolute precision at ``prec`` (tracked result)."""
        if prec >= self._N:
            return self
        if self._q is not None:
            if not self._q or self._v >= prec:
                return PAdic.inexact_zero(self.p, prec)
            return PAdic.tracked(self.p, _unit_mod(self._q, self._v, self.p, prec - self._v), self._v, prec)
        return PAdic.tracked(self.p, self._u, self._v, prec)

    def contains(self, other):
        """Whether ``other`` (exact) lies in the ball described by ``self``."""
        other = PAdic.from_value(other, self.p)
        if self._q is not None:
            return other == self
        diff = other.lift() - self.lift()
        return val_rational(diff, self.p) >= self._N

    # arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PAdic):
            if other.p != self.p:
                raise ValueError("prime mismatch: %d != %d" % (self.p, other.p))
            return other
        if isinstance(other, (int, Fraction)):
            return PAdic.exact(other, self.p)
        return NotImplemented

    def _scaled_unit(self, e, k):
        # integer x with self == x * p^e (mod p^(e+k)); self has valuation >= e
        if self._q is not None:
            u = _unit_mod(self._q, self._v, self.p, k - (self._v - e))
        else:
            u = self._u
        s = self._v - e
        return u * ppow(self.p, s) if s else u

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self._q is not None and other._q is not None:
            return PAdic.exact(self._q + other._q, self.p)
        N = min(self._N, other._N)
        terms = [t for t in (self, other) if t._v < N and t.is_nonzero]
        if not terms:
            return PAdic.inexact_zero(self.p, N)
        e = min(t._v for t in terms)
        k = N - e
        x = 0
        for t in terms:
            x += t._scaled_unit(e, k)
        return PAdic.tracked(self.p, x, e, N)

    __radd__ = __add__

    def __neg__(self):
        if self._q is not None:
            return PAdic.exact(-self._q, self.p)
        if not self._u:
            return self
        return PAdic.tracked(self.p, -self._u, self._v, self._N)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self._q is not None and other._q is not None:
            return PAdic.exact(self._q * other._q, self.p)
        if self.is_zero or other.is_zero:
            return PAdic.zero(self.p)
        N = min(self._N + other._v, other._N + self._v)
        if self.is_inexact_zero or other.is_inexact_zero:
            return PAdic.inexact_zero(self.p, N)
        v = self._v + other._v
        k = N - v
        return PAdic.tracked(self.p, self.unit_residue(k) * other.unit_residue(k), v, N)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            raise PAdicDivisionByZero("division by exact zero")
        if other.is_inexact_zero:
            raise PrecisionUnderflow("division by O(%d^%d)" % (self.p, other._N))
        if self._q is not None and other._q is not None:
            return PAdic.exact(self._q / other._q, self.p)
        if self.is_zero:
            return self
        if self.is_inexact_zero:
            return PAdic.inexact_zero(self.p, self._N - other._v)
        v = self._v - other._v
        rel = min(self.relative_precision, other.relative_precision)
        m = ppow(self.p, rel)
        x = self.unit_residue(rel) * pow(other.unit_residue(rel), -1, m)
        return PAdic.tracked(self.p, x, v, v + rel)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return PAdic.one(self.p) / self ** (-n)
        result = PAdic.one(self.p)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison / hashing ---------------------------------------------

    def _key(self):
        if self._q is not None:
            return (self.p, "e", self._q)
        return (self.p, "t", self._u, self._v, self._N)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._q is not None and self._q == other
        if not isinstance(other, PAdic):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    # text form ---------------------------------------------------------

    def __str__(self):
        if self._q is not None:
            return str(self._q)
        if not self._u:
            return "O(%d^%d)" % (self.p, self._N)
        return "%d*%d^%d + O(%d^%d)" % (self._u, self.p, self._v, self.p, self._N)

    def __repr__(self):
        return "PAdic(%r, p=%d)" % (str(self), self.p)

    _TRACKED_RE = re.compile(
        r"^\s*(-?\d+)\s*\*\s*(\d+)\s*\^\s*(-?\d+)\s*\+\s*O\(\s*(\d+)\s*\^\s*(-?\d+)\s*\)\s*$"
    )
    _OZERO_RE = re.compile(r"^\s*O\(\s*(\d+)\s*\^\s*(-?\d+)\s*\)\s*$")
    _EXACT_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")

    @classmethod
    def parse(cls, text, p):
        """Parse the text form produced by ``str``."""
        m = cls._EXACT_RE.match(text)
        if m:
            num = int(m.group(1))
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise PAdicDivisionByZero(text)
            return cls.exact(Fraction(num, den), p)
        m = cls._OZERO_RE.match(text)
        if m:
            _check_prime(int(m.group(1)), p, text)
            return cls.inexact_zero(p, int(m.group(2)))
        m = cls._TRACKED_RE.match(text)
        if m:
            _check_prime(int(m.group(2)), p, text)
            _check_prime(int(m.group(4)), p, text)
            return cls.tracked(p, int(m.group(1)), int(m.group(3)), int(m.group(5)))
        raise ValueError("cannot parse p-adic scalar %r" % text)


def _check_prime(q, p, text):
    if q != p:
        raise ValueError("prime %d in %r does not match %d" % (q, text, p))


def valuation(x):
    """Valuation of a scalar, ``INF`` for the exact zero."""
    return x.valuation


def from_rational(num, den, p, cap=INF):
    """Build the scalar ``num/den`` of Z_(p), exact when ``cap`` is infinite.

    A finite ``cap`` is the absolute precision of the tracked result; zero
    is always returned as the exact zero.
    """
    if den == 0:
        raise PAdicDivisionByZero("zero denominator")
    if den % p == 0:
        raise NonUnitDenominator("%d is divisible by %d" % (den, p))
    q = Fraction(num, den)
    x = PAdic.exact(q, p)
    if cap == INF or not q:
        return x
    return x.with_precision(cap)
