"""Exact coefficient arithmetic and closed-form trigonometric moments.

Rationals are plain :class:`fractions.Fraction`. :class:`QuadScalar` adds a
single square root (``a + b*sqrt(d)`` with ``d`` in 2, 3 or 5), which is all
the exact rotation matrices used elsewhere need. :class:`PiLinear` carries
``c0 + c1*pi`` through the Euler-angle integrals so that cancellation of the
``pi`` part can be asserted instead of assumed.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import sqrt as _fsqrt
from numbers import Rational as _RationalABC

Rational = Fraction

SUPPORTED_RADICANDS = (2, 3, 5)


# Number of times a pi component failed to cancel in this process.
pi_residue_events = 0


class PiResidueError(ArithmeticError):
    """A finished Haar integral kept a nonzero multiple of pi."""


class MixedRadicalError(ValueError):
    """Two irrational values from different quadratic fields met."""


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, QuadScalar) and x.b == 0:
        return x.a
    raise TypeError(f"not an exact rational: {x!r}")


def double_factorial(n: int) -> int:
    """n!! with the convention (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError("double factorial needs n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


class QuadScalar:
    """Element ``a + b*sqrt(d)`` of a real quadratic field."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 5):
        if d not in SUPPORTED_RADICANDS:
            raise ValueError(f"radicand {d} not supported; use one of {SUPPORTED_RADICANDS}")
        object.__setattr__(self, "a", as_rational(a))
        object.__setattr__(self, "b", as_rational(b))
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadScalar is immutable")

    @classmethod
    def sqrt(cls, d: int) -> "QuadScalar":
        return cls(0, 1, d)

    @classmethod
    def golden_ratio(cls) -> "QuadScalar":
        return cls(Fraction(1, 2), Fraction(1, 2), 5)

    # -- coercion -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuadScalar):
            if other.d == self.d or other.b == 0:
                return other.a, other.b
            if self.b == 0:
                return None
            raise MixedRadicalError(f"sqrt({self.d}) mixed with sqrt({other.d})")
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return NotImplemented

    def _field(self, other):
        # When self is rational but other carries a different radical, adopt it.
        if isinstance(other, QuadScalar) and self.b == 0 and other.b != 0:
            return other.d
        return self.d

    def __add__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        if c is None:
            return QuadScalar(self.a + other.a, other.b, other.d)
        return QuadScalar(self.a + c[0], self.b + c[1], self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadScalar(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        c = self._coerce(other)
        if c is NotImplemented:
            return NotImplemented
        if c is None:
            return QuadScalar(self.a * other.a, self.a * other.b, other.d)
        a2, b2 = c
        d = self._field(other)
        return QuadScalar(self.a * a2 + self.b * b2 * d, self.a * b2 + self.b * a2, d)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadScalar":
        return QuadScalar(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def inverse(self) -> "QuadScalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadScalar(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return QuadScalar(self.a / other, self.b / other, self.d)
        if isinstance(other, QuadScalar):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        out = QuadScalar(1, 0, self.d)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, QuadScalar):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return self.a == other.a and self.b == other.b and self.d == other.d
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * _fsqrt(self.d)

    def sign(self) -> int:
        """Exact sign of the real value."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        # opposite signs: compare a^2 with b^2 d
        if self.a * self.a > self.b * self.b * self.d:
            return sa
        return sb

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def is_rational(self) -> bool:
        return self.b == 0

    def simplify(self):
        """Collapse to a Fraction when the radical part is zero."""
        return self.a if self.b == 0 else self

    def __repr__(self):
        return f"QuadScalar({self.a}, {self.b}, {self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        rad = f"sqrt{self.d}"
        b = "" if self.b == 1 else ("-" if self.b == -1 else f"{self.b} ")
        if self.a == 0:
            return f"{b}{rad}"
        sign = "+" if self.b > 0 else "-"
        mag = abs(self.b)
        bt = "" if mag == 1 else f"{mag} "
        return f"({self.a} {sign} {bt}{rad})"


def simplify_scalar(x):
    if isinstance(x, QuadScalar):
        return x.simplify()
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


class PiLinear:
    """The value ``c0 + c1*pi`` with exact ``c0`` and ``c1``."""

    __slots__ = ("c0", "c1")

    def __init__(self, c0=0, c1=0):
        object.__setattr__(self, "c0", c0 if not isinstance(c0, int) else Fraction(c0))
        object.__setattr__(self, "c1", c1 if not isinstance(c1, int) else Fraction(c1))

    def __setattr__(self, name, value):
        raise AttributeError("PiLinear is immutable")

    def __add__(self, other):
        if isinstance(other, PiLinear):
            return PiLinear(self.c0 + other.c0, self.c1 + other.c1)
        return PiLinear(self.c0 + other, self.c1)

    __radd__ = __add__

    def __neg__(self):
        return PiLinear(-self.c0, -self.c1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, PiLinear):
            return NotImplemented
        return PiLinear(self.c0 * scalar, self.c1 * scalar)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, PiLinear):
            return self.c0 == other.c0 and self.c1 == other.c1
        if isinstance(other, (int, Fraction, QuadScalar)):
            return self.c1 == 0 and self.c0 == other
        return NotImplemented

    def __hash__(self):
        return hash((self.c0, self.c1))

    def __float__(self):
        import math

        return float(self.c0) + float(self.c1) * math.pi

    def rational_value(self):
        """Return ``c0``; raise :class:`PiResidueError` if ``c1`` is nonzero."""
        if self.c1 != 0:
            global pi_residue_events
            pi_residue_events += 1
            raise PiResidueError(f"pi component {self.c1} did not cancel")
        return self.c0

    def __repr__(self):
        return f"PiLinear({self.c0}, {self.c1})"


@lru_cache(maxsize=None)
def alpha_moment(a: int, b: int) -> PiLinear:
    """Integral of cos(x)**a * sin(x)**b over [0, pi]."""
    if a < 0 or b < 0:
        raise ValueError("exponents must be nonnegative")
    if a % 2:
        return PiLinear(0, 0)
    val = Fraction(double_factorial(a - 1) * double_factorial(b - 1), double_factorial(a + b))
    if b % 2:
        return PiLinear(2 * val, 0)
    return PiLinear(0, val)


@lru_cache(maxsize=None)
def circle_moment(c: int, d: int) -> Fraction:
    """Return r with  integral of cos**c sin**d over [0, 2 pi] = r * pi."""
    if c < 0 or d < 0:
        raise ValueError("exponents must be nonnegative")
    if c % 2 or d % 2:
        return Fraction(0)
    return Fraction(2 * double_factorial(c - 1) * double_factorial(d - 1), double_factorial(c + d))


# Exact cos/sin of rational multiples of pi that stay inside one quadratic field.
def exact_cos_sin(num: int, den: int):
    """cos and sin of ``pi*num/den`` as exact scalars, or None if irrational
    beyond the supported fields."""
    if den <= 0:
        raise ValueError("den must be positive")
    f = Fraction(num, den) % 2  # angle / pi in [0, 2)
    h = Fraction(1, 2)
    table = {
        Fraction(0): (Fraction(1), Fraction(0)),
        h: (Fraction(0), Fraction(1)),
        Fraction(1): (Fraction(-1), Fraction(0)),
        Fraction(3, 2): (Fraction(0), Fraction(-1)),
    }
    if f in table:
        return table[f]
    s3 = QuadScalar(0, h, 3)  # sqrt(3)/2
    s2 = QuadScalar(0, h, 2)  # sqrt(2)/2
    # reduce to the first quadrant
    base = f % h
    quadrant = int((f - base) / h)
    first = {
        Fraction(1, 6): (s3, h),
        Fraction(1, 3): (h, s3),
        Fraction(1, 4): (s2, s2),
    }
    if base not in first:
        return None
    c, s = first[base]
    for _ in range(quadrant):  # rotate by pi/2: (c, s) -> (-s, c)
        c, s = -s, c
    return simplify_scalar(c), simplify_scalar(s)
