"""Exact ordered-field scalars.

Two kinds are supported: arbitrary-precision rationals (gmpy2.mpq) and
elements a + b*sqrt(2) of the real quadratic field Q(sqrt(2)).  Rationals
embed into the quadratic field with b = 0; mixed arithmetic coerces
automatically.  No floating point is used anywhere.
"""

from __future__ import annotations

from gmpy2 import mpq, mpz

Rational = mpq


def rat(p, q=1) -> mpq:
    """Exact rational p/q."""
    return mpq(p, q)


def sign(x) -> int:
    """Exact sign in {-1, 0, 1} for rationals and Quad2 elements."""
    if isinstance(x, Quad2):
        return x.sign()
    return int(x > 0) - int(x < 0)


class Quad2:
    """a + b*sqrt(2) with rational a, b.

    Sign is decided exactly from the signs of a, b and the integer
    comparison of a^2 against 2*b^2; equality is componentwise.
    """

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = mpq(a)
        self.b = mpq(b)

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return int(a > 0) - int(a < 0)
        if a == 0:
            return int(b > 0) - int(b < 0)
        s = a * a - 2 * b * b
        s = int(s > 0) - int(s < 0)
        # a and b have opposite signs: |a| vs |b|*sqrt(2) decides.
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        return s if a > 0 else -s

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, Quad2):
            return x
        if isinstance(x, (int, type(mpq(0)), type(mpz(0)))):
            return Quad2(x)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Quad2(-self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad2(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad2(o.a - self.a, o.b - self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quad2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self) -> "Quad2":
        n = self.a * self.a - 2 * self.b * self.b
        if self.a == 0 and self.b == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(2))")
        return Quad2(self.a / n, -self.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparisons ------------------------------------------------------

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare Quad2 with {type(other).__name__}")
        return (self - o).sign()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __ne__(self, other):
        r = self.__eq__(other)
        return NotImplemented if r is NotImplemented else not r

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __repr__(self):
        return f"Quad2({self.a!s}, {self.b!s})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt(2)"


SQRT2 = Quad2(0, 1)

LT, EQ, GT = -1, 0, 1


def scalar_cmp(x, y) -> int:
    """Total order on scalars: -1 (LT), 0 (EQ) or 1 (GT)."""
    return sign(sub(x, y))


def sub(x, y):
    if isinstance(x, Quad2) or isinstance(y, Quad2):
        xq = x if isinstance(x, Quad2) else Quad2(x)
        return xq - y
    return x - y


def is_rational(x) -> bool:
    return not isinstance(x, Quad2) or x.b == 0


def parse_scalar(v):
    """Parse the text form: "p/q" or "p" for rationals, {"a":..,"b":..} for
    quadratic scalars.  Round-trips bit-exactly with scalar_to_json."""
    if isinstance(v, dict):
        return Quad2(mpq(v["a"]), mpq(v["b"]))
    if isinstance(v, Quad2):
        return v
    if isinstance(v, str):
        return mpq(v)
    if isinstance(v, int):
        return mpq(v)
    if isinstance(v, type(mpq(0))):
        return v
    raise ValueError(f"cannot parse scalar from {v!r}")


def scalar_to_json(x):
    if isinstance(x, Quad2):
        if x.b == 0:
            return str(x.a)
        return {"a": str(x.a), "b": str(x.b)}
    return str(mpq(x))
