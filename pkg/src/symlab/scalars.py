"""Exact complex scalars: the cyclotomic field Q(zeta8).

Every constant that shows up in the symbolic pipeline -- rationals, the
imaginary unit, sqrt(2), and the primitive eighth roots of unity that
appear as (-1)^(1/4) and (-1)^(3/4) in Laurent coefficients -- lives in
Q(zeta8), represented on the power basis {1, z, z^2, z^3} with z^4 = -1.
Arithmetic is exact (Fraction components); no floats enter symbolic code.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

import mpmath

RatLike = Union[int, Fraction]

_ZERO4 = (Fraction(0), Fraction(0), Fraction(0), Fraction(0))


class Cyclo8:
    """An element a0 + a1*z + a2*z^2 + a3*z^3 of Q(zeta8), z = exp(i*pi/4)."""

    __slots__ = ("a",)

    def __init__(self, a0: RatLike = 0, a1: RatLike = 0, a2: RatLike = 0, a3: RatLike = 0):
        self.a = (Fraction(a0), Fraction(a1), Fraction(a2), Fraction(a3))

    @classmethod
    def _raw(cls, comps) -> "Cyclo8":
        obj = object.__new__(cls)
        obj.a = comps
        return obj

    @classmethod
    def from_rational(cls, q: RatLike) -> "Cyclo8":
        return cls(q)

    def __bool__(self) -> bool:
        return self.a != _ZERO4

    def is_rational(self) -> bool:
        a = self.a
        return not (a[1] or a[2] or a[3])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"not a rational scalar: {self!r}")
        return self.a[0]

    def is_gaussian(self) -> bool:
        return not (self.a[1] or self.a[3])

    def __eq__(self, other) -> bool:
        if isinstance(other, Cyclo8):
            return self.a == other.a
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.a[0] == other
        return NotImplemented

    def __hash__(self):
        return hash(self.a)

    def __add__(self, other: "Cyclo8") -> "Cyclo8":
        s, o = self.a, _coerce(other).a
        return Cyclo8._raw((s[0] + o[0], s[1] + o[1], s[2] + o[2], s[3] + o[3]))

    __radd__ = __add__

    def __neg__(self) -> "Cyclo8":
        s = self.a
        return Cyclo8._raw((-s[0], -s[1], -s[2], -s[3]))

    def __sub__(self, other) -> "Cyclo8":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Cyclo8":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "Cyclo8":
        s, o = self.a, _coerce(other).a
        # fast path: one factor rational
        if not (s[1] or s[2] or s[3]):
            q = s[0]
            if q == 0:
                return ZERO
            return Cyclo8._raw((q * o[0], q * o[1], q * o[2], q * o[3]))
        if not (o[1] or o[2] or o[3]):
            q = o[0]
            if q == 0:
                return ZERO
            return Cyclo8._raw((s[0] * q, s[1] * q, s[2] * q, s[3] * q))
        # z^4 = -1 reduction of the convolution
        c = [Fraction(0)] * 4
        for i in range(4):
            si = s[i]
            if not si:
                continue
            for j in range(4):
                oj = o[j]
                if not oj:
                    continue
                k = i + j
                if k < 4:
                    c[k] += si * oj
                else:
                    c[k - 4] -= si * oj
        return Cyclo8._raw(tuple(c))

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclo8":
        """Complex conjugation: z -> z^-1 = -z^3."""
        a = self.a
        return Cyclo8._raw((a[0], -a[3], -a[2], -a[1]))

    def _galois(self, k: int) -> "Cyclo8":
        """The automorphism z -> z^k for odd k in {1,3,5,7}."""
        c = [Fraction(0)] * 4
        for m, am in enumerate(self.a):
            if not am:
                continue
            e = (m * k) % 8
            if e < 4:
                c[e] += am
            else:
                c[e - 4] -= am
        return Cyclo8._raw(tuple(c))

    def inverse(self) -> "Cyclo8":
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(zeta8)")
        if self.is_rational():
            return Cyclo8(Fraction(1) / self.a[0])
        prod = self._galois(3) * self._galois(5) * self._galois(7)
        norm = self * prod
        assert norm.is_rational(), "field norm must be rational"
        return prod * Cyclo8(Fraction(1) / norm.a[0])

    def __truediv__(self, other) -> "Cyclo8":
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other) -> "Cyclo8":
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "Cyclo8":
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def to_complex(self) -> complex:
        a = self.a
        r = 0.5 ** 0.5
        z1 = complex(r, r)
        return float(a[0]) + float(a[1]) * z1 + float(a[2]) * 1j + float(a[3]) * complex(-r, r)

    def to_mpc(self) -> "mpmath.mpc":
        """Evaluate at the current mpmath precision."""
        a = self.a
        z1 = mpmath.expjpi(mpmath.mpf(1) / 4)
        acc = mpmath.mpc(0)
        for k, ak in enumerate(a):
            if ak:
                acc += mpmath.mpf(ak.numerator) / ak.denominator * z1 ** k
        return acc

    def __repr__(self) -> str:
        if self.is_rational():
            return str(self.a[0])
        return "{" + ",".join(str(c) for c in self.a) + "}"


def _coerce(x) -> Cyclo8:
    if isinstance(x, Cyclo8):
        return x
    if isinstance(x, (int, Fraction)):
        return Cyclo8(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into Q(zeta8)")


ZERO = Cyclo8(0)
ONE = Cyclo8(1)
I = Cyclo8(0, 0, 1, 0)
ZETA8 = Cyclo8(0, 1, 0, 0)          # (-1)^(1/4), principal
ZETA8_CUBED = Cyclo8(0, 0, 0, 1)    # (-1)^(3/4), principal
SQRT2 = Cyclo8(0, 1, 0, -1)         # z - z^3 = 2*cos(pi/4)*sqrt(2)/... = sqrt(2)
