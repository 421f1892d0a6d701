"""Truncated Laurent series with exact expression coefficients.

A Series is a finite window of known coefficients: exponents below `lo`
are identically zero, exponents in [lo, hi) are stored, exponents >= hi
are unknown (truncated).  Two grids are supported: "unit", where the
series variable is the derivative variable itself, and "half", where the
series variable w satisfies w^2 = x and d/dx acts as (1/2) w^{-1} d/dw.
Half-integer power expansions stay on an integer lattice this way.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import E_ONE, E_ZERO, Expr, ExprError, Jet, Sym


class TruncationError(ExprError):
    """An operation needed coefficients beyond the known window."""


@dataclass
class Series:
    coeffs: dict      # exponent -> Expr, exponents in [lo, hi)
    lo: int
    hi: int           # first unknown exponent
    grid: str = "half"

    def __post_init__(self):
        assert not self.coeffs or self.lo <= self.hi
        self.coeffs = {k: v for k, v in self.coeffs.items()
                       if self.lo <= k < self.hi and not v.is_zero()}

    @classmethod
    def zero(cls, hi: int, grid: str = "half") -> "Series":
        # exact zero: lo is a large sentinel so products keep a wide window
        return cls({}, 10 ** 9, hi, grid)

    @classmethod
    def one(cls, grid: str = "half") -> "Series":
        return cls({0: E_ONE}, 0, 10 ** 9, grid)

    @classmethod
    def monomial(cls, coeff: Expr, exponent: int, hi: int, grid: str = "half") -> "Series":
        return cls({exponent: coeff}, exponent, hi, grid)

    def coeff(self, k: int) -> Expr:
        if k >= self.hi:
            raise TruncationError(f"coefficient at {k} is beyond the window")
        return self.coeffs.get(k, E_ZERO)

    def order(self) -> int | None:
        """Lowest exponent with nonzero coefficient, None if zero so far."""
        live = [k for k, v in self.coeffs.items() if not v.is_zero()]
        return min(live) if live else None

    def truncate(self, hi: int) -> "Series":
        if hi > self.hi:
            raise TruncationError("cannot extend a window by truncation")
        return Series({k: v for k, v in self.coeffs.items() if k < hi},
                      self.lo, hi, self.grid)

    def __add__(self, other: "Series") -> "Series":
        assert self.grid == other.grid
        hi = min(self.hi, other.hi)
        out = {k: v for k, v in self.coeffs.items() if k < hi}
        for k, v in other.coeffs.items():
            if k < hi:
                out[k] = out.get(k, E_ZERO) + v
        return Series(out, min(self.lo, other.lo), hi, self.grid)

    def __neg__(self) -> "Series":
        return Series({k: -v for k, v in self.coeffs.items()},
                      self.lo, self.hi, self.grid)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def scale(self, c: Expr) -> "Series":
        return Series({k: v * c for k, v in self.coeffs.items()},
                      self.lo, self.hi, self.grid)

    def shift(self, n: int) -> "Series":
        return Series({k + n: v for k, v in self.coeffs.items()},
                      self.lo + n, self.hi + n, self.grid)

    def __mul__(self, other: "Series") -> "Series":
        assert self.grid == other.grid
        lo = self.lo + other.lo
        hi = min(self.lo + other.hi, other.lo + self.hi)
        out: dict = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = k1 + k2
                if k < hi:
                    out[k] = out.get(k, E_ZERO) + v1 * v2
        return Series(out, lo, hi, self.grid)

    def __pow__(self, n: int) -> "Series":
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return Series.one(self.grid)
        result = self
        for _ in range(n - 1):
            result = result * self
        return result

    def inverse(self) -> "Series":
        m = self.order()
        if m is None:
            raise ZeroDivisionError("inverting a series with no visible terms")
        if m != self.lo:
            # tighten the window start to the true order
            return Series(self.coeffs, m, self.hi, self.grid).inverse()
        c0 = self.coeffs[m]
        width = self.hi - m
        # t = 1/(c0 w^m) * sum_k (-r)^k,  r = s/(c0 w^m) - 1 has order >= 1
        r = Series({k - m: v / c0 for k, v in self.coeffs.items() if k != m},
                   1, width, self.grid)
        if r.order() is None:
            return Series({-m: 1 / c0}, -m, width - m if width < 10 ** 8 else 10 ** 9,
                          self.grid)
        if width - 1 > 10000:
            raise TruncationError("inverse of an exact non-monomial series "
                                  "is not a finite Laurent series")
        acc = Series({0: E_ONE}, 0, width, self.grid)
        term = Series({0: E_ONE}, 0, width, self.grid)
        for _ in range(width - 1):
            term = term * (-r)
            if term.order() is None:
                break
            acc = acc + term
        return acc.scale(1 / c0).shift(-m)

    def ddx(self) -> "Series":
        """Derivative with respect to the underlying variable."""
        out = {}
        if self.grid == "half":
            for k, v in self.coeffs.items():
                out[k - 2] = v * Fraction(k, 2)
            return Series(out, self.lo - 2, self.hi - 2, self.grid)
        for k, v in self.coeffs.items():
            out[k - 1] = v * k
        return Series(out, self.lo - 1, self.hi - 1, self.grid)


def eval_series(e: Expr, assignment: dict, hi_hint: int | None = None) -> Series:
    """Substitute series for the jets of an expression.

    assignment maps dependent names to Series; a jet with k derivative
    indices becomes the k-th ddx of its series.  Parameters stay symbolic
    inside coefficients; the independent variable itself may be assigned a
    Series too (keyed by the Sym)."""
    some = next(iter(assignment.values()))
    grid = some.grid

    def jet_series(g) -> Series:
        base = assignment[g.dep if isinstance(g, Jet) else g]
        s = base
        for _ in range(len(g.index) if isinstance(g, Jet) else 0):
            s = s.ddx()
        return s

    def poly_series(p) -> Series:
        total = None
        for mono, c in p.t.items():
            term = None
            const_part = Expr.const(c)
            for g, k in mono.exps:
                if isinstance(g, Jet) and g.dep in assignment:
                    s = jet_series(g) ** k
                    term = s if term is None else term * s
                elif isinstance(g, Sym) and g in assignment:
                    s = assignment[g] ** k
                    term = s if term is None else term * s
                else:
                    const_part = const_part * Expr.from_gen(g) ** k
            if term is None:
                term = Series.one(grid)
            term = term.scale(const_part)
            total = term if total is None else total + term
        if total is None:
            return Series.zero(10 ** 9 if hi_hint is None else hi_hint, grid)
        return total

    num = poly_series(e.num)
    if e.den.is_const():
        return num.scale(1 / Expr.const(e.den.const_value()))
    den = poly_series(e.den)
    return num * den.inverse()
