"""Minimal exact CAS over jet coordinates.

Expressions are sparse multivariate rational functions: a pair of
polynomials (numerator, denominator) whose generators are parameter
symbols, independent variables, and jet variables, with coefficients in
Q(zeta8).  The pair is kept in a unique normal form (gcd-cancelled,
denominator monic under a fixed graded-lex term order), so equality of
rational functions is structural equality.

Jet variables carry their dependent name, the tuple of base independent
variables, and an unordered derivative multi-index capped at order 4.
Total derivatives accept a "rates" context describing how auxiliary
generators move with the differentiation variable, which is what powers
similarity substitutions such as rho(t,x) -> R(sigma(t,x))^2 / sqrt(t).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import mpmath

from .scalars import Cyclo8, ONE as C_ONE, ZERO as C_ZERO

JET_ORDER_CAP = 4


class ExprError(Exception):
    """Raised for domain violations: jet-order overflow, pole evaluation,
    vanishing denominators under substitution, non-linear solves."""


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class Sym:
    name: str
    kind: str  # "param" | "indep"

    def __post_init__(self):
        if self.kind not in ("param", "indep"):
            raise ValueError(f"bad symbol kind {self.kind!r}")

    def token(self) -> str:
        return self.name

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Jet:
    dep: str
    base: tuple
    index: tuple  # sorted multiset over base

    def __post_init__(self):
        if len(self.index) > JET_ORDER_CAP:
            raise ExprError(
                f"jet order {len(self.index)} of {self.dep} exceeds cap {JET_ORDER_CAP}"
            )
        object.__setattr__(self, "index", tuple(sorted(self.index)))
        for v in self.index:
            if v not in self.base:
                raise ValueError(f"index variable {v} not in base {self.base}")

    @property
    def order(self) -> int:
        return len(self.index)

    def raised(self, var: str) -> "Jet":
        return Jet(self.dep, self.base, self.index + (var,))

    def token(self) -> str:
        s = f"{self.dep}@{'.'.join(self.base)}"
        if self.index:
            s += ":" + ".".join(self.index)
        return s

    def __repr__(self):
        if not self.index:
            return self.dep
        return f"{self.dep}_{''.join(self.index)}"


Gen = Union[Sym, Jet]


def _genkey(g: Gen):
    if isinstance(g, Sym):
        return (0 if g.kind == "param" else 1, g.name, (), ())
    return (2, g.dep, g.base, (len(g.index),) + g.index)


# ---------------------------------------------------------------------------
# monomials: sorted tuples of (gen, exponent), exponent >= 1


class Monomial:
    __slots__ = ("exps", "_hash")

    def __init__(self, exps: Iterable = ()):
        pairs = [(g, e) for g, e in exps if e != 0]
        pairs.sort(key=lambda p: _genkey(p[0]))
        self.exps = tuple(pairs)
        self._hash = hash(self.exps)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self.exps == other.exps

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exps)

    def is_empty(self) -> bool:
        return not self.exps

    def gens(self):
        return [g for g, _ in self.exps]

    def exponent(self, g: Gen) -> int:
        for h, e in self.exps:
            if h == g:
                return e
        return 0

    def __mul__(self, other: "Monomial") -> "Monomial":
        d = dict(self.exps)
        for g, e in other.exps:
            d[g] = d.get(g, 0) + e
        return Monomial(d.items())

    def divides(self, other: "Monomial") -> bool:
        od = dict(other.exps)
        return all(od.get(g, 0) >= e for g, e in self.exps)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        d = dict(self.exps)
        for g, e in other.exps:
            d[g] = d.get(g, 0) - e
            if d[g] < 0:
                raise ValueError("monomial division with negative exponent")
        return Monomial(d.items())

    def gcd(self, other: "Monomial") -> "Monomial":
        od = dict(other.exps)
        return Monomial((g, min(e, od[g])) for g, e in self.exps if g in od)


MONO_ONE = Monomial()


def _mono_cmp(m1: Monomial, m2: Monomial) -> int:
    """Graded lex: higher total degree wins; ties broken by the first
    generator (ascending genkey) with differing exponent, larger wins."""
    d1, d2 = m1.degree, m2.degree
    if d1 != d2:
        return 1 if d1 > d2 else -1
    i = j = 0
    e1, e2 = m1.exps, m2.exps
    while i < len(e1) and j < len(e2):
        g1, a = e1[i]
        g2, b = e2[j]
        k1, k2 = _genkey(g1), _genkey(g2)
        if k1 == k2:
            if a != b:
                return 1 if a > b else -1
            i += 1
            j += 1
        elif k1 < k2:
            return 1  # m1 has the earlier gen with positive exponent
        else:
            return -1
    if i < len(e1):
        return 1
    if j < len(e2):
        return -1
    return 0


# ---------------------------------------------------------------------------
# sparse polynomials


class Poly:
    __slots__ = ("t",)

    def __init__(self, terms: dict | None = None, prune: bool = True):
        if terms is None:
            self.t = {}
        elif prune:
            self.t = {m: c for m, c in terms.items() if c}
        else:
            self.t = terms

    @classmethod
    def const(cls, c) -> "Poly":
        c = c if isinstance(c, Cyclo8) else Cyclo8(c)
        return cls({MONO_ONE: c}) if c else cls()

    @classmethod
    def gen(cls, g: Gen) -> "Poly":
        return cls({Monomial([(g, 1)]): C_ONE}, prune=False)

    def is_zero(self) -> bool:
        return not self.t

    def is_const(self) -> bool:
        return not self.t or (len(self.t) == 1 and MONO_ONE in self.t)

    def is_monomial(self) -> bool:
        return len(self.t) == 1

    def const_value(self) -> Cyclo8:
        if self.is_zero():
            return C_ZERO
        if not self.is_const():
            raise ValueError("not a constant polynomial")
        return self.t[MONO_ONE]

    def gens(self) -> set:
        out = set()
        for m in self.t:
            out.update(m.gens())
        return out

    def leading(self):
        best = None
        for m in self.t:
            if best is None or _mono_cmp(m, best) > 0:
                best = m
        return best, self.t[best]

    def __add__(self, other: "Poly") -> "Poly":
        res = dict(self.t)
        for m, c in other.t.items():
            s = res.get(m)
            s = c if s is None else s + c
            if s:
                res[m] = s
            elif m in res:
                del res[m]
        return Poly(res, prune=False)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.t.items()}, prune=False)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.t or not other.t:
            return Poly()
        if len(other.t) == 1:
            (m2, c2), = other.t.items()
            return self.mul_term(m2, c2)
        if len(self.t) == 1:
            (m1, c1), = self.t.items()
            return other.mul_term(m1, c1)
        res: dict = {}
        for m1, c1 in self.t.items():
            for m2, c2 in other.t.items():
                m = m1 * m2
                c = c1 * c2
                s = res.get(m)
                s = c if s is None else s + c
                if s:
                    res[m] = s
                elif m in res:
                    del res[m]
        return Poly(res, prune=False)

    def mul_term(self, mono: Monomial, coeff: Cyclo8) -> "Poly":
        if not coeff:
            return Poly()
        return Poly({m * mono: c * coeff for m, c in self.t.items()}, prune=False)

    def mul_scalar(self, coeff: Cyclo8) -> "Poly":
        if not coeff:
            return Poly()
        return Poly({m: c * coeff for m, c in self.t.items()}, prune=False)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power on Poly")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, Poly) and self.t == other.t

    def __hash__(self):
        return hash(frozenset(self.t.items()))

    def diff(self, g: Gen) -> "Poly":
        res: dict = {}
        for m, c in self.t.items():
            e = m.exponent(g)
            if e == 0:
                continue
            d = dict(m.exps)
            if e == 1:
                del d[g]
            else:
                d[g] = e - 1
            mm = Monomial(d.items())
            cc = c * e
            s = res.get(mm)
            s = cc if s is None else s + cc
            if s:
                res[mm] = s
            elif mm in res:
                del res[mm]
        return Poly(res, prune=False)

    def content_mono(self) -> Monomial:
        if not self.t:
            return MONO_ONE
        it = iter(self.t)
        acc = next(it)
        for m in it:
            acc = acc.gcd(m)
            if acc.is_empty():
                break
        return acc

    def divexact(self, d: "Poly") -> "Poly":
        if d.is_zero():
            raise ZeroDivisionError("exact division by zero polynomial")
        if d.is_const():
            inv = d.const_value().inverse()
            return self.mul_scalar(inv)
        if d.is_monomial():
            (md, cd), = d.t.items()
            inv = cd.inverse()
            return Poly({m / md: c * inv for m, c in self.t.items()}, prune=False)
        q: dict = {}
        r = self
        lm_d, lc_d = d.leading()
        lc_d_inv = lc_d.inverse()
        while not r.is_zero():
            lm_r, lc_r = r.leading()
            if not lm_d.divides(lm_r):
                raise ValueError("inexact polynomial division")
            tm = lm_r / lm_d
            tc = lc_r * lc_d_inv
            q[tm] = q.get(tm, C_ZERO) + tc
            r = r - d.mul_term(tm, tc)
        return Poly(q)

    def as_univariate(self, v: Gen) -> dict:
        """Split into {degree in v: coefficient Poly free of v}."""
        out: dict = {}
        for m, c in self.t.items():
            e = m.exponent(v)
            rest = Monomial((g, k) for g, k in m.exps if g != v)
            bucket = out.setdefault(e, {})
            bucket[rest] = bucket.get(rest, C_ZERO) + c
        return {e: Poly(b) for e, b in out.items() if Poly(b).t}

    def eval_complex(self, env: Mapping) -> complex:
        total = 0j
        for m, c in self.t.items():
            v = c.to_complex()
            for g, e in m.exps:
                v *= env[g] ** e
            total += v
        return total

    def eval_mpc(self, env: Mapping):
        total = mpmath.mpc(0)
        for m, c in self.t.items():
            v = c.to_mpc()
            for g, e in m.exps:
                v *= env[g] ** e
            total += v
        return total

    def __repr__(self):
        if not self.t:
            return "0"
        parts = []
        import functools

        for m in sorted(self.t, key=functools.cmp_to_key(_mono_cmp), reverse=True):
            c = self.t[m]
            mono = "*".join(
                f"{g!r}^{e}" if e > 1 else f"{g!r}" for g, e in m.exps
            )
            if m.is_empty():
                parts.append(f"{c!r}")
            elif c == C_ONE:
                parts.append(mono)
            else:
                parts.append(f"{c!r}*{mono}")
        return " + ".join(parts)


POLY_ONE = Poly.const(1)
POLY_ZERO = Poly()


# ---------------------------------------------------------------------------
# multivariate gcd (primitive PRS; monomial fast paths cover the hot cases)


def _gcd_list(polys) -> Poly:
    acc = None
    for p in polys:
        if p.is_zero():
            continue
        acc = p if acc is None else poly_gcd(acc, p)
        if acc.is_const():
            return POLY_ONE
    return POLY_ONE if acc is None else acc


def poly_gcd(p: Poly, q: Poly) -> Poly:
    if p.is_zero():
        return q
    if q.is_zero():
        return p
    mp, mq = p.content_mono(), q.content_mono()
    mc = mp.gcd(mq)
    p1 = p if mp.is_empty() else p.divexact(Poly({mp: C_ONE}, prune=False))
    q1 = q if mq.is_empty() else q.divexact(Poly({mq: C_ONE}, prune=False))
    if p1.is_const() or q1.is_const():
        return Poly({mc: C_ONE}, prune=False)
    shared = p1.gens() & q1.gens()
    if not shared:
        return Poly({mc: C_ONE}, prune=False)
    v = min(shared, key=_genkey)
    g = _gcd_univ(p1.as_univariate(v), q1.as_univariate(v), v)
    return g.mul_term(mc, C_ONE)


def _univ_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for da, ca in a.items():
        for db, cb in b.items():
            d = da + db
            prev = out.get(d)
            prod = ca * cb
            out[d] = prod if prev is None else prev + prod
    return {d: c for d, c in out.items() if not c.is_zero()}

def _univ_sub(a: dict, b: dict) -> dict:
    out = dict(a)
    for d, c in b.items():
        prev = out.get(d)
        s = -c if prev is None else prev - c
        if s.is_zero():
            out.pop(d, None)
        else:
            out[d] = s
    return out


def _univ_content(a: dict) -> Poly:
    return _gcd_list(a.values())


def _univ_primitive(a: dict) -> dict:
    c = _univ_content(a)
    if c.is_const() and c.const_value() == C_ONE:
        return a
    return {d: p.divexact(c) for d, p in a.items()}


def _univ_pseudo_rem(a: dict, b: dict) -> dict:
    da, db = max(a), max(b)
    lb = {0: b[db]}
    r = dict(a)
    while r and max(r) >= db:
        dr = max(r)
        lr = r[dr]
        # r = lb*r - lr * x^(dr-db) * b
        r = _univ_sub(_univ_mul(r, lb), _univ_mul({dr - db: lr}, b))
        if max(r, default=-1) == dr:
            raise AssertionError("pseudo-remainder failed to reduce degree")
    return r


def _gcd_univ(a: dict, b: dict, v: Gen) -> Poly:
    ca, cb = _univ_content(a), _univ_content(b)
    c = poly_gcd(ca, cb)
    A = {d: p.divexact(ca) for d, p in a.items()}
    B = {d: p.divexact(cb) for d, p in b.items()}
    if max(A) < max(B):
        A, B = B, A
    while True:
        R = _univ_pseudo_rem(A, B)
        if not R:
            g = _univ_primitive(B)
            break
        if max(R) == 0:
            return c
        A, B = B, _univ_primitive(R)
    poly = POLY_ZERO
    for d, coeff in g.items():
        poly = poly + coeff.mul_term(Monomial([(v, d)]) if d else MONO_ONE, C_ONE)
    return c * poly


# ---------------------------------------------------------------------------
# rational expressions


class Expr:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly = POLY_ONE, reduced: bool = False):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num, self.den = POLY_ZERO, POLY_ONE
            return
        if not reduced:
            g = poly_gcd(num, den)
            if not (g.is_const() and g.const_value() == C_ONE):
                num = num.divexact(g)
                den = den.divexact(g)
        _, lc = den.leading()
        if lc != C_ONE:
            inv = lc.inverse()
            num = num.mul_scalar(inv)
            den = den.mul_scalar(inv)
        self.num, self.den = num, den

    # constructors ----------------------------------------------------------

    @classmethod
    def const(cls, c) -> "Expr":
        return cls(Poly.const(c), POLY_ONE, reduced=True)

    @classmethod
    def rational(cls, p: int, q: int = 1) -> "Expr":
        return cls.const(Fraction(p, q))

    @classmethod
    def from_gen(cls, g: Gen) -> "Expr":
        return cls(Poly.gen(g), POLY_ONE, reduced=True)

    # predicates ------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Cyclo8:
        if not self.is_const():
            raise ValueError(f"not constant: {self!r}")
        if self.num.is_zero():
            return C_ZERO
        return self.num.const_value() * self.den.const_value().inverse()

    def gens(self) -> set:
        return self.num.gens() | self.den.gens()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Cyclo8)):
            other = Expr.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    # arithmetic ------------------------------------------------------------

    def __add__(self, other) -> "Expr":
        other = _as_expr(other)
        if self.den == other.den:
            return Expr(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        if g.is_const():
            return Expr(self.num * other.den + other.num * self.den, self.den * other.den)
        b1 = self.den.divexact(g)
        d1 = other.den.divexact(g)
        return Expr(self.num * d1 + other.num * b1, b1 * other.den)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(-self.num, self.den, reduced=True)

    def __sub__(self, other) -> "Expr":
        return self + (-_as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return _as_expr(other) + (-self)

    def __mul__(self, other) -> "Expr":
        other = _as_expr(other)
        if self.is_zero() or other.is_zero():
            return E_ZERO
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        a = self.num if g1.is_const() else self.num.divexact(g1)
        d = other.den if g1.is_const() else other.den.divexact(g1)
        c = other.num if g2.is_const() else other.num.divexact(g2)
        b = self.den if g2.is_const() else self.den.divexact(g2)
        return Expr(a * c, b * d, reduced=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        other = _as_expr(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero expression")
        return self * Expr(other.den, other.num)

    def __rtruediv__(self, other) -> "Expr":
        return _as_expr(other) / self

    def __pow__(self, n: int) -> "Expr":
        if n == 0:
            return E_ONE
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return Expr(self.den ** (-n), self.num ** (-n), reduced=True)
        return Expr(self.num ** n, self.den ** n, reduced=True)

    # calculus ----------------------------------------------------------------

    def diff(self, g: Gen) -> "Expr":
        """Exact partial derivative; jets and parameters are plain symbols."""
        if self.den.is_const():
            dinv = self.den.const_value().inverse()
            return Expr(self.num.diff(g).mul_scalar(dinv), POLY_ONE)
        dn = self.num.diff(g)
        dd = self.den.diff(g)
        if dd.is_zero():
            return Expr(dn, self.den)
        return Expr(dn * self.den - self.num * dd, self.den * self.den)

    def total_diff(self, v: Sym, rates: Mapping | None = None) -> "Expr":
        """Total derivative D_v.

        Jets whose base contains v pick up the raised index; generators in
        `rates` (auxiliary independents, or base variables of foreign jets)
        move according to the supplied expressions.
        """
        out = self.diff(v)
        for g in sorted(self.gens(), key=_genkey):
            if g == v:
                continue
            rate = None
            if rates and g in rates:
                rate = _as_expr(rates[g])
            elif isinstance(g, Jet):
                acc = E_ZERO
                hit = False
                for b in g.base:
                    if b == v.name:
                        acc = acc + Expr.from_gen(g.raised(b))
                        hit = True
                    elif rates:
                        bsym = Sym(b, "indep")
                        if bsym in rates:
                            acc = acc + Expr.from_gen(g.raised(b)) * _as_expr(rates[bsym])
                            hit = True
                if hit:
                    rate = acc
            if rate is None or rate.is_zero():
                continue
            d = self.diff(g)
            if not d.is_zero():
                out = out + d * rate
        return out

    # substitution ------------------------------------------------------------

    def subs(self, mapping: Mapping) -> "Expr":
        """Simultaneous substitution of generators by expressions."""
        if not any(g in mapping for g in self.gens()):
            return self
        num = _poly_subs(self.num, mapping)
        den = _poly_subs(self.den, mapping)
        if den.is_zero():
            raise ExprError(f"substitution annihilates denominator {self.den!r}")
        return num / den

    def eval_num(self, env: Mapping) -> complex:
        genv = _resolve_env(self.gens(), env, complex)
        d = self.den.eval_complex(genv)
        if d == 0:
            raise ExprError(f"pole: denominator {self.den!r} vanishes on env")
        return self.num.eval_complex(genv) / d

    def eval_mpc(self, env: Mapping):
        genv = _resolve_env(self.gens(), env, None)
        d = self.den.eval_mpc(genv)
        if d == 0:
            raise ExprError(f"pole: denominator {self.den!r} vanishes on env")
        return self.num.eval_mpc(genv) / d

    def __repr__(self):
        if self.den == POLY_ONE:
            return repr(self.num)
        return f"({self.num!r}) / ({self.den!r})"


E_ZERO = Expr.const(0)
E_ONE = Expr.const(1)


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, Cyclo8)):
        return Expr.const(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as Expr")


def _poly_subs(p: Poly, mapping: Mapping) -> Expr:
    cache: dict = {}

    def gen_pow(g: Gen, e: int) -> Expr:
        key = (g, e)
        if key not in cache:
            base = mapping.get(g)
            if base is None:
                cache[key] = Expr(Poly({Monomial([(g, e)]): C_ONE}, prune=False), POLY_ONE, reduced=True)
            else:
                cache[key] = _as_expr(base) ** e
        return cache[key]

    total = E_ZERO
    for m, c in p.t.items():
        term = Expr.const(c)
        for g, e in m.exps:
            term = term * gen_pow(g, e)
        total = total + term
    return total


def _resolve_env(gens, env: Mapping, cast):
    out = {}
    for g in gens:
        if g in env:
            v = env[g]
        elif g.token() in env:
            v = env[g.token()]
        else:
            raise ExprError(f"environment missing value for {g.token()}")
        out[g] = complex(v) if cast is complex else v
    return out


# ---------------------------------------------------------------------------
# convenience constructors


def param(name: str) -> Expr:
    return Expr.from_gen(Sym(name, "param"))


def indep(name: str) -> Expr:
    return Expr.from_gen(Sym(name, "indep"))


def jet(dep: str, base, index=()) -> Expr:
    return Expr.from_gen(Jet(dep, tuple(base), tuple(index)))


def gen_of(e: Expr) -> Gen:
    """The generator of a single-generator monomial expression."""
    if e.den != POLY_ONE or len(e.num.t) != 1:
        raise ValueError("not a bare generator")
    (m, c), = e.num.t.items()
    if c != C_ONE or len(m.exps) != 1 or m.exps[0][1] != 1:
        raise ValueError("not a bare generator")
    return m.exps[0][0]


# ---------------------------------------------------------------------------
# structural helpers


def as_poly_in(e: Expr, v: Gen) -> dict:
    """Coefficients of e as a polynomial in v; denominator must be v-free."""
    if v in e.den.gens():
        raise ExprError(f"denominator involves {v!r}; not polynomial in it")
    out: dict = {}
    for deg, coeff in e.num.as_univariate(v).items():
        out[deg] = Expr(coeff, e.den)
    return out


def solve_linear(eq: Expr, v: Gen) -> Expr:
    """Solve eq == 0 for v, requiring eq to be affine in v."""
    coeffs = as_poly_in(eq, v)
    if any(d > 1 for d in coeffs):
        raise ExprError(f"equation is not linear in {v!r}")
    a = coeffs.get(1, E_ZERO)
    if a.is_zero():
        raise ExprError(f"equation does not involve {v!r} linearly")
    return -coeffs.get(0, E_ZERO) / a


def subs_dependent(e: Expr, dep: str, base, value: Expr,
                   rates_by_var: Mapping | None = None) -> Expr:
    """Change of dependent variable: every jet of `dep` over `base` is
    replaced by the matching total derivative of `value`.

    rates_by_var maps an independent-variable name to the rates context to
    use when total-differentiating `value` with respect to it (needed when
    `value` contains jets over a similarity variable sigma(t, x))."""
    base = tuple(base)
    cache: dict = {(): value}

    def derived(index: tuple) -> Expr:
        if index in cache:
            return cache[index]
        head, tail = index[0], index[1:]
        prev = derived(tail)
        rates = (rates_by_var or {}).get(head)
        cache[index] = prev.total_diff(Sym(head, "indep"), rates)
        return cache[index]

    mapping = {}
    for g in e.gens():
        if isinstance(g, Jet) and g.dep == dep and g.base == base:
            mapping[g] = derived(g.index)
    if not mapping:
        return e
    return e.subs(mapping)


# ---------------------------------------------------------------------------
# canonical S-expression serialization

_ATOM_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_JET_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)@([A-Za-z0-9_.]+?)(?::([A-Za-z0-9_.]+))?$")
_FRAC_RE = re.compile(r"^-?\d+(/\d+)?$")


def _coeff_token(c: Cyclo8) -> str:
    if c.is_rational():
        return str(c.a[0])
    return "{" + ",".join(str(x) for x in c.a) + "}"


def _term_sexpr(m: Monomial, c: Cyclo8) -> str:
    factors = []
    for g, e in m.exps:
        factors.append(g.token() if e == 1 else f"(^ {g.token()} {e})")
    if m.is_empty():
        return _coeff_token(c)
    if c == C_ONE and len(factors) == 1:
        return factors[0]
    parts = [] if c == C_ONE else [_coeff_token(c)]
    parts.extend(factors)
    if len(parts) == 1:
        return parts[0]
    return "(* " + " ".join(parts) + ")"


def _poly_sexpr(p: Poly) -> str:
    if p.is_zero():
        return "0"
    import functools

    monos = sorted(p.t, key=functools.cmp_to_key(_mono_cmp), reverse=True)
    terms = [_term_sexpr(m, p.t[m]) for m in monos]
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def to_sexpr(e: Expr) -> str:
    if e.den == POLY_ONE:
        return _poly_sexpr(e.num)
    return f"(/ {_poly_sexpr(e.num)} {_poly_sexpr(e.den)})"


def _tokenize(s: str):
    return s.replace("(", " ( ").replace(")", " ) ").split()


def _parse_tokens(toks, pos):
    t = toks[pos]
    if t == "(":
        op = toks[pos + 1]
        args = []
        pos += 2
        while toks[pos] != ")":
            node, pos = _parse_tokens(toks, pos)
            args.append(node)
        return (op, args), pos + 1
    return t, pos + 1


def _atom_expr(tok: str) -> Expr:
    if _FRAC_RE.match(tok):
        return Expr.const(Fraction(tok))
    if tok.startswith("{") and tok.endswith("}"):
        comps = [Fraction(x) for x in tok[1:-1].split(",")]
        return Expr.const(Cyclo8(*comps))
    m = _JET_RE.match(tok)
    if m and "@" in tok:
        dep, base, idx = m.group(1), m.group(2).split("."), m.group(3)
        index = tuple(idx.split(".")) if idx else ()
        return jet(dep, tuple(base), index)
    if _ATOM_RE.match(tok):
        # bare names parse as parameters unless registered independents
        return Expr.from_gen(Sym(tok, "indep") if tok in _KNOWN_INDEPS else Sym(tok, "param"))
    raise ValueError(f"bad atom {tok!r}")


_KNOWN_INDEPS = {"t", "x", "z", "sigma", "w", "st", "phi"}


def _node_expr(node) -> Expr:
    if isinstance(node, str):
        return _atom_expr(node)
    op, args = node
    vals = [_node_expr(a) for a in args]
    if op == "+":
        acc = E_ZERO
        for v in vals:
            acc = acc + v
        return acc
    if op == "*":
        acc = E_ONE
        for v in vals:
            acc = acc * v
        return acc
    if op == "/":
        return vals[0] / vals[1]
    if op == "^":
        exp = args[1]
        return vals[0] ** int(exp)
    raise ValueError(f"bad operator {op!r}")


def parse_sexpr(s: str) -> Expr:
    toks = _tokenize(s)
    node, pos = _parse_tokens(toks, 0)
    if pos != len(toks):
        raise ValueError("trailing tokens in s-expression")
    return _node_expr(node)
