"""Property tests for the CAS invariants: canonical normal form under
random algebraic rewrites, exact linearity of derivatives, commuting total
derivatives, and numeric agreement of equal expressions."""

import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from symlab.expr import Expr, ExprError, Sym, indep, jet, param

X = Sym("x", "indep")
T = Sym("t", "indep")

GENS = [
    indep("x"),
    indep("t"),
    param("delta"),
    param("c1"),
    jet("rho", ("t", "x")),
    jet("rho", ("t", "x"), ("x",)),
    jet("u", ("t", "x")),
]

rationals = st.fractions(min_value=-6, max_value=6, max_denominator=6)


@st.composite
def exprs(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        kind = draw(st.integers(0, len(GENS)))
        if kind == len(GENS):
            return Expr.const(draw(rationals))
        return GENS[kind]
    op = draw(st.sampled_from(["+", "-", "*"]))
    a = draw(exprs(depth=depth - 1))
    b = draw(exprs(depth=depth - 1))
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    return a * b


def rewrite(e: Expr, rng: random.Random) -> Expr:
    """Rebuild e along an algebraically equivalent route."""
    out = e
    for _ in range(rng.randint(1, 4)):
        move = rng.randint(0, 3)
        if move == 0:
            r = GENS[rng.randrange(len(GENS))] * Fraction(rng.randint(-5, 5))
            out = (out + r) - r
        elif move == 1:
            c = Fraction(rng.randint(1, 7), rng.randint(1, 7))
            out = (out * c) / c
        elif move == 2:
            d = GENS[rng.randrange(len(GENS))] ** 2 + 1
            out = (out * d) / d
        else:
            out = -(-out)
    return out


@settings(max_examples=1000, deadline=None)
@given(exprs(), st.integers(0, 2 ** 30))
def test_normal_form_unique_under_rewrites(e, seed):
    rng = random.Random(seed)
    assert rewrite(e, rng) == e


@settings(max_examples=200, deadline=None)
@given(exprs(), exprs(), rationals, rationals)
def test_partial_derivative_linear(e1, e2, a, b):
    lhs = (a * e1 + b * e2).diff(X)
    rhs = a * e1.diff(X) + b * e2.diff(X)
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(exprs(), exprs(), rationals, rationals)
def test_total_derivative_linear(e1, e2, a, b):
    lhs = (a * e1 + b * e2).total_diff(X)
    rhs = a * e1.total_diff(X) + b * e2.total_diff(X)
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_total_derivatives_commute(e):
    assert e.total_diff(X).total_diff(T) == e.total_diff(T).total_diff(X)


@settings(max_examples=300, deadline=None)
@given(exprs(), st.integers(0, 2 ** 30))
def test_numeric_agreement_of_equal_expressions(e, seed):
    rng = random.Random(seed)
    other = rewrite(e, rng)
    for attempt in range(8):
        env = {g.gens().pop(): complex(rng.uniform(0.3, 2.5), rng.uniform(0.1, 1.5))
               for g in GENS}
        try:
            v1 = e.eval_num(env)
            v2 = other.eval_num(env)
        except ExprError:
            continue
        scale = max(abs(v1), 1.0)
        assert abs(v1 - v2) <= 1e-10 * scale
        return
