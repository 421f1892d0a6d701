"""The hydrodynamic form of the derivative-NLS system under study.

Two real fields on (t, x): the intensity rho and the chirp u, coupled by

    rho_t + (rho*u + (delta/2)*rho^2)_x = 0
    u_t + u*u_x + rho_x + delta*(rho*u)_x + (rho_x^2/(8 rho^2) - rho_xx/(4 rho))_x = 0

with delta a positive parameter.  This module builds the two residuals as
exact expressions, solves them for the evolution derivatives rho_t, u_t,
and eliminates every t-derivative from arbitrary jet expressions (the
on-shell reduction used by the symmetry verifier).
"""

from __future__ import annotations

from .expr import Expr, ExprError, Jet, Sym, gen_of, indep, jet, param, solve_linear

T = Sym("t", "indep")
X = Sym("x", "indep")

BASE = ("t", "x")

delta = param("delta")
t = indep("t")
x = indep("x")


def rho(*index) -> Expr:
    return jet("rho", BASE, index)


def u(*index) -> Expr:
    return jet("u", BASE, index)


def mass_residual() -> Expr:
    """rho_t + (rho*u + (delta/2) rho^2)_x, expanded."""
    flux = rho() * u() + delta * rho() ** 2 / 2
    return rho("t") + flux.total_diff(X)


def momentum_residual() -> Expr:
    """The chirp equation residual, with the dispersive term expanded."""
    dispersive = rho("x") ** 2 / (8 * rho() ** 2) - rho("x", "x") / (4 * rho())
    return (
        u("t")
        + u() * u("x")
        + rho("x")
        + delta * (rho() * u()).total_diff(X)
        + dispersive.total_diff(X)
    )


def system() -> list[Expr]:
    return [mass_residual(), momentum_residual()]


def evolution_rules(equations: list[Expr] | None = None) -> dict:
    """Solve the system linearly for rho_t and u_t (pure x-jet right sides)."""
    if equations is None:
        equations = [mass_residual(), momentum_residual()]
    rt = gen_of(rho("t"))
    ut = gen_of(u("t"))
    rules = {}
    for g in (rt, ut):
        hit = None
        for eq in equations:
            try:
                hit = solve_linear(eq, g)
                break
            except ExprError:
                continue
        if hit is None:
            raise ExprError(f"cannot solve the system linearly for {g!r}")
        rules[g] = hit
    if any("t" in j.index for r in rules.values() for j in r.gens()
           if isinstance(j, Jet)):
        raise ExprError("evolution right sides must be free of t-derivatives")
    return rules


class SpatialReducer:
    """Eliminates t-derivatives using the evolution equations.

    Any jet carrying k >= 1 time indices is rewritten as total x- and
    t-derivatives of the solved evolution right sides, recursively, until
    only x-jets remain."""

    def __init__(self, equations: list[Expr] | None = None):
        self.rules = evolution_rules(equations)
        self._cache: dict = {}

    def _value(self, g: Jet) -> Expr:
        if g in self._cache:
            return self._cache[g]
        n_t = g.index.count("t")
        n_x = g.index.count("x")
        base_rule = self.rules[Jet(g.dep, g.base, ("t",))]
        e = base_rule
        for _ in range(n_t - 1):
            e = self.reduce(e.total_diff(T))
        for _ in range(n_x):
            e = e.total_diff(X)
        e = self.reduce(e)
        self._cache[g] = e
        return e

    def reduce(self, e: Expr) -> Expr:
        while True:
            tjets = [g for g in e.gens()
                     if isinstance(g, Jet) and "t" in g.index]
            if not tjets:
                return e
            e = e.subs({g: self._value(g) for g in tjets})
