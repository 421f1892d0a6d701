"""Similarity reductions of the hydrodynamic system.

The four reductions (static, stationary, travel-wave, scaling) all land in
one parametric family

    vrho'' + A*vrho^5 + B*vrho^3 + C(sigma)*vrho + D/vrho^3 = 0,

with A = 3 delta^2/4 throughout.  Constructors instantiate the published
coefficient combinations; `verify_reduction` re-derives each reduction by
exact back-substitution through the chain rule and reports coefficient-by-
coefficient agreement.  The derivation determines A, B, D (and any sigma-
dependent parts of C) uniquely; the constant part of C is a quadrature
constant with no canonical normalization, so the published parameterization
is adopted and recorded rather than "checked".

The key identity used instead of symbolic integration: if the reduced
second equation is R2 = D_var[W] and the target family satisfies
-2*vrho*W = F + const*vrho, then R2 == D_var[-F/(2*vrho)] exactly, with
the constant slot of F annihilated by the derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import (
    E_ONE,
    E_ZERO,
    Expr,
    ExprError,
    Jet,
    Sym,
    as_poly_in,
    gen_of,
    indep,
    jet,
    param,
    solve_linear,
    subs_dependent,
    to_sexpr,
)
from . import hydro

delta = param("delta")
alpha = param("alpha")
c1 = param("c1")
c2 = param("c2")

T = Sym("t", "indep")
X = Sym("x", "indep")
Z = Sym("z", "indep")
SIGMA = Sym("sigma", "indep")
ST = Sym("st", "indep")  # sqrt(t); t = st^2 on t > 0

sigma = indep("sigma")
st = indep("st")
x = indep("x")


# ---------------------------------------------------------------------------
# the ODE family


@dataclass(frozen=True)
class ReducedODE:
    """vrho'' + A vrho^5 + B vrho^3 + (c_const + c_quad sigma^2) vrho + D vrho^-3 = 0."""

    A: Expr
    B: Expr
    c_const: Expr
    c_quad: Expr  # 0 for autonomous instances, 1/4 for the scaling family
    D: Expr
    provenance: str

    def is_autonomous(self) -> bool:
        return self.c_quad.is_zero()

    def C(self, s: Expr | None = None) -> Expr:
        if self.is_autonomous():
            return self.c_const
        if s is None:
            s = sigma
        return self.c_const + self.c_quad * s ** 2

    def lhs(self, dep: str = "vrho", var: str = "z") -> Expr:
        """The defining expression over jets of `dep` in `var`."""
        r = jet(dep, (var,))
        rpp = jet(dep, (var,), (var, var))
        cterm = self.c_const
        if not self.c_quad.is_zero():
            cterm = cterm + self.c_quad * indep(var) ** 2
        return rpp + self.A * r ** 5 + self.B * r ** 3 + cterm * r + self.D / r ** 3

    def numeric(self, env: dict) -> tuple:
        """(A, B, c_const, c_quad, D) as floats for the integrator."""
        vals = []
        for e in (self.A, self.B, self.c_const, self.c_quad, self.D):
            v = e.eval_num(env)
            if abs(v.imag) > 1e-14 * max(1.0, abs(v.real)):
                raise ExprError(f"coefficient {to_sexpr(e)} is not real on env")
            vals.append(v.real)
        return tuple(vals)

    def same_family(self, other: "ReducedODE") -> bool:
        """Equality of A, B, c_quad, D; the constant part of C is a free
        quadrature constant and is excluded from family identity."""
        return ((self.A - other.A).is_zero() and (self.B - other.B).is_zero()
                and (self.c_quad - other.c_quad).is_zero()
                and (self.D - other.D).is_zero())


@dataclass(frozen=True)
class FirstIntegral:
    """E(vrho, vrho') conserved along autonomous instances; constant c3."""

    energy: Expr
    constant_name: str
    dep: str
    var: str

    def on_shell_derivative(self, ode: ReducedODE) -> Expr:
        """D_var E with vrho'' eliminated by the ODE; zero certifies E."""
        r = jet(self.dep, (self.var,))
        rpp_gen = gen_of(jet(self.dep, (self.var,), (self.var, self.var)))
        de = self.energy.total_diff(Sym(self.var, "indep"))
        rhs = -(ode.A * r ** 5 + ode.B * r ** 3 + ode.C(indep(self.var)) * r
                + ode.D / r ** 3)
        return de.subs({rpp_gen: rhs})

    def __repr__(self):
        return f"{self.constant_name} = {self.energy!r}"


def first_integral(ode: ReducedODE, dep: str = "vrho", var: str = "z") -> FirstIntegral:
    """Quadrature of the autonomous family:

        E = vrho'^2/2 + A vrho^6/6 + B vrho^4/4 + C vrho^2/2 - D vrho^-2/2.

    Derived from E = vrho'^2/2 + integral of the force; the published
    version of this integral does not differentiate back to the equation,
    so the derived form is used and self-certified by dE/dvar == 0."""
    if not ode.is_autonomous():
        raise ExprError("first integral applies to autonomous instances only")
    r = jet(dep, (var,))
    rp = jet(dep, (var,), (var,))
    energy = (rp ** 2 / 2 + ode.A * r ** 6 / 6 + ode.B * r ** 4 / 4
              + ode.c_const * r ** 2 / 2 - ode.D / (2 * r ** 2))
    fi = FirstIntegral(energy, "c3", dep, var)
    res = fi.on_shell_derivative(ode)
    if not res.is_zero():
        raise ExprError(f"first-integral derivation failed: dE = {to_sexpr(res)}")
    return fi


def energy_numeric(ode: ReducedODE, env: dict):
    """Callable E(R, R') with floats, for drift monitoring."""
    A, B, c0, cq, D = ode.numeric(env)

    def E(R, Rp):
        R = np.asarray(R, dtype=float)
        Rp = np.asarray(Rp, dtype=float)
        return (0.5 * Rp ** 2 + A * R ** 6 / 6 + B * R ** 4 / 4
                + 0.5 * c0 * R ** 2 - 0.5 * D / R ** 2)

    return E


# ---------------------------------------------------------------------------
# constructors for the published instances


def _as_param(v, name: str) -> Expr:
    if isinstance(v, Expr):
        return v
    if v is None:
        return param(name)
    from fractions import Fraction

    if isinstance(v, float):
        v = Fraction(v).limit_denominator(10 ** 12)
    return Expr.const(v)


def make_static_ode(delta_v=None, c1_v=None, c2_v=None):
    """Static branch: A = 3 delta^2/4, B = -2, C = c2/2 - delta*c1, D = -c1^2."""
    d = _as_param(delta_v, "delta")
    k1 = _as_param(c1_v, "c1")
    k2 = _as_param(c2_v, "c2")
    ode = ReducedODE(
        A=3 * d ** 2 / 4,
        B=Expr.const(-2),
        c_const=k2 / 2 - d * k1,
        c_quad=E_ZERO,
        D=-k1 ** 2,
        provenance="static",
    )
    return ode, first_integral(ode, var="x")


def make_travel_ode(alpha_v=None, delta_v=None, c1_v=None, c2_v=None):
    """Travel branch: B = -2(1 + alpha*delta), C = c2 - alpha - delta*c1."""
    a = _as_param(alpha_v, "alpha")
    d = _as_param(delta_v, "delta")
    k1 = _as_param(c1_v, "c1")
    k2 = _as_param(c2_v, "c2")
    ode = ReducedODE(
        A=3 * d ** 2 / 4,
        B=-2 * (1 + a * d),
        c_const=k2 - a - d * k1,
        c_quad=E_ZERO,
        D=-k1 ** 2,
        provenance="travel",
    )
    return ode, first_integral(ode, var="z")


@dataclass
class SimilarityMap:
    """Substitution rules mapping the (t, x) fields to reduced coordinates."""

    branch: str
    rho_value: Expr         # in terms of the reduced jets (and st, x if scaling)
    u_value: Expr
    reduced_var: str
    rates: dict             # differentiation variable name -> {gen: rate Expr}
    description: dict = field(default_factory=dict)


def travel_map(alpha_v=None) -> SimilarityMap:
    a = _as_param(alpha_v, "alpha")
    vr = jet("vrho", ("z",))
    uz = jet("u", ("z",))
    return SimilarityMap(
        branch="travel",
        rho_value=vr ** 2,
        u_value=uz,
        reduced_var="z",
        rates={"t": {Z: -a}, "x": {Z: E_ONE}},
        description={"z": "x - alpha*t", "rho": "vrho(z)^2", "u": "u(z)"},
    )


def static_map() -> SimilarityMap:
    vr = jet("vrho", ("x",))
    ux = jet("u", ("x",))
    return SimilarityMap(
        branch="static",
        rho_value=vr ** 2,
        u_value=ux,
        reduced_var="x",
        rates={"t": {}, "x": {}},
        description={"rho": "vrho(x)^2", "u": "u(x)"},
    )


def scaling_map(delta_v=None) -> SimilarityMap:
    """u = -1/delta + U(sigma)/sqrt(t), rho = R(sigma)^2/sqrt(t),
    sigma = x/sqrt(t) + sqrt(t)/delta; internally sqrt(t) is the
    generator st with D_t st = 1/(2 st)."""
    d = _as_param(delta_v, "delta")
    R = jet("R", ("sigma",))
    U = jet("U", ("sigma",))
    sigma_expr = x / st + st / d
    sigma_t = -x / (2 * st ** 3) + 1 / (2 * d * st)
    sigma_x = 1 / st
    return SimilarityMap(
        branch="scaling",
        rho_value=R ** 2 / st,
        u_value=-1 / d + U / st,
        reduced_var="sigma",
        rates={
            "t": {SIGMA: sigma_t, ST: 1 / (2 * st)},
            "x": {SIGMA: sigma_x},
        },
        description={
            "sigma": "x/sqrt(t) + sqrt(t)/delta",
            "rho": "R(sigma)^2/sqrt(t)",
            "u": "-1/delta + U(sigma)/sqrt(t)",
        },
    )


def make_scaling_ode(delta_v=None, c1_v=None, c2_v=None, bcoef=None):
    """The published scaling family: B = -2*Bcoef, C = C2 + sigma^2/4.

    Bcoef is kept as an explicit knob because the published cubic
    coefficient names a wave-speed parameter that the scaling reduction
    does not possess; verify_reduction computes the true coefficient."""
    d = _as_param(delta_v, "delta")
    k1 = _as_param(c1_v, "c1")
    k2 = _as_param(c2_v, "c2")
    b = _as_param(bcoef, "Bcoef")
    ode = ReducedODE(
        A=3 * d ** 2 / 4,
        B=-2 * b,
        c_const=k2 / 2 - d * k1,
        c_quad=Expr.rational(1, 4),
        D=-k1 ** 2,
        provenance="scaling",
    )
    return ode, scaling_map(delta_v)


def ermakov_pinney_limit(ode: ReducedODE) -> ReducedODE:
    """Small-amplitude truncation: drop the quintic and cubic terms."""
    return ReducedODE(E_ZERO, E_ZERO, ode.c_const, ode.c_quad, ode.D,
                      provenance=ode.provenance + "/pinney")


# ---------------------------------------------------------------------------
# stationary branch and u-elimination


def stationary_solution(rho0=None, u0=None, delta_v=None):
    """Constant pairs solve both equations; returns the residual certificate."""
    import itertools

    r0 = _as_param(rho0, "rho0")
    v0 = _as_param(u0, "u0")
    d = _as_param(delta_v, "delta")
    # derivatives first: the dispersive term vanishes identically before the
    # field values go in, which keeps the zero-intensity case nonsingular
    deriv_bindings = {}
    for dep in ("rho", "u"):
        for n in range(1, 4):
            for idx in itertools.combinations_with_replacement(("t", "x"), n):
                deriv_bindings[Jet(dep, hydro.BASE, idx)] = E_ZERO
    value_bindings = {gen_of(delta): d, gen_of(hydro.rho()): r0,
                      gen_of(hydro.u()): v0}
    residuals = [h.subs(deriv_bindings).subs(value_bindings)
                 for h in hydro.system()]
    degenerate = r0.is_zero()
    return {
        "rho0": to_sexpr(r0),
        "u0": to_sexpr(v0),
        "residuals": [to_sexpr(r) for r in residuals],
        "residuals_zero": all(r.is_zero() for r in residuals),
        "zero_intensity": bool(degenerate),
    }


def eliminate_u(branch: str, delta_v=None, c1_v=None, alpha_v=None) -> Expr:
    """Solve the first-order conservation constraint for u exactly.

    static: u = c1/vrho^2 - delta vrho^2/2 (with rho = vrho^2);
    travel: u = alpha + c1/vrho^2 - delta vrho^2/2."""
    d = _as_param(delta_v, "delta")
    k1 = _as_param(c1_v, "c1")
    if branch == "static":
        var = "x"
        vr = jet("vrho", (var,))
        uz = jet("u", (var,))
        constraint = uz * vr ** 2 + d * vr ** 4 / 2 - k1
    elif branch == "travel":
        var = "z"
        a = _as_param(alpha_v, "alpha")
        vr = jet("vrho", (var,))
        uz = jet("u", (var,))
        constraint = (uz - a) * vr ** 2 + d * vr ** 4 / 2 - k1
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return solve_linear(constraint, gen_of(uz))


# ---------------------------------------------------------------------------
# back-substitution verifier


@dataclass
class ReductionReport:
    branch: str
    separation_ok: bool
    constraint_ok: bool
    derived: dict           # slot name -> sexpr of derived coefficient
    claimed: dict           # slot name -> sexpr of claimed coefficient
    matches: dict           # slot name -> bool
    constant_naming: str
    discrepancies: list
    identity_ok: bool = False

    def all_derivable_match(self) -> bool:
        return self.constraint_ok and self.separation_ok and all(self.matches.values())

    def as_dict(self) -> dict:
        return {
            "branch": self.branch,
            "separation_ok": self.separation_ok,
            "constraint_ok": self.constraint_ok,
            "identity_ok": self.identity_ok,
            "derived": self.derived,
            "claimed": self.claimed,
            "matches": self.matches,
            "constant_naming": self.constant_naming,
            "discrepancies": self.discrepancies,
        }


def _solve_linear_exprs(equations: list, unknowns: list) -> dict | None:
    """Exact Gaussian elimination for a small linear system over Expr.

    Each equation is an Expr that must vanish; it is linear in the unknown
    parameter generators with coefficients in the remaining generators."""
    rows = []
    for eq in equations:
        coeffs = {}
        rest = eq
        for ugen in unknowns:
            p = as_poly_in(rest, ugen)
            if any(d > 1 for d in p):
                raise ExprError("system is not linear in the unknowns")
            coeffs[ugen] = p.get(1, E_ZERO)
            rest = p.get(0, E_ZERO)
        rows.append((coeffs, rest))
    solution: dict = {}
    remaining = list(unknowns)
    pending = rows
    progress = True
    while remaining and progress:
        progress = False
        for coeffs, rest in pending:
            live = [(u, coeffs[u]) for u in remaining if not coeffs[u].is_zero()]
            if len(live) != 1:
                continue
            ugen, a = live[0]
            rhs = rest
            for u, cu in coeffs.items():
                if u in solution and not cu.is_zero():
                    rhs = rhs + cu * solution[u]
            solution[ugen] = -rhs / a
            remaining.remove(ugen)
            # eliminate from other rows
            new_pending = []
            for c2_, r2_ in pending:
                if c2_ is coeffs:
                    continue
                cu = c2_[ugen]
                if not cu.is_zero():
                    r2_ = r2_ + cu * solution[ugen]
                    c2_ = dict(c2_)
                    c2_[ugen] = E_ZERO
                new_pending.append((c2_, r2_))
            pending = new_pending
            progress = True
            break
    if remaining:
        return None
    return solution


def _reduce_pde(similarity: SimilarityMap):
    """Substitute the ansatz into the two equations; returns the pair of
    reduced expressions in the similarity variable (after separation)."""
    rates = {v: dict(r) for v, r in similarity.rates.items()}
    out = []
    for H in hydro.system():
        e = subs_dependent(H, "rho", hydro.BASE, similarity.rho_value, rates)
        e = subs_dependent(e, "u", hydro.BASE, similarity.u_value, rates)
        out.append(e)
    return out


def _separate_scaling(e: Expr, d: Expr) -> Expr:
    """Factor st^-3 and rewrite x by sigma; error if t survives."""
    e = e * st ** 3
    # invert sigma = x/st + st/delta:  x = st*sigma - st^2/delta
    e = e.subs({gen_of(x): st * sigma - st ** 2 / d})
    if gen_of(st) in e.gens():
        raise ExprError(
            f"ansatz does not separate: st survives in {to_sexpr(e)[:200]}")
    return e


def verify_reduction(similarity: SimilarityMap, ode: ReducedODE) -> ReductionReport:
    """Mechanized back-substitution check of one similarity reduction.

    Checks, all exact: (1) the reduced first equation is the total
    derivative of the claimed conservation constraint; (2) the reduced
    second equation, after eliminating u through the constraint and
    changing the dependent variable, equals D[-F/(2 vrho)] for the claimed
    family F (its constant slot is invisible to the derivative, and is
    recorded as a free quadrature constant); (3) the uniquely derivable
    coefficient slots, extracted by a linear solve, against the stored
    instance."""
    if similarity.branch != ode.provenance.split("/")[0]:
        raise ExprError("similarity map and ODE come from different branches")
    if similarity.branch == "travel":
        # recover the wave speed from B = -2(1 + alpha*delta)
        wave_speed = -(ode.B / 2 + 1) / delta
        return _verify_autonomous(similarity, ode, var="z", a=wave_speed)
    if similarity.branch == "static":
        return _verify_autonomous(similarity, ode, var="x", a=E_ZERO)
    if similarity.branch == "scaling":
        return _verify_scaling(similarity, ode)
    raise ValueError(f"unknown branch {similarity.branch!r}")


def _verify_autonomous(similarity: SimilarityMap, ode: ReducedODE,
                       var: str, a: Expr) -> ReductionReport:
    vsym = Sym(var, "indep")
    vr = jet("vrho", (var,))
    uz = jet("u", (var,))
    r1, r2 = _reduce_pde(similarity)
    discrepancies: list = []

    constraint = (uz - a) * vr ** 2 + delta * vr ** 4 / 2 - c1
    constraint_ok = (r1 - constraint.total_diff(vsym)).is_zero()

    u_solved = solve_linear(constraint, gen_of(uz))
    r2 = subs_dependent(r2, "u", (var,), u_solved)

    # identity check with the claimed family (constant slot symbolic)
    F_claimed = ode.lhs("vrho", var)
    identity_ok = (r2 - (-(F_claimed / (2 * vr))).total_diff(vsym)).is_zero()

    # derive the visible slots
    sa, sb, sd = (Sym(n, "param") for n in ("slot_a", "slot_b", "slot_d"))
    F_cand = (jet("vrho", (var,), (var, var))
              + Expr.from_gen(sa) * vr ** 5 + Expr.from_gen(sb) * vr ** 3
              + Expr.from_gen(sd) / vr ** 3)
    diff = r2 - (-(F_cand / (2 * vr))).total_diff(vsym)
    solution = _solve_from_identity(diff, [sa, sb, sd])
    derived = {"A": solution.get(sa), "B": solution.get(sb), "D": solution.get(sd)}
    claimed = {"A": ode.A, "B": ode.B, "D": ode.D}
    matches = {k: derived[k] is not None and (derived[k] - claimed[k]).is_zero()
               for k in derived}
    if not identity_ok:
        discrepancies.append("claimed family does not differentiate back to "
                             "the reduced second equation")
    naming = ("linear coefficient is a free quadrature constant; published "
              "parameterization adopted: C = "
              + ("c2 - alpha - delta*c1" if similarity.branch == "travel"
                 else "c2/2 - delta*c1"))
    return ReductionReport(
        branch=similarity.branch,
        separation_ok=True,
        constraint_ok=constraint_ok,
        derived={k: to_sexpr(v) if v is not None else None for k, v in derived.items()},
        claimed={k: to_sexpr(v) for k, v in claimed.items()},
        matches=matches,
        constant_naming=naming,
        discrepancies=discrepancies,
        identity_ok=identity_ok,
    )


def _verify_scaling(similarity: SimilarityMap, ode: ReducedODE) -> ReductionReport:
    vsym = SIGMA
    R = jet("R", ("sigma",))
    U = jet("U", ("sigma",))
    r1, r2 = _reduce_pde(similarity)
    discrepancies: list = []
    try:
        r1 = _separate_scaling(r1, delta)
        r2 = _separate_scaling(r2, delta)
        separation_ok = True
    except ExprError as err:
        return ReductionReport(similarity.branch, False, False, {}, {}, {},
                               "", [str(err)])

    # constraint: R^2 U - sigma R^2/2 + delta R^4/2 = c1 (normalized so that
    # the derived inverse-cube coefficient is exactly -c1^2)
    constraint = R ** 2 * U - sigma * R ** 2 / 2 + delta * R ** 4 / 2 - c1
    constraint_ok = (r1 - constraint.total_diff(vsym)).is_zero()
    if not constraint_ok and (r1 - 2 * constraint.total_diff(vsym)).is_zero():
        constraint_ok = True
        discrepancies.append("reduced first equation equals twice the "
                             "constraint derivative; constraint rescaled")

    u_solved = solve_linear(constraint, gen_of(U))
    r2 = subs_dependent(r2, "U", ("sigma",), u_solved)

    # candidate with sigma-graded slots; constant R-slot stays blind
    names = ("slot_a", "slot_b0", "slot_b1", "slot_c1", "slot_c2", "slot_d")
    sa, sb0, sb1, sc1, sc2, sd = (Sym(n, "param") for n in names)
    F_cand = (jet("R", ("sigma",), ("sigma", "sigma"))
              + Expr.from_gen(sa) * R ** 5
              + (Expr.from_gen(sb0) + Expr.from_gen(sb1) * sigma) * R ** 3
              + (Expr.from_gen(sc1) * sigma + Expr.from_gen(sc2) * sigma ** 2) * R
              + Expr.from_gen(sd) / R ** 3)
    diff = r2 - (-(F_cand / (2 * R))).total_diff(vsym)
    solution = _solve_from_identity(diff, [sa, sb0, sb1, sc1, sc2, sd])
    derived = {
        "A": solution.get(sa),
        "B_const": solution.get(sb0),
        "B_sigma": solution.get(sb1),
        "C_sigma": solution.get(sc1),
        "C_sigma2": solution.get(sc2),
        "D": solution.get(sd),
    }
    claimed = {
        "A": ode.A,
        "B_const": ode.B,
        "B_sigma": E_ZERO,
        "C_sigma": E_ZERO,
        "C_sigma2": ode.c_quad,
        "D": ode.D,
    }
    matches = {k: derived[k] is not None and (derived[k] - claimed[k]).is_zero()
               for k in derived}
    if not matches["B_const"] or not matches["B_sigma"]:
        discrepancies.append(
            "published cubic coefficient -2(1+alpha*delta) is constant, but "
            "the derived coefficient is sigma-dependent: "
            f"B(sigma) = {to_sexpr(solution.get(sb0))} + "
            f"({to_sexpr(solution.get(sb1))})*sigma")
    naming = ("constant part of the linear coefficient is a free quadrature "
              "constant; published parameterization C2 = c2/2 - delta*c1 adopted")
    return ReductionReport(
        branch=similarity.branch,
        separation_ok=separation_ok,
        constraint_ok=constraint_ok,
        derived={k: to_sexpr(v) if v is not None else None for k, v in derived.items()},
        claimed={k: to_sexpr(v) for k, v in claimed.items()},
        matches=matches,
        constant_naming=naming,
        discrepancies=discrepancies,
        identity_ok=all(matches[k] for k in ("A", "C_sigma2", "D")),
    )


# ---------------------------------------------------------------------------
# complex-field reconstruction


@dataclass
class MadelungReport:
    """Residuals of the complex evolution equation for both amplitude
    conventions; the published transformation leaves the amplitude power
    ambiguous, so both are measured and neither is asserted."""

    max_residual: dict      # convention -> float
    preferred: str
    x: np.ndarray
    q_center: dict          # convention -> complex samples at the middle slice

    def as_dict(self) -> dict:
        return {"max_residual": self.max_residual, "preferred": self.preferred}


def madelung_reconstruct(x_grid, rho_slices, u_slices, dt: float, delta_v: float,
                         conventions=("amplitude", "sqrt")) -> MadelungReport:
    """Rebuild q from (rho, u) samples and measure the complex residual.

    The phase is the cumulative trapezoidal integral of u along x (pinned
    to zero at the left edge of each slice; the transformation fixes no
    time-dependent phase origin, which is part of what the residual
    measures).  q = rho*exp(i theta) under "amplitude", sqrt(rho)*exp(i
    theta) under "sqrt".  The residual of

        i q_t + q_xx/2 - |q|^2 q + i delta |q|^2 q_x

    uses a centered difference in t over the two neighbouring slices and
    4th-order central differences in x; max-norm over interior points."""
    x_grid = np.asarray(x_grid, dtype=float)
    rho_slices = np.asarray(rho_slices, dtype=float)
    u_slices = np.asarray(u_slices, dtype=float)
    if rho_slices.shape != (3, x_grid.size) or u_slices.shape != (3, x_grid.size):
        raise ValueError("need three time slices (t0-dt, t0, t0+dt) per field")
    h = np.diff(x_grid)
    if h.size == 0 or np.max(np.abs(h - h[0])) > 1e-12 * max(1.0, abs(h[0])):
        raise ExprError("x grid must be uniform to 1e-12")
    if np.any(rho_slices <= 0):
        raise ExprError("rho must be strictly positive for the reconstruction")
    h = float(h[0])

    def phase(u_row):
        th = np.zeros_like(u_row)
        th[1:] = np.cumsum(0.5 * (u_row[1:] + u_row[:-1]) * h)
        return th

    max_residual = {}
    q_center = {}
    for conv in conventions:
        qs = []
        for k in range(3):
            amp = rho_slices[k] if conv == "amplitude" else np.sqrt(rho_slices[k])
            qs.append(amp * np.exp(1j * phase(u_slices[k])))
        q_prev, q0, q_next = qs
        qt = (q_next - q_prev) / (2.0 * dt)
        i = slice(2, -2)
        qx = (-q0[4:] + 8 * q0[3:-1] - 8 * q0[1:-3] + q0[:-4]) / (12 * h)
        qxx = (-q0[4:] + 16 * q0[3:-1] - 30 * q0[2:-2] + 16 * q0[1:-3]
               - q0[:-4]) / (12 * h * h)
        mod2 = np.abs(q0[i]) ** 2
        res = (1j * qt[i] + 0.5 * qxx - mod2 * q0[i]
               + 1j * delta_v * mod2 * qx)
        max_residual[conv] = float(np.max(np.abs(res)))
        q_center[conv] = q0
    preferred = min(max_residual, key=max_residual.get)
    return MadelungReport(max_residual, preferred, x_grid, q_center)


def _solve_from_identity(diff: Expr, unknowns: list) -> dict:
    """Find parameter values making `diff` vanish identically.

    diff is linear in the unknowns with jet-expression multipliers; each
    jet monomial of the numerator yields one linear equation."""
    from .expr import Monomial, Poly

    num = diff.num
    # one equation per jet/independent-variable monomial; parameters (the
    # unknown slots and delta, c1, ...) stay in the coefficient space
    buckets: dict = {}
    for mono, coeff in num.t.items():
        jet_part = []
        par_part = []
        for g, e in mono.exps:
            if isinstance(g, Sym) and g.kind == "param":
                par_part.append((g, e))
            else:
                jet_part.append((g, e))
        key = Monomial(jet_part)
        if key not in buckets:
            buckets[key] = Poly()
        buckets[key] = buckets[key] + Poly({Monomial(par_part): coeff})
    equations = [Expr(p) for p in buckets.values()]
    sol = _solve_linear_exprs(equations, unknowns)
    if sol is None:
        raise ExprError("coefficient extraction failed: the reduced equation "
                        "does not match the candidate family")
    # verify by substitution
    check = diff.subs({u: sol[u] for u in unknowns})
    if not check.is_zero():
        raise ExprError("derived coefficients do not satisfy the identity")
    return sol
