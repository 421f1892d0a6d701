import random
from fractions import Fraction

import numpy as np
import pytest

from symlab.expr import Expr, ExprError, gen_of, jet, param, to_sexpr
from symlab.reductions import (
    eliminate_u,
    ermakov_pinney_limit,
    first_integral,
    madelung_reconstruct,
    make_scaling_ode,
    make_static_ode,
    make_travel_ode,
    static_map,
    stationary_solution,
    travel_map,
    verify_reduction,
)

delta = param("delta")
c1 = param("c1")
c2 = param("c2")
alpha = param("alpha")


class TestConstructors:
    def test_static_base_instance(self):
        ode, _ = make_static_ode(1, 0, 0)
        assert ode.A == Expr.rational(3, 4)
        assert ode.B == Expr.const(-2)
        assert ode.c_const.is_zero() and ode.D.is_zero()

    def test_static_constant_combination(self):
        ode, _ = make_static_ode(1, 1, 4)
        assert ode.c_const == Expr.const(1)  # 4/2 - 1*1
        assert ode.D == Expr.const(-1)

    def test_travel_zero_speed_matches_static_shape(self):
        tr, _ = make_travel_ode(0, None, None, None)
        st, _ = make_static_ode()
        assert tr.B == st.B == Expr.const(-2)
        assert tr.same_family(st)

    def test_travel_fig2_regime(self):
        ode, _ = make_travel_ode(-2, 1, None, None)
        assert ode.B == Expr.const(2)  # (1 + alpha*delta) = -1

    def test_travel_no_barrier(self):
        ode, _ = make_travel_ode(None, None, 0, None)
        assert ode.D.is_zero()

    def test_scaling_linear_coefficient(self):
        ode, _ = make_scaling_ode()
        assert ode.C(Expr.const(0)) == ode.c_const
        assert ode.C(Expr.const(2)) == ode.c_const + 1

    def test_scaling_published_instance(self):
        ode, _ = make_scaling_ode(1, 1, 4, 1)
        # vrho'' + (3/4) vrho^5 - 2 vrho^3 + (1 + sigma^2/4) vrho - vrho^-3
        assert ode.A == Expr.rational(3, 4)
        assert ode.B == Expr.const(-2)
        assert ode.c_const == Expr.const(1)
        assert ode.c_quad == Expr.rational(1, 4)
        assert ode.D == Expr.const(-1)

    def test_pinney_truncation(self):
        ode, _ = make_scaling_ode()
        ep = ermakov_pinney_limit(ode)
        assert ep.A.is_zero() and ep.B.is_zero()
        assert ep.c_quad == Expr.rational(1, 4)


class TestFirstIntegral:
    def test_derived_energy_static(self):
        ode, fi = make_static_ode(1, None, None)
        # E = vrho'^2/2 + (3/32... with delta=1: A/6 = 1/8) etc.
        r = jet("vrho", ("x",))
        rp = jet("vrho", ("x",), ("x",))
        want = (rp ** 2 / 2 + Expr.rational(1, 8) * r ** 6 - r ** 4 / 2
                + ode.c_const * r ** 2 / 2 + c1 ** 2 / (2 * r ** 2))
        assert fi.energy == want

    def test_conservation_symbolic_random_parameters(self):
        rng = random.Random(5)
        for _ in range(6):
            d = Fraction(rng.randint(1, 5), rng.randint(1, 3))
            k1 = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            k2 = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            a = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
            ode, fi = make_travel_ode(a, d, k1, k2)
            assert fi.on_shell_derivative(ode).is_zero()

    def test_nonautonomous_rejected(self):
        ode, _ = make_scaling_ode()
        with pytest.raises(ExprError):
            first_integral(ode, var="sigma")


class TestEliminateU:
    def test_static_form(self):
        got = eliminate_u("static")
        vr = jet("vrho", ("x",))
        assert got == c1 / vr ** 2 - delta * vr ** 2 / 2

    def test_travel_form(self):
        got = eliminate_u("travel", alpha_v=3, c1_v=0)
        vr = jet("vrho", ("z",))
        assert got == 3 - delta * vr ** 2 / 2

    def test_roundtrip_recovers_constant(self):
        vr = jet("vrho", ("z",))
        uz = jet("u", ("z",))
        got = eliminate_u("travel")
        constraint = (uz - alpha) * vr ** 2 + delta * vr ** 4 / 2
        assert constraint.subs({gen_of(uz): got}) == c1

    def test_static_numeric_case(self):
        # c1 = 0, delta = 1, vrho^2 = 2 -> u = -1
        got = eliminate_u("static", delta_v=1, c1_v=0)
        vr = gen_of(jet("vrho", ("x",)))
        assert got.eval_num({vr: complex(2 ** 0.5)}) == pytest.approx(-1.0)


class TestStationary:
    @pytest.mark.parametrize("pair", [(2, -1), (0, 5), (1, 1)])
    def test_constants_annihilate(self, pair):
        rep = stationary_solution(*pair, delta_v=1)
        assert rep["residuals_zero"]
        assert rep["zero_intensity"] == (pair[0] == 0)

    def test_symbolic_certificate(self):
        rep = stationary_solution()
        assert rep["residuals_zero"]
        assert rep["residuals"] == ["0", "0"]


class TestVerifyReduction:
    def test_travel_symbolic(self):
        ode, _ = make_travel_ode()
        rep = verify_reduction(travel_map(), ode)
        assert rep.constraint_ok and rep.identity_ok
        assert rep.matches == {"A": True, "B": True, "D": True}
        assert rep.derived["B"] == to_sexpr(-2 * (1 + alpha * delta))

    def test_static_symbolic(self):
        ode, _ = make_static_ode()
        rep = verify_reduction(static_map(), ode)
        assert rep.constraint_ok and rep.identity_ok
        assert all(rep.matches.values())

    def test_travel_at_zero_speed_equals_static(self):
        ode0, _ = make_travel_ode(0, None, None, None)
        rep = verify_reduction(travel_map(0), ode0)
        assert rep.constraint_ok and rep.identity_ok
        st, _ = make_static_ode()
        assert ode0.same_family(st)

    def test_scaling_derives_sigma_dependent_cubic(self):
        ode, smap = make_scaling_ode()
        rep = verify_reduction(smap, ode)
        assert rep.separation_ok and rep.constraint_ok
        # the derivable slots: quintic, sigma^2/4 linear part, inverse cube
        assert rep.matches["A"] and rep.matches["C_sigma2"] and rep.matches["D"]
        # the published constant cubic coefficient is wrong: truth is -delta*sigma
        assert not rep.matches["B_const"]
        assert rep.derived["B_sigma"] == to_sexpr(-delta)
        assert rep.discrepancies

    def test_branch_mismatch_rejected(self):
        ode, _ = make_static_ode()
        with pytest.raises(ExprError):
            verify_reduction(travel_map(), ode)

    def test_reports_byte_stable(self):
        ode, _ = make_travel_ode()
        r1 = verify_reduction(travel_map(), ode).as_dict()
        r2 = verify_reduction(travel_map(), ode).as_dict()
        assert r1 == r2


class TestMadelung:
    def _slices(self, n=101, rho=1.0, u=0.0):
        x = np.linspace(0.0, 10.0, n)
        rho_rows = np.full((3, n), rho)
        u_rows = np.full((3, n), u)
        return x, rho_rows, u_rows

    def test_constant_field_residual_one(self):
        x, rr, uu = self._slices()
        rep = madelung_reconstruct(x, rr, uu, dt=1e-3, delta_v=1.0)
        for conv in ("amplitude", "sqrt"):
            assert np.allclose(rep.q_center[conv], 1.0)
            assert rep.max_residual[conv] == pytest.approx(1.0, abs=1e-9)

    def test_rho_must_be_positive(self):
        x, rr, uu = self._slices()
        rr[1, 3] = 0.0
        with pytest.raises(ExprError):
            madelung_reconstruct(x, rr, uu, dt=1e-3, delta_v=1.0)

    def test_uniform_grid_required(self):
        x, rr, uu = self._slices()
        x = x.copy()
        x[5] += 1e-6
        with pytest.raises(ExprError):
            madelung_reconstruct(x, rr, uu, dt=1e-3, delta_v=1.0)

    def test_conventions_differ_on_nonconstant_field(self):
        n = 201
        x = np.linspace(0.0, 6.0, n)
        rho_row = 1.0 + 0.3 * np.sin(x)
        u_row = 0.1 * np.cos(x)
        rr = np.stack([rho_row] * 3)
        uu = np.stack([u_row] * 3)
        rep = madelung_reconstruct(x, rr, uu, dt=1e-3, delta_v=1.0)
        assert rep.max_residual["amplitude"] != rep.max_residual["sqrt"]
        assert rep.preferred in ("amplitude", "sqrt")
