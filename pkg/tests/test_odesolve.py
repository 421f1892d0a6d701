import math

import numpy as np
import pytest

from symlab.expr import ExprError
from symlab.odesolve import (
    PortraitSpec,
    backend_name,
    detect_period,
    equilibria,
    integrate,
    invariant_drift,
    phase_portrait,
    pinney_solve,
)
from symlab.reductions import make_static_ode, make_travel_ode

HARMONIC = (0.0, 0.0, 1.0, 0.0, 0.0)
STATIC_111 = (0.75, -2.0, 1.0, 0.0, -1.0)   # (delta, c1, C2) = (1, 1, 1)

# gc1-style scaling instance, parameters {c1, C2, (1+alpha*delta)} = {1, 1, 0.5};
# frozen after agreement of rel_tol 1e-11 and 1e-13 runs (Richardson check)
SCALING_GOLDEN = [
    (10.0, 0.4549862885065721, -0.42390158569321545),
    (20.0, 0.3139683463312515, -0.594771826578049),
    (30.0, 0.2705893557668378, -0.6201133957283281),
    (40.0, 0.24468430853714418, 0.1660147157831483),
]


class TestIntegrate:
    def test_harmonic_oscillator(self):
        traj = integrate(HARMONIC, 1.0, 0.0, (0, 2 * math.pi),
                         rel_tol=1e-10, abs_tol=1e-12)
        assert traj.status == "completed"
        assert abs(traj.R[-1] - 1.0) < 1e-8
        assert abs(traj.Rp[-1]) < 1e-8

    def test_scaling_instance_golden_samples(self):
        params = (0.75, -1.0, 1.0, 0.25, -1.0)
        traj = integrate(params, 1.0, 0.0, (0, 40), rel_tol=1e-10, abs_tol=1e-12)
        pts = [s for s, _, _ in SCALING_GOLDEN]
        R, Rp = traj.eval_dense(pts)
        for (s, r_ref, rp_ref), r, rp in zip(SCALING_GOLDEN, R, Rp):
            assert r == pytest.approx(r_ref, abs=5e-8)
            assert rp == pytest.approx(rp_ref, abs=5e-7)

    def test_pole_entry_zone(self):
        ode, _ = make_travel_ode(1, 1, 1, 1)
        env = {"delta": 1.0, "alpha": 1.0, "c1": 1.0, "c2": 1.0}
        traj = integrate(ode, 1e-6, 0.0, (0, 10), env=env)
        assert traj.status == "pole-approach"

    def test_running_pole_guard(self):
        # R'' = -1/R^3 (attractive): collapses onto the pole
        traj = integrate((0.0, 0.0, 0.0, 0.0, 1.0), 1.0, -0.5, (0, 10))
        assert traj.status == "pole-approach"
        assert abs(traj.R[-1]) < 1e-4

    def test_zero_seed_rejected(self):
        with pytest.raises(ValueError, match="pole"):
            integrate(STATIC_111, 0.0, 0.0, (0, 10))

    def test_tolerance_domain(self):
        with pytest.raises(ValueError):
            integrate(HARMONIC, 1.0, 0.0, (0, 1), rel_tol=1e-2)

    def test_monotone_sigma(self):
        traj = integrate(STATIC_111, 1.0, 0.0, (0, 20))
        assert np.all(np.diff(traj.sigma) > 0)

    def test_step_growth_bounded_by_controller(self):
        traj = integrate(STATIC_111, 1.0, 0.0, (0, 50))
        ratios = traj.h[1:] / traj.h[:-1]
        # growth is clamped at 10x per accepted step; shrink can compound
        # across rejections but stays far from pathological here
        assert np.max(ratios) <= 10.0 + 1e-9
        assert np.min(ratios) > 0.01

    def test_backends_agree(self):
        # ulp-level arithmetic differences shift the adaptive step sequence,
        # so backend agreement is at the tolerance level, not bitwise
        kws = dict(rel_tol=1e-10, abs_tol=1e-12)
        t_py = integrate(STATIC_111, 1.0, 0.0, (0, 10), backend="numpy", **kws)
        t_nb = integrate(STATIC_111, 1.0, 0.0, (0, 10), backend="numba", **kws)
        assert t_py.status == t_nb.status == "completed"
        assert abs(t_py.n_steps - t_nb.n_steps) <= max(3, t_py.n_steps // 20)
        s = np.linspace(0, 10, 101)
        R1, Rp1 = t_py.eval_dense(s)
        R2, Rp2 = t_nb.eval_dense(s)
        assert np.max(np.abs(R1 - R2)) < 1e-8
        assert np.max(np.abs(Rp1 - Rp2)) < 1e-8

    def test_env_flag_selects_backend(self, monkeypatch):
        monkeypatch.setenv("SYMLAB_BACKEND", "numpy")
        assert backend_name() == "numpy"
        monkeypatch.setenv("SYMLAB_BACKEND", "numba")
        assert backend_name() == "numba"

    def test_time_reversal(self):
        fw = integrate(STATIC_111, 1.0, 0.0, (0, 20), rel_tol=1e-10, abs_tol=1e-12)
        bw = integrate(STATIC_111, fw.R[-1], fw.Rp[-1], (20, 0),
                       rel_tol=1e-10, abs_tol=1e-12)
        assert abs(bw.R[-1] - 1.0) + abs(bw.Rp[-1]) < 1e-8

    def test_tolerance_order_scaling(self):
        # achieved end error vs mean step size across a tolerance ladder
        # should show the order-5 local/order-4 global step response
        ref = integrate(HARMONIC, 1.0, 0.0, (0, 10), rel_tol=1e-13, abs_tol=1e-14)
        errs, hs = [], []
        for rt in (1e-5, 1e-7, 1e-9):
            t = integrate(HARMONIC, 1.0, 0.0, (0, 10), rel_tol=rt, abs_tol=rt * 1e-2)
            errs.append(abs(t.R[-1] - ref.R[-1]) + abs(t.Rp[-1] - ref.Rp[-1]))
            hs.append(10.0 / t.n_steps)
        order = math.log(errs[0] / errs[2]) / math.log(hs[0] / hs[2])
        assert order >= 4.0

    def test_coarse_tolerance_larger_drift(self):
        env = {}
        fine = integrate(STATIC_111, 1.0, 0.0, (0, 50), rel_tol=1e-10, abs_tol=1e-12)
        coarse = integrate(STATIC_111, 1.0, 0.0, (0, 50), rel_tol=1e-4, abs_tol=1e-6)
        d_fine = invariant_drift(STATIC_111, fine)
        d_coarse = invariant_drift(STATIC_111, coarse)
        assert d_coarse > 100 * d_fine


class TestDrift:
    def test_static_instance_budget(self):
        ode, _ = make_static_ode(1, 1, 4)   # C2 = 1
        env = {"delta": 1.0, "c1": 1.0, "c2": 4.0}
        traj = integrate(ode, 1.0, 0.0, (0, 50), rel_tol=1e-10, abs_tol=1e-12,
                         env=env)
        assert invariant_drift(ode, traj, env) <= 1e-8

    def test_equilibrium_zero_drift(self):
        eq = max(equilibria(STATIC_111))
        traj = integrate(STATIC_111, eq, 0.0, (0, 20))
        assert invariant_drift(STATIC_111, traj) < 1e-12

    def test_nonautonomous_rejected(self):
        traj = integrate((0.75, -1.0, 1.0, 0.25, -1.0), 1.0, 0.0, (0, 5))
        with pytest.raises(ExprError):
            invariant_drift((0.75, -1.0, 1.0, 0.25, -1.0), traj)


class TestPeriod:
    def test_harmonic_period(self):
        traj = integrate(HARMONIC, 1.0, 0.0, (0, 30), rel_tol=1e-11, abs_tol=1e-13)
        rep = detect_period(traj)
        assert rep.detected
        assert rep.period == pytest.approx(2 * math.pi, abs=1e-8)

    def test_travel_xi_111(self):
        # {c1, Cbar2, (1+alpha delta)} = {1, 1, 1}: T frozen from a
        # rel_tol 1e-12 confirmation run
        params = (0.75, -2.0, 1.0, 0.0, -1.0)
        traj = integrate(params, 1.0, 0.0, (0, 40))
        rep = detect_period(traj)
        assert rep.detected and rep.return_error < 1e-6
        ref = integrate(params, 1.0, 0.0, (0, 40), rel_tol=1e-12, abs_tol=1e-14)
        ref_rep = detect_period(ref)
        assert rep.period == pytest.approx(ref_rep.period, abs=1e-7)

    def test_scaling_census(self):
        params = (0.75, -1.0, 1.0, 0.25, -1.0)
        traj = integrate(params, 1.0, 0.0, (0, 50))
        rep = detect_period(traj, autonomous=False)
        assert not rep.detected
        assert rep.sign_changes >= 10
        assert rep.bounded

    def test_too_few_sign_changes(self):
        traj = integrate(HARMONIC, 1.0, 0.0, (0, 2))
        with pytest.raises(ExprError):
            detect_period(traj)


class TestPortrait:
    def test_closed_orbits_near_center(self):
        eq = max(equilibria(STATIC_111))
        seeds = [(eq + 0.1, 0.0), (eq + 0.25, 0.0), (eq - 0.15, 0.0)]
        spec = PortraitSpec(STATIC_111, seeds, span=(0, 50))
        out = phase_portrait(spec)
        assert all(r.closed for r in out)
        assert all(r.return_error < 1e-6 for r in out)

    def test_fig2_regime_closed_orbits(self):
        # (1 + alpha*delta) = -1 with the same constants as the static panel
        params = (0.75, 2.0, 1.0, 0.0, -1.0)
        eqs = [r for r in equilibria(params) if r > 0]
        assert eqs
        seeds = [(r + 0.05, 0.0) for r in eqs]
        out = phase_portrait(PortraitSpec(params, seeds, span=(0, 60)))
        assert any(r.closed for r in out)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            PortraitSpec(STATIC_111, [])

    def test_pole_seed_rejected_in_spec(self):
        with pytest.raises(ValueError):
            PortraitSpec(STATIC_111, [(0.0, 1.0)])

    def test_seed_failures_not_fatal(self):
        ode, _ = make_travel_ode(1, 1, 1, 1)
        env = {"delta": 1.0, "alpha": 1.0, "c1": 1.0, "c2": 1.0}
        spec = PortraitSpec(ode, [(1e-5, 0.0), (1.5, 0.0)], span=(0, 30), env=env)
        out = phase_portrait(spec)
        assert out[0].failure is not None
        assert out[1].failure is None

    def test_reflection_symmetry(self):
        # autonomous flow: (R, R') -> (R, -R') with time reversal
        fw = integrate(STATIC_111, 1.3, 0.4, (0, 10), rel_tol=1e-11, abs_tol=1e-13)
        refl = integrate(STATIC_111, 1.3, -0.4, (0, 10), rel_tol=1e-11, abs_tol=1e-13)
        bw = integrate(STATIC_111, 1.3, 0.4, (0, -10), rel_tol=1e-11, abs_tol=1e-13)
        s = np.linspace(0.2, 9.8, 40)
        R1, Rp1 = refl.eval_dense(s)
        R2, Rp2 = bw.eval_dense(-s)
        assert np.max(np.abs(R1 - R2)) < 1e-8
        assert np.max(np.abs(Rp1 + Rp2)) < 1e-8


class TestPinney:
    def test_constant_frequency_equilibrium(self):
        res = pinney_solve(1.0, 1.0, (0, 10), 1.0, 0.0, 1.0, quad_coeff=0.0)
        assert np.max(np.abs(res.R_superposition - 1.0)) < 1e-10
        assert res.max_deviation < 1e-10

    def test_constant_frequency_closed_form(self):
        res = pinney_solve(1.0, 1.0, (0, 10), 2.0, 0.0, 0.5, quad_coeff=0.0)
        closed = np.sqrt(2 * np.cos(res.sigma) ** 2 + 0.5 * np.sin(res.sigma) ** 2)
        assert np.max(np.abs(res.R_superposition - closed)) < 1e-6
        assert res.max_deviation < 1e-6

    def test_quadratic_frequency_dual_route(self):
        res = pinney_solve(1.0, 1.0, (0, 10), 1.0, 0.0, 1.0)
        assert res.max_deviation < 1e-6
        assert res.wronskian < 1e-9

    def test_constraint_violation_reported(self):
        with pytest.raises(ValueError, match="constraint|violate"):
            pinney_solve(1.0, 1.0, (0, 5), 1.0, 0.0, 2.0)

    def test_pointwise_identity(self):
        # R^3 (R'' + w^2 R) - c1^2 -> 0 along the superposition solution;
        # R'' from the 4th-order five-point stencil
        res = pinney_solve(1.0, 1.0, (0, 10), 2.0, 0.0, 0.5, quad_coeff=0.0,
                           n_samples=2001, rel_tol=1e-13, abs_tol=1e-14)
        R = res.R_superposition
        h = res.sigma[1] - res.sigma[0]
        Rpp = (-R[4:] + 16 * R[3:-1] - 30 * R[2:-2] + 16 * R[1:-3]
               - R[:-4]) / (12 * h * h)
        ident = R[2:-2] ** 3 * (Rpp + 1.0 * R[2:-2]) - 1.0
        assert np.max(np.abs(ident)) < 1e-8


class TestDenseOutput:
    def test_interpolation_accuracy(self):
        traj = integrate(HARMONIC, 1.0, 0.0, (0, 10), rel_tol=1e-11, abs_tol=1e-13)
        s = np.linspace(0, 10, 257)
        R, Rp = traj.eval_dense(s)
        assert np.max(np.abs(R - np.cos(s))) < 1e-9
        assert np.max(np.abs(Rp + np.sin(s))) < 1e-9

    def test_out_of_span_rejected(self):
        traj = integrate(HARMONIC, 1.0, 0.0, (0, 5))
        with pytest.raises(ValueError):
            traj.eval_dense(6.0)
