"""Numerical lane: adaptive integration of the reduced-ODE family,
first-integral drift, phase portraits with closed-orbit detection,
periodicity reports, and the linear-superposition reference solver for
the inverse-cube oscillator equation.

The stepping kernel compiles with numba by default; set
SYMLAB_BACKEND=numpy (or "python") to run the plain interpreter build.
Both builds share one source (see `_dp54.py`) and are benchmarked
against each other in benchmarks/.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..expr import ExprError
from ..reductions import ReducedODE, energy_numeric
from . import _dp54
from ._dp54 import (
    P_TAB,
    STATUS_BLOWUP,
    STATUS_DONE,
    STATUS_MAXSTEPS,
    STATUS_POLE,
    STATUS_UNDERFLOW,
)

_STATUS_NAMES = {
    STATUS_DONE: "completed",
    STATUS_POLE: "pole-approach",
    STATUS_BLOWUP: "blow-up",
    STATUS_UNDERFLOW: "step-underflow",
    STATUS_MAXSTEPS: "max-steps",
}

_cores: dict = {}


def backend_name() -> str:
    env = os.environ.get("SYMLAB_BACKEND", "").strip().lower()
    if env in ("numpy", "python"):
        return "numpy"
    if env == "numba":
        return "numba"
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


def _get_core(name: str | None = None):
    name = name or backend_name()
    if name not in _cores:
        _cores[name] = _dp54.build_core(use_numba=(name == "numba"))
    return _cores[name]


@dataclass
class Trajectory:
    """Accepted-step samples plus per-step dense-output stages."""

    sigma: np.ndarray          # (n+1,) step endpoints, strictly monotone
    R: np.ndarray              # (n+1,)
    Rp: np.ndarray             # (n+1,)
    h: np.ndarray              # (n,) signed step sizes
    stages: np.ndarray         # (n, 7, 2)
    rejected: int
    status: str
    integrator: dict
    params: tuple              # (A, B, c0, cq, D)

    @property
    def n_steps(self) -> int:
        return len(self.h)

    def eval_dense(self, s):
        """Quartic dense-output interpolation of (R, R') at sample points."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = self.sigma[0], self.sigma[-1]
        direction = 1.0 if hi >= lo else -1.0
        ss = direction * s
        grid = direction * self.sigma
        if np.any(ss < grid[0] - 1e-12) or np.any(ss > grid[-1] + 1e-12):
            raise ValueError("dense evaluation outside the integrated span")
        idx = np.clip(np.searchsorted(grid[1:-1], ss, side="right"), 0,
                      max(self.n_steps - 1, 0))
        out_R = np.empty_like(ss)
        out_Rp = np.empty_like(ss)
        for m, (si, i) in enumerate(zip(s, idx)):
            hstep = self.h[i]
            theta = (si - self.sigma[i]) / hstep
            q = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
            w = P_TAB @ q          # (7,) stage weights
            y0 = np.array([self.R[i], self.Rp[i]])
            y = y0 + hstep * (self.stages[i].T @ w)
            out_R[m] = y[0]
            out_Rp[m] = y[1]
        return out_R, out_Rp

    def resample(self, n: int):
        if self.n_steps == 0:
            return (self.sigma.copy(), self.R.copy(), self.Rp.copy())
        s = np.linspace(self.sigma[0], self.sigma[-1], n)
        R, Rp = self.eval_dense(s)
        return s, R, Rp


def _numeric_params(ode, env: dict | None) -> tuple:
    if isinstance(ode, ReducedODE):
        return ode.numeric(env or {})
    return tuple(float(v) for v in ode)


def integrate(ode, R0: float, Rp0: float, span, rel_tol: float = 1e-10,
              abs_tol: float = 1e-12, env: dict | None = None,
              pole_guard: float = 1e-8, pole_entry_zone: float = 1e-4,
              blow_guard: float = 0.0, max_steps: int = 400_000,
              backend: str | None = None) -> Trajectory:
    """Adaptive embedded RK5(4) with PI step control and dense output.

    Stops early (with the reason recorded) when |R| falls under the pole
    guard while the inverse-cube term is active, when |R| exceeds the
    blow-up guard (if one is set), or on step-size underflow.  Starting
    inside the barrier zone (|R0| below `pole_entry_zone` with D != 0,
    where the inverse-cube term exceeds the other force terms by around
    twelve orders) reports a pole-approach immediately."""
    if not (1e-14 <= rel_tol <= 1e-3) or not (1e-14 <= abs_tol <= 1e-3):
        raise ValueError("tolerances must lie in [1e-14, 1e-3]")
    A, B, c0, cq, D = _numeric_params(ode, env)
    s0, s1 = float(span[0]), float(span[1])
    if D != 0.0 and R0 == 0.0:
        raise ValueError("R0 = 0 sits on the inverse-cube pole (D != 0)")
    if D != 0.0 and abs(R0) < pole_entry_zone:
        return Trajectory(
            sigma=np.array([s0]), R=np.array([float(R0)]),
            Rp=np.array([float(Rp0)]), h=np.empty(0),
            stages=np.empty((0, 7, 2)), rejected=0, status="pole-approach",
            integrator={"method": "dp54", "rel_tol": rel_tol,
                        "abs_tol": abs_tol, "backend": backend or backend_name()},
            params=(A, B, c0, cq, D),
        )
    sig = np.empty(max_steps + 1)
    ys = np.empty((max_steps + 1, 2))
    ks = np.empty((max_steps, 7, 2))
    hs = np.empty(max_steps)
    core = _get_core(backend)
    status, n_acc, n_rej, stop_s = core(
        A, B, c0, cq, D, float(R0), float(Rp0), s0, s1,
        float(rel_tol), float(abs_tol), float(pole_guard),
        float(blow_guard), max_steps, sig, ys, ks, hs)
    name = _STATUS_NAMES[status]
    if status == STATUS_UNDERFLOW:
        # collapsing onto the inverse-cube barrier shrinks the steps to
        # nothing before |R| reaches the running guard: that IS a pole stop
        if D != 0.0 and abs(ys[n_acc, 0]) < pole_entry_zone:
            name = "pole-approach"
        else:
            raise ExprError(f"step-size underflow at s = {stop_s!r}")
    if status == STATUS_MAXSTEPS:
        raise ExprError(f"step budget exhausted at s = {stop_s!r}")
    return Trajectory(
        sigma=sig[: n_acc + 1].copy(),
        R=ys[: n_acc + 1, 0].copy(),
        Rp=ys[: n_acc + 1, 1].copy(),
        h=hs[:n_acc].copy(),
        stages=ks[:n_acc].copy(),
        rejected=int(n_rej),
        status=name,
        integrator={"method": "dp54", "rel_tol": rel_tol, "abs_tol": abs_tol,
                    "backend": backend or backend_name()},
        params=(A, B, c0, cq, D),
    )


def invariant_drift(ode: ReducedODE, traj: Trajectory, env: dict | None = None) -> float:
    """max |E(s) - E(0)| / max(|E(0)|, 1) along the accepted samples."""
    if isinstance(ode, ReducedODE):
        if not ode.is_autonomous():
            raise ExprError("first-integral drift applies to autonomous instances")
        E = energy_numeric(ode, env or {})
    else:
        A, B, c0, cq, D = ode
        if cq != 0.0:
            raise ExprError("first-integral drift applies to autonomous instances")

        def E(R, Rp):
            R = np.asarray(R)
            Rp = np.asarray(Rp)
            return (0.5 * Rp ** 2 + A * R ** 6 / 6 + B * R ** 4 / 4
                    + 0.5 * c0 * R ** 2 - 0.5 * D / R ** 2)

    vals = E(traj.R, traj.Rp)
    e0 = vals[0]
    return float(np.max(np.abs(vals - e0)) / max(abs(e0), 1.0))


# ---------------------------------------------------------------------------
# periodicity


@dataclass
class PeriodReport:
    detected: bool
    period: float | None
    return_error: float | None
    sign_changes: int
    bounded: bool
    max_abs_R: float

    def as_dict(self):
        return {"detected": self.detected, "period": self.period,
                "return_error": self.return_error,
                "sign_changes": self.sign_changes,
                "bounded": self.bounded, "max_abs_R": self.max_abs_R}


def _rp_zero_crossings(traj: Trajectory) -> list:
    """Times where R' crosses zero, located on the dense output."""
    out = []
    for i in range(traj.n_steps):
        a, b = traj.Rp[i], traj.Rp[i + 1]
        if a == 0.0:
            out.append(traj.sigma[i])
            continue
        if a * b < 0.0:
            lo, hi = traj.sigma[i], traj.sigma[i + 1]
            fa = a
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = traj.eval_dense(mid)[1][0]
                if fa * fm <= 0.0:
                    hi = mid
                else:
                    lo = mid
                    fa = fm
            out.append(0.5 * (lo + hi))
    if traj.Rp[-1] == 0.0:
        out.append(traj.sigma[-1])
    return out


def detect_period(traj: Trajectory, return_tol: float = 1e-6,
                  autonomous: bool = True) -> PeriodReport:
    """Return to the initial phase-plane point via R' = 0 crossings.

    With R'(0) = 0 initial data the even-index crossings are the
    candidates; the first one matching R(0) within tolerance gives the
    period.  Non-autonomous instances get the oscillation census only."""
    sign_changes = int(np.sum(traj.Rp[:-1] * traj.Rp[1:] < 0.0))
    if sign_changes < 3:
        raise ExprError("need at least 3 sign changes of R' to look for a period")
    max_abs = float(np.max(np.abs(traj.R)))
    bounded = bool(np.isfinite(max_abs))
    if not autonomous:
        return PeriodReport(False, None, None, sign_changes, bounded, max_abs)
    R0, Rp0 = float(traj.R[0]), float(traj.Rp[0])
    crossings = _rp_zero_crossings(traj)
    cands = []
    for t in crossings:
        if t <= traj.sigma[0] + 1e-12:
            continue
        R_t, Rp_t = traj.eval_dense(t)
        err = abs(R_t[0] - R0) + abs(Rp_t[0] - Rp0)
        cands.append((t, err))
    for t, err in cands:
        if err < return_tol:
            return PeriodReport(True, float(t - traj.sigma[0]), float(err),
                                sign_changes, bounded, max_abs)
    best = min((err for _, err in cands), default=None)
    return PeriodReport(False, None, best, sign_changes, bounded, max_abs)


# ---------------------------------------------------------------------------
# phase portraits


@dataclass
class PortraitSpec:
    ode: object                  # ReducedODE or numeric 5-tuple
    seeds: list                  # (R0, Rp0) pairs
    span: tuple = (0.0, 50.0)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    env: dict = field(default_factory=dict)
    decimate: int = 400
    return_tol: float = 1e-6

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("portrait spec needs a nonempty seed grid")
        A, B, c0, cq, D = _numeric_params(self.ode, self.env)
        if D != 0.0 and any(r == 0.0 for r, _ in self.seeds):
            raise ValueError("seed at R = 0 sits on the inverse-cube pole")


@dataclass
class OrbitResult:
    seed: tuple
    trajectory: Trajectory | None
    closed: bool
    return_time: float | None
    return_error: float | None
    failure: str | None = None


def closed_orbit_return(traj: Trajectory, seed: tuple, tol: float) -> tuple:
    """(closed, t_return, error): distance minimum to the seed point after
    the trajectory has first left its neighbourhood."""
    s, R, Rp = traj.resample(max(8 * traj.n_steps, 64))
    scale = max(float(np.max(np.abs(R))), float(np.max(np.abs(Rp))), 1.0)
    d = np.hypot(R - seed[0], Rp - seed[1]) / scale
    escape = 0.05
    away = np.nonzero(d > escape)[0]
    if away.size == 0:
        return False, None, float(np.max(d))
    j0 = away[0]
    j = int(j0 + np.argmin(d[j0:]))
    lo = s[max(j - 1, 0)]
    hi = s[min(j + 1, len(s) - 1)]
    for _ in range(70):
        m1 = lo + (hi - lo) * 0.382
        m2 = lo + (hi - lo) * 0.618
        R1, Rp1 = traj.eval_dense(m1)
        R2, Rp2 = traj.eval_dense(m2)
        d1 = math.hypot(R1[0] - seed[0], Rp1[0] - seed[1])
        d2 = math.hypot(R2[0] - seed[0], Rp2[0] - seed[1])
        if d1 <= d2:
            hi = m2
        else:
            lo = m1
    t_best = 0.5 * (lo + hi)
    Rb, Rpb = traj.eval_dense(t_best)
    err = math.hypot(Rb[0] - seed[0], Rpb[0] - seed[1])
    return bool(err < tol), float(t_best - traj.sigma[0]), float(err)


def phase_portrait(spec: PortraitSpec) -> list:
    """Integrate every seed; per-seed failures (pole stops) are recorded,
    not fatal."""
    results = []
    for seed in spec.seeds:
        try:
            traj = integrate(spec.ode, seed[0], seed[1], spec.span,
                             rel_tol=spec.rel_tol, abs_tol=spec.abs_tol,
                             env=spec.env)
        except (ExprError, ValueError) as err:
            results.append(OrbitResult(seed, None, False, None, None, str(err)))
            continue
        if traj.status != "completed":
            results.append(OrbitResult(seed, traj, False, None, None, traj.status))
            continue
        closed, t_ret, err = closed_orbit_return(traj, seed, spec.return_tol)
        results.append(OrbitResult(seed, traj, closed, t_ret, err))
    return results


def equilibria(ode, env: dict | None = None) -> list:
    """Real equilibrium radii from the quartic in R^2 (inverse cube cleared)."""
    A, B, c0, cq, D = _numeric_params(ode, env)
    if cq != 0.0:
        raise ExprError("equilibria are defined for autonomous instances")
    coeffs = [A, B, c0, 0.0, D]
    while coeffs and coeffs[0] == 0.0:
        coeffs = coeffs[1:]
    out = []
    if len(coeffs) > 1:
        for y in np.roots(coeffs):
            if abs(y.imag) < 1e-10 and y.real > 1e-12:
                r = math.sqrt(y.real)
                out.extend([r, -r])
    if D == 0.0 and c0 == 0.0:
        out.append(0.0)
    return sorted(set(round(v, 14) for v in out))


# ---------------------------------------------------------------------------
# linear superposition for the inverse-cube oscillator


@dataclass
class PinneyResult:
    sigma: np.ndarray
    R_superposition: np.ndarray
    R_direct: np.ndarray
    max_deviation: float
    wronskian: float
    constraint_residual: float

    def as_dict(self):
        return {"max_deviation": self.max_deviation,
                "wronskian": self.wronskian,
                "constraint_residual": self.constraint_residual}


def pinney_solve(c2_lin: float, c1: float, span, a: float, b: float, c: float,
                 quad_coeff: float = 0.25, n_samples: int = 801,
                 rel_tol: float = 1e-11, abs_tol: float = 1e-13) -> PinneyResult:
    """Nonlinear superposition R = sqrt(a y1^2 + 2b y1 y2 + c y2^2) from two
    solutions of y'' + (c2_lin + quad_coeff s^2) y = 0 with unit Wronskian,
    cross-validated against direct integration of the inverse-cube
    oscillator from matching initial data."""
    if c1 == 0.0:
        raise ValueError("the superposition needs c1 != 0")
    linear = (0.0, 0.0, float(c2_lin), float(quad_coeff), 0.0)
    y1 = integrate(linear, 1.0, 0.0, span, rel_tol, abs_tol)
    y2 = integrate(linear, 0.0, 1.0, span, rel_tol, abs_tol)
    W = 1.0  # y1(0) y2'(0) - y1'(0) y2(0)
    constraint = a * c - b * b - (c1 * c1) / (W * W)
    if abs(constraint) > 1e-9 * max(1.0, abs(a * c)):
        raise ValueError(f"superposition constants violate a*c - b^2 = c1^2/W^2 "
                         f"(residual {constraint:.3e})")
    s = np.linspace(float(span[0]), float(span[1]), n_samples)
    y1v, y1p = y1.eval_dense(s)
    y2v, y2p = y2.eval_dense(s)
    R2 = a * y1v ** 2 + 2 * b * y1v * y2v + c * y2v ** 2
    if np.any(R2 <= 0):
        raise ValueError("superposition radicand R^2 <= 0 on the span")
    R_super = np.sqrt(R2)
    wr = y1v * y2p - y1p * y2v
    R0 = math.sqrt(a)
    Rp0 = b / math.sqrt(a)
    direct_params = (0.0, 0.0, float(c2_lin), float(quad_coeff), -float(c1) ** 2)
    direct = integrate(direct_params, R0, Rp0, span, rel_tol, abs_tol)
    R_direct, _ = direct.eval_dense(s)
    dev = float(np.max(np.abs(R_super - R_direct)))
    return PinneyResult(s, R_super, R_direct, dev,
                        float(np.max(np.abs(wr - W))), float(constraint))
