"""Command-line entry point.

Subcommands: symmetries, optimal, reduce, ars, ars-pde, simulate,
portrait, pinney, madelung, verify-paper, reproduce.  Every run writes
its artifacts plus a manifest with content hashes into --out; exit codes
are 0 (success), 2 (validation error), 3 (computational error such as a
pole stop or a failed compatibility condition), each failure with a
machine-readable error record.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import report, schemas, symmetry
from .expr import Expr, ExprError, gen_of, param, to_sexpr
from .odesolve import (
    PortraitSpec,
    detect_period,
    equilibria,
    integrate,
    invariant_drift,
    phase_portrait,
    pinney_solve,
)
from .reductions import (
    make_scaling_ode,
    make_static_ode,
    make_travel_ode,
    static_map,
    travel_map,
    verify_reduction,
)
from .singularity import (
    PainleveError,
    freeze_sigma,
    laurent_expand,
    leading_order,
    resonances,
    residual_floor,
    series_residual,
    system_leading_comparison,
    system_leading_order,
    system_resonances,
    system_right_series,
)
from .svgplot import line_plot

FIG_TRIPLES = [
    (Fraction(1), Fraction(1), Fraction(1, 2)),
    (Fraction(1), Fraction(1), Fraction(1)),
    (Fraction(1), Fraction(1), Fraction(3)),
    (Fraction(2), Fraction(0), Fraction(1, 2)),
    (Fraction(2), Fraction(0), Fraction(1)),
    (Fraction(2), Fraction(0), Fraction(3)),
    (Fraction(1, 10), Fraction(1, 10), Fraction(1, 2)),
    (Fraction(1, 10), Fraction(1, 10), Fraction(1)),
    (Fraction(1, 10), Fraction(1, 10), Fraction(3)),
]

PORTRAIT_SETS = [  # (delta, c1, C2) rows used for the portrait figures
    (Fraction(1), Fraction(1), Fraction(1)),
    (Fraction(2), Fraction(2), Fraction(0)),
    (Fraction(1), Fraction(1, 10), Fraction(1, 10)),
]


class ValidationError(ValueError):
    pass


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise ValidationError(f"not a rational number: {text!r}") from err


def _maybe_frac(value) -> Fraction | None:
    if value is None:
        return None
    if isinstance(value, Fraction):
        return value
    return _frac(str(value))


def _load_params(args) -> dict:
    out = {}
    if getattr(args, "params", None):
        path = Path(args.params)
        if not path.exists():
            raise ValidationError(f"params file not found: {path}")
        try:
            out.update(json.loads(path.read_text()))
        except json.JSONDecodeError as err:
            raise ValidationError(f"params file is not valid JSON: {err}") from err
    for key in ("delta", "alpha", "c1", "c2", "bcoef"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


def _config_of(args) -> dict:
    skip = {"func", "out", "json_stdout"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or callable(v):
            continue
        if isinstance(v, Fraction):
            v = str(v)
        cfg[k] = v
    return cfg


def _emit(args, writer, name, payload, kind):
    path = writer.write_json(name, payload, kind)
    if getattr(args, "json_stdout", False):
        print(path.read_text(), end="")
    return path


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_symmetries(args) -> int:
    writer = report.OutputWriter(args.out, "symmetries", _config_of(args))
    section = report.symmetry_section()
    delta_v = _maybe_frac(args.delta)
    if delta_v is not None:
        dgen = gen_of(param("delta"))
        bound = {}
        table = symmetry.commutator_table()
        for i in range(1, 4):
            for j in range(1, 4):
                coords = [c.subs({dgen: Expr.const(delta_v)})
                          for c in table.entry(i, j).coords]
                bound[f"{i},{j}"] = [to_sexpr(c) for c in coords]
        section["commutator_table_at_delta"] = bound
    _emit(args, writer, "symmetries.json", section, "symmetries")
    writer.finish()
    return 0


def cmd_optimal(args) -> int:
    writer = report.OutputWriter(args.out, "optimal", _config_of(args))
    coords = tuple(Expr.const(_frac(v)) for v in args.coords.split(","))
    if len(coords) != 3:
        raise ValidationError("--coords needs exactly three rationals a1,a2,a3")
    z = symmetry.AlgebraElement(coords)
    res = symmetry.classify_to_optimal(z)
    payload = {
        "input": [to_sexpr(c) for c in coords],
        "representative": res.representative,
        "alpha": to_sexpr(res.alpha) if res.alpha is not None else None,
        "certificate": [[m[0]] + [to_sexpr(x) if isinstance(x, Expr) else x
                                  for x in m[1:]] for m in res.certificate],
        "replay_verified": res.replay_verified,
    }
    _emit(args, writer, "optimal.json", payload, "optimal")
    writer.finish()
    return 0


def _build_ode(branch: str, params: dict):
    d = _maybe_frac(params.get("delta"))
    a = _maybe_frac(params.get("alpha"))
    k1 = _maybe_frac(params.get("c1"))
    k2 = _maybe_frac(params.get("c2"))
    b = _maybe_frac(params.get("bcoef"))
    if branch == "static":
        ode, fi = make_static_ode(d, k1, k2)
        return ode, fi, static_map()
    if branch == "travel":
        ode, fi = make_travel_ode(a, d, k1, k2)
        return ode, fi, travel_map(a)
    if branch == "scaling":
        ode, smap = make_scaling_ode(d, k1, k2, b)
        return ode, None, smap
    raise ValidationError(f"unknown branch {branch!r}")


def _ode_payload(ode) -> dict:
    return {
        "A": to_sexpr(ode.A), "B": to_sexpr(ode.B),
        "C_const": to_sexpr(ode.c_const), "C_quad": to_sexpr(ode.c_quad),
        "D": to_sexpr(ode.D), "provenance": ode.provenance,
    }


def cmd_reduce(args) -> int:
    writer = report.OutputWriter(args.out, "reduce", _config_of(args))
    params = _load_params(args)
    ode, fi, smap = _build_ode(args.branch, params)
    verification = verify_reduction(smap, ode).as_dict()
    payload = {
        "branch": args.branch,
        "ode": _ode_payload(ode),
        "first_integral": ({"energy": to_sexpr(fi.energy),
                            "constant": fi.constant_name,
                            "conserves": fi.on_shell_derivative(ode).is_zero()}
                           if fi is not None else None),
        "similarity_map": smap.description,
        "verification": verification,
    }
    _emit(args, writer, "reduce.json", payload, "reduce")
    writer.finish()
    return 0


def cmd_ars(args) -> int:
    writer = report.OutputWriter(args.out, "ars", _config_of(args))
    params = _load_params(args)
    branch = args.branch
    if branch == "scaling-frozen-sigma":
        base, _, _ = _build_ode("scaling", params)
        sigma0 = _maybe_frac(getattr(args, "sigma0", None))
        ode = freeze_sigma(base, Expr.const(sigma0) if sigma0 is not None else None)
    else:
        ode, _, _ = _build_ode(branch, params)
    bals = leading_order(ode)
    singular = [b for b in bals if b.roots]
    if not singular:
        raise ExprError("no balance with exact leading coefficients")
    bal = singular[0]
    rep = resonances(ode, bal, args.root_index)
    ls = laurent_expand(ode, bal, root_index=args.root_index, order_n=args.order)
    res_exp, res_coeff = series_residual(ode, ls)
    coeffs = {str(j): to_sexpr(ls.paper_coeff(j)) for j in range(args.order + 1)}
    numeric = {}
    delta_v = _maybe_frac(params.get("delta"))
    env = {}
    for key in ("alpha", "c1", "c2", "sigma0"):
        v = _maybe_frac(params.get(key) if key != "sigma0"
                        else getattr(args, "sigma0", None))
        if v is not None:
            env[key] = complex(float(v))
    if delta_v is not None and delta_v > 0:
        env["sdelta"] = complex(float(delta_v) ** 0.5)
    env["free_c"] = 0j  # numeric rendering pins the free slot to zero
    want = {f"vrho{j}": ls.paper_coeff(j) for j in range(args.order + 1)}
    missing = {g.token() for e in want.values() for g in e.gens()} - set(env)
    if not missing:
        numeric = report.numeric_table(want, env, dps=args.precision)
    payload = {
        "branch": branch,
        "balances": [b.as_dict() for b in bals],
        "selected_balance": bal.as_dict(),
        "chosen_root": ls.branch_root,
        "resonances": rep.as_dict(),
        "coefficients": coeffs,
        "coefficients_numeric": numeric,
        "free_coefficient_slots": {str(k): v for k, v in ls.free_symbols.items()},
        "residual": {
            "lowest_surviving_exponent": str(res_exp) if res_exp is not None else None,
            "guaranteed_floor": str(residual_floor(ls)),
            "certified": res_exp is None or res_exp >= residual_floor(ls),
        },
    }
    _emit(args, writer, "ars.json", payload, "ars")
    writer.finish()
    return 0


def cmd_ars_pde(args) -> int:
    writer = report.OutputWriter(args.out, "ars-pde", _config_of(args))
    bal = system_leading_order(args.root_index)
    res = system_resonances(bal)
    rs = system_right_series(bal, order_n=args.order)
    payload = {
        "balance": bal.as_dict(),
        "resonances": res.as_dict(),
        "resonance_multiset": [str(r) for r in res.roots_multiset()],
        "leading_comparison": system_leading_comparison(bal),
        "right_series": rs.as_dict(),
    }
    _emit(args, writer, "ars_pde.json", payload, "ars_pde")
    writer.finish()
    return 0


def _numeric_or_fail(params: dict, keys) -> dict:
    env = {}
    for k in keys:
        v = _maybe_frac(params.get(k))
        if v is None:
            raise ValidationError(f"--{k} is required (numeric) for this command")
        env[k] = float(v)
    return env


def _instance_from_args(args, params: dict):
    branch = args.branch
    if branch == "travel":
        env = _numeric_or_fail(params, ("delta", "alpha", "c1", "c2"))
        beta = 1 + env["alpha"] * env["delta"]
        cbar = env["c2"] - env["alpha"] - env["delta"] * env["c1"]
        return (0.75 * env["delta"] ** 2, -2 * beta, cbar, 0.0,
                -env["c1"] ** 2), env
    if branch == "static":
        env = _numeric_or_fail(params, ("delta", "c1", "c2"))
        c2c = env["c2"] / 2 - env["delta"] * env["c1"]
        return (0.75 * env["delta"] ** 2, -2.0, c2c, 0.0, -env["c1"] ** 2), env
    if branch == "scaling":
        env = _numeric_or_fail(params, ("delta", "c1", "c2", "bcoef"))
        c2c = env["c2"] / 2 - env["delta"] * env["c1"]
        return (0.75 * env["delta"] ** 2, -2 * env["bcoef"], c2c, 0.25,
                -env["c1"] ** 2), env
    raise ValidationError(f"unknown branch {branch!r}")


def cmd_simulate(args) -> int:
    writer = report.OutputWriter(args.out, "simulate", _config_of(args))
    params = _load_params(args)
    inst, env = _instance_from_args(args, params)
    if inst[4] != 0.0 and args.r0 == 0.0:
        raise ValidationError(
            "R0 = 0 sits on the inverse-cube pole of the vrho^-3 term (c1 != 0)")
    traj = integrate(inst, args.r0, args.rp0, (args.span[0], args.span[1]),
                     rel_tol=args.rtol, abs_tol=args.atol)
    s, R, Rp = traj.resample(args.samples)
    writer.write_csv("trajectory.csv", ["sigma", "R", "Rprime"], zip(s, R, Rp))
    autonomous = inst[3] == 0.0
    period = None
    if traj.status == "completed":
        try:
            period = detect_period(traj, autonomous=autonomous).as_dict()
        except ExprError as err:
            period = {"detected": False, "error": str(err)}
    drift = invariant_drift(inst, traj) if (autonomous and traj.status == "completed") else None
    if len(s) >= 2:
        writer.write_text("trajectory.svg", line_plot(
            [(s, R, "R"), (s, Rp, "R'")], title=f"{args.branch} profile",
            xlabel="similarity variable", ylabel="amplitude"))
    payload = {
        "params": {k: v for k, v in env.items()},
        "instance": list(inst),
        "status": traj.status,
        "steps": traj.n_steps,
        "rejected": traj.rejected,
        "samples_csv": "trajectory.csv",
        "period": period or {"detected": False},
        "drift": drift,
    }
    _emit(args, writer, "simulate.json", payload, "simulate")
    writer.finish()
    if traj.status != "completed":
        _error_record(args.out, "ComputationalError",
                      f"integration stopped early: {traj.status}")
        return 3
    return 0


def cmd_portrait(args) -> int:
    writer = report.OutputWriter(args.out, "portrait", _config_of(args))
    params = _load_params(args)
    inst, env = _instance_from_args(args, params)
    if args.seeds:
        seeds = []
        for part in args.seeds.split(";"):
            r, rp = part.split(",")
            seeds.append((float(_frac(r)), float(_frac(rp))))
    else:
        eqs = [r for r in equilibria(inst) if r > 0]
        if not eqs:
            raise ValidationError("no positive equilibrium to seed around; "
                                  "pass --seeds explicitly")
        seeds = [(r + off, 0.0) for r in eqs for off in (0.08, 0.2, 0.35)]
    spec = PortraitSpec(inst, seeds, span=(args.span[0], args.span[1]),
                        rel_tol=args.rtol, abs_tol=args.atol)
    results = phase_portrait(spec)
    series = []
    orbits = []
    for i, res in enumerate(results):
        entry = {"seed": list(res.seed), "closed": res.closed,
                 "return_time": res.return_time,
                 "return_error": res.return_error, "failure": res.failure}
        orbits.append(entry)
        if res.trajectory is not None and res.trajectory.n_steps > 0:
            s, R, Rp = res.trajectory.resample(args.samples)
            writer.write_csv(f"orbit_{i:02d}.csv", ["sigma", "R", "Rprime"],
                             zip(s, R, Rp))
            series.append((R, Rp, f"seed {i}"))
    if series:
        writer.write_text("portrait.svg", line_plot(
            series, title="phase portrait", xlabel="R", ylabel="R'"))
    payload = {"params": env, "instance": list(inst), "orbits": orbits}
    _emit(args, writer, "portrait.json", payload, "portrait")
    writer.finish()
    return 0


def cmd_pinney(args) -> int:
    writer = report.OutputWriter(args.out, "pinney", _config_of(args))
    res = pinney_solve(args.c2lin, args.c1, (args.span[0], args.span[1]),
                       args.a, args.b, args.c, quad_coeff=args.quad,
                       n_samples=args.samples)
    writer.write_csv("pinney.csv", ["sigma", "R_superposition", "R_direct"],
                     zip(res.sigma, res.R_superposition, res.R_direct))
    writer.write_text("pinney.svg", line_plot(
        [(res.sigma, res.R_superposition, "superposition"),
         (res.sigma, res.R_direct, "direct")],
        title="inverse-cube oscillator", xlabel="sigma", ylabel="R"))
    payload = {
        "max_deviation": res.max_deviation,
        "wronskian_drift": res.wronskian,
        "constraint_residual": res.constraint_residual,
        "samples_csv": "pinney.csv",
    }
    _emit(args, writer, "pinney.json", payload, "pinney")
    writer.finish()
    return 0


def cmd_madelung(args) -> int:
    writer = report.OutputWriter(args.out, "madelung", _config_of(args))
    section = report.madelung_section()
    payload = {
        "max_residual": section["travel_wave_resample"]["max_residual"],
        "preferred": section["travel_wave_resample"]["preferred"],
        "constant_field": section["constant_field"],
        "note": section["note"],
    }
    _emit(args, writer, "madelung.json", payload, "madelung")
    writer.finish()
    return 0


def cmd_verify_paper(args) -> int:
    writer = report.OutputWriter(args.out, "verify-paper", _config_of(args))
    ledger = report.paper_ledger()
    _emit(args, writer, "ledger.json", ledger, "ledger")
    writer.write_text("ledger.txt", report.ledger_text(ledger))
    writer.finish()
    return 0


def _run_cells(writer, family: str, span_end: float):
    cells = []
    for idx, (k1, cc, beta) in enumerate(FIG_TRIPLES):
        c1f, ccf, bf = float(k1), float(cc), float(beta)
        if family == "travel":
            inst = (0.75, -2 * bf, ccf, 0.0, -c1f ** 2)
        else:
            inst = (0.75, -2 * bf, ccf, 0.25, -c1f ** 2)
        traj = integrate(inst, 1.0, 0.0, (0.0, span_end),
                         rel_tol=1e-10, abs_tol=1e-12)
        cell = {"triple": [str(k1), str(cc), str(beta)], "status": traj.status}
        if traj.status == "completed":
            rep = detect_period(traj, autonomous=(family == "travel"))
            cell["sign_changes"] = rep.sign_changes
            cell["bounded"] = rep.bounded
            cell["oscillatory"] = rep.bounded and rep.sign_changes >= 10
            if family == "travel":
                cell["period"] = rep.period
                cell["return_error"] = rep.return_error
            s, R, Rp = traj.resample(600)
            tag = f"{family}_cell{idx}"
            writer.write_csv(f"{tag}.csv", ["sigma", "R", "Rprime"], zip(s, R, Rp))
            writer.write_text(f"{tag}.svg", line_plot(
                [(s, R, f"{{{k1},{cc},{beta}}}")],
                title=f"{family} profile {{{k1},{cc},{beta}}}",
                xlabel="similarity variable", ylabel="R"))
        cells.append(cell)
    return cells


def _run_portrait_figure(writer, tag: str, reverse_cubic: bool):
    panels = []
    for idx, (d, k1, cc) in enumerate(PORTRAIT_SETS):
        dv, k1v, ccv = float(d), float(k1), float(cc)
        B = 2.0 if reverse_cubic else -2.0
        inst = (0.75 * dv ** 2, B, ccv, 0.0, -k1v ** 2)
        eqs = [r for r in equilibria(inst) if r > 0]
        seeds = [(r + off, 0.0) for r in eqs for off in (0.08, 0.2, 0.35)]
        if not seeds:
            panels.append({"set": [str(d), str(k1), str(cc)],
                           "orbits": [], "note": "no positive equilibrium"})
            continue
        results = phase_portrait(PortraitSpec(inst, seeds, span=(0.0, 60.0)))
        series = []
        orbits = []
        for i, res in enumerate(results):
            orbits.append({"seed": list(res.seed), "closed": res.closed,
                           "return_error": res.return_error,
                           "failure": res.failure})
            if res.trajectory is not None and res.trajectory.n_steps > 0:
                s, R, Rp = res.trajectory.resample(500)
                series.append((R, Rp, ""))
        if series:
            writer.write_text(f"{tag}_panel{idx}.svg", line_plot(
                series, title=f"portrait {{{d},{k1},{cc}}}", xlabel="R",
                ylabel="R'"))
        panels.append({"set": [str(d), str(k1), str(cc)], "orbits": orbits})
    return panels


def cmd_reproduce(args) -> int:
    writer = report.OutputWriter(args.out, "reproduce", _config_of(args))
    which = args.which
    summary: dict = {"which": which}
    if which in ("fig3", "all"):
        summary["fig3"] = _run_cells(writer, "scaling", 50.0)
    if which in ("nm1", "all"):
        summary["nm1"] = _run_cells(writer, "travel", 50.0)
    if which in ("fig1", "all"):
        summary["fig1"] = _run_portrait_figure(writer, "fig1", reverse_cubic=False)
    if which in ("fig2", "all"):
        summary["fig2"] = _run_portrait_figure(writer, "fig2", reverse_cubic=True)
    writer.write_text("reproduce.json",
                      json.dumps(summary, indent=2, sort_keys=True) + "\n")
    writer.finish()
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch


def _error_record(out_dir, err_type: str, message: str) -> None:
    payload = {"error": {"type": err_type, "message": message}}
    try:
        schemas.validate("error", payload)
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "error.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError:
        pass
    print(json.dumps(payload), file=sys.stderr)


def _add_common(p, numeric: bool = False):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--json", dest="json_stdout", action="store_true",
                   help="also print the JSON report to stdout")
    p.add_argument("--params", default=None,
                   help="JSON file with parameter values")
    p.add_argument("--precision", type=int, default=30,
                   help="decimal digits for numeric renderings")


def _add_ode_params(p):
    for name in ("delta", "alpha", "c1", "c2", "bcoef"):
        p.add_argument(f"--{name}", default=None,
                       help=f"{name} (rational; symbolic when omitted)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="symlab",
        description="symbolic-numeric workbench for the derivative-NLS "
                    "hydrodynamic system: point symmetries, similarity "
                    "reductions, singularity analysis, reduced-ODE numerics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("symmetries", help="algebra, invariance, adjoint tables")
    _add_common(p)
    p.add_argument("--delta", default=None)
    p.set_defaults(func=cmd_symmetries)

    p = sub.add_parser("optimal", help="classify an element to the optimal system")
    _add_common(p)
    p.add_argument("--coords", required=True, help="a1,a2,a3 rationals")
    p.set_defaults(func=cmd_optimal)

    p = sub.add_parser("reduce", help="similarity reduction + verification")
    _add_common(p)
    p.add_argument("--branch", required=True,
                   choices=["static", "travel", "scaling"])
    _add_ode_params(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("ars", help="singularity analysis of a reduced instance")
    _add_common(p)
    p.add_argument("--branch", required=True,
                   choices=["static", "travel", "scaling-frozen-sigma"])
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--root-index", type=int, default=0)
    p.add_argument("--sigma0", default=None)
    _add_ode_params(p)
    p.set_defaults(func=cmd_ars)

    p = sub.add_parser("ars-pde", help="system-level singularity analysis")
    _add_common(p)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--root-index", type=int, default=0)
    p.set_defaults(func=cmd_ars_pde)

    p = sub.add_parser("simulate", help="integrate one instance")
    _add_common(p)
    p.add_argument("--branch", required=True,
                   choices=["static", "travel", "scaling"])
    _add_ode_params(p)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--rp0", type=float, default=0.0)
    p.add_argument("--span", type=float, nargs=2, default=(0.0, 50.0))
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--samples", type=int, default=800)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("portrait", help="phase portrait over a seed grid")
    _add_common(p)
    p.add_argument("--branch", required=True, choices=["static", "travel"])
    _add_ode_params(p)
    p.add_argument("--seeds", default=None, help='"r,rp;r,rp;..."')
    p.add_argument("--span", type=float, nargs=2, default=(0.0, 50.0))
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--samples", type=int, default=400)
    p.set_defaults(func=cmd_portrait)

    p = sub.add_parser("pinney", help="linear superposition cross-check")
    _add_common(p)
    p.add_argument("--c2lin", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--quad", type=float, default=0.25)
    p.add_argument("--span", type=float, nargs=2, default=(0.0, 10.0))
    p.add_argument("--samples", type=int, default=801)
    p.set_defaults(func=cmd_pinney)

    p = sub.add_parser("madelung", help="complex-field reconstruction residuals")
    _add_common(p)
    p.set_defaults(func=cmd_madelung)

    p = sub.add_parser("verify-paper", help="full consolidated ledger")
    _add_common(p)
    p.set_defaults(func=cmd_verify_paper)

    p = sub.add_parser("reproduce", help="figure-style artifact grids")
    _add_common(p)
    p.add_argument("--which", default="all",
                   choices=["fig1", "fig2", "fig3", "nm1", "all"])
    p.set_defaults(func=cmd_reproduce)

    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ValidationError, ValueError) as err:
        _error_record(args.out, type(err).__name__, str(err))
        return 2
    except (PainleveError, ExprError, ZeroDivisionError) as err:
        _error_record(args.out, type(err).__name__, str(err))
        return 3


if __name__ == "__main__":
    sys.exit(main())
