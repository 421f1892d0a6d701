"""Consolidated paper-verification ledger and JSON/CSV/manifest output.

The ledger is a first-class artifact: this source reproduces a published
analysis whose printed tables and formulas contain several internal
inconsistencies, and the value of mechanizing it includes documenting
each mismatch next to the certified computation.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from . import symmetry
from .expr import Expr, gen_of, jet, param, to_sexpr
from .reductions import (
    madelung_reconstruct,
    make_scaling_ode,
    make_static_ode,
    make_travel_ode,
    static_map,
    stationary_solution,
    travel_map,
    verify_reduction,
)
from .singularity import (
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
from .scalars import ZETA8, ZETA8_CUBED


# ---------------------------------------------------------------------------
# ledger sections


def symmetry_section() -> dict:
    table = symmetry.commutator_table()
    adj = symmetry.adjoint_table()
    reps = []
    for name, alpha in (("X1", None), ("X2", None),
                        ("X1+aX2", param("a")), ("X3", None)):
        reps.append({"class": name,
                     "alpha": to_sexpr(alpha) if alpha is not None else None})
    return {
        "generators": {
            "X1": "d/dt",
            "X2": "d/dx",
            "X3": "2t*d/dt + (delta*x - t)*d/dx - rho*d/drho - (1 + u*delta)*d/du",
        },
        "invariance": symmetry.invariance_report(),
        "commutator_table": {
            f"{i},{j}": [to_sexpr(c) for c in table.entry(i, j).coords]
            for i in range(1, 4) for j in range(1, 4)
        },
        "structure_constants": {
            f"C^{k}_{i}{j}": to_sexpr(v)
            for (i, j, k), v in sorted(table.structure_constants.items())
        },
        "adjoint_table": {
            f"{i},{j}": [
                sorted(
                    ([to_sexpr(mu), to_sexpr(cf)] for mu, cf in cell.terms.items()),
                )
                for cell in adj.entry(i, j).coords
            ]
            for i in range(1, 4) for j in range(1, 4)
        },
        "optimal_system": reps,
        "table_discrepancies": [d.as_dict() for d in symmetry.table_discrepancies()],
    }


def _laurent_section() -> dict:
    sd = param("sdelta")
    alpha = param("alpha")
    c1 = param("c1")
    c2 = param("c2")
    delta = sd ** 2
    beta = 1 + alpha * delta
    cbar = c2 - alpha - c1 * delta
    c2_static = c2 / 2 - c1 * delta
    out = {}

    ode_t, _ = make_travel_ode()
    bal_t = [b for b in leading_order(ode_t) if b.exponent == Fraction(-1, 2)][0]
    ls_t = laurent_expand(ode_t, bal_t, order_n=6)
    got1, got2 = ls_t.paper_coeff(1), ls_t.paper_coeff(2)
    printed1 = -Expr.const(ZETA8_CUBED) * beta / (2 * sd ** 3)
    printed2 = -Expr.const(ZETA8) * (9 * beta ** 2 - 8 * cbar * delta) / (24 * sd ** 5)
    certified2 = -Expr.const(ZETA8) * (9 * beta ** 2 - 8 * cbar * delta ** 2) / (24 * sd ** 5)
    sd_gen = gen_of(sd)
    one = Expr.const(1)
    res_exp, _ = series_residual(ode_t, ls_t)
    out["travel"] = {
        "vrho1": {"computed": to_sexpr(got1), "published_matches": got1 == printed1},
        "vrho2": {
            "computed": to_sexpr(got2),
            "published_form": to_sexpr(printed2),
            "published_matches_symbolically": got2 == printed2,
            "published_matches_at_delta_1":
                got2.subs({sd_gen: one}) == printed2.subs({sd_gen: one}),
            "certified_delta_power_form_matches": got2 == certified2,
            "note": "published Cbar2 term carries delta^1; the certified "
                    "recursion forces delta^2 (equal at delta = 1)",
        },
        "residual_cancels_through":
            str(res_exp) if res_exp is not None else f">= {residual_floor(ls_t)}",
    }

    ode_s, _ = make_static_ode()
    bal_s = [b for b in leading_order(ode_s) if b.exponent == Fraction(-1, 2)][0]
    ls_s = laurent_expand(ode_s, bal_s, order_n=6)
    got2s = ls_s.paper_coeff(2)
    with_c2 = -Expr.const(ZETA8) * (9 - 8 * c2_static * delta ** 2) / (24 * sd ** 5)
    with_cbar = -Expr.const(ZETA8) * (9 - 8 * cbar * delta ** 2) / (24 * sd ** 5)
    out["static"] = {
        "vrho1": {"computed": to_sexpr(ls_s.paper_coeff(1)),
                  "published_matches":
                      ls_s.paper_coeff(1) == -Expr.const(ZETA8_CUBED) / (2 * sd ** 3)},
        "vrho2_constant_resolution": {
            "uses_static_C2": got2s == with_c2,
            "uses_travel_Cbar2": got2s == with_cbar,
            "note": "the published static vrho2 names Cbar2; the recursion "
                    "produces the static equation's own constant C2",
        },
    }
    return out


def reductions_section() -> dict:
    rho_x = jet("rho", ("x",))
    delta = param("delta")
    c1 = param("c1")
    u_derived_rho = c1 / rho_x - delta * rho_x / 2
    u_published_rho = -delta * rho_x ** 2 / 2 + c1 / rho_x

    ode_s, fi_s = make_static_ode()
    ode_t, _ = make_travel_ode()
    ode_sc, smap = make_scaling_ode()
    printed_gc10 = (jet("vrho", ("x",), ("x",)) ** 2 / 2
                    - delta / 8 * jet("vrho", ("x",)) ** 6
                    - jet("vrho", ("x",)) ** 4 / 4
                    + (param("c2") / 2 - delta * c1) * jet("vrho", ("x",)) ** 2 / 2
                    + c1 ** 2 / (2 * jet("vrho", ("x",)) ** 2))
    from .reductions import FirstIntegral

    printed_fi = FirstIntegral(printed_gc10, "c3", "vrho", "x")
    printed_back = printed_fi.on_shell_derivative(ode_s)
    return {
        "static": verify_reduction(static_map(), ode_s).as_dict(),
        "travel": verify_reduction(travel_map(), ode_t).as_dict(),
        "scaling": verify_reduction(smap, ode_sc).as_dict(),
        "stationary": stationary_solution(),
        "u_elimination": {
            "derived_rho_form": to_sexpr(u_derived_rho),
            "published_rho_form": to_sexpr(u_published_rho),
            "published_matches": u_derived_rho == u_published_rho,
            "note": "published form squares rho in the self-steepening term",
        },
        "first_integral": {
            "derived": to_sexpr(fi_s.energy),
            "derived_conserves": fi_s.on_shell_derivative(ode_s).is_zero(),
            "published_conserves": printed_back.is_zero(),
            "note": "published quadrature does not differentiate back to the "
                    "static equation (delta vs delta^2 and 1/4 vs 1/2)",
        },
    }


def ars_section() -> dict:
    out = {"ode": _laurent_section()}
    bal = system_leading_order()
    res = system_resonances(bal)
    rs = system_right_series(bal, order_n=4)
    out["system"] = {
        "balance": bal.as_dict(),
        "resonances": res.as_dict(),
        "resonance_multiset": [str(r) for r in res.roots_multiset()],
        "leading_comparison": system_leading_comparison(bal),
        "right_series": rs.as_dict(),
    }
    return out


def madelung_section() -> dict:
    # resample a travel-wave run into (rho, u) slices and measure both
    # amplitude conventions on the complex residual
    from .odesolve import integrate

    delta_v, alpha_v, c1_v, c2_v = 1.0, 1.0, 1.0, 4.0
    params = (0.75, -2 * (1 + alpha_v * delta_v),
              c2_v - alpha_v - delta_v * c1_v, 0.0, -c1_v ** 2)
    traj = integrate(params, 1.2, 0.0, (0.0, 30.0), rel_tol=1e-11, abs_tol=1e-13)
    n = 601
    x = np.linspace(5.0, 25.0, n)
    dt = 1e-4
    rows_r, rows_u = [], []
    for toff in (-dt, 0.0, dt):
        z = x - alpha_v * toff
        vr, _ = traj.eval_dense(z)
        rho_row = vr ** 2
        u_row = alpha_v + c1_v / vr ** 2 - delta_v * vr ** 2 / 2
        rows_r.append(rho_row)
        rows_u.append(u_row)
    rep = madelung_reconstruct(x, np.array(rows_r), np.array(rows_u), dt, delta_v)
    const = madelung_reconstruct(
        np.linspace(0, 10, 101), np.full((3, 101), 1.0), np.zeros((3, 101)),
        dt, delta_v)
    return {
        "travel_wave_resample": rep.as_dict(),
        "constant_field": const.as_dict(),
        "note": "the published transformation fixes neither the amplitude "
                "power nor a time-dependent phase origin; residuals for both "
                "conventions are reported, none asserted zero",
    }


def paper_ledger(include_madelung: bool = True) -> dict:
    """Every mechanized check against the published derivation, in one
    report: certification verdicts plus each printed-value discrepancy."""
    ledger = {
        "symmetries": symmetry_section(),
        "reductions": reductions_section(),
        "singularity": ars_section(),
    }
    if include_madelung:
        ledger["madelung"] = madelung_section()
    ledger["summary"] = _summarize(ledger)
    return ledger


def _summarize(ledger: dict) -> list:
    s = []
    inv = ledger["symmetries"]["invariance"]
    s.append(f"X1 invariance: {'ok' if inv['X1']['is_symmetry'] else 'FAILS'}")
    s.append(f"X2 invariance: {'ok' if inv['X2']['is_symmetry'] else 'FAILS'}")
    s.append("X3 (published) invariance: "
             + ("ok" if inv["X3"]["is_symmetry"] else
                "FAILS at symbolic delta; holds at delta = 1; corrected "
                "generator 2t*dt + (x - t/delta)*dx - rho*drho - (u + 1/delta)*du "
                "is an exact symmetry"))
    s.append(f"published-table cells disagreeing with the computed algebra: "
             f"{len(ledger['symmetries']['table_discrepancies'])}")
    red = ledger["reductions"]
    s.append("travel-wave reduction: "
             + ("verified exactly" if red["travel"]["identity_ok"] else "FAILS"))
    s.append("scaling reduction: cubic coefficient is sigma-dependent "
             "(-delta*sigma), not the published constant")
    lau = ledger["singularity"]["ode"]
    s.append("travel vrho1: "
             + ("matches published" if lau["travel"]["vrho1"]["published_matches"]
                else "DIFFERS"))
    s.append("travel vrho2: published form matches only at delta = 1 "
             "(delta-power typo)")
    sys_cmp = ledger["singularity"]["system"]["leading_comparison"]
    s.append("system leading coefficients: published values equal the "
             "squares of the computed ones"
             if sys_cmp["published_rho0_equals_computed_square"]
             else "system leading comparison: see details")
    return s


def ledger_text(ledger: dict) -> str:
    lines = ["paper-verification ledger", "=" * 25, ""]
    for item in ledger["summary"]:
        lines.append("- " + item)
    lines.append("")
    lines.append("table discrepancies:")
    for d in ledger["symmetries"]["table_discrepancies"]:
        lines.append(f"  {d['source']} {d['cell']}: computed {d['computed']} "
                     f"vs published {d['published']}")
    for branch in ("static", "travel", "scaling"):
        rep = ledger["reductions"][branch]
        lines.append("")
        lines.append(f"{branch} reduction: constraint_ok={rep['constraint_ok']} "
                     f"matches={rep['matches']}")
        for note in rep["discrepancies"]:
            lines.append(f"  note: {note}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# output writing with manifest


def format_float(v: float) -> str:
    return f"{v:.17g}"


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(format_float(float(v)) for v in row) + "\n")


class OutputWriter:
    """Writes artifacts under one directory and keeps the manifest."""

    def __init__(self, out_dir: str | Path, command: str, config: dict):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.config = config
        self.entries = []

    def _record(self, path: Path) -> None:
        data = path.read_bytes()
        self.entries.append({
            "path": path.name,
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data),
        })

    def write_text(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text)
        self._record(path)
        return path

    def write_json(self, name: str, payload: dict, kind: str | None = None) -> Path:
        from . import schemas

        if kind is not None:
            schemas.validate(kind, payload)
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True,
                                                allow_nan=False) + "\n")

    def write_csv(self, name: str, header: list, rows) -> Path:
        path = self.dir / name
        write_csv(path, header, rows)
        self._record(path)
        return path

    def finish(self) -> Path:
        manifest = {
            "command": self.command,
            "config": self.config,
            "outputs": sorted(self.entries, key=lambda e: e["path"]),
        }
        from . import schemas

        schemas.validate("manifest", manifest)
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def numeric_table(coeffs: dict, env: dict, dps: int = 30) -> dict:
    """High-precision complex renderings of exact coefficients."""
    out = {}
    with mpmath.workdps(dps):
        for k, e in coeffs.items():
            if isinstance(e, Expr):
                v = e.eval_mpc(env)
                out[str(k)] = [mpmath.nstr(v.real, dps), mpmath.nstr(v.imag, dps)]
            else:
                out[str(k)] = e
    return out
