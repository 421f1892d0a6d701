"""Published JSON schemas for every report the CLI emits.

Each emitted document is validated against its schema before writing, so
the schema files double as the wire-format contract for downstream
consumers of the reports."""

from __future__ import annotations

import json
from importlib import resources

import jsonschema

_DEFS: dict = {
    "symmetries": {
        "type": "object",
        "required": ["generators", "invariance", "commutator_table",
                     "adjoint_table", "optimal_system", "table_discrepancies"],
        "properties": {
            "generators": {"type": "object"},
            "invariance": {"type": "object"},
            "commutator_table": {"type": "object"},
            "structure_constants": {"type": "object"},
            "adjoint_table": {"type": "object"},
            "optimal_system": {"type": "array"},
            "table_discrepancies": {"type": "array",
                                    "items": {"type": "object",
                                              "required": ["source", "cell",
                                                           "computed", "published"]}},
        },
    },
    "optimal": {
        "type": "object",
        "required": ["input", "representative", "certificate", "replay_verified"],
        "properties": {
            "representative": {"type": "string"},
            "alpha": {"type": ["string", "null"]},
            "certificate": {"type": "array"},
            "replay_verified": {"type": "boolean"},
        },
    },
    "reduce": {
        "type": "object",
        "required": ["branch", "ode", "verification"],
        "properties": {
            "branch": {"enum": ["static", "travel", "scaling"]},
            "ode": {"type": "object",
                    "required": ["A", "B", "C_const", "C_quad", "D"]},
            "first_integral": {"type": ["object", "null"]},
            "similarity_map": {"type": ["object", "null"]},
            "verification": {"type": "object"},
        },
    },
    "ars": {
        "type": "object",
        "required": ["branch", "balances", "selected_balance", "resonances",
                     "coefficients", "residual"],
        "properties": {
            "balances": {"type": "array"},
            "resonances": {"type": "object"},
            "coefficients": {"type": "object"},
            "coefficients_numeric": {"type": "object"},
            "residual": {"type": "object"},
        },
    },
    "ars_pde": {
        "type": "object",
        "required": ["balance", "resonances", "leading_comparison", "right_series"],
    },
    "simulate": {
        "type": "object",
        "required": ["params", "status", "samples_csv", "period"],
        "properties": {
            "status": {"type": "string"},
            "period": {"type": "object"},
            "drift": {"type": ["number", "null"]},
        },
    },
    "portrait": {
        "type": "object",
        "required": ["params", "orbits"],
        "properties": {
            "orbits": {"type": "array",
                       "items": {"type": "object",
                                 "required": ["seed", "closed"]}},
        },
    },
    "pinney": {
        "type": "object",
        "required": ["max_deviation", "wronskian_drift", "constraint_residual",
                     "samples_csv"],
    },
    "madelung": {
        "type": "object",
        "required": ["max_residual", "preferred"],
    },
    "ledger": {
        "type": "object",
        "required": ["symmetries", "reductions", "singularity", "summary"],
    },
    "manifest": {
        "type": "object",
        "required": ["command", "config", "outputs"],
        "properties": {
            "outputs": {"type": "array",
                        "items": {"type": "object",
                                  "required": ["path", "sha256", "bytes"]}},
        },
    },
    "error": {
        "type": "object",
        "required": ["error"],
        "properties": {"error": {"type": "object",
                                 "required": ["type", "message"]}},
    },
}


def schema(kind: str) -> dict:
    try:
        text = resources.files("symlab").joinpath(f"schemas/{kind}.schema.json")
        return json.loads(text.read_text())
    except (FileNotFoundError, ModuleNotFoundError, OSError):
        return _DEFS[kind]


def validate(kind: str, payload: dict) -> None:
    jsonschema.validate(payload, schema(kind))


def publish(dest_dir) -> None:
    """Write the schema files (used at build time and by `--help` docs)."""
    from pathlib import Path

    d = Path(dest_dir)
    d.mkdir(parents=True, exist_ok=True)
    for kind, doc in _DEFS.items():
        (d / f"{kind}.schema.json").write_text(json.dumps(doc, indent=2,
                                                          sort_keys=True) + "\n")
