"""symlab: symbolic-numeric workbench for a derivative-NLS hydrodynamic
system -- point symmetries and their algebra, similarity reductions to a
quintic ODE family, movable-singularity analysis, and numerics for the
reduced profiles, with a consolidated ledger of every mismatch between
the computed results and the published tables and formulas."""

__version__ = "0.1.0"

from .expr import Expr, ExprError, Jet, Sym, indep, jet, param  # noqa: F401
from .reductions import (  # noqa: F401
    ReducedODE,
    make_scaling_ode,
    make_static_ode,
    make_travel_ode,
)
