"""Exact contextuality measures for pairwise-measured binary systems."""

from .rational import LinearExpr, Rational, parse_rational
from .lp import LpProblem, LpResult, LpStatus, lp_feasible, lp_solve
from .scenario import (ContextualVariableId, ExpectationVector, Kind, ObservedTable, Scenario,
                       check_no_signaling, epr_scenario, from_expectations, lg_scenario,
                       to_expectations)
from .files import dump_scenario, load_scenario, parse_scenario
from .measures import (delta_min_formula, delta_min_lp, gamma_min_formula, gamma_min_lp,
                       proper_jpd_exists, s_chsh, s_lg, s_signed_max)
from .polyhedra import (ConstraintSystem, SignedMaxSpec, expand_signed_max, fm_eliminate,
                        remove_redundant, systems_equivalent)

__version__ = "0.1.0"
