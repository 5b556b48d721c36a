"""Constraint-relaxed cloud-edge application placement.

Map every service of an application onto an infrastructure node so that all
hard requirements hold; when no fully satisfying placement exists, relax a
minimum-cost, priority-ordered set of soft requirements instead of failing.
"""

from .facts import ParseError, parse_facts, serialize_facts
from .model import (
    Application,
    CostVector,
    Infrastructure,
    LiftCost,
    RequirementExpr,
    Solution,
    compare_costs,
)
from .oracle import OracleResult, brute_force
from .semantics import Violation, check_placement, lift_cost
from .solver import (
    SolveConfig,
    SolveOutcome,
    certify,
    solve,
    solve_bb,
    solve_core_guided,
)

__all__ = [
    "Application",
    "CostVector",
    "Infrastructure",
    "LiftCost",
    "OracleResult",
    "ParseError",
    "RequirementExpr",
    "Solution",
    "SolveConfig",
    "SolveOutcome",
    "Violation",
    "brute_force",
    "certify",
    "check_placement",
    "compare_costs",
    "lift_cost",
    "parse_facts",
    "serialize_facts",
    "solve",
    "solve_bb",
    "solve_core_guided",
]

__version__ = "0.1.0"
