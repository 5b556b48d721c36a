"""Feasibility semantics: requirement evaluation, capacity checks, lift costs.

Missing-attribute policy (this surprises people, so read it twice):

* ``eq`` needs the attribute to be present with exactly the threshold value;
  an absent attribute violates it.
* ``neq`` is satisfied by absence.
* Ordered comparisons (lt/gt/lte/gte) and capacity checks are *vacuously
  satisfied* when the node or link does not carry the attribute at all.

This mirrors a constraint-based reading where a violation can only fire if a
matching attribute fact exists.  Mixed-type comparisons follow the standard
term order: every integer sorts below the symbolic constants false/true.

Two services placed on the same node communicate over an implicit self-link
with latency 0 and no other attributes; explicit self-link attributes, if
present, take precedence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .model import (
    Application,
    CostVector,
    Infrastructure,
    RequirementExpr,
    ReqTarget,
    is_bool,
    render_req,
    term_key,
    values_equal,
)

MISSING_ATTRIBUTE_EQ = "missing-attribute-eq"
VALUE_MISMATCH = "value-mismatch"
COMPARISON_FAILED = "comparison-failed"
CAPACITY_EXCEEDED = "capacity-exceeded"
PER_SERVICE_CAPACITY = "per-service-capacity"

_VIOLATED_WHEN = {
    # kind -> does value v violate threshold t?
    "lt": lambda v, t: term_key(v) >= term_key(t),
    "gt": lambda v, t: term_key(v) <= term_key(t),
    "lte": lambda v, t: term_key(v) > term_key(t),
    "gte": lambda v, t: term_key(v) < term_key(t),
}


@dataclass(frozen=True)
class Violation:
    """One broken requirement, with the node (or node pair) it broke on."""

    reason: str
    target: ReqTarget
    expr: RequirementExpr
    context: object  # hosting node, or (node, node) pair

    def describe(self) -> str:
        return f"{self.reason}: req({render_req((self.target, self.expr))}) at {self.context}"


def _comparison_reason(expr: RequirementExpr, value) -> str | None:
    """Reason the requirement is violated by ``value`` (None if satisfied).

    ``value`` is None when the attribute is absent.
    """
    if expr.kind == "eq":
        if value is None:
            return MISSING_ATTRIBUTE_EQ
        return None if values_equal(value, expr.threshold) else VALUE_MISMATCH
    if expr.kind == "neq":
        if value is not None and values_equal(value, expr.threshold):
            return VALUE_MISMATCH
        return None
    # Ordered kinds: vacuously satisfied on a missing attribute.
    if value is None:
        return None
    return COMPARISON_FAILED if _VIOLATED_WHEN[expr.kind](value, expr.threshold) else None


def eval_node_requirement(expr: RequirementExpr, node: str, infra: Infrastructure) -> bool:
    """True iff the non-reserve requirement holds for a service hosted on ``node``."""
    if expr.kind == "reserve":
        raise ValueError("reserve requirements are evaluated by check_capacities")
    return _comparison_reason(expr, infra.node_attr(node, expr.key)) is None


def effective_link_attr(infra: Infrastructure, src: str, dst: str, key: str):
    value = infra.link_attr(src, dst, key)
    if value is None and src == dst and key == "latency":
        return 0  # co-located services: no network hop
    return value


def eval_link_requirement(
    expr: RequirementExpr, src: str, dst: str, infra: Infrastructure
) -> bool:
    """True iff the non-reserve requirement holds on the (src, dst) link."""
    if expr.kind == "reserve":
        raise ValueError("reserve requirements are evaluated by check_capacities")
    return _comparison_reason(expr, effective_link_attr(infra, src, dst, expr.key)) is None


def check_capacities(
    assignment: Mapping, active_reserves: Iterable, infra: Infrastructure
) -> list:
    """Violations of reserve requirements under ``assignment``.

    ``active_reserves`` holds (target, expr) pairs with kind ``reserve``.
    Per-service violations fire when the host's attribute value is an integer
    below the reservation; aggregate violations fire, once per contributing
    reservation, when co-located reservations sum above the node's capacity.
    Nodes missing the attribute entirely trigger neither check.
    """
    violations = []
    by_node_key = {}
    for target, expr in active_reserves:
        if not isinstance(target, str):
            continue  # pair reservations have no capacity rule
        node = assignment[target]
        value = infra.node_attr(node, expr.key)
        if value is not None and not is_bool(value) and value < expr.threshold:
            violations.append(Violation(PER_SERVICE_CAPACITY, target, expr, node))
        by_node_key.setdefault((node, expr.key), []).append((target, expr))

    for (node, key), reqs in sorted(by_node_key.items()):
        capacity = infra.node_attr(node, key)
        if capacity is None or is_bool(capacity):
            continue
        total = sum(expr.threshold for _, expr in reqs)
        if total > capacity:
            for target, expr in reqs:
                violations.append(Violation(CAPACITY_EXCEEDED, target, expr, node))
    return violations


def check_placement(
    infra: Infrastructure,
    app: Application,
    assignment: Mapping,
    lifted: frozenset = frozenset(),
) -> list:
    """All violations of hard requirements and non-lifted soft requirements.

    An empty result means (assignment, lifted) is a feasible solution.
    """
    if set(assignment) != set(app.services):
        missing = sorted(set(app.services) - set(assignment))
        extra = sorted(set(assignment) - set(app.services))
        raise ValueError(f"assignment must cover services exactly (missing={missing}, extra={extra})")
    for node in assignment.values():
        if node not in infra.nodes:
            raise ValueError(f"assignment uses unknown node {node!r}")
    soft_keys = set(app.soft_reqs)
    if not set(lifted) <= soft_keys:
        raise ValueError("lifted set must be a subset of the soft requirements")

    active = sorted(
        (req for req in app.all_reqs() if req not in lifted),
        key=lambda req: render_req(req),
    )
    violations = []
    reserves = []
    for target, expr in active:
        if expr.kind == "reserve":
            reserves.append((target, expr))
            continue
        if isinstance(target, str):
            reason = _comparison_reason(expr, infra.node_attr(assignment[target], expr.key))
            context = assignment[target]
        else:
            src, dst = assignment[target[0]], assignment[target[1]]
            reason = _comparison_reason(expr, effective_link_attr(infra, src, dst, expr.key))
            context = (src, dst)
        if reason is not None:
            violations.append(Violation(reason, target, expr, context))
    violations.extend(check_capacities(assignment, reserves, infra))
    return violations


def lift_cost(app: Application, lifted: Iterable) -> CostVector:
    """Total cost of a lift set: per level, the sum of lifted weights."""
    levels = {}
    for req in lifted:
        cost = app.soft_reqs.get(req)
        if cost is None:
            raise ValueError(f"lifted requirement {render_req(req)} is not a soft requirement")
        levels[cost.level] = levels.get(cost.level, 0) + cost.weight
    return CostVector(levels)
