"""Exhaustive ground truth for small instances.

Enumerates every total assignment; for each one the violated non-reserve soft
requirements form the unique minimal lift set for those kinds, so only soft
reservations (which interact through capacity sums) are subset-enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import Application, CostVector, Infrastructure, Solution, compare_costs, render_req
from .semantics import (
    check_capacities,
    check_placement,
    eval_link_requirement,
    eval_node_requirement,
    lift_cost,
)


class EnumerationLimitExceeded(Exception):
    pass


@dataclass(frozen=True)
class OracleResult:
    status: str  # "optimal" | "infeasible"
    cost: CostVector | None
    witness: Solution | None


def _req_holds(req, assignment, infra) -> bool:
    target, expr = req
    if isinstance(target, str):
        return eval_node_requirement(expr, assignment[target], infra)
    return eval_link_requirement(expr, assignment[target[0]], assignment[target[1]], infra)


def brute_force(infra: Infrastructure, app: Application, limit: int = 2_000_000) -> OracleResult:
    nodes = sorted(infra.nodes)
    services = sorted(app.services)
    soft_keys = sorted(app.soft_reqs, key=render_req)
    reserve_softs = [k for k in soft_keys if k[1].kind == "reserve" and isinstance(k[0], str)]
    plain_softs = [k for k in soft_keys if k[1].kind != "reserve"]
    hard_reserves = [
        k for k in app.hard_reqs if k[1].kind == "reserve" and isinstance(k[0], str)
    ]
    all_soft = frozenset(soft_keys)

    work = len(nodes) ** len(services) * (1 << len(reserve_softs)) if services else 1
    if work > limit:
        raise EnumerationLimitExceeded(f"{work} candidate solutions exceed limit {limit}")
    if not nodes and services:
        return OracleResult("infeasible", None, None)

    best_cost = None
    best = None
    for combo in itertools.product(nodes, repeat=len(services)):
        assignment = dict(zip(services, combo))
        # Hard requirements must hold even with every soft requirement lifted.
        if check_placement(infra, app, assignment, all_soft):
            continue
        forced = frozenset(k for k in plain_softs if not _req_holds(k, assignment, infra))
        for bits in range(1 << len(reserve_softs)):
            dropped = [reserve_softs[i] for i in range(len(reserve_softs)) if bits >> i & 1]
            active_reserves = hard_reserves + [
                k for k in reserve_softs if k not in dropped
            ]
            if check_capacities(assignment, active_reserves, infra):
                continue
            lifted = forced | frozenset(dropped)
            cost = lift_cost(app, lifted)
            if best_cost is None or compare_costs(cost, best_cost) < 0:
                best_cost = cost
                best = Solution(assignment, lifted, cost, optimal=True)
    if best is None:
        return OracleResult("infeasible", None, None)
    return OracleResult("optimal", best_cost, best)
