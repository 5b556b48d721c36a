"""Two native optimization strategies over placements.

* ``solve_bb``: depth-first branch-and-bound over service->node assignments.
  Naturally anytime: every improving incumbent is recorded (and optionally
  reported through a callback) as soon as it is found.
* ``solve_core_guided``: treats all soft requirements as hard, extracts a
  conflict set from each failed feasibility search, and explores lift sets in
  order of increasing cost (an implicit hitting-set loop).  It tends to emit
  nothing until it lands directly on an optimum.

Both strategies return the same optimal cost; every returned solution passes
:func:`certify`.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field

from .model import (
    Application,
    CostVector,
    Infrastructure,
    Solution,
    compare_costs,
    is_bool,
    render_req,
)
from .semantics import (
    check_placement,
    eval_link_requirement,
    eval_node_requirement,
    lift_cost,
)

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"

EXIT_CODES = {OPTIMAL: 0, FEASIBLE: 2, INFEASIBLE: 3, UNKNOWN: 4}

_MAX_RESERVE_GROUP = 20


@dataclass(frozen=True)
class SolveConfig:
    strategy: str = "bb"  # "bb" | "core"
    timeout: float = 180.0
    seed: int = 0
    emit_intermediate: bool = False

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.strategy not in ("bb", "core"):
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class SolveOutcome:
    status: str
    best: Solution | None
    incumbents: list = field(default_factory=list)  # (elapsed_s, CostVector)
    elapsed: float = 0.0


class _Deadline(Exception):
    pass


def _sum_costs(vectors) -> CostVector:
    levels = {}
    for v in vectors:
        for lvl, c in v.as_dict().items():
            levels[lvl] = levels.get(lvl, 0) + c
    return CostVector(levels)


class _Problem:
    """Search-ready index of an instance."""

    def __init__(self, infra: Infrastructure, app: Application, seed: int):
        self.infra = infra
        self.app = app
        self.nodes = sorted(infra.nodes)
        services = sorted(app.services)

        node_hard = {s: [] for s in services}
        node_soft = {s: [] for s in services}
        hard_reserves = {s: [] for s in services}
        soft_reserves = {s: [] for s in services}
        pair_reqs = []
        hard_count = {s: 0 for s in services}

        for target, expr in app.hard_reqs:
            if isinstance(target, str):
                hard_count[target] += 1
                (hard_reserves if expr.kind == "reserve" else node_hard)[target].append(expr)
            else:
                hard_count[target[0]] += 1
                hard_count[target[1]] += 1
                if expr.kind != "reserve":
                    pair_reqs.append((target, expr, True, (target, expr)))
        for (target, expr), _cost in sorted(
            app.soft_reqs.items(), key=lambda item: render_req(item[0])
        ):
            key = (target, expr)
            if isinstance(target, str):
                if expr.kind == "reserve":
                    soft_reserves[target].append((key, expr))
                else:
                    node_soft[target].append((key, expr))
            elif expr.kind != "reserve":
                pair_reqs.append((target, expr, False, key))

        self.hard_reserves = hard_reserves
        self.soft_reserves = soft_reserves
        self.weights = {key: cost for key, cost in app.soft_reqs.items()}

        # Most-constrained-first variable order.
        self.order = sorted(services, key=lambda s: (-hard_count[s], s))
        index = {s: i for i, s in enumerate(self.order)}

        # Pair requirements are checked when their later endpoint is assigned.
        self.pair_checks = {s: [] for s in services}
        for target, expr, hard, key in pair_reqs:
            later = max(target, key=lambda s: index[s])
            self.pair_checks[later].append((target, expr, hard, key))

        rng = random.Random(f"tiebreak/{seed}")
        self.candidates = {}
        self.forced = {}
        self.forced_cost = {}
        min_future = {}
        for s in services:
            salts = {x: rng.random() for x in self.nodes}
            feasible = []
            for x in self.nodes:
                if not all(eval_node_requirement(e, x, infra) for e in node_hard[s]):
                    continue
                if any(self._per_service_overflow(x, e) for e in hard_reserves[s]):
                    continue
                forced = [k for k, e in node_soft[s] if not eval_node_requirement(e, x, infra)]
                forced += [k for k, e in soft_reserves[s] if self._per_service_overflow(x, e)]
                self.forced[(s, x)] = tuple(forced)
                self.forced_cost[(s, x)] = lift_cost(app, forced)
                feasible.append(x)
            feasible.sort(key=_cost_sort_key(lambda x: self.forced_cost[(s, x)], salts))
            self.candidates[s] = feasible
            min_future[s] = (
                min((self.forced_cost[(s, x)] for x in feasible), default=None)
                if feasible
                else None
            )

        self.unsolvable_service = next(
            (s for s in self.order if not self.candidates[s]), None
        )

        # Admissible suffix bound: cheapest forced lift per unassigned service.
        self.suffix = [CostVector.zero()] * (len(self.order) + 1)
        for i in range(len(self.order) - 1, -1, -1):
            future = min_future[self.order[i]]
            if future is None:
                self.suffix[i] = CostVector.zero()
            else:
                self.suffix[i] = _sum_costs([self.suffix[i + 1], future])

    def _per_service_overflow(self, node: str, expr) -> bool:
        value = self.infra.node_attr(node, expr.key)
        return value is not None and not is_bool(value) and value < expr.threshold

    def capacity(self, node: str, key: str):
        value = self.infra.node_attr(node, key)
        if value is None or is_bool(value):
            return None
        return value


def _cost_sort_key(cost_of, salts):
    class _Key:
        __slots__ = ("x",)

        def __init__(self, x):
            self.x = x

        def __lt__(self, other):
            c = compare_costs(cost_of(self.x), cost_of(other.x))
            if c != 0:
                return c < 0
            return salts[self.x] < salts[other.x]

    return _Key


def _resolve_reserve_groups(problem: _Problem, soft_groups, hard_used, forced):
    """Cheapest additional lift set making every (node, resource) group fit.

    Groups are independent; within one group all subsets are enumerated.
    Returns (lifted keys, added CostVector) or None if some group cannot fit
    (cannot happen while hard reservations alone fit).
    """
    extra = []
    costs = []
    for (node, key), entries in sorted(soft_groups.items()):
        active = [(k, e) for k, e in entries if k not in forced]
        capacity = problem.capacity(node, key)
        if capacity is None:
            continue
        budget = capacity - hard_used.get((node, key), 0)
        if sum(e.threshold for _, e in active) <= budget:
            continue
        if len(active) > _MAX_RESERVE_GROUP:
            raise RuntimeError(
                f"reserve group of {len(active)} soft reservations on {node}/{key} "
                "exceeds the exact-resolution limit"
            )
        best = None
        for mask in range(1 << len(active)):
            kept = [active[i] for i in range(len(active)) if not mask >> i & 1]
            if sum(e.threshold for _, e in kept) > budget:
                continue
            dropped = [active[i][0] for i in range(len(active)) if mask >> i & 1]
            cost = lift_cost(problem.app, dropped)
            if best is None or compare_costs(cost, best[1]) < 0 or (
                compare_costs(cost, best[1]) == 0
                and sorted(map(render_req, dropped)) < sorted(map(render_req, best[0]))
            ):
                best = (dropped, cost)
        if best is None:
            return None
        extra.extend(best[0])
        costs.append(best[1])
    return extra, _sum_costs(costs)


def solve_bb(
    infra: Infrastructure,
    app: Application,
    config: SolveConfig,
    on_incumbent=None,
) -> SolveOutcome:
    """Branch-and-bound search for a cost-minimal (assignment, lift set)."""
    start = time.monotonic()
    deadline = start + config.timeout
    problem = _Problem(infra, app, config.seed)
    if problem.unsolvable_service is not None:
        return SolveOutcome(INFEASIBLE, None, [], time.monotonic() - start)

    order = problem.order
    assignment = {}
    forced = set()
    cost_levels = {}
    hard_used = {}
    soft_groups = {}
    incumbent = None
    incumbents = []

    def current_cost():
        return CostVector(cost_levels)

    def record(total_lifted, total_cost):
        nonlocal incumbent
        solution = Solution(dict(assignment), frozenset(total_lifted), total_cost)
        incumbent = solution
        elapsed = time.monotonic() - start
        incumbents.append((elapsed, total_cost))
        if on_incumbent is not None:
            on_incumbent(elapsed, solution)

    def descend(depth):
        if time.monotonic() > deadline:
            raise _Deadline
        if depth == len(order):
            resolved = _resolve_reserve_groups(problem, soft_groups, hard_used, forced)
            if resolved is None:
                return
            extra, extra_cost = resolved
            total_cost = _sum_costs([current_cost(), extra_cost])
            if incumbent is None or compare_costs(total_cost, incumbent.cost) < 0:
                record(set(forced) | set(extra), total_cost)
            return
        s = order[depth]
        for x in problem.candidates[s]:
            if time.monotonic() > deadline:
                raise _Deadline
            new_forced = [k for k in problem.forced[(s, x)] if k not in forced]
            feasible = True
            for target, expr, hard, key in problem.pair_checks[s]:
                a = x if target[0] == s else assignment[target[0]]
                b = x if target[1] == s else assignment[target[1]]
                if eval_link_requirement(expr, a, b, problem.infra):
                    continue
                if hard:
                    feasible = False
                    break
                if key not in forced:
                    new_forced.append(key)
            if not feasible:
                continue
            reserve_updates = []
            pending = {}
            for expr in problem.hard_reserves[s]:
                capacity = problem.capacity(x, expr.key)
                if capacity is None:
                    continue
                slot = (x, expr.key)
                used = hard_used.get(slot, 0) + pending.get(slot, 0) + expr.threshold
                if used > capacity:
                    feasible = False
                    break
                pending[slot] = pending.get(slot, 0) + expr.threshold
                reserve_updates.append((slot, expr.threshold))
            if not feasible:
                continue

            for k in new_forced:
                w = problem.weights[k]
                cost_levels[w.level] = cost_levels.get(w.level, 0) + w.weight
            bound = _sum_costs([current_cost(), problem.suffix[depth + 1]])
            if incumbent is None or compare_costs(bound, incumbent.cost) < 0:
                assignment[s] = x
                forced.update(new_forced)
                for slot, qty in reserve_updates:
                    hard_used[slot] = hard_used.get(slot, 0) + qty
                group_adds = []
                for key, expr in problem.soft_reserves[s]:
                    if key not in forced:
                        soft_groups.setdefault((x, expr.key), []).append((key, expr))
                        group_adds.append((x, expr.key))
                descend(depth + 1)
                for slot in group_adds:
                    soft_groups[slot].pop()
                for slot, qty in reserve_updates:
                    hard_used[slot] -= qty
                forced.difference_update(new_forced)
                del assignment[s]
            for k in new_forced:
                w = problem.weights[k]
                cost_levels[w.level] -= w.weight
                if not cost_levels[w.level]:
                    del cost_levels[w.level]

    timed_out = False
    try:
        descend(0)
    except _Deadline:
        timed_out = True
    elapsed = time.monotonic() - start

    if timed_out:
        if incumbent is not None:
            return SolveOutcome(FEASIBLE, incumbent, incumbents, elapsed)
        return SolveOutcome(UNKNOWN, None, incumbents, elapsed)
    if incumbent is None:
        return SolveOutcome(INFEASIBLE, None, incumbents, elapsed)
    best = Solution(incumbent.assignment, incumbent.lifted, incumbent.cost, optimal=True)
    return SolveOutcome(OPTIMAL, best, incumbents, elapsed)


def _first_feasible(problem: _Problem, active: frozenset, deadline: float):
    """Depth-first feasibility search with the softs in ``active`` hardened.

    Returns (assignment, None) on success, or (None, core) where ``core`` is a
    set of hardened softs that participated in the refutation.  An empty core
    means the hard requirements alone are unsatisfiable.
    """
    order = problem.order
    assignment = {}
    hard_used = {}
    soft_used = {}
    core = set()

    def descend(depth):
        if time.monotonic() > deadline:
            raise _Deadline
        if depth == len(order):
            return True
        s = order[depth]
        for x in problem.candidates[s]:
            clash = [k for k in problem.forced[(s, x)] if k in active]
            if clash:
                core.update(clash)
                continue
            feasible = True
            for target, expr, hard, key in problem.pair_checks[s]:
                if not hard and key not in active:
                    continue
                a = x if target[0] == s else assignment[target[0]]
                b = x if target[1] == s else assignment[target[1]]
                if eval_link_requirement(expr, a, b, problem.infra):
                    continue
                if hard:
                    feasible = False
                else:
                    core.add(key)
                    feasible = False
                break
            if not feasible:
                continue
            updates = []
            pending = {}
            for expr in problem.hard_reserves[s]:
                capacity = problem.capacity(x, expr.key)
                if capacity is None:
                    continue
                slot = (x, expr.key)
                if (
                    hard_used.get(slot, 0)
                    + pending.get(slot, 0)
                    + sum(e.threshold for _, e in soft_used.get(slot, []))
                    + expr.threshold
                    > capacity
                ):
                    core.update(k for k, _ in soft_used.get(slot, []))
                    feasible = False
                    break
                pending[slot] = pending.get(slot, 0) + expr.threshold
                updates.append((slot, expr.threshold, None))
            if feasible:
                pending_soft = {}
                for key, expr in problem.soft_reserves[s]:
                    if key not in active:
                        continue
                    capacity = problem.capacity(x, expr.key)
                    if capacity is None:
                        continue
                    slot = (x, expr.key)
                    group = soft_used.get(slot, [])
                    if (
                        hard_used.get(slot, 0)
                        + pending.get(slot, 0)
                        + sum(e.threshold for _, e in group)
                        + expr.threshold
                        > capacity
                    ):
                        core.add(key)
                        core.update(k for k, _ in group)
                        core.update(pending_soft.get(slot, ()))
                        feasible = False
                        break
                    pending[slot] = pending.get(slot, 0) + expr.threshold
                    pending_soft.setdefault(slot, []).append(key)
                    updates.append((slot, expr.threshold, (key, expr)))
            if not feasible:
                continue
            for slot, qty, soft in updates:
                if soft is None:
                    hard_used[slot] = hard_used.get(slot, 0) + qty
                else:
                    soft_used.setdefault(slot, []).append(soft)
            assignment[s] = x
            if descend(depth + 1):
                return True
            del assignment[s]
            for slot, qty, soft in updates:
                if soft is None:
                    hard_used[slot] -= qty
                else:
                    soft_used[slot].pop()
        return False

    if descend(0):
        return dict(assignment), None
    return None, core


def _minimize_core(problem: _Problem, core: set, deadline: float) -> set:
    """Greedy deletion-based shrinking of a conflict set."""
    core = set(core)
    for key in sorted(core, key=render_req):
        if time.monotonic() > deadline:
            break
        if key not in core:
            continue
        trial = frozenset(core - {key})
        assignment, sub = _first_feasible(problem, trial, deadline)
        if assignment is None:
            core = set(sub)
    return core


class _HeapItem:
    __slots__ = ("cost", "tie", "lifted")

    def __init__(self, cost, lifted):
        self.cost = cost
        self.lifted = lifted
        self.tie = tuple(sorted(map(render_req, lifted)))

    def __lt__(self, other):
        c = compare_costs(self.cost, other.cost)
        if c != 0:
            return c < 0
        return self.tie < other.tie


def solve_core_guided(
    infra: Infrastructure,
    app: Application,
    config: SolveConfig,
    on_incumbent=None,
) -> SolveOutcome:
    """Conflict-driven search over lift sets in order of increasing cost."""
    start = time.monotonic()
    deadline = start + config.timeout
    problem = _Problem(infra, app, config.seed)
    if problem.unsolvable_service is not None:
        return SolveOutcome(INFEASIBLE, None, [], time.monotonic() - start)

    heap = [_HeapItem(CostVector.zero(), frozenset())]
    visited = set()
    cores = []

    try:
        while heap:
            if time.monotonic() > deadline:
                raise _Deadline
            item = heapq.heappop(heap)
            lifted = item.lifted
            if lifted in visited:
                continue
            visited.add(lifted)

            unhit = next((c for c in cores if not c & lifted), None)
            if unhit is not None:
                for key in sorted(unhit, key=render_req):
                    grown = lifted | {key}
                    if grown not in visited:
                        heapq.heappush(heap, _HeapItem(lift_cost(app, grown), grown))
                continue

            active = frozenset(set(app.soft_reqs) - lifted)
            assignment, core = _first_feasible(problem, active, deadline)
            if assignment is not None:
                cost = lift_cost(app, lifted)
                solution = Solution(assignment, lifted, cost, optimal=True)
                elapsed = time.monotonic() - start
                if on_incumbent is not None:
                    on_incumbent(elapsed, solution)
                return SolveOutcome(OPTIMAL, solution, [(elapsed, cost)], elapsed)
            if not core:
                return SolveOutcome(INFEASIBLE, None, [], time.monotonic() - start)
            core = _minimize_core(problem, core, deadline)
            cores.append(frozenset(core))
            for key in sorted(core, key=render_req):
                grown = lifted | {key}
                if grown not in visited:
                    heapq.heappush(heap, _HeapItem(lift_cost(app, grown), grown))
    except _Deadline:
        return SolveOutcome(UNKNOWN, None, [], time.monotonic() - start)

    # Heap exhausted without a feasible lift set: hard requirements conflict.
    return SolveOutcome(INFEASIBLE, None, [], time.monotonic() - start)


def solve(infra, app, config: SolveConfig, on_incumbent=None) -> SolveOutcome:
    if config.strategy == "bb":
        return solve_bb(infra, app, config, on_incumbent)
    return solve_core_guided(infra, app, config, on_incumbent)


def certify(infra: Infrastructure, app: Application, solution: Solution) -> bool:
    """Final gate: the solution is feasible and its cost vector is honest."""
    try:
        violations = check_placement(infra, app, solution.assignment, solution.lifted)
    except (ValueError, KeyError):
        return False
    if violations:
        return False
    return lift_cost(app, solution.lifted) == solution.cost
