"""Stable JSON schema for solve results, shared by `solve` and `validate`.

Schema::

    {
      "status": "optimal" | "feasible" | "infeasible" | "unknown",
      "assignment": [[service, node], ...],
      "lifted": [[target, [kind, attr, threshold]], ...],
      "cost": {"<level>": total, ...},
      "incumbents": [[seconds, {"<level>": total, ...}], ...],
      "elapsed_s": seconds
    }

A pair target is encoded as a two-element list, a service target as a string.
"""

from __future__ import annotations

import json

from .model import CostVector, RequirementExpr, Solution, render_req
from .solver import SolveOutcome


def _encode_target(target):
    return list(target) if isinstance(target, tuple) else target


def _decode_target(raw):
    return tuple(raw) if isinstance(raw, list) else raw


def _encode_req(req):
    target, expr = req
    return [_encode_target(target), [expr.kind, expr.key, expr.threshold]]


def _decode_req(raw):
    target, (kind, key, threshold) = raw
    return (_decode_target(target), RequirementExpr(kind, key, threshold))


def _encode_cost(cost: CostVector) -> dict:
    return {str(level): total for level, total in sorted(cost.as_dict().items())}


def _decode_cost(raw: dict) -> CostVector:
    return CostVector({int(level): total for level, total in raw.items()})


def outcome_to_json(outcome: SolveOutcome) -> str:
    doc = {
        "status": outcome.status,
        "assignment": [],
        "lifted": [],
        "cost": {},
        "incumbents": [
            [round(t, 6), _encode_cost(c)] for t, c in outcome.incumbents
        ],
        "elapsed_s": round(outcome.elapsed, 6),
    }
    if outcome.best is not None:
        doc["assignment"] = sorted(
            [[s, n] for s, n in outcome.best.assignment.items()]
        )
        doc["lifted"] = sorted(
            (_encode_req(req) for req in outcome.best.lifted),
            key=lambda entry: json.dumps(entry),
        )
        doc["cost"] = _encode_cost(outcome.best.cost)
    return json.dumps(doc, indent=1)


def outcome_from_json(text: str) -> SolveOutcome:
    doc = json.loads(text)
    best = None
    if doc.get("assignment"):
        best = Solution(
            assignment={s: n for s, n in doc["assignment"]},
            lifted=frozenset(_decode_req(raw) for raw in doc["lifted"]),
            cost=_decode_cost(doc["cost"]),
            optimal=doc["status"] == "optimal",
        )
    incumbents = [(t, _decode_cost(c)) for t, c in doc.get("incumbents", [])]
    return SolveOutcome(doc["status"], best, incumbents, doc.get("elapsed_s", 0.0))


def describe_outcome(outcome: SolveOutcome) -> str:
    """Human-readable rendering used by the CLI's default output format."""
    lines = [f"status: {outcome.status}"]
    if outcome.best is not None:
        for s, n in sorted(outcome.best.assignment.items()):
            lines.append(f"deploy {s} -> {n}")
        for req in sorted(outcome.best.lifted, key=render_req):
            lines.append(f"lift {render_req(req)}")
        cost = outcome.best.cost.as_dict()
        if cost:
            for level, total in sorted(cost.items(), reverse=True):
                lines.append(f"cost level {level}: {total}")
        else:
            lines.append("cost: 0")
    lines.append(f"elapsed_s: {outcome.elapsed:.3f}")
    return "\n".join(lines)
