"""Core domain types: infrastructures, applications, requirements, costs, solutions.

Attribute values are either booleans or signed integers.  Quantities that are
fractional in the real world are stored pre-scaled (PUE 2.5 -> 25, availability
99.99% -> 9999); all arithmetic stays in integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

AttrValue = Union[bool, int]
ReqTarget = Union[str, tuple]  # service id, or (service, service) pair

ORDERED_KINDS = ("lt", "gt", "lte", "gte")
KINDS = ORDERED_KINDS + ("eq", "neq", "reserve")


def is_bool(v: AttrValue) -> bool:
    # bool is a subclass of int in Python; attribute values true/1 are distinct.
    return type(v) is bool


def values_equal(a: AttrValue, b: AttrValue) -> bool:
    """Type-exact equality: true != 1."""
    return is_bool(a) == is_bool(b) and a == b


def term_key(v: AttrValue):
    """Total order over attribute values: all integers sort below the symbolic
    constants false/true, mirroring the term ordering of ASP grounders."""
    if is_bool(v):
        return (1, "true" if v else "false")
    return (0, v)


def term_lt(a: AttrValue, b: AttrValue) -> bool:
    return term_key(a) < term_key(b)


@dataclass(frozen=True)
class RequirementExpr:
    """One comparison or reservation over a named attribute."""

    kind: str
    key: str
    threshold: AttrValue

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown requirement kind {self.kind!r}")
        if self.kind == "reserve":
            if is_bool(self.threshold) or not isinstance(self.threshold, int) or self.threshold < 0:
                raise ValueError("reserve threshold must be a non-negative integer")
        elif self.kind in ORDERED_KINDS:
            if is_bool(self.threshold) or not isinstance(self.threshold, int):
                raise ValueError(f"{self.kind} threshold must be an integer")

    def render(self) -> str:
        return f'{self.kind}("{self.key}",{render_value(self.threshold)})'


# A requirement as attached to a target: the unit of lifting.
Req = tuple  # (ReqTarget, RequirementExpr)


@dataclass(frozen=True)
class LiftCost:
    """Price of lifting one soft requirement: weight paid at a priority level."""

    weight: int
    level: int

    def __post_init__(self):
        if self.weight < 0 or self.level < 0:
            raise ValueError("weight and level must be non-negative")


@dataclass(frozen=True)
class Infrastructure:
    """Attributed directed graph of compute nodes and links."""

    nodes: frozenset
    node_attrs: Mapping  # (node, key) -> AttrValue
    link_attrs: Mapping  # (src, dst, key) -> AttrValue

    def node_attr(self, node: str, key: str):
        return self.node_attrs.get((node, key))

    def link_attr(self, src: str, dst: str, key: str):
        return self.link_attrs.get((src, dst, key))


@dataclass(frozen=True)
class Application:
    """Attributed directed graph of services, dependencies and requirements.

    ``soft_reqs`` maps each soft (target, expr) to its lift cost; hard
    requirements are never relaxable.
    """

    services: frozenset
    dependencies: frozenset  # of (service, service)
    hard_reqs: frozenset  # of (target, expr)
    soft_reqs: Mapping  # (target, expr) -> LiftCost

    def all_reqs(self) -> Iterable:
        yield from self.hard_reqs
        yield from self.soft_reqs


class CostVector:
    """Per-priority-level totals, compared lexicographically from the highest
    level down (higher level = higher priority).  Absent levels count as 0."""

    __slots__ = ("_levels",)

    def __init__(self, levels: Mapping | None = None):
        cleaned = {}
        for lvl, total in (levels or {}).items():
            if total < 0:
                raise ValueError("cost totals must be non-negative")
            if total:
                cleaned[int(lvl)] = int(total)
        object.__setattr__(self, "_levels", cleaned)

    @staticmethod
    def zero() -> "CostVector":
        return CostVector()

    def level(self, lvl: int) -> int:
        return self._levels.get(lvl, 0)

    def as_dict(self) -> dict:
        return dict(self._levels)

    @property
    def is_zero(self) -> bool:
        return not self._levels

    def add(self, weight: int, level: int) -> "CostVector":
        merged = dict(self._levels)
        merged[level] = merged.get(level, 0) + weight
        return CostVector(merged)

    def compare(self, other: "CostVector") -> int:
        for lvl in sorted(set(self._levels) | set(other._levels), reverse=True):
            a, b = self.level(lvl), other.level(lvl)
            if a != b:
                return -1 if a < b else 1
        return 0

    def __eq__(self, other):
        return isinstance(other, CostVector) and self._levels == other._levels

    def __hash__(self):
        return hash(frozenset(self._levels.items()))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __repr__(self):
        inner = ", ".join(f"L{l}: {c}" for l, c in sorted(self._levels.items(), reverse=True))
        return "{" + inner + "}"


def compare_costs(a: CostVector, b: CostVector) -> int:
    """-1, 0 or 1 as ``a`` is cheaper than, equal to, or dearer than ``b``."""
    return a.compare(b)


@dataclass(frozen=True)
class Solution:
    """A total service->node assignment plus the soft requirements given up."""

    assignment: Mapping  # service -> node
    lifted: frozenset  # of (target, expr)
    cost: CostVector
    optimal: bool = False


def render_value(v: AttrValue) -> str:
    if is_bool(v):
        return "true" if v else "false"
    return str(v)


def render_target(target: ReqTarget) -> str:
    if isinstance(target, tuple):
        return f'("{target[0]}","{target[1]}")'
    return f'"{target}"'


def render_req(req: Req) -> str:
    target, expr = req
    return f"{render_target(target)},{expr.render()}"
