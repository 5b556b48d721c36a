"""Parser and serializer for the ASP-style fact format describing instances.

The accepted predicates are node/1, link/2, node_attr/3, link_attr/4,
service/1, dependency/2, hreq/2, sreq/2, sreq/3 and violation_cost/3.
String constants are double-quoted, booleans are the bare constants
``true``/``false``, and ``%`` starts a comment running to end of line.

Soft requirements are normalized to an internal (weight, level) record:
``sreq(S,E)`` means weight 1 at level 1, ``sreq(S,E,P)`` weight 1 at level P,
and a matching ``violation_cost(S,E,(C,L))`` overrides both.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple

from .model import (
    Application,
    AttrValue,
    Infrastructure,
    LiftCost,
    RequirementExpr,
    is_bool,
    render_target,
    render_value,
    values_equal,
)

PREDICATE_ARITIES = {
    "node": (1,),
    "link": (2,),
    "node_attr": (3,),
    "link_attr": (4,),
    "service": (1,),
    "dependency": (2,),
    "hreq": (2,),
    "sreq": (2, 3),
    "violation_cost": (3,),
}


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class _Tok(NamedTuple):
    kind: str
    value: object
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<int>-?\d+)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[().,])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        kind = m.lastgroup
        raw = m.group()
        if kind == "string":
            yield _Tok("string", raw[1:-1], line, col)
        elif kind == "int":
            yield _Tok("int", int(raw), line, col)
        elif kind == "name":
            yield _Tok("name", raw, line, col)
        elif kind == "punct":
            yield _Tok(raw, raw, line, col)
        # whitespace / comments are skipped, but keep line accounting
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            line_start = pos + raw.rindex("\n") + 1
        pos = m.end()
    yield _Tok("eof", None, line, pos - line_start + 1)


@dataclass(frozen=True)
class Fn:
    """A function term such as lte("latency",50)."""

    name: str
    args: tuple


class _Parser:
    def __init__(self, text: str):
        self._toks = list(_tokenize(text))
        self._i = 0

    def _peek(self) -> _Tok:
        return self._toks[self._i]

    def _next(self) -> _Tok:
        tok = self._toks[self._i]
        self._i += 1
        return tok

    def _expect(self, kind: str) -> _Tok:
        tok = self._next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.value!r}", tok.line, tok.col)
        return tok

    def facts(self):
        """Yield (predicate, args, line, col) tuples."""
        while self._peek().kind != "eof":
            head = self._expect("name")
            self._expect("(")
            args = self._args()
            self._expect(".")
            yield head.value, args, head.line, head.col

    def _args(self) -> tuple:
        args = [self._term()]
        while self._peek().kind == ",":
            self._next()
            args.append(self._term())
        self._expect(")")
        return tuple(args)

    def _term(self):
        tok = self._next()
        if tok.kind == "string":
            return tok.value
        if tok.kind == "int":
            return tok.value
        if tok.kind == "name":
            if tok.value == "true":
                return True
            if tok.value == "false":
                return False
            if self._peek().kind == "(":
                self._next()
                return Fn(tok.value, self._args())
            raise ParseError(f"unexpected constant {tok.value!r}", tok.line, tok.col)
        if tok.kind == "(":
            return self._args()
        raise ParseError(f"unexpected token {tok.value!r}", tok.line, tok.col)


def _as_expr(term, line, col) -> RequirementExpr:
    if not isinstance(term, Fn):
        raise ParseError("requirement expression expected", line, col)
    if term.name not in ("lt", "gt", "lte", "gte", "eq", "neq", "reserve"):
        raise ParseError(f"unknown requirement function {term.name!r}", line, col)
    if len(term.args) != 2:
        raise ParseError(f"requirement {term.name!r} takes 2 arguments", line, col)
    key, value = term.args
    if not isinstance(key, str):
        raise ParseError("requirement attribute must be a quoted string", line, col)
    if isinstance(value, (Fn, tuple)):
        raise ParseError("requirement threshold must be an integer or boolean", line, col)
    try:
        return RequirementExpr(term.name, key, value)
    except ValueError as exc:
        raise ParseError(str(exc), line, col) from None


def _as_target(term, services, line, col):
    if isinstance(term, str):
        if term not in services:
            raise ParseError(f"requirement references undeclared service {term!r}", line, col)
        return term
    if isinstance(term, tuple) and len(term) == 2 and all(isinstance(s, str) for s in term):
        a, b = term
        for s in (a, b):
            if s not in services:
                raise ParseError(f"requirement references undeclared service {s!r}", line, col)
        if a == b:
            raise ParseError(f"pair requirement targets service {a!r} twice", line, col)
        return (a, b)
    raise ParseError("requirement target must be a service or a service pair", line, col)


def parse_facts(text: str, strict_costs: bool = False):
    """Parse fact text into a normalized (Infrastructure, Application) pair.

    With ``strict_costs`` soft requirements that carry no violation_cost fact
    get weight 0 instead of the default weight 1, so lifting them is free.
    """
    parsed = list(_Parser(text).facts())

    for pred, args, line, col in parsed:
        arities = PREDICATE_ARITIES.get(pred)
        if arities is None:
            raise ParseError(f"unknown predicate {pred!r}", line, col)
        if len(args) not in arities:
            raise ParseError(f"{pred}/{len(args)}: wrong arity", line, col)

    nodes = set()
    node_attrs = {}
    link_attrs = {}
    services = set()

    def _str_arg(value, what, line, col) -> str:
        if not isinstance(value, str):
            raise ParseError(f"{what} must be a quoted string", line, col)
        return value

    def _attr_value(value, line, col) -> AttrValue:
        if isinstance(value, (Fn, tuple)) or value is None:
            raise ParseError("attribute value must be an integer or boolean", line, col)
        return value

    # Pass 1: declarations, so later facts may appear in any order.
    for pred, args, line, col in parsed:
        if pred == "node":
            nodes.add(_str_arg(args[0], "node id", line, col))
        elif pred == "service":
            services.add(_str_arg(args[0], "service id", line, col))

    # Pass 2: attributes and application structure.
    dependencies = set()
    hard = set()
    soft = {}
    soft_explicit_level = {}
    for pred, args, line, col in parsed:
        if pred == "node_attr":
            x = _str_arg(args[0], "node id", line, col)
            k = _str_arg(args[1], "attribute key", line, col)
            v = _attr_value(args[2], line, col)
            nodes.add(x)
            prev = node_attrs.get((x, k))
            if prev is not None and not values_equal(prev, v):
                raise ParseError(f"conflicting values for attribute {k!r} on node {x!r}", line, col)
            node_attrs[(x, k)] = v
        elif pred == "link_attr":
            x = _str_arg(args[0], "node id", line, col)
            y = _str_arg(args[1], "node id", line, col)
            k = _str_arg(args[2], "attribute key", line, col)
            v = _attr_value(args[3], line, col)
            nodes.update((x, y))
            prev = link_attrs.get((x, y, k))
            if prev is not None and not values_equal(prev, v):
                raise ParseError(
                    f"conflicting values for attribute {k!r} on link ({x!r},{y!r})", line, col
                )
            link_attrs[(x, y, k)] = v
        elif pred == "link":
            # Link topology is implied by link_attr facts; bare link/2 facts
            # only register their endpoints.
            nodes.add(_str_arg(args[0], "node id", line, col))
            nodes.add(_str_arg(args[1], "node id", line, col))
        elif pred == "dependency":
            s = _str_arg(args[0], "service id", line, col)
            t = _str_arg(args[1], "service id", line, col)
            for sid in (s, t):
                if sid not in services:
                    raise ParseError(
                        f"dependency references undeclared service {sid!r}", line, col
                    )
            dependencies.add((s, t))
        elif pred == "hreq":
            target = _as_target(args[0], services, line, col)
            expr = _as_expr(args[1], line, col)
            if (target, expr) in soft:
                raise ParseError("requirement declared both hard and soft", line, col)
            hard.add((target, expr))
        elif pred == "sreq":
            target = _as_target(args[0], services, line, col)
            expr = _as_expr(args[1], line, col)
            req = (target, expr)
            if req in hard:
                raise ParseError("requirement declared both hard and soft", line, col)
            if len(args) == 3:
                if not isinstance(args[2], int) or is_bool(args[2]) or args[2] < 0:
                    raise ParseError("sreq level must be a non-negative integer", line, col)
                level, explicit = args[2], True
            else:
                level, explicit = 1, False
            if req in soft:
                if soft_explicit_level[req] != (level if explicit else None) and not (
                    not explicit and soft_explicit_level[req] is None
                ):
                    raise ParseError("soft requirement declared twice with different levels", line, col)
            soft[req] = LiftCost(1, level)
            soft_explicit_level[req] = level if explicit else None

    # Pass 3: cost overrides.
    for pred, args, line, col in parsed:
        if pred != "violation_cost":
            continue
        target = _as_target(args[0], services, line, col)
        expr = _as_expr(args[1], line, col)
        req = (target, expr)
        if req not in soft:
            raise ParseError(
                f"violation_cost for {render_target(target)} has no matching sreq", line, col
            )
        pair = args[2]
        if (
            not isinstance(pair, tuple)
            or len(pair) != 2
            or any(not isinstance(v, int) or is_bool(v) or v < 0 for v in pair)
        ):
            raise ParseError("violation_cost expects a (cost,level) pair", line, col)
        cost = LiftCost(pair[0], pair[1])
        prev = soft_explicit_level.get((req, "cost"))
        if prev is not None and prev != cost:
            raise ParseError("conflicting violation_cost facts", line, col)
        soft[req] = cost
        soft_explicit_level[(req, "cost")] = cost

    if strict_costs:
        for req in list(soft):
            if (req, "cost") not in soft_explicit_level:
                soft[req] = LiftCost(0, soft[req].level)

    infra = Infrastructure(frozenset(nodes), node_attrs, link_attrs)
    app = Application(frozenset(services), frozenset(dependencies), frozenset(hard), soft)
    return infra, app


def serialize_facts(infra: Infrastructure, app: Application) -> str:
    """Render a model back to fact text, deterministically ordered.

    ``parse_facts(serialize_facts(infra, app))`` reproduces the model exactly.
    """
    out = []
    for n in sorted(infra.nodes):
        out.append(f'node("{n}").')
    for (x, k), v in sorted(infra.node_attrs.items()):
        out.append(f'node_attr("{x}","{k}",{render_value(v)}).')
    for (x, y, k), v in sorted(infra.link_attrs.items()):
        out.append(f'link_attr("{x}","{y}","{k}",{render_value(v)}).')
    for s in sorted(app.services):
        out.append(f'service("{s}").')
    for s, t in sorted(app.dependencies):
        out.append(f'dependency("{s}","{t}").')

    def req_sort_key(req):
        target, expr = req
        return (render_target(target), expr.kind, expr.key, str(expr.threshold))

    for target, expr in sorted(app.hard_reqs, key=req_sort_key):
        out.append(f"hreq({render_target(target)},{expr.render()}).")
    for target, expr in sorted(app.soft_reqs, key=req_sort_key):
        cost = app.soft_reqs[(target, expr)]
        out.append(f"sreq({render_target(target)},{expr.render()},{cost.level}).")
        if cost.weight != 1:
            out.append(
                f"violation_cost({render_target(target)},{expr.render()},"
                f"({cost.weight},{cost.level}))."
            )
    return "\n".join(out) + ("\n" if out else "")
