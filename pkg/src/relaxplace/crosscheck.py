"""Optional cross-check against an external ASP solver (clingo-compatible).

Disabled unless an executable is configured (argument or the
``RELAXPLACE_ASP_SOLVER`` environment variable).  The instance is reified as
facts, paired with a guess-and-check encoding equivalent to the native
semantics, and the external optimum is compared against ours.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from pathlib import Path

from .facts import serialize_facts
from .model import Application, CostVector, Infrastructure, render_req

ENV_VAR = "RELAXPLACE_ASP_SOLVER"

ENCODING = """
{ deploy(S,X): node(X) } = 1 :- service(S).

req(S,E) :- hreq(S,E).
{ req(S,E) } :- sreq(S,E,_).
lift(S,E) :- sreq(S,E,_), not req(S,E).
:~ violation_cost(S,E,(C,L)), lift(S,E). [C@L,S,E]

shared_resource(R) :- req(_,reserve(R,_)).
:- node_attr(X,R,T), shared_resource(R), #sum{Q,S: deploy(S,X), req(S,reserve(R,Q))} > T.
:- req(S,reserve(R,Q)), deploy(S,X), node_attr(X,R,V), V < Q.

:- req(S,eq(R,V)),  deploy(S,X), not node_attr(X,R,V), service(S).
:- req(S,neq(R,V)), deploy(S,X), node_attr(X,R,V).
:- req(S,lt(R,T)),  deploy(S,X), node_attr(X,R,V), V >= T.
:- req(S,gt(R,T)),  deploy(S,X), node_attr(X,R,V), V <= T.
:- req(S,gte(R,T)), deploy(S,X), node_attr(X,R,V), V < T.
:- req(S,lte(R,T)), deploy(S,X), node_attr(X,R,V), V > T.

xlink_attr(X,Y,K,V) :- link_attr(X,Y,K,V).
xlink_attr(X,X,"latency",0) :- node(X), not link_attr(X,X,"latency",_).
:- req((S1,S2),eq(R,V)),  deploy(S1,X), deploy(S2,Y), not xlink_attr(X,Y,R,V).
:- req((S1,S2),neq(R,V)), deploy(S1,X), deploy(S2,Y), xlink_attr(X,Y,R,V).
:- req((S1,S2),lt(R,T)),  deploy(S1,X), deploy(S2,Y), xlink_attr(X,Y,R,V), V >= T.
:- req((S1,S2),gt(R,T)),  deploy(S1,X), deploy(S2,Y), xlink_attr(X,Y,R,V), V <= T.
:- req((S1,S2),gte(R,T)), deploy(S1,X), deploy(S2,Y), xlink_attr(X,Y,R,V), V < T.
:- req((S1,S2),lte(R,T)), deploy(S1,X), deploy(S2,Y), xlink_attr(X,Y,R,V), V > T.
"""


def configured_solver(executable: str | None = None) -> str | None:
    exe = executable or os.environ.get(ENV_VAR)
    if not exe:
        return None
    return exe if shutil.which(exe) else None


def _facts_with_costs(infra: Infrastructure, app: Application) -> str:
    # Weight-1 requirements normally omit violation_cost; the weak constraint
    # needs one fact per soft requirement.
    lines = [serialize_facts(infra, app)]
    for req, cost in sorted(app.soft_reqs.items(), key=lambda item: render_req(item[0])):
        if cost.weight == 1:
            lines.append(f"violation_cost({render_req(req)},({cost.weight},{cost.level})).")
    return "\n".join(lines)


def external_optimum(
    infra: Infrastructure, app: Application, executable: str, timeout: float = 60.0
):
    """Run the external solver; returns ('optimal', CostVector) or ('infeasible', None).

    Raises RuntimeError when the output cannot be interpreted.
    """
    with tempfile.TemporaryDirectory(prefix="relaxplace-xcheck-") as tmp:
        facts = Path(tmp) / "instance.lp"
        encoding = Path(tmp) / "encoding.lp"
        facts.write_text(_facts_with_costs(infra, app))
        encoding.write_text(ENCODING)
        proc = subprocess.run(
            [executable, str(facts), str(encoding), "--quiet=1"],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    out = proc.stdout
    if "UNSATISFIABLE" in out:
        return "infeasible", None
    if "OPTIMUM FOUND" not in out:
        raise RuntimeError(f"external solver produced no optimum:\n{out}\n{proc.stderr}")
    values = None
    for line in out.splitlines():
        if line.startswith("Optimization:"):
            values = [int(v) for v in line.split()[1:]]
    if values is None:
        return "optimal", CostVector.zero()
    # Values are listed from the highest priority level down.
    levels = sorted({cost.level for cost in app.soft_reqs.values()}, reverse=True)
    if len(values) > len(levels):
        raise RuntimeError("external solver reported more levels than the instance declares")
    return "optimal", CostVector(dict(zip(levels, values)))


def agrees(infra, app, our_status: str, our_cost, executable: str) -> bool:
    status, cost = external_optimum(infra, app, executable)
    if status == "infeasible" or our_status == "infeasible":
        return status == our_status
    return our_status == "optimal" and cost == our_cost
