import random
from pathlib import Path

import pytest

from relaxplace.facts import parse_facts
from relaxplace.model import Application, Infrastructure, LiftCost, RequirementExpr

DATA = Path(__file__).parent / "data"

GOLDEN_ASSIGNMENT = {"ml_opt": "prvt_cloud", "lights_driver": "access_point"}
GOLDEN_LIFTED = frozenset(
    {
        ("ml_opt", RequirementExpr("lte", "carbon_intensity", 300)),
        ("lights_driver", RequirementExpr("lte", "carbon_intensity", 300)),
    }
)


@pytest.fixture(scope="session")
def golden_text() -> str:
    return (DATA / "streetlight.lp").read_text()


@pytest.fixture(scope="session")
def golden(golden_text):
    return parse_facts(golden_text)


def random_instance(
    rng: random.Random,
    max_nodes: int = 6,
    max_services: int = 4,
    max_soft: int = 10,
    max_reserve_soft: int = 3,
    weights=(1, 1),
    levels=(1,),
):
    """Small random instance for oracle comparisons.

    Attribute vocabulary is tiny on purpose so requirements actually clash.
    """
    bool_keys = ["gpu", "secure"]
    int_keys = ["avail", "carbon"]
    reserve_keys = ["ram", "cpu"]

    nodes = [f"n{i}" for i in range(rng.randint(1, max_nodes))]
    node_attrs = {}
    for n in nodes:
        for key in bool_keys:
            if rng.random() < 0.7:
                node_attrs[(n, key)] = rng.random() < 0.5
        for key in int_keys:
            if rng.random() < 0.8:
                node_attrs[(n, key)] = rng.randint(0, 10)
        for key in reserve_keys:
            if rng.random() < 0.8:
                node_attrs[(n, key)] = rng.randint(0, 12)

    services = [f"s{i}" for i in range(rng.randint(1, max_services))]
    link_attrs = {}
    for a in nodes:
        for b in nodes:
            if a != b and rng.random() < 0.8:
                link_attrs[(a, b, "lat")] = rng.randint(0, 20)

    def random_expr(reserve_ok=True):
        roll = rng.random()
        if reserve_ok and roll < 0.25:
            return RequirementExpr("reserve", rng.choice(reserve_keys), rng.randint(1, 8))
        if roll < 0.5:
            kind = rng.choice(["eq", "neq"])
            if rng.random() < 0.5:
                return RequirementExpr(kind, rng.choice(bool_keys), rng.random() < 0.5)
            return RequirementExpr(kind, rng.choice(int_keys), rng.randint(0, 10))
        kind = rng.choice(["lt", "gt", "lte", "gte"])
        return RequirementExpr(kind, rng.choice(int_keys), rng.randint(0, 10))

    hard = set()
    soft = {}
    n_soft = rng.randint(0, max_soft)
    n_hard = rng.randint(0, 4)
    reserve_soft_budget = max_reserve_soft
    for _ in range(n_hard):
        s = rng.choice(services)
        if len(services) > 1 and rng.random() < 0.3:
            t = rng.choice([x for x in services if x != s])
            req = ((s, t), RequirementExpr(rng.choice(["lte", "gte"]), "lat", rng.randint(0, 20)))
        else:
            req = (s, random_expr())
        if req not in soft:
            hard.add(req)
    for _ in range(n_soft):
        s = rng.choice(services)
        if len(services) > 1 and rng.random() < 0.3:
            t = rng.choice([x for x in services if x != s])
            req = ((s, t), RequirementExpr(rng.choice(["lte", "gte"]), "lat", rng.randint(0, 20)))
        else:
            expr = random_expr(reserve_ok=reserve_soft_budget > 0)
            req = (s, expr)
        if req in hard or req in soft:
            continue
        if req[1].kind == "reserve":
            reserve_soft_budget -= 1
        soft[req] = LiftCost(rng.choice(weights), rng.choice(levels))

    infra = Infrastructure(frozenset(nodes), node_attrs, link_attrs)
    app = Application(frozenset(services), frozenset(), frozenset(hard), soft)
    return infra, app
