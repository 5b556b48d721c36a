"""Seeded instance generator: scale-free infrastructures, random applications.

Infrastructures are preferential-attachment graphs whose direct edges carry a
uniform random latency; every remaining ordered node pair then gets a derived
link whose latency is the shortest-path distance (metric closure).
Applications are uniform random digraphs whose services draw their requirement
profile from a template table.

All randomness flows through ``random.Random`` seeded with strings derived
hierarchically from a master seed, so any single instance can be regenerated
in isolation, byte-identically.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .facts import serialize_facts
from .model import Application, Infrastructure, LiftCost, RequirementExpr

DEFAULT_LATENCY_RANGE = (10, 50)
DEFAULT_INFRA_SIZES = tuple(range(50, 501, 50))
DEFAULT_APP_SIZES = tuple(range(5, 31, 5))
DEFAULT_PAIR_COUNT = 100


class DisconnectedGraphError(Exception):
    pass


@dataclass(frozen=True)
class NodeTemplate:
    name: str
    attrs: dict  # attribute key -> value


@dataclass(frozen=True)
class ReqTemplate:
    attr: str
    kind: str
    value: object
    hard: bool
    weight: int = 1
    level: int = 1


@dataclass(frozen=True)
class ServiceTemplate:
    name: str
    node_reqs: tuple
    link_reqs: tuple  # applied to each outgoing dependency


def _req_templates(raw) -> tuple:
    return tuple(
        ReqTemplate(
            attr=entry["attr"],
            kind=entry["kind"],
            value=entry["value"],
            hard=entry["hard"],
            weight=entry.get("weight", 1),
            level=entry.get("level", 1),
        )
        for entry in raw
    )


def load_templates(path: str | Path | None = None):
    """Load (node templates, service templates) from JSON; None = shipped defaults."""
    if path is None:
        raw = json.loads(
            resources.files("relaxplace.data").joinpath("default_templates.json").read_text()
        )
    else:
        raw = json.loads(Path(path).read_text())
    node_templates = tuple(
        NodeTemplate(t["name"], dict(t["attrs"])) for t in raw["node_templates"]
    )
    service_templates = tuple(
        ServiceTemplate(
            t["name"],
            _req_templates(t["node_reqs"]),
            _req_templates(t.get("link_reqs", [])),
        )
        for t in raw["service_templates"]
    )
    if not node_templates or not service_templates:
        raise ValueError("template lists must be non-empty")
    return node_templates, service_templates


@dataclass(frozen=True)
class GeneratorConfig:
    infra_size: int
    app_size: int
    seed: str = "0"
    ba_attachment: int = 2
    er_probability: float = 0.3
    latency_range: tuple = DEFAULT_LATENCY_RANGE
    node_templates: tuple = ()
    service_templates: tuple = ()

    def __post_init__(self):
        if self.infra_size < 1 or self.app_size < 1:
            raise ValueError("sizes must be at least 1")
        if self.ba_attachment < 1:
            raise ValueError("attachment must be at least 1")
        if not 0.0 <= self.er_probability <= 1.0:
            raise ValueError("edge probability must lie in [0,1]")
        lo, hi = self.latency_range
        if lo < 1 or hi < lo:
            raise ValueError("latency range must be a positive interval")
        if not self.node_templates or not self.service_templates:
            node_t, service_t = load_templates()
            object.__setattr__(self, "node_templates", self.node_templates or node_t)
            object.__setattr__(self, "service_templates", self.service_templates or service_t)


def _node_names(n: int) -> list:
    width = len(str(n - 1)) if n > 1 else 1
    return [f"n{i:0{width}d}" for i in range(n)]


def _service_names(k: int) -> list:
    width = len(str(k - 1)) if k > 1 else 1
    return [f"s{i:0{width}d}" for i in range(k)]


def _ba_edges(n: int, m: int, rng: random.Random) -> list:
    """Undirected preferential-attachment edge list, seeded with a complete
    graph on min(n, m+1) nodes."""
    clique = min(n, m + 1)
    edges = [(i, j) for i in range(clique) for j in range(i + 1, clique)]
    # Endpoint multiset: sampling from it realizes degree-proportional choice.
    endpoints = [v for e in edges for v in e]
    for new in range(clique, n):
        targets = set()
        while len(targets) < m:
            targets.add(rng.choice(endpoints))
        for t in sorted(targets):
            edges.append((t, new))
            endpoints.extend((t, new))
    return edges


def generate_infrastructure(config: GeneratorConfig) -> Infrastructure:
    """Scale-free infrastructure with templated nodes and metric-closed latencies."""
    n = config.infra_size
    rng = random.Random(f"infra/{config.seed}")
    names = _node_names(n)

    node_attrs = {}
    for name in names:
        template = rng.choice(config.node_templates)
        for key, value in template.attrs.items():
            node_attrs[(name, key)] = value

    link_attrs = {}
    lo, hi = config.latency_range
    for i, j in _ba_edges(n, config.ba_attachment, rng):
        latency = rng.randint(lo, hi)  # symmetric: both directions, same value
        link_attrs[(names[i], names[j], "latency")] = latency
        link_attrs[(names[j], names[i], "latency")] = latency

    infra = Infrastructure(frozenset(names), node_attrs, link_attrs)
    return metric_closure(infra)


def metric_closure(infra: Infrastructure) -> Infrastructure:
    """Add a derived link for every not-directly-linked ordered pair, with
    latency equal to the shortest-path distance.  Direct links are kept
    verbatim, even when a shorter multi-hop path exists."""
    adjacency = {}
    direct = set()
    for (src, dst, key), value in infra.link_attrs.items():
        if key != "latency":
            continue
        adjacency.setdefault(src, []).append((dst, value))
        direct.add((src, dst))

    nodes = sorted(infra.nodes)
    link_attrs = dict(infra.link_attrs)
    for source in nodes:
        dist = {source: 0}
        heap = [(0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, float("inf")):
                continue
            for v, w in adjacency.get(u, ()):
                nd = d + w
                if nd < dist.get(v, float("inf")):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        for target in nodes:
            if target == source or (source, target) in direct:
                continue
            if target not in dist:
                raise DisconnectedGraphError(
                    f"no path from {source!r} to {target!r}: latency closure undefined"
                )
            link_attrs[(source, target, "latency")] = dist[target]
    return Infrastructure(infra.nodes, infra.node_attrs, link_attrs)


def generate_application(config: GeneratorConfig) -> Application:
    """Random digraph of services; each service's requirements come from one
    uniformly sampled template, one requirement per node attribute plus a
    latency bound per outgoing dependency."""
    k = config.app_size
    rng = random.Random(f"app/{config.seed}")
    names = _service_names(k)

    chosen = {name: rng.choice(config.service_templates) for name in names}
    dependencies = set()
    for s in names:
        for t in names:
            if s != t and rng.random() < config.er_probability:
                dependencies.add((s, t))

    hard = set()
    soft = {}

    def place(target, req: ReqTemplate):
        expr = RequirementExpr(req.kind, req.attr, req.value)
        if req.hard:
            hard.add((target, expr))
        else:
            soft[(target, expr)] = LiftCost(req.weight, req.level)

    for name in names:
        for req in chosen[name].node_reqs:
            place(name, req)
    for s, t in sorted(dependencies):
        for req in chosen[s].link_reqs:
            place((s, t), req)

    return Application(frozenset(names), frozenset(dependencies), frozenset(hard), soft)


def generate_instance(master_seed: str, n: int, k: int, idx: int, **overrides):
    """One (infrastructure, application) pair, regenerable in isolation.

    The infrastructure seed ignores the application size, so all applications
    of index ``idx`` at size ``n`` share an infrastructure.
    """
    infra_cfg = GeneratorConfig(
        infra_size=n, app_size=k, seed=f"{master_seed}/{n}/{idx}", **overrides
    )
    app_cfg = GeneratorConfig(
        infra_size=n, app_size=k, seed=f"{master_seed}/{n}/{k}/{idx}", **overrides
    )
    return generate_infrastructure(infra_cfg), generate_application(app_cfg)


def instance_filename(n: int, k: int, idx: int) -> str:
    return f"i{n}_a{k}_{idx}.lp"


def generate_suite(
    out_dir: str | Path,
    master_seed: str = "0",
    infra_sizes=DEFAULT_INFRA_SIZES,
    app_sizes=DEFAULT_APP_SIZES,
    count: int = DEFAULT_PAIR_COUNT,
    on_file=None,
    **overrides,
) -> dict:
    """Materialize the full instance grid; returns the manifest.

    Files are named ``i{n}_a{k}_{idx}.lp``.  The manifest records the master
    seed, grid and a content digest per file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    empty_app = Application(frozenset(), frozenset(), frozenset(), {})
    empty_infra = Infrastructure(frozenset(), {}, {})
    for n in infra_sizes:
        for idx in range(count):
            infra = generate_infrastructure(
                GeneratorConfig(
                    infra_size=n, app_size=1, seed=f"{master_seed}/{n}/{idx}", **overrides
                )
            )
            infra_text = serialize_facts(infra, empty_app)
            for k in app_sizes:
                app = generate_application(
                    GeneratorConfig(
                        infra_size=n,
                        app_size=k,
                        seed=f"{master_seed}/{n}/{k}/{idx}",
                        **overrides,
                    )
                )
                text = infra_text + serialize_facts(empty_infra, app)
                name = instance_filename(n, k, idx)
                path = out / name
                path.write_text(text)
                digest = hashlib.sha256(text.encode()).hexdigest()
                files.append({"name": name, "n": n, "k": k, "idx": idx, "sha256": digest})
                if on_file is not None:
                    on_file(path)
    manifest = {
        "master_seed": master_seed,
        "infra_sizes": list(infra_sizes),
        "app_sizes": list(app_sizes),
        "count": count,
        "files": sorted(files, key=lambda f: f["name"]),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest
