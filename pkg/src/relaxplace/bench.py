"""Benchmark harness: run strategies over an instance directory, emit CSV.

One row per (instance, strategy) pair, always, even when a run fails; the
sweep never aborts.  The CSV feeds the `report` command and any external
plotting.
"""

from __future__ import annotations

import csv
import json
import re
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from .facts import parse_facts
from .solver import SolveConfig, solve

CSV_HEADER = [
    "instance",
    "n",
    "k",
    "strategy",
    "status",
    "cost",
    "ttfs_s",
    "tto_s",
    "incumbents_json",
]

_NAME_RE = re.compile(r"i(\d+)_a(\d+)_(\d+)\.lp$")


def _encode_cost(cost) -> str:
    return json.dumps({str(l): c for l, c in sorted(cost.as_dict().items())})


def run_one(path: str, strategy: str, timeout: float, seed: int = 0) -> dict:
    """Solve one instance with one strategy; errors become an 'error' row."""
    name = Path(path).name
    m = _NAME_RE.search(name)
    row = {
        "instance": name,
        "n": m.group(1) if m else "",
        "k": m.group(2) if m else "",
        "strategy": strategy,
        "status": "",
        "cost": "",
        "ttfs_s": "",
        "tto_s": "",
        "incumbents_json": "[]",
    }
    try:
        infra, app = parse_facts(Path(path).read_text())
        outcome = solve(infra, app, SolveConfig(strategy=strategy, timeout=timeout, seed=seed))
    except Exception as exc:  # recorded, never fatal to the sweep
        row["status"] = "error"
        row["incumbents_json"] = json.dumps({"error": str(exc)})
        return row
    row["status"] = outcome.status
    if outcome.best is not None:
        row["cost"] = _encode_cost(outcome.best.cost)
    if outcome.incumbents:
        row["ttfs_s"] = f"{outcome.incumbents[0][0]:.3f}"
    if outcome.status == "optimal":
        row["tto_s"] = f"{outcome.elapsed:.3f}"
    row["incumbents_json"] = json.dumps(
        [[round(t, 3), {str(l): c for l, c in sorted(cost.as_dict().items())}]
         for t, cost in outcome.incumbents]
    )
    return row


def run_benchmark(
    instance_paths,
    strategies,
    timeout: float,
    jobs: int,
    csv_out: str | Path,
    seed: int = 0,
) -> list:
    """Run every (instance, strategy) pair, at most ``jobs`` concurrently."""
    tasks = [(str(p), s) for p in sorted(map(str, instance_paths)) for s in strategies]
    rows = {}
    if jobs <= 1:
        for path, strategy in tasks:
            rows[(path, strategy)] = run_one(path, strategy, timeout, seed)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(run_one, path, strategy, timeout, seed): (path, strategy)
                for path, strategy in tasks
            }
            for future in as_completed(futures):
                key = futures[future]
                try:
                    rows[key] = future.result()
                except Exception as exc:
                    path, strategy = key
                    rows[key] = {
                        "instance": Path(path).name,
                        "n": "",
                        "k": "",
                        "strategy": strategy,
                        "status": "error",
                        "cost": "",
                        "ttfs_s": "",
                        "tto_s": "",
                        "incumbents_json": json.dumps({"error": str(exc)}),
                    }

    ordered = [rows[key] for key in tasks]
    with open(csv_out, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(ordered)
    return ordered
