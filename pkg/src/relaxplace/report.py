"""Render benchmark figures from a bench CSV.

Produces, next to the delimited data:

* ``cactus.png``   - instances solved to optimality within t seconds, per strategy
* ``scatter.png``  - per-instance runtime, first strategy vs second
* ``incumbents.png`` - temporal distribution of improving solutions per instance
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_rows(csv_path: str | Path) -> list:
    with open(csv_path, newline="") as handle:
        return list(csv.DictReader(handle))


def cactus_plot(rows, out_path, timeout: float | None = None):
    fig, ax = plt.subplots(figsize=(6, 4))
    strategies = sorted({r["strategy"] for r in rows})
    for strategy in strategies:
        times = sorted(
            float(r["tto_s"])
            for r in rows
            if r["strategy"] == strategy and r["status"] == "optimal" and r["tto_s"]
        )
        ax.step(times, range(1, len(times) + 1), where="post", label=strategy)
    if timeout:
        ax.axvline(timeout, color="gray", linestyle=":", linewidth=1)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("instances solved to optimality")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def scatter_plot(rows, out_path, timeout: float):
    strategies = sorted({r["strategy"] for r in rows})
    if len(strategies) < 2:
        return False
    a, b = strategies[:2]

    def times_for(strategy):
        out = {}
        for r in rows:
            if r["strategy"] != strategy:
                continue
            out[r["instance"]] = (
                float(r["tto_s"]) if r["status"] == "optimal" and r["tto_s"] else timeout
            )
        return out

    ta, tb = times_for(a), times_for(b)
    shared = sorted(set(ta) & set(tb))
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.scatter([ta[i] for i in shared], [tb[i] for i in shared], s=12, alpha=0.6)
    lim = max([timeout] + [ta[i] for i in shared] + [tb[i] for i in shared]) * 1.05
    ax.plot([0, lim], [0, lim], color="gray", linewidth=1, linestyle=":")
    ax.set_xlim(0, lim)
    ax.set_ylim(0, lim)
    ax.set_xlabel(f"{a} time (s)")
    ax.set_ylabel(f"{b} time (s)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return True


def incumbent_plot(rows, out_path):
    fig, ax = plt.subplots(figsize=(6, 4))
    strategies = sorted({r["strategy"] for r in rows})
    for strategy in strategies:
        xs, ys = [], []
        index = 0
        for r in rows:
            if r["strategy"] != strategy:
                continue
            index += 1
            try:
                trace = json.loads(r["incumbents_json"])
            except json.JSONDecodeError:
                continue
            if not isinstance(trace, list):
                continue
            for t, _cost in trace:
                xs.append(t)
                ys.append(index)
        ax.scatter(xs, ys, s=10, alpha=0.6, label=strategy)
    ax.set_xlabel("time of improving solution (s)")
    ax.set_ylabel("instance #")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_report(csv_path: str | Path, out_dir: str | Path, timeout: float = 180.0) -> list:
    """Write all figures; returns the list of files produced."""
    rows = read_rows(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    produced = []
    cactus_plot(rows, out / "cactus.png", timeout)
    produced.append(out / "cactus.png")
    if scatter_plot(rows, out / "scatter.png", timeout):
        produced.append(out / "scatter.png")
    incumbent_plot(rows, out / "incumbents.png")
    produced.append(out / "incumbents.png")
    return produced
