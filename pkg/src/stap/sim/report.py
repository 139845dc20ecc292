"""Text reports: strategy table over trials and scalability rows."""

from __future__ import annotations

import csv
import io
from statistics import fmean
from typing import Sequence

from .engine import STRATEGIES, Metrics

# Trigger counts published for the ten hospital trials, shown for comparison only.
REFERENCE_COUNTS = {"R1": 18, "R2": 13, "R3": 10, "R4": 16}
REFERENCE_SUCCESS = 0.8


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.3g}"


def strategy_rows(metrics: Sequence[Metrics]) -> list[dict]:
    """Per strategy: trigger count and mean local / global planner time per trigger."""
    rows = []
    for k in STRATEGIES:
        outs = [o for m in metrics for o in m.outcomes if o["strategy"] == k]
        local = [o["local_time"] for o in outs if k in ("R3", "R4") and "local_time" in o]
        glob = [o["global_time"] for o in outs if o.get("result") and "global" in o["result"]]
        rows.append(
            {
                "strategy": k,
                "triggered": sum(m.counts.get(k, 0) for m in metrics),
                "mean_local_s": fmean(local) if local else None,
                "mean_global_s": fmean(glob) if glob else None,
                "reference_triggered": REFERENCE_COUNTS[k],
            }
        )
    return rows


def table_report(metrics: Sequence[Metrics]) -> str:
    if not metrics:
        raise ValueError("no metrics to report")
    rows = strategy_rows(metrics)
    lines = [
        f"{'Strategy':<10}{'Triggered':>10}{'Local (s)':>12}{'Global (s)':>12}{'Reference':>11}",
    ]
    for r in rows:
        lines.append(
            f"{r['strategy']:<10}{r['triggered']:>10}{_fmt(r['mean_local_s']):>12}"
            f"{_fmt(r['mean_global_s']):>12}{r['reference_triggered']:>11}"
        )
    ok = sum(m.success for m in metrics)
    lines.append(
        f"trials {len(metrics)}, success {ok}/{len(metrics)} ({100 * ok / len(metrics):.0f}%),"
        f" reference success {100 * REFERENCE_SUCCESS:.0f}%"
    )
    offline = [m.offline_time for m in metrics if m.offline_time]
    if offline:
        lines.append(f"mean offline allocation {fmean(offline):.3f} s")
    lines.append("reference columns are published values on other hardware, not targets")
    return "\n".join(lines) + "\n"


def bench_report(rows: Sequence[dict], fit: dict) -> str:
    lines = [f"{'N':>4}{'Team states':>13}{'Translate (s)':>15}{'Offline (s)':>13}{'Local (s)':>12}{'Global (s)':>12}"]
    for r in rows:
        lines.append(
            f"{r['n']:>4}{r['team_states']:>13}{r['translation_s']:>15.3f}{r['offline_s']:>13.4f}"
            f"{_fmt(r['local_s']):>12}{_fmt(r['global_s']):>12}"
        )
    lines.append(f"offline = {fit['slope']:.4g} * N + {fit['intercept']:.4g}  (R^2 = {fit['r2']:.4f})")
    return "\n".join(lines) + "\n"


def bench_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "team_states", "translation_s", "offline_s", "local_s", "global_s"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in w.fieldnames})
    return buf.getvalue()
