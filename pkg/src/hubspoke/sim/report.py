"""Replication metrics and their aggregation into a SimReport."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable

from scipy import stats

from .engine import ReplicationResult

ALL_ROUTES = "__all__"
HIST_LABELS = ("[0,5)", "[5,10)", "[10,15)", "[15,inf)")


@dataclass(frozen=True)
class RepMetrics:
    rep: int
    u_s: dict[str, float]
    s075: dict[str, float]
    avg_total: float | None
    avg_wait: float | None
    avg_onbus: float | None
    avg_transfers: float | None
    pct_transfers: float | None
    avg_wait_all: float | None
    hist: tuple[float, ...] | None
    created: int
    completed: int
    onboard: int
    waiting: int
    walking: int
    invariant_violations: int


def summarize_replication(rep: int, raw: ReplicationResult) -> RepMetrics:
    u_s: dict[str, float] = {}
    s075: dict[str, float] = {}
    tot_n = tot_sum = tot_hi = 0.0
    for route, (n, s, hi) in sorted(raw.util_samples.items()):
        u_s[route] = s / n if n else 0.0
        s075[route] = hi / n if n else 0.0
        tot_n += n
        tot_sum += s
        tot_hi += hi
    u_s[ALL_ROUTES] = tot_sum / tot_n if tot_n else 0.0
    s075[ALL_ROUTES] = tot_hi / tot_n if tot_n else 0.0

    done = raw.exited
    if done:
        hist_total = sum(raw.hist_counts)
        hist = tuple(c / hist_total for c in raw.hist_counts)
        metrics = dict(
            avg_total=raw.total_sum / done,
            avg_wait=raw.wait_sum / done,
            avg_onbus=raw.onbus_sum / done,
            avg_transfers=raw.transfers_sum / done,
            pct_transfers=raw.with_transfer / done,
            hist=hist,
        )
    else:
        metrics = dict(avg_total=None, avg_wait=None, avg_onbus=None,
                       avg_transfers=None, pct_transfers=None, hist=None)
    wait_all = (raw.wait_all_sum / raw.wait_all_count
                if raw.wait_all_count else None)
    return RepMetrics(
        rep=rep,
        u_s=u_s,
        s075=s075,
        avg_wait_all=wait_all,
        created=raw.created,
        completed=raw.exited,
        onboard=raw.onboard_at_end,
        waiting=raw.waiting_at_end,
        walking=raw.walking_at_end,
        invariant_violations=raw.invariant_violations,
        **metrics,
    )


def mean_ci(values: list[float]) -> dict[str, float]:
    """Mean and 95% t-interval half width."""
    n = len(values)
    if n == 0:
        return {"mean": math.nan, "ci95": math.nan, "n": 0}
    mean = sum(values) / n
    if n == 1:
        return {"mean": mean, "ci95": math.nan, "n": 1}
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half = float(stats.t.ppf(0.975, n - 1)) * math.sqrt(var / n)
    return {"mean": mean, "ci95": half, "n": n}


@dataclass(frozen=True)
class SimReport:
    meta: dict
    reps: tuple[RepMetrics, ...]
    summary: dict

    def hist_fractions(self) -> tuple[float, ...]:
        return tuple(self.summary["histogram"][label]["mean"] for label in HIST_LABELS)

    def to_json(self) -> str:
        doc = {
            "meta": self.meta,
            "summary": self.summary,
            "replications": [asdict(r) for r in self.reps],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SimReport":
        doc = json.loads(text)
        reps = tuple(
            RepMetrics(**{**r, "hist": tuple(r["hist"]) if r["hist"] is not None else None})
            for r in doc["replications"]
        )
        return SimReport(meta=doc["meta"], reps=reps, summary=doc["summary"])


def aggregate(meta: dict, reps: Iterable[RepMetrics]) -> SimReport:
    reps = tuple(reps)
    summary: dict = {}

    def collect(getter) -> list[float]:
        return [v for r in reps if (v := getter(r)) is not None]

    for name, getter in [
        ("avg_total_travel_min", lambda r: r.avg_total),
        ("avg_wait_min", lambda r: r.avg_wait),
        ("avg_on_bus_min", lambda r: r.avg_onbus),
        ("avg_transfers", lambda r: r.avg_transfers),
        ("pct_transfers", lambda r: r.pct_transfers),
        ("avg_wait_all_min", lambda r: r.avg_wait_all),
    ]:
        summary[name] = mean_ci(collect(getter))

    route_names = sorted({name for r in reps for name in r.u_s})
    summary["u_s"] = {name: mean_ci([r.u_s[name] for r in reps if name in r.u_s])
                      for name in route_names}
    summary["s_075"] = {name: mean_ci([r.s075[name] for r in reps if name in r.s075])
                        for name in route_names}
    summary["histogram"] = {
        label: mean_ci([r.hist[i] for r in reps if r.hist is not None])
        for i, label in enumerate(HIST_LABELS)
    }
    summary["counts"] = {
        "created": sum(r.created for r in reps),
        "completed": sum(r.completed for r in reps),
        "invariant_violations": sum(r.invariant_violations for r in reps),
    }
    return SimReport(meta=meta, reps=reps, summary=summary)
