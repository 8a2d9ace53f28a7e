"""Stochastic passenger arrivals.

Each O-D row is an independent Poisson stream at rate D * pct per hour; the
uniform-random component arrives at rate D * random_share with the origin
uniform over all stops and the destination uniform over the other stops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..network import DemandSpec


@dataclass(frozen=True)
class Arrival:
    time: float
    origin: str
    dest: str


def _poisson_times(rate_per_min: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Event times of a Poisson process on [0, horizon)."""
    if rate_per_min <= 0:
        return np.empty(0)
    times: list[float] = []
    t = 0.0
    expected = rate_per_min * horizon
    chunk = max(16, int(expected + 4 * np.sqrt(expected) + 16))
    while t < horizon:
        gaps = rng.exponential(1.0 / rate_per_min, size=chunk)
        cum = t + np.cumsum(gaps)
        times.extend(cum[cum < horizon].tolist())
        t = float(cum[-1])
    return np.asarray(times)


def sample_arrivals(
    demand: DemandSpec,
    horizon: float,
    rng: np.random.Generator,
    stops: Sequence[str],
    reachable: Callable[[str, str], bool] | None = None,
) -> list[Arrival]:
    """Time-ordered arrivals over [0, horizon). Random-component pairs that
    ``reachable`` rejects are resampled."""
    tagged: list[tuple[float, int, int, str, str]] = []

    for row_idx, (origin, dest, pct) in enumerate(demand.od_rows):
        rate = demand.total_hourly_demand * pct / 60.0
        for n, t in enumerate(_poisson_times(rate, horizon, rng)):
            tagged.append((float(t), row_idx, n, origin, dest))

    rate = demand.total_hourly_demand * demand.random_share / 60.0
    stops = list(stops)
    for n, t in enumerate(_poisson_times(rate, horizon, rng)):
        for _ in range(1000):
            o = stops[int(rng.integers(len(stops)))]
            d = stops[int(rng.integers(len(stops) - 1))]
            if d == o:
                d = stops[-1]
            if reachable is None or reachable(o, d):
                break
        else:
            raise ValueError("could not sample a reachable random O-D pair")
        tagged.append((float(t), len(demand.od_rows), n, o, d))

    tagged.sort(key=lambda e: (e[0], e[1], e[2]))
    return [Arrival(t, o, d) for t, _, _, o, d in tagged]
