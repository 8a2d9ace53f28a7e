"""Route-design MILP.

Binary variables: x_j (operate route j), y_ij (stop i assigned to route j),
u[j,a,k] (location a, a stop or the hub, is visit k of route j), and
z[j,a,b,k] linearizing the visit-adjacency products u[j,a,k]*u[j,b,k+1] with
the three-inequality envelope that is exact on binaries.

The stop-time term is written as dwell * sum over non-hub visits, which ties
it to x_j: a route that is not operated contributes no time at all. As
printed, the term would charge every idle route a constant |K|*dwell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..network import TransitError, TransitInstance

Row = tuple[dict[int, float], str, float]  # coefficients, sense, rhs


class ModelTooLargeError(TransitError):
    pass


@dataclass(frozen=True)
class MilpModel:
    """Variable layout, objective, and constraint rows for one instance."""

    inst: TransitInstance
    n_stops: int
    n_routes: int
    n_visits: int
    num_vars: int
    objective: np.ndarray
    core_rows: tuple[Row, ...]
    coverage_rows: tuple[Row, ...]
    mccormick_upper_rows: tuple[Row, ...]  # (2a)/(2b): z <= u
    mccormick_lower_rows: tuple[Row, ...]  # (2c):     z >= u1 + u2 - 1

    # --- variable indexing -------------------------------------------------
    # x block, then y, then u, then z; "a" ranges over stops 0..n_stops-1
    # plus the hub at index n_stops.

    @property
    def hub_index(self) -> int:
        return self.n_stops

    @property
    def n_locs(self) -> int:
        return self.n_stops + 1

    def x(self, j: int) -> int:
        return j

    def y(self, i: int, j: int) -> int:
        return self.n_routes + i * self.n_routes + j

    def u(self, j: int, a: int, k: int) -> int:
        base = self.n_routes + self.n_stops * self.n_routes
        return base + (j * self.n_locs + a) * self.n_visits + k

    def z(self, j: int, a: int, b: int, k: int) -> int:
        base = (self.n_routes + self.n_stops * self.n_routes
                + self.n_locs * self.n_routes * self.n_visits)
        return base + ((j * self.n_locs + a) * self.n_locs + b) * (self.n_visits - 1) + k

    @property
    def num_integer_vars(self) -> int:
        """x, y and u; z is integral automatically once u is binary."""
        return (self.n_routes + self.n_stops * self.n_routes
                + self.n_locs * self.n_routes * self.n_visits)

    def all_rows(self) -> Iterator[Row]:
        yield from self.core_rows
        yield from self.coverage_rows
        yield from self.mccormick_upper_rows
        yield from self.mccormick_lower_rows

    # --- decode -------------------------------------------------------------

    def decode_sequences(self, x: np.ndarray) -> list[tuple[int, tuple[str, ...]]]:
        """Route sequences from a 0/1 assignment vector. Operated routes with
        no stop visits decode to empty sequences (kept here, dropped by the
        solver's canonical form)."""
        ids = self.inst.stop_ids
        out: list[tuple[int, tuple[str, ...]]] = []
        for j in range(self.n_routes):
            if x[self.x(j)] < 0.5:
                continue
            seq: list[str] = []
            for k in range(self.n_visits):
                for a in range(self.n_stops):
                    if x[self.u(j, a, k)] > 0.5:
                        seq.append(ids[a])
                        break
            out.append((j, tuple(seq)))
        return out

    def hub_padding_ok(self, x: np.ndarray) -> bool:
        """Once the hub fills a visit of an operated route, all later visits
        must be the hub too."""
        for j in range(self.n_routes):
            if x[self.x(j)] < 0.5:
                continue
            seen_hub = False
            for k in range(self.n_visits):
                is_hub = x[self.u(j, self.hub_index, k)] > 0.5
                if seen_hub and not is_hub:
                    return False
                seen_hub = seen_hub or is_hub
        return True


def count_variables(n_stops: int, n_routes: int, n_visits: int) -> int:
    n_locs = n_stops + 1
    return (n_routes
            + n_stops * n_routes
            + n_locs * n_routes * n_visits
            + n_locs * n_locs * n_routes * (n_visits - 1))


def build_model(
    inst: TransitInstance,
    *,
    require_coverage: bool = True,
    max_variables: int = 20_000,
) -> MilpModel:
    """Assemble the MILP for an instance.

    Coverage rows (one per required stop) are an addition on top of the
    assignment model: without them the all-zero design is optimal, so they
    are what makes the minimization meaningful. Pass
    ``require_coverage=False`` to reproduce the bare model.
    """
    ids = inst.stop_ids
    nI, nJ, nK = len(ids), inst.candidate_route_count, inst.max_visits
    total = count_variables(nI, nJ, nK)
    if total > max_variables:
        raise ModelTooLargeError(
            f"model needs {total} variables for |I|={nI}, |J|={nJ}, |K|={nK}; "
            f"cap is {max_variables} (raise max_variables to override)"
        )

    model_shell = MilpModel(
        inst=inst, n_stops=nI, n_routes=nJ, n_visits=nK, num_vars=total,
        objective=np.zeros(total), core_rows=(), coverage_rows=(),
        mccormick_upper_rows=(), mccormick_lower_rows=(),
    )
    x, y, u, z = model_shell.x, model_shell.y, model_shell.u, model_shell.z
    hub_i = model_shell.hub_index
    hub_id = inst.hub.stop_id
    t = inst.travel.get
    loc_id = list(ids) + [hub_id]

    c = np.zeros(total)
    for j in range(nJ):
        c[x(j)] += inst.route_fixed_cost[j]
        for a in range(nI):
            c[u(j, a, 0)] += inst.alpha * t(hub_id, ids[a])
            c[u(j, a, nK - 1)] += inst.alpha * t(ids[a], hub_id)
            for k in range(nK):
                c[u(j, a, k)] += inst.alpha * inst.stop_dwell
        for k in range(nK - 1):
            for a in range(nI + 1):
                for b in range(nI + 1):
                    c[z(j, a, b, k)] += inst.alpha * t(loc_id[a], loc_id[b])

    core: list[Row] = []
    for j in range(nJ):
        for i in range(nI):
            core.append(({y(i, j): 1.0, x(j): -1.0}, "<=", 0.0))             # (3b)
        for i in range(nI):
            row = {u(j, i, k): 1.0 for k in range(nK)}
            row[y(i, j)] = -1.0
            core.append((row, "=", 0.0))                                      # (3c)
        for k in range(nK - 1):
            row = {u(j, i, k + 1): 1.0 for i in range(nI)}
            for i in range(nI):
                row[u(j, i, k)] = row.get(u(j, i, k), 0.0) - 1.0
            core.append((row, "<=", 0.0))                                     # (3d)
        for k in range(nK):
            row = {u(j, i, k): 1.0 for i in range(nI)}
            row[u(j, hub_i, k)] = 1.0
            row[x(j)] = -1.0
            core.append((row, "=", 0.0))                                      # (3e)
        trow: dict[int, float] = {}
        for a in range(nI):
            trow[u(j, a, 0)] = trow.get(u(j, a, 0), 0.0) + t(hub_id, ids[a])
            trow[u(j, a, nK - 1)] = trow.get(u(j, a, nK - 1), 0.0) + t(ids[a], hub_id)
            for k in range(nK):
                trow[u(j, a, k)] = trow.get(u(j, a, k), 0.0) + inst.stop_dwell
        for k in range(nK - 1):
            for a in range(nI + 1):
                for b in range(nI + 1):
                    w = t(loc_id[a], loc_id[b])
                    if w:
                        trow[z(j, a, b, k)] = w
        core.append((trow, "<=", inst.time_cap))                              # (3f)

    coverage: list[Row] = []
    if require_coverage:
        for i, sid in enumerate(ids):
            if sid in inst.required_stops:
                coverage.append(({y(i, j): 1.0 for j in range(nJ)}, ">=", 1.0))

    mc_upper: list[Row] = []
    mc_lower: list[Row] = []
    for j in range(nJ):
        for k in range(nK - 1):
            for a in range(nI + 1):
                for b in range(nI + 1):
                    zi = z(j, a, b, k)
                    mc_upper.append(({zi: 1.0, u(j, a, k): -1.0}, "<=", 0.0))        # (2a)
                    mc_upper.append(({zi: 1.0, u(j, b, k + 1): -1.0}, "<=", 0.0))    # (2b)
                    mc_lower.append(
                        ({zi: -1.0, u(j, a, k): 1.0, u(j, b, k + 1): 1.0}, "<=", 1.0)  # (2c)
                    )

    return MilpModel(
        inst=inst, n_stops=nI, n_routes=nJ, n_visits=nK, num_vars=total,
        objective=c,
        core_rows=tuple(core),
        coverage_rows=tuple(coverage),
        mccormick_upper_rows=tuple(mc_upper),
        mccormick_lower_rows=tuple(mc_lower),
    )


def transition_coupling_rows(model: MilpModel) -> tuple[Row, ...]:
    """Valid strengthening for the LP relaxation. Visits are one-hot on
    operated routes, so at every feasible binary point

        sum_b z[j,a,b,k] = u[j,a,k]   and   sum_a z[j,a,b,k] = u[j,b,k+1].

    These equalities imply the upper-envelope rows (each z is below both of
    its factors) and make the relaxation route the z mass as a path through
    the visit layers, which is what gives the branch-and-bound a usable
    bound; the model itself is unchanged."""
    rows: list[Row] = []
    for j in range(model.n_routes):
        for k in range(model.n_visits - 1):
            for a in range(model.n_locs):
                row = {model.z(j, a, b, k): 1.0 for b in range(model.n_locs)}
                row[model.u(j, a, k)] = -1.0
                rows.append((row, "=", 0.0))
            for b in range(model.n_locs):
                row = {model.z(j, a, b, k): 1.0 for a in range(model.n_locs)}
                row[model.u(j, b, k + 1)] = -1.0
                rows.append((row, "=", 0.0))
    return tuple(rows)


def symmetry_rows(model: MilpModel) -> tuple[Row, ...]:
    """Optional symmetry breaking for interchangeable routes: operated routes
    first (x_j >= x_{j+1}) and first-visit stop indices nondecreasing across
    consecutive routes. Only valid when all fixed costs are equal."""
    if len(set(model.inst.route_fixed_cost)) > 1:
        return ()
    rows: list[Row] = []
    nI, nJ = model.n_stops, model.n_routes
    for j in range(nJ - 1):
        rows.append(({model.x(j): -1.0, model.x(j + 1): 1.0}, "<=", 0.0))
        row: dict[int, float] = {}
        for a in range(nI):
            row[model.u(j, a, 0)] = float(a + 1)
            row[model.u(j + 1, a, 0)] = -float(a + 1)
        row[model.x(j + 1)] = float(nI)
        rows.append((row, "<=", float(nI)))
    return tuple(rows)


def rows_to_dense(rows: list[Row], num_vars: int):
    A = np.zeros((len(rows), num_vars))
    b = np.zeros(len(rows))
    senses: list[str] = []
    for r, (coefs, sense, rhs) in enumerate(rows):
        for idx, v in coefs.items():
            A[r, idx] = v
        senses.append(sense)
        b[r] = rhs
    return A, senses, b
