"""Dense two-phase simplex with variable bounds.

Solves  min c.x  s.t.  A x (<=|=|>=) b,  lb <= x <= ub  and reports
optimal/infeasible/unbounded. Written for the small LP relaxations that the
branch-and-bound search solves at every node; everything is kept in one
dense tableau and updated with rank-1 pivots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..network import TransitError

_RCOST_TOL = 1e-7
_RATIO_TOL = 1e-9
_FEAS_TOL = 1e-7
_MAX_ITER = 50_000
_BLAND_AFTER = 60  # consecutive degenerate pivots before switching rules

AT_LB, AT_UB, BASIC = 0, 1, 2


class SimplexError(TransitError):
    pass


@dataclass(frozen=True)
class LpResult:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None
    objective: float | None


def solve_lp(
    c: np.ndarray,
    A: np.ndarray,
    senses: list[str],
    b: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
) -> LpResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape

    if np.any(ub - lb < -_RATIO_TOL):
        return LpResult("infeasible", None, None)

    # shift x = w + lb so every structural has lower bound 0
    span = ub - lb
    rhs = b - A @ lb

    # slack columns for inequality rows
    slack_cols = []
    slack_span = []
    for r, s in enumerate(senses):
        if s == "<=":
            col = np.zeros(m)
            col[r] = 1.0
            slack_cols.append(col)
            slack_span.append(np.inf)
        elif s == ">=":
            col = np.zeros(m)
            col[r] = -1.0
            slack_cols.append(col)
            slack_span.append(np.inf)
        elif s != "=":
            raise ValueError(f"unknown row sense {s!r}")
    if slack_cols:
        A_full = np.hstack([A, np.array(slack_cols).T])
        span_full = np.concatenate([span, slack_span])
    else:
        A_full = A.copy()
        span_full = span.copy()

    # normalize rows so the right-hand side is nonnegative
    neg = rhs < 0
    A_full[neg] *= -1.0
    rhs = np.where(neg, -rhs, rhs)

    # rows whose (sign-adjusted) slack can seed the basis do so;
    # the rest get artificials
    n_real = A_full.shape[1]
    basis = np.full(m, -1, dtype=int)
    slack_at = 0
    slack_idx_of_row = {}
    for r, s in enumerate(senses):
        if s in ("<=", ">="):
            slack_idx_of_row[r] = n + slack_at
            slack_at += 1
    art_cols = []
    for r in range(m):
        j = slack_idx_of_row.get(r)
        if j is not None and A_full[r, j] == 1.0:
            basis[r] = j
        else:
            col = np.zeros(m)
            col[r] = 1.0
            art_cols.append(col)
            basis[r] = n_real + len(art_cols) - 1
    n_art = len(art_cols)
    if n_art:
        A_full = np.hstack([A_full, np.array(art_cols).T])
        span_full = np.concatenate([span_full, np.full(n_art, np.inf)])

    N = A_full.shape[1]
    status = np.full(N, AT_LB, dtype=np.int8)
    status[basis] = BASIC
    # fixed vars (span 0) stay nonbasic at their bound
    T = A_full.copy()
    xB = rhs.copy()

    state = _State(T, xB, basis, status, span_full)

    if n_art:
        c1 = np.zeros(N)
        c1[n_real:] = 1.0
        _iterate(state, c1, allow=np.arange(N))
        phase1 = float(c1[state.basis] @ state.xB)
        if phase1 > _FEAS_TOL:
            return LpResult("infeasible", None, None)
        # pin artificials at zero so phase 2 cannot move them
        state.span[n_real:] = 0.0

    c2 = np.zeros(N)
    c2[:n] = c
    unbounded = not _iterate(state, c2, allow=np.arange(n_real))
    if unbounded:
        return LpResult("unbounded", None, None)

    x_shift = np.zeros(N)
    x_shift[state.status == AT_UB] = state.span[state.status == AT_UB]
    x_shift[state.basis] = state.xB
    x = x_shift[:n] + lb
    return LpResult("optimal", x, float(c @ x))


class _State:
    __slots__ = ("T", "xB", "basis", "status", "span")

    def __init__(self, T, xB, basis, status, span):
        self.T = T
        self.xB = xB
        self.basis = basis
        self.status = status
        self.span = span


def _iterate(state: _State, c: np.ndarray, allow: np.ndarray) -> bool:
    """Run bounded simplex to optimality for cost vector c. Entering
    candidates come from ``allow``. Returns False on unboundedness."""
    T, span = state.T, state.span
    degenerate_streak = 0
    allowed = np.zeros(len(c), dtype=bool)
    allowed[allow] = True

    r = c - c[state.basis] @ T
    for it in range(_MAX_ITER):
        if it % 128 == 127:
            r = c - c[state.basis] @ T  # refresh against drift
        nonbasic = state.status != BASIC
        can_move = nonbasic & allowed & (span > _RATIO_TOL)
        lower = can_move & (state.status == AT_LB) & (r < -_RCOST_TOL)
        upper = can_move & (state.status == AT_UB) & (r > _RCOST_TOL)
        candidates = np.where(lower | upper)[0]
        if candidates.size == 0:
            return True

        bland = degenerate_streak >= _BLAND_AFTER
        if bland:
            e = int(candidates[0])  # Bland: lowest eligible index enters
        else:
            e = int(candidates[np.argmax(np.abs(r[candidates]))])
        sigma = 1.0 if state.status[e] == AT_LB else -1.0

        col = T[:, e]
        d = sigma * col
        # basic variables move by -d per unit step of the entering variable;
        # collect every blocking event, then take the tightest one
        limit = span[e] if np.isfinite(span[e]) else np.inf
        leave_row, leave_to = -1, AT_LB

        ratios = np.full(len(d), np.inf)
        to_ub = np.zeros(len(d), dtype=bool)
        pos = d > _RATIO_TOL
        ratios[pos] = state.xB[pos] / d[pos]
        neg = d < -_RATIO_TOL
        ub_basic = span[state.basis]
        with np.errstate(invalid="ignore"):
            caps = (ub_basic[neg] - state.xB[neg]) / (-d[neg])
        ratios[neg] = caps
        to_ub[neg] = True
        ratios = np.maximum(ratios, 0.0)

        k_min = float(np.min(ratios)) if len(ratios) else np.inf
        if k_min < limit - _RATIO_TOL:
            tied = np.where(ratios <= k_min + _RATIO_TOL)[0]
            if bland:
                # Bland: among tied rows the smallest basic variable leaves
                row = int(tied[np.argmin(state.basis[tied])])
            else:
                # prefer the largest pivot element for stability
                row = int(tied[np.argmax(np.abs(d[tied]))])
            limit = float(ratios[row])
            leave_row = row
            leave_to = AT_UB if to_ub[row] else AT_LB

        if not np.isfinite(limit):
            return False

        degenerate_streak = degenerate_streak + 1 if limit <= _RATIO_TOL else 0

        state.xB -= d * limit
        if leave_row < 0:
            # entering variable flips to its opposite bound, basis unchanged
            state.status[e] = AT_UB if state.status[e] == AT_LB else AT_LB
            continue

        # the point itself already moved above; pivoting only relabels the
        # basis, so the sole value change is the entering variable's row
        leaving = state.basis[leave_row]
        entering_value = limit if sigma > 0 else span[e] - limit
        pivot = T[leave_row, e]
        if abs(pivot) < 1e-11:
            raise SimplexError("numerically singular pivot")
        T[leave_row] /= pivot
        factor = T[:, e].copy()
        factor[leave_row] = 0.0
        T -= np.outer(factor, T[leave_row])
        state.xB[leave_row] = entering_value
        r -= r[e] * T[leave_row]  # same elimination keeps reduced costs

        state.status[leaving] = leave_to
        state.status[e] = BASIC
        state.basis[leave_row] = e

    raise SimplexError("iteration limit exceeded")
