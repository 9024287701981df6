"""Small exact MILP solver: bounded-variable two-phase simplex plus branch and bound.

Built for the heuristic subproblems of this package: a few hundred variables,
dense constraint rows, every integer variable carrying a finite cap.  No
cutting planes, no presolve, no sparse algebra -- correctness over speed at
this scale.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = ["MilpProblem", "MilpSolution", "MilpError", "SolveStatus", "solve"]

_FEAS_TOL = 1e-9
_COST_TOL = 1e-9
_PIVOT_TOL = 1e-10
_INT_TOL = 1e-6


class MilpError(ValueError):
    """Malformed problem or solver breakdown."""


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    CAP_REACHED = "cap-reached"


@dataclass
class MilpProblem:
    """Linear objective over integer/binary variables under linear constraints.

    ``constraints`` is a list of ``(coefficients, relation, rhs)`` with
    relation one of ``"<="``, ``"="``, ``">="``.  Integer variables must have
    finite bounds; ``cap_vars`` names the variables whose upper bound is an
    artificial truncation cap rather than a structural bound, so the solver
    can flag solutions that press against it.
    """

    objective: np.ndarray
    sense: str
    constraints: list[tuple[np.ndarray, str, float]]
    lower: np.ndarray
    upper: np.ndarray
    integer: np.ndarray
    cap_vars: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        self.integer = np.asarray(self.integer, dtype=bool)
        n = self.objective.size
        if self.sense not in ("min", "max"):
            raise MilpError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if not (self.lower.size == self.upper.size == self.integer.size == n):
            raise MilpError("variable attribute lengths disagree")
        if np.any(self.lower > self.upper + _FEAS_TOL):
            raise MilpError("some lower bound exceeds its upper bound")
        if np.any(self.integer & ~np.isfinite(self.upper)):
            raise MilpError("integer variables must be capped with finite upper bounds")
        if np.any(self.integer & ~np.isfinite(self.lower)):
            raise MilpError("integer variables must have finite lower bounds")
        if not np.all(np.isfinite(self.objective)):
            raise MilpError("objective coefficients must be finite")
        self.constraints = [
            (np.asarray(a, dtype=np.float64), rel, float(b)) for a, rel, b in self.constraints
        ]
        for a, rel, b in self.constraints:
            if a.size != n:
                raise MilpError("constraint coefficient length disagrees with variable count")
            if rel not in ("<=", "=", ">="):
                raise MilpError(f"unknown relation {rel!r}")
            if not (np.all(np.isfinite(a)) and math.isfinite(b)):
                raise MilpError("constraint entries must be finite")

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_int_vars(self) -> int:
        return int(np.count_nonzero(self.integer & ~self._is_binary()))

    @property
    def num_bin_vars(self) -> int:
        return int(np.count_nonzero(self.integer & self._is_binary()))

    def _is_binary(self) -> np.ndarray:
        return (self.lower == 0) & (self.upper == 1)


@dataclass
class MilpSolution:
    status: SolveStatus
    values: np.ndarray | None
    objective_value: float | None


class _LpResult(Enum):
    OPTIMAL = 0
    INFEASIBLE = 1


_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


def _solve_lp(
    rows: np.ndarray,
    rels: list[str],
    rhs: np.ndarray,
    cost: np.ndarray,
    upper: np.ndarray,
) -> tuple[_LpResult, np.ndarray | None, float]:
    """Minimize ``cost @ x`` subject to ``rows x (rel) rhs`` and ``0 <= x <= upper``.

    Dense two-phase primal simplex with bound handling: nonbasic variables
    rest at either bound, the ratio test allows bound flips, and basic
    variables may leave at their upper bound.  Dantzig pricing with a Bland
    fallback after a run of degenerate pivots.
    """
    m, n = rows.shape

    # Canonical form: flip rows until rhs >= 0, then append one slack column
    # per inequality and one artificial per row lacking a ready basic column.
    rows = rows.copy()
    rhs = rhs.copy()
    rels = list(rels)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] *= -1.0
            rhs[i] = -rhs[i]
            rels[i] = {"<=": ">=", ">=": "<=", "=": "="}[rels[i]]

    slack_rows = [i for i, rel in enumerate(rels) if rel in ("<=", ">=")]
    art_rows = [i for i, rel in enumerate(rels) if rel in (">=", "=")]
    n_slack = len(slack_rows)
    n_art = len(art_rows)
    total = n + n_slack + n_art

    T = np.zeros((m, total))
    T[:, :n] = rows
    ub = np.full(total, np.inf)
    ub[:n] = upper

    slack_of_row: dict[int, int] = {}
    for k, i in enumerate(slack_rows):
        col = n + k
        T[i, col] = 1.0 if rels[i] == "<=" else -1.0
        slack_of_row[i] = col
    art_of_row: dict[int, int] = {}
    for k, i in enumerate(art_rows):
        col = n + n_slack + k
        T[i, col] = 1.0
        art_of_row[i] = col

    basis = np.empty(m, dtype=np.int64)
    for i in range(m):
        basis[i] = art_of_row.get(i, slack_of_row.get(i, -1))
        if basis[i] < 0:
            raise MilpError("internal: row without a starting basic variable")

    status = np.full(total, _AT_LOWER, dtype=np.int8)
    status[basis] = _BASIC
    values = rhs.copy()

    art_mask = np.zeros(total, dtype=bool)
    art_mask[n + n_slack :] = True

    def run_phase(c_full: np.ndarray, allow_enter: np.ndarray) -> None:
        nonlocal values, T
        red = c_full - T.T @ c_full[basis]
        degenerate_run = 0
        max_iter = 200 * (m + total + 10)
        for _ in range(max_iter):
            bland = degenerate_run > 40
            lower_cand = (status == _AT_LOWER) & allow_enter & (red < -_COST_TOL)
            upper_cand = (status == _AT_UPPER) & allow_enter & (red > _COST_TOL)
            if not (lower_cand.any() or upper_cand.any()):
                return
            if bland:
                idx = np.flatnonzero(lower_cand | upper_cand)
                j = int(idx[0])
            else:
                score = np.where(lower_cand, -red, 0.0)
                score = np.where(upper_cand, red, score)
                j = int(np.argmax(score))
            direction = 1.0 if status[j] == _AT_LOWER else -1.0
            col = T[:, j]
            move = direction * col

            # Ratio test: basic variables leaving at either bound, or the
            # entering variable flipping to its opposite bound.
            ub_basis = ub[basis]
            dec = move > _PIVOT_TOL
            inc = (move < -_PIVOT_TOL) & np.isfinite(ub_basis)
            ratios = np.full(m, math.inf)
            ratios[dec] = np.maximum(values[dec], 0.0) / move[dec]
            ratios[inc] = np.maximum(ub_basis[inc] - values[inc], 0.0) / (-move[inc])
            row_min = float(ratios.min()) if m else math.inf
            flip_limit = ub[j] if math.isfinite(ub[j]) else math.inf
            if math.isinf(row_min) and math.isinf(flip_limit):
                raise MilpError("LP relaxation is unbounded")

            if flip_limit <= row_min + 1e-12:
                theta, leave_row = flip_limit, -1
                leave_at_upper = False
            else:
                theta = row_min
                tied = np.flatnonzero(ratios <= row_min + 1e-12)
                if bland:
                    leave_row = int(tied[np.argmin(basis[tied])])
                else:
                    leave_row = int(tied[np.argmax(np.abs(col[tied]))])
                leave_at_upper = bool(inc[leave_row])
            degenerate_run = degenerate_run + 1 if theta <= 1e-12 else 0

            if leave_row < 0:
                # Bound flip: no basis change, tableau untouched.
                values -= move * theta
                status[j] = _AT_UPPER if status[j] == _AT_LOWER else _AT_LOWER
                continue

            k = int(basis[leave_row])
            entering_value = (0.0 if status[j] == _AT_LOWER else ub[j]) + direction * theta
            values = values - move * theta
            values[leave_row] = entering_value
            status[k] = _AT_UPPER if leave_at_upper else _AT_LOWER
            status[j] = _BASIC
            basis[leave_row] = j

            piv = T[leave_row, j]
            T[leave_row, :] /= piv
            colv = T[:, j].copy()
            colv[leave_row] = 0.0
            T -= np.outer(colv, T[leave_row, :])
            red = red - red[j] * T[leave_row, :]
        raise MilpError("simplex iteration limit exceeded")

    if n_art:
        c1 = np.zeros(total)
        c1[art_mask] = 1.0
        run_phase(c1, allow_enter=np.ones(total, dtype=bool))
        art_basic = np.isin(basis, np.flatnonzero(art_mask))
        if float(values[art_basic].sum()) > 1e-7:
            return _LpResult.INFEASIBLE, None, math.inf
        # Lock artificials at zero so phase 2 cannot let a basic one drift up.
        ub[art_mask] = 0.0

    c2 = np.zeros(total)
    c2[:n] = cost
    run_phase(c2, allow_enter=~art_mask)

    x = np.zeros(total)
    at_upper = status == _AT_UPPER
    x[at_upper] = ub[at_upper]
    x[basis] = values
    obj = float(cost @ x[:n])
    return _LpResult.OPTIMAL, x[:n].copy(), obj


def _lp_for_bounds(problem: MilpProblem, cost: np.ndarray, lower: np.ndarray, upper: np.ndarray):
    """Shift variables to zero lower bounds and solve the LP relaxation."""
    if np.any(lower > upper + _FEAS_TOL):
        return _LpResult.INFEASIBLE, None, math.inf
    rows = np.empty((len(problem.constraints), problem.num_vars))
    rels = []
    rhs = np.empty(len(problem.constraints))
    for i, (a, rel, b) in enumerate(problem.constraints):
        rows[i] = a
        rels.append(rel)
        rhs[i] = b - a @ lower
    result, x, _ = _solve_lp(rows, rels, rhs, cost, upper - lower)
    if result is _LpResult.INFEASIBLE:
        return result, None, math.inf
    x = x + lower
    return result, x, float(cost @ x)


def _feasible(problem: MilpProblem, x: np.ndarray, tol: float = 1e-6) -> bool:
    if np.any(x < problem.lower - tol) or np.any(x > problem.upper + tol):
        return False
    for a, rel, b in problem.constraints:
        v = float(a @ x)
        if rel == "<=" and v > b + tol:
            return False
        if rel == ">=" and v < b - tol:
            return False
        if rel == "=" and abs(v - b) > tol:
            return False
    return True


def solve(
    problem: MilpProblem,
    *,
    relax_integrality: bool = False,
    node_limit: int = 100_000,
) -> MilpSolution:
    """Solve to proven optimality by best-bound branch and bound.

    Branching picks the most fractional integer variable; ties and node
    ordering are deterministic.  ``CAP_REACHED`` is reported when the optimum
    presses against a truncation cap (see ``MilpProblem.cap_vars``), in which
    case callers must treat the value as unreliable.
    """
    sign = 1.0 if problem.sense == "min" else -1.0
    cost = sign * problem.objective

    result, x, obj = _lp_for_bounds(problem, cost, problem.lower, problem.upper)
    if result is _LpResult.INFEASIBLE:
        return MilpSolution(SolveStatus.INFEASIBLE, None, None)
    if relax_integrality:
        return MilpSolution(_cap_status(problem, x), x, sign * obj)

    int_idx = np.flatnonzero(problem.integer)
    # An all-integer problem with integral costs lets LP bounds round up.
    integral_obj = bool(
        np.all(problem.integer) and np.all(problem.objective == np.round(problem.objective))
    )

    best_x: np.ndarray | None = None
    best_obj = math.inf
    counter = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray, np.ndarray]] = []
    heapq.heappush(heap, (obj, counter, problem.lower.copy(), problem.upper.copy(), x))

    nodes = 0
    while heap:
        bound, _, lo, hi, x = heapq.heappop(heap)
        eff = math.ceil(bound - _INT_TOL) if integral_obj else bound
        if eff >= best_obj - 1e-9:
            break
        nodes += 1
        if nodes > node_limit:
            raise MilpError(f"branch-and-bound node limit {node_limit} exceeded")

        frac = np.abs(x[int_idx] - np.round(x[int_idx]))
        if frac.size == 0 or float(frac.max()) <= _INT_TOL:
            xi = x.copy()
            xi[int_idx] = np.round(xi[int_idx])
            if not _feasible(problem, xi):
                raise MilpError("rounded LP vertex violates constraints")
            obj_i = float(cost @ xi)
            if obj_i < best_obj - 1e-12:
                best_obj = obj_i
                best_x = xi
            continue

        j = int(int_idx[int(np.argmin(np.abs(frac - 0.5)))])
        vj = float(x[j])
        for child_lo, child_hi in (
            (lo, _with(hi, j, math.floor(vj))),
            (_with(lo, j, math.ceil(vj)), hi),
        ):
            result, cx, cobj = _lp_for_bounds(problem, cost, child_lo, child_hi)
            if result is _LpResult.INFEASIBLE:
                continue
            ceff = math.ceil(cobj - _INT_TOL) if integral_obj else cobj
            if ceff >= best_obj - 1e-9:
                continue
            counter += 1
            heapq.heappush(heap, (cobj, counter, child_lo, child_hi, cx))

    if best_x is None:
        return MilpSolution(SolveStatus.INFEASIBLE, None, None)
    return MilpSolution(_cap_status(problem, best_x), best_x, sign * best_obj)


def _with(arr: np.ndarray, j: int, v: float) -> np.ndarray:
    out = arr.copy()
    out[j] = v
    return out


def _cap_status(problem: MilpProblem, x: np.ndarray) -> SolveStatus:
    for j in problem.cap_vars:
        if x[j] >= problem.upper[j] - 0.5:
            return SolveStatus.CAP_REACHED
    return SolveStatus.OPTIMAL
