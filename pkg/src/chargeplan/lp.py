"""Dense two-phase simplex with dual recovery.

Problem sizes here are tens of rows, so a dependency-free tableau solver
is fast enough and keeps results reproducible to the bit. Bland's rule
guards against cycling; pivots below 1e-9 are treated as zero.

solve_lp minimizes c @ x subject to A_eq @ x == b_eq, A_ub @ x <= b_ub and
per-variable bounds. Duals come back per constraint row: an equality dual
is the marginal objective change per unit of its right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    status: str
    x: np.ndarray | None = None
    objective: float = 0.0
    duals_eq: np.ndarray | None = None
    duals_ub: np.ndarray | None = None
    dual_objective: float = 0.0


def solve_lp(
    c,
    A_eq=None,
    b_eq=None,
    A_ub=None,
    b_ub=None,
    bounds=None,
) -> LpResult:
    """Minimize c @ x with equality rows, inequality rows and variable bounds.

    bounds is a list of (lo, hi) per variable; lo may be -inf (the variable
    is split into a positive pair), hi may be +inf. Default is (0, +inf).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(np.asarray(b_eq, dtype=float))
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(np.asarray(b_ub, dtype=float))
    if bounds is None:
        bounds = [(0.0, np.inf)] * n

    # Rewrite variables onto x' >= 0:
    #   finite lower bound:  x_j = lo_j + x'_j
    #   free variable:       x_j = x+_j - x-_j
    # Finite upper bounds become extra <= rows on the rewritten variables.
    col_plus = np.zeros(n, dtype=int)
    col_minus = np.full(n, -1, dtype=int)
    shift = np.zeros(n)
    cols = 0
    bound_rows: list[tuple[int, float]] = []  # (original var, rhs in shifted space)
    for j, (lo, hi) in enumerate(bounds):
        if lo == -np.inf:
            col_plus[j] = cols
            col_minus[j] = cols + 1
            cols += 2
            if hi != np.inf:
                bound_rows.append((j, hi))
        else:
            shift[j] = lo
            col_plus[j] = cols
            cols += 1
            if hi != np.inf:
                bound_rows.append((j, hi - lo))

    def rewrite(A: np.ndarray) -> np.ndarray:
        out = np.zeros((A.shape[0], cols))
        for j in range(n):
            out[:, col_plus[j]] += A[:, j]
            if col_minus[j] >= 0:
                out[:, col_minus[j]] -= A[:, j]
        return out

    c2 = np.zeros(cols)
    for j in range(n):
        c2[col_plus[j]] += c[j]
        if col_minus[j] >= 0:
            c2[col_minus[j]] -= c[j]

    Aeq2 = rewrite(A_eq)
    beq2 = b_eq - A_eq @ shift if A_eq.size else b_eq.copy()
    Aub2 = rewrite(A_ub) if A_ub.size else np.zeros((0, cols))
    bub2 = b_ub - A_ub @ shift if A_ub.size else b_ub.copy()
    for j, cap in bound_rows:
        row = np.zeros((1, cols))
        row[0, col_plus[j]] = 1.0
        if col_minus[j] >= 0:
            row[0, col_minus[j]] = -1.0
        Aub2 = np.vstack([Aub2, row])
        bub2 = np.append(bub2, cap)

    me = Aeq2.shape[0]
    mu = Aub2.shape[0]
    m = me + mu
    art0 = cols + mu  # columns: vars | slacks | artificials
    total = art0 + m
    A = np.zeros((m, total))
    b = np.zeros(m)
    if me:
        A[:me, :cols] = Aeq2
        b[:me] = beq2
    if mu:
        A[me:, :cols] = Aub2
        for i in range(mu):
            A[me + i, cols + i] = 1.0
        b[me:] = bub2
    flipped = b < 0
    A[flipped] *= -1.0
    b[flipped] *= -1.0
    for i in range(m):
        A[i, art0 + i] = 1.0

    T = np.hstack([A, b[:, None]])
    basis = list(range(art0, art0 + m))

    def pivot(row: int, col: int) -> None:
        T[row] /= T[row, col]
        for r in range(m):
            if r != row and T[r, col] != 0.0:
                T[r] -= T[r, col] * T[row]
        basis[row] = col

    def run_simplex(cost: np.ndarray, allowed: int) -> bool:
        """Bland-rule simplex over columns [0, allowed); True iff optimal."""
        in_basis = set(basis)
        while True:
            cb = cost[basis]
            reduced = cost[:allowed] - cb @ T[:, :allowed]
            entering = -1
            for j in range(allowed):
                if j not in in_basis and reduced[j] < -PIVOT_TOL:
                    entering = j
                    break
            if entering < 0:
                return True
            ratios = [
                (T[r, -1] / T[r, entering], basis[r], r)
                for r in range(m)
                if T[r, entering] > PIVOT_TOL
            ]
            if not ratios:
                return False
            _, _, row = min(ratios)
            in_basis.discard(basis[row])
            in_basis.add(entering)
            pivot(row, entering)

    # phase 1: drive artificials to zero
    cost1 = np.zeros(total)
    cost1[art0:] = 1.0
    run_simplex(cost1, art0)
    if float(cost1[basis] @ T[:, -1]) > 1e-7:
        return LpResult(status=INFEASIBLE)
    for r in range(m):
        if basis[r] >= art0:
            for j in range(art0):
                if abs(T[r, j]) > PIVOT_TOL:
                    pivot(r, j)
                    break
            # an all-zero row is redundant; its artificial stays basic at 0

    # phase 2 over real columns only
    cost2 = np.zeros(total)
    cost2[:cols] = c2
    if not run_simplex(cost2, art0):
        return LpResult(status=UNBOUNDED)

    x2 = np.zeros(total)
    for r, col in enumerate(basis):
        x2[col] = T[r, -1]
    x = shift.copy()
    for j in range(n):
        x[j] += x2[col_plus[j]]
        if col_minus[j] >= 0:
            x[j] -= x2[col_minus[j]]
    objective = float(c @ x)

    # Duals: y = c_B @ B^-1, and B^-1 lives in the artificial columns.
    # A row that was sign-flipped flips its dual back.
    y = cost2[basis] @ T[:, art0 : art0 + m]
    y = np.where(flipped, -y, y)
    duals_eq = y[:me].copy()
    duals_ub = y[me : me + b_ub.size].copy()
    # Standard-form strong duality, then undo the lower-bound shift.
    dual_objective = float(beq2 @ y[:me]) + float(bub2 @ y[me:]) + float(c @ shift)
    return LpResult(
        status=OPTIMAL,
        x=x,
        objective=objective,
        duals_eq=duals_eq,
        duals_ub=duals_ub,
        dual_objective=dual_objective,
    )
