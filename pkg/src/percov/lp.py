"""Dense two-phase primal simplex solver.

Small, deterministic and self-verifying: Bland's anti-cycling rule is always
on, the tableau is a plain dense numpy array, and every optimal point is
re-checked against the original constraints before it is returned.  Intended
for the desk-scale programs this package produces (tens to a few hundred
variables), not as a general-purpose LP library.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
MAX_ITER_FACTOR = 60


class LpError(Exception):
    """Malformed program or internal solver failure."""


@dataclass
class LinearProgram:
    """min c.x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  lo <= x <= hi.

    ``bounds`` holds one (lo, hi) pair per variable; ``None`` means
    unbounded on that side.  Empty constraint blocks may be passed as
    zero-row arrays or omitted via the factory helpers below.
    """

    c: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    bounds: list[tuple[float | None, float | None]]
    objective_const: float = 0.0

    @staticmethod
    def build(
        c,
        a_eq=None,
        b_eq=None,
        a_ub=None,
        b_ub=None,
        bounds=None,
        objective_const: float = 0.0,
    ) -> "LinearProgram":
        c = np.asarray(c, dtype=float)
        n = c.size
        if a_eq is None:
            a_eq, b_eq = np.zeros((0, n)), np.zeros(0)
        if a_ub is None:
            a_ub, b_ub = np.zeros((0, n)), np.zeros(0)
        a_eq = np.asarray(a_eq, dtype=float).reshape(-1, n)
        a_ub = np.asarray(a_ub, dtype=float).reshape(-1, n)
        b_eq = np.asarray(b_eq, dtype=float).reshape(-1)
        b_ub = np.asarray(b_ub, dtype=float).reshape(-1)
        if bounds is None:
            bounds = [(0.0, None)] * n
        if len(bounds) != n or a_eq.shape[0] != b_eq.size or a_ub.shape[0] != b_ub.size:
            raise LpError("inconsistent program dimensions")
        return LinearProgram(c, a_eq, b_eq, a_ub, b_ub, list(bounds), objective_const)

    @property
    def n_vars(self) -> int:
        return int(self.c.size)


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    # row duals in the KKT convention: y_ub >= 0, complementary with row
    # slack, and c + a_eq^T y_eq + a_ub^T y_ub = 0 on coordinates strictly
    # inside their bounds
    duals_eq: np.ndarray | None = None
    duals_ub: np.ndarray | None = None
    iterations: int = 0
    basis: list[int] = field(default_factory=list)


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factor = tab[:, col].copy()
    factor[row] = 0.0
    tab -= np.outer(factor, tab[row])


def _run_simplex(
    tab: np.ndarray, basis: list[int], allowed: np.ndarray
) -> tuple[str, int]:
    """Iterate Bland pivots on the canonical tableau until optimal/unbounded.

    ``tab`` is (m+1) x (n+1): constraint rows plus a reduced-cost row, rhs in
    the last column.  ``allowed`` masks columns eligible to enter (used to
    freeze artificials out of phase two).  The reduced-cost row is assumed
    canonical for the current basis on entry.
    """
    m = tab.shape[0] - 1
    n = tab.shape[1] - 1
    max_iter = MAX_ITER_FACTOR * (m + n) + 200
    for it in range(max_iter):
        red = tab[-1, :n]
        entering = -1
        for j in range(n):  # Bland: lowest index with negative reduced cost
            if allowed[j] and red[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return "optimal", it
        col = tab[:m, entering]
        best_ratio = None
        leaving = -1
        for i in range(m):
            if col[i] > PIVOT_TOL:
                ratio = tab[i, -1] / col[i]
                if (
                    best_ratio is None
                    or ratio < best_ratio - 1e-12
                    or (abs(ratio - best_ratio) <= 1e-12 and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            return "unbounded", it
        _pivot(tab, leaving, entering)
        basis[leaving] = entering
    raise LpError("simplex iteration limit exceeded")


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Two-phase primal simplex.  Returns an optimal basic solution.

    The program is shifted/split to standard form (all variables >= 0),
    slacks are added for inequality rows and artificials for whatever rows
    lack a natural basic column.  Phase one minimizes the artificial sum;
    phase two re-prices with the true objective.  Every "optimal" result is
    verified against the original constraints within ``FEAS_TOL``.
    """
    n = lp.n_vars
    # -- substitution to nonnegative space ---------------------------------
    # x_k = off_k + sgn_k * u_a  (+ optionally - u_b for free variables)
    col_of: list[tuple[int, int] | tuple[int, int, int]] = []
    offsets = np.zeros(n)
    signs = np.ones(n)
    extra_ub_rows: list[tuple[int, float]] = []  # (std column, upper value)
    ncols = 0
    for k, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and hi is not None and hi < lo - 1e-12:
            return LpSolution(status="infeasible")
        if lo is not None:
            offsets[k], signs[k] = lo, 1.0
            col_of.append((k, ncols))
            if hi is not None:
                extra_ub_rows.append((ncols, hi - lo))
            ncols += 1
        elif hi is not None:
            offsets[k], signs[k] = hi, -1.0
            col_of.append((k, ncols))
            ncols += 1
        else:
            col_of.append((k, ncols, ncols + 1))  # free: u - v
            ncols += 2

    def to_std(mat: np.ndarray) -> np.ndarray:
        out = np.zeros((mat.shape[0], ncols))
        for entry in col_of:
            if len(entry) == 2:
                k, j = entry
                out[:, j] = mat[:, k] * signs[k]
            else:
                k, j, j2 = entry
                out[:, j] = mat[:, k]
                out[:, j2] = -mat[:, k]
        return out

    eq_a = to_std(lp.a_eq)
    eq_b = lp.b_eq - lp.a_eq @ offsets
    ub_a = to_std(lp.a_ub)
    ub_b = lp.b_ub - lp.a_ub @ offsets
    if extra_ub_rows:
        rows = np.zeros((len(extra_ub_rows), ncols))
        rhs = np.zeros(len(extra_ub_rows))
        for r, (j, val) in enumerate(extra_ub_rows):
            rows[r, j] = 1.0
            rhs[r] = val
        ub_a = np.vstack([ub_a, rows])
        ub_b = np.concatenate([ub_b, rhs])
    c_std = to_std(lp.c.reshape(1, -1))[0]
    const = lp.objective_const + float(lp.c @ offsets)

    n_eq, n_ub = eq_a.shape[0], ub_a.shape[0]
    m = n_eq + n_ub
    if m == 0:
        # only bounds: minimize each coordinate independently
        x_std = np.zeros(ncols)
        for j in range(ncols):
            if c_std[j] < -PIVOT_TOL:
                return LpSolution(status="unbounded")
        return _finish(lp, x_std, col_of, offsets, signs, const, np.zeros(0), 0, [])

    a = np.vstack([eq_a, ub_a])
    b = np.concatenate([eq_b, ub_b])
    # slack columns for ub rows
    slack = np.zeros((m, n_ub))
    for i in range(n_ub):
        slack[n_eq + i, i] = 1.0
    a = np.hstack([a, slack])
    row_sign = np.ones(m)
    for i in range(m):
        if b[i] < 0:
            a[i] *= -1.0
            b[i] *= -1.0
            row_sign[i] = -1.0

    n_real = ncols + n_ub
    basis: list[int] = [-1] * m
    art_cols: list[int] = []
    for i in range(n_eq, m):
        j = ncols + (i - n_eq)
        if a[i, j] > 0.5:  # slack survived sign flip: natural basis column
            basis[i] = j
    n_art = sum(1 for v in basis if v < 0)
    art = np.zeros((m, n_art))
    k = 0
    for i in range(m):
        if basis[i] < 0:
            art[i, k] = 1.0
            basis[i] = n_real + k
            art_cols.append(n_real + k)
            k += 1
    full = np.hstack([a, art])
    n_total = full.shape[1]

    tab = np.zeros((m + 1, n_total + 1))
    tab[:m, :n_total] = full
    tab[:m, -1] = b
    # phase-one costs: 1 on artificials
    phase1_c = np.zeros(n_total)
    phase1_c[n_real:] = 1.0
    tab[-1, :n_total] = phase1_c
    for i in range(m):  # canonicalize reduced costs for the starting basis
        if phase1_c[basis[i]] != 0.0:
            tab[-1] -= phase1_c[basis[i]] * tab[i]
    allowed = np.ones(n_total, dtype=bool)
    status, it1 = _run_simplex(tab, basis, allowed)
    if status != "optimal":
        raise LpError("phase one terminated " + status)
    if -tab[-1, -1] > FEAS_TOL:  # leftover artificial mass
        return LpSolution(status="infeasible", iterations=it1)

    # drive remaining artificials out of the basis (or drop redundant rows)
    kept = list(range(m))
    drop_rows: list[int] = []
    for i in range(m):
        if basis[i] >= n_real:
            piv = -1
            for j in range(n_real):
                if abs(tab[i, j]) > PIVOT_TOL:
                    piv = j
                    break
            if piv >= 0:
                _pivot(tab, i, piv)
                basis[i] = piv
            else:
                drop_rows.append(i)
    if drop_rows:
        kept = [i for i in range(m) if i not in drop_rows]
        tab = tab[kept + [m]]
        basis = [basis[i] for i in kept]
        m = len(kept)

    # phase two
    full_c = np.zeros(n_total)
    full_c[:ncols] = c_std
    tab[-1, :] = 0.0
    tab[-1, :n_total] = full_c
    for i in range(m):
        if full_c[basis[i]] != 0.0:
            tab[-1] -= full_c[basis[i]] * tab[i]
    allowed = np.ones(n_total, dtype=bool)
    allowed[n_real:] = False
    status, it2 = _run_simplex(tab, basis, allowed)
    if status == "unbounded":
        return LpSolution(status="unbounded", iterations=it1 + it2)

    x_std = np.zeros(n_total)
    for i in range(m):
        x_std[basis[i]] = tab[i, -1]
    # Row duals: solve B^T y = c_B against the pre-pivot matrix, undo the
    # rhs sign flips, then negate to land in the KKT convention
    # (c + A_eq^T y_eq + A_ub^T y_ub vanishes on interior coordinates).
    duals = None
    try:
        bmat = full[kept][:, basis]
        y = np.linalg.solve(bmat.T, full_c[basis])
        y_all = np.zeros(len(row_sign))
        for idx, i in enumerate(kept):
            y_all[i] = y[idx]
        duals = -(y_all * row_sign)
    except np.linalg.LinAlgError:
        pass
    return _finish(
        lp,
        x_std[:ncols],
        col_of,
        offsets,
        signs,
        const,
        duals,
        it1 + it2,
        basis,
        n_eq=n_eq,
        n_ub_orig=lp.b_ub.size,
    )


def _finish(
    lp,
    u,
    col_of,
    offsets,
    signs,
    const,
    duals,
    iterations,
    basis,
    n_eq: int = 0,
    n_ub_orig: int = 0,
):
    x = np.array(offsets)
    for entry in col_of:
        if len(entry) == 2:
            k, j = entry
            x[k] = offsets[k] + signs[k] * u[j]
        else:
            k, j, j2 = entry
            x[k] = u[j] - u[j2]
    obj = float(lp.c @ x) + lp.objective_const
    _verify(lp, x)
    duals_eq = duals_ub = None
    if duals is not None and duals.size >= n_eq:
        duals_eq = duals[:n_eq]
        # ub rows follow the eq block; bound rows appended after them carry
        # no user-visible dual.  Sign flip: slack dual convention -> y >= 0.
        duals_ub = duals[n_eq : n_eq + n_ub_orig]
    return LpSolution(
        status="optimal",
        x=x,
        objective=obj,
        duals_eq=duals_eq,
        duals_ub=duals_ub,
        iterations=iterations,
        basis=list(basis),
    )


def _verify(lp: LinearProgram, x: np.ndarray) -> None:
    """Post-hoc feasibility check of a claimed-optimal point."""
    if lp.a_eq.shape[0]:
        res = np.abs(lp.a_eq @ x - lp.b_eq)
        if res.size and res.max() > FEAS_TOL:
            raise LpError(f"returned point violates an equality by {res.max():.2e}")
    if lp.a_ub.shape[0]:
        res = lp.a_ub @ x - lp.b_ub
        if res.size and res.max() > FEAS_TOL:
            raise LpError(f"returned point violates an inequality by {res.max():.2e}")
    for k, (lo, hi) in enumerate(lp.bounds):
        if lo is not None and x[k] < lo - FEAS_TOL:
            raise LpError(f"variable {k} below its lower bound")
        if hi is not None and x[k] > hi + FEAS_TOL:
            raise LpError(f"variable {k} above its upper bound")
