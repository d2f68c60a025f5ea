"""Dense-basis revised simplex solver for standard-form LPs.

Solves ``min c.x  s.t.  A x = b, x >= 0`` with a two-phase method: Phase I
artificial variables, product-form eta updates on top of a dense LU
factorization with periodic refactorization (every 50 pivots by default), and
Bland's anti-cycling rule after a long run of degenerate pivots.  Redundant
rows discovered at the end of Phase I are dropped before Phase II.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import InvalidInput, NumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"

_DENSE_LIMIT = 50_000_000  # entries; below this the constraint matrix is densified


@dataclass
class LpProblem:
    """Standard-form LP data.  ``var_pairs`` and ``context`` carry the chain
    problem bookkeeping (simplex -> (plus, minus) column indices) when present."""

    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    var_pairs: dict | None = None
    context: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        if not sp.issparse(self.A):
            self.A = sp.csc_matrix(np.atleast_2d(np.asarray(self.A, dtype=float)))
        else:
            self.A = self.A.tocsc()
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,):
            raise InvalidInput("inconsistent LP dimensions")

    @property
    def shape(self):
        return self.A.shape

    def to_text(self):
        """Plain-text serialization: header, cost line, sparse triplets, rhs."""
        m, n = self.A.shape
        coo = self.A.tocoo()
        lines = [f"{n} {m}"]
        lines.append(" ".join(format(v, ".17g") for v in self.c))
        lines.append(str(coo.nnz))
        for i, j, v in zip(coo.row, coo.col, coo.data):
            lines.append(f"{i} {j} {format(v, '.17g')}")
        lines.append(" ".join(format(v, ".17g") for v in self.b))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        n, m = (int(t) for t in lines[0].split())
        c = np.array([float(t) for t in lines[1].split()])
        nnz = int(lines[2])
        ii, jj, vv = [], [], []
        for ln in lines[3:3 + nnz]:
            i, j, v = ln.split()
            ii.append(int(i))
            jj.append(int(j))
            vv.append(float(v))
        b = np.array([float(t) for t in lines[3 + nnz].split()])
        A = sp.coo_matrix((vv, (ii, jj)), shape=(m, n)).tocsc()
        return cls(c=c, A=A, b=b)


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    status: str
    basis: np.ndarray  # structural column indices of the final basis
    iterations: int
    phase1_objective: float = 0.0

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Basis:
    """LU factors of the basis matrix plus product-form eta updates."""

    def __init__(self, columns):
        self.rcond = 1.0
        self.refactor(columns)

    def refactor(self, columns):
        try:
            self.lu = lu_factor(columns)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis matrix") from exc
        self.etas = []
        anorm = float(np.abs(columns).sum(axis=0).max()) if columns.size else 0.0
        self.rcond = float(lapack.dgecon(self.lu[0], anorm, norm="1")[0]) if columns.size else 1.0

    def ftran(self, v):
        x = lu_solve(self.lu, v)
        for r, d in self.etas:
            xr = x[r] / d[r]
            x -= d * xr
            x[r] = xr
        return x

    def btran(self, c):
        y = np.array(c, dtype=float)
        for r, d in reversed(self.etas):
            y[r] = (y[r] - d @ y + d[r] * y[r]) / d[r]
        return lu_solve(self.lu, y, trans=1)

    def push(self, r, d):
        self.etas.append((int(r), np.array(d, dtype=float)))


class _Tableau:
    """One phase's working system: columns, basis bookkeeping, pivot loop."""

    def __init__(self, A, b, n_struct, art_rows, state, refactor_every, tol):
        self.m = A.shape[0]
        self.n = n_struct
        self.sparse = sp.issparse(A)
        self.A = A
        self.AT = A.T.tocsr() if self.sparse else None
        self.b = b
        self.art_rows = art_rows  # artificial j = n + k sits on row art_rows[k]
        self.state = state
        self.refactor_every = refactor_every
        self.tol = tol

    def column(self, j):
        if j < self.n:
            if self.sparse:
                return np.asarray(self.A[:, [j]].todense()).ravel()
            return self.A[:, j].astype(float, copy=True)
        col = np.zeros(self.m)
        col[self.art_rows[j - self.n]] = 1.0
        return col

    def basis_matrix(self, basis):
        cols = np.zeros((self.m, len(basis)))
        for k, j in enumerate(basis):
            cols[:, k] = self.column(j)
        return cols

    def start(self, basis):
        self.basis = np.asarray(basis, dtype=int)
        self.fac = _Basis(self.basis_matrix(self.basis))
        self.x_b = np.maximum(self.fac.ftran(self.b), 0.0)

    def refactor(self):
        self.fac.refactor(self.basis_matrix(self.basis))
        if self.fac.rcond < 1e-12:
            if self.state.get("retried"):
                raise NumericalFailure(
                    f"basis condition estimate {1.0 / max(self.fac.rcond, 1e-300):.2e} > 1e12"
                )
            self.state["retried"] = True
        else:
            self.state["retried"] = False
        self.x_b = np.maximum(self.fac.ftran(self.b), 0.0)

    def reduced_costs(self, cost):
        y = self.fac.btran(cost[self.basis])
        z = np.empty(self.n + len(self.art_rows))
        if self.sparse:
            z[:self.n] = cost[:self.n] - self.AT @ y
        else:
            z[:self.n] = cost[:self.n] - self.A.T @ y
        if len(self.art_rows):
            z[self.n:] = cost[self.n:] - y[self.art_rows]
        z[self.basis] = 0.0
        return z

    def run(self, cost, max_iterations, bland_after, allow_artificial_entry):
        state = self.state
        price_tol = self.tol * (1.0 + float(np.max(np.abs(cost))) if cost.size else 1.0)
        while True:
            if state["iters"] >= max_iterations:
                return ITERATION_LIMIT
            z = self.reduced_costs(cost)
            if not allow_artificial_entry and len(self.art_rows):
                z[self.n:] = np.inf
            eligible = np.nonzero(z < -price_tol)[0]
            if eligible.size == 0:
                return OPTIMAL
            if state["bland"]:
                enter = int(eligible[0])
            else:
                enter = int(eligible[np.argmin(z[eligible])])
            d = self.fac.ftran(self.column(enter))
            piv_tol = 1e-9 * max(1.0, float(np.max(np.abs(d))))
            pos = np.nonzero(d > piv_tol)[0]
            if pos.size == 0:
                return UNBOUNDED
            ratios = self.x_b[pos] / d[pos]
            theta = float(ratios.min())
            tie = pos[np.abs(self.x_b[pos] - theta * d[pos]) <= self.tol * (1.0 + abs(theta))]
            if tie.size == 0:
                tie = pos[ratios <= theta + self.tol]
            if state["bland"]:
                leave = int(tie[np.argmin(self.basis[tie])])
            else:
                leave = int(tie[np.argmax(d[tie])])
            if theta <= self.tol:
                state["degenerate_run"] += 1
                if state["degenerate_run"] > bland_after:
                    state["bland"] = True
            else:
                state["degenerate_run"] = 0
            self.x_b = self.x_b - theta * d
            self.x_b[leave] = theta
            np.maximum(self.x_b, 0.0, out=self.x_b)
            self.basis[leave] = enter
            state["iters"] += 1
            if len(self.fac.etas) + 1 >= self.refactor_every:
                self.refactor()
            else:
                self.fac.push(leave, d)


def solve_lp(problem, *, max_iterations=None, refactor_every=50,
             bland_after=1000, tol=1e-9):
    """Two-phase revised simplex.  Returns an :class:`LpSolution`.

    Use :func:`certify_solution` to re-check a claimed optimum independently.
    """
    m, n = problem.A.shape
    if m == 0:
        x = np.zeros(n)
        return LpSolution(x, 0.0, OPTIMAL, np.array([], dtype=int), 0)
    signs = np.where(problem.b < 0, -1.0, 1.0)
    A = sp.diags(signs) @ problem.A
    b = signs * problem.b
    if m * n <= _DENSE_LIMIT:
        A = np.asarray(A.todense())
    else:
        A = A.tocsc()
    if max_iterations is None:
        max_iterations = 20_000 + 10 * (m + n)

    state = {"iters": 0, "degenerate_run": 0, "bland": False, "retried": False}

    # ---- Phase I ------------------------------------------------------
    tab = _Tableau(A, b, n, np.arange(m), state, refactor_every, tol)
    tab.start(np.arange(n, n + m))
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    status = tab.run(cost1, max_iterations, bland_after, allow_artificial_entry=True)
    phase1_obj = float(cost1[tab.basis] @ tab.x_b)
    if status == ITERATION_LIMIT:
        return LpSolution(np.zeros(n), math.inf, status, tab.basis.copy(),
                          state["iters"], phase1_obj)
    if status == UNBOUNDED:
        raise NumericalFailure("phase I reported unbounded")
    if phase1_obj > 1e-7 * (1.0 + float(np.abs(b).sum())):
        return LpSolution(np.zeros(n), math.inf, INFEASIBLE, tab.basis.copy(),
                          state["iters"], phase1_obj)

    # ---- Drive leftover artificials out; mark redundant rows ----------
    redundant = []
    basic_set = set(int(j) for j in tab.basis)
    for k in range(m):
        if tab.basis[k] < n:
            continue
        e = np.zeros(m)
        e[k] = 1.0
        w = tab.fac.btran(e)
        row = (tab.AT @ w) if tab.sparse else (A.T @ w)
        row[[j for j in range(n) if j in basic_set]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= 1e-9:
            redundant.append(int(tab.basis[k]) - n)  # this row is dependent
            continue
        d = tab.fac.ftran(tab.column(j))
        basic_set.discard(int(tab.basis[k]))
        basic_set.add(j)
        tab.basis[k] = j
        if len(tab.fac.etas) + 1 >= refactor_every:
            tab.refactor()
        else:
            tab.fac.push(k, d)

    keep = np.array(sorted(set(range(m)) - set(redundant)), dtype=int)
    A2 = A[keep] if not sp.issparse(A) else A.tocsr()[keep].tocsc()
    b2 = b[keep]
    basis2 = np.array([j for j in tab.basis if j < n], dtype=int)
    if len(basis2) != len(keep):
        raise NumericalFailure("rank bookkeeping failed after phase I")

    # ---- Phase II ------------------------------------------------------
    state["bland"] = False
    state["degenerate_run"] = 0
    tab2 = _Tableau(A2, b2, n, np.arange(0), state, refactor_every, tol)
    tab2.start(basis2)
    status = tab2.run(np.asarray(problem.c, dtype=float), max_iterations,
                      bland_after, allow_artificial_entry=False)

    x = np.zeros(n)
    x[tab2.basis] = tab2.x_b
    objective = float(problem.c @ x)
    return LpSolution(x, objective, status, tab2.basis.copy(), state["iters"],
                      phase1_obj)


def certify_solution(problem, solution, tol_feasibility=1e-7, tol_optimality=1e-8):
    """Independent KKT check of a claimed-optimal solution.

    Recomputes primal feasibility, nonnegativity, dual prices from the
    returned basis (least squares on the original data), reduced-cost signs
    and complementary slackness.  Returns a dict of residuals plus ``ok``.
    """
    A = problem.A.tocsc()
    m, n = A.shape
    x = solution.x
    residual = float(np.max(np.abs(A @ x - problem.b))) if m else 0.0
    b_scale = 1.0 + (float(np.max(np.abs(problem.b))) if m else 0.0)
    feasible = residual <= tol_feasibility * b_scale and float(x.min(initial=0.0)) >= -1e-9

    structural = [int(j) for j in solution.basis if j < n]
    cols = A[:, structural].toarray() if structural else np.zeros((m, 0))
    cb = problem.c[structural]
    y, *_ = np.linalg.lstsq(cols.T, cb, rcond=None) if m else (np.zeros(0),)
    z = problem.c - (A.T @ y if m else 0.0)
    c_scale = 1.0 + (float(np.max(np.abs(problem.c))) if n else 0.0)
    dual_ok = float(z.min(initial=0.0)) >= -tol_optimality * c_scale
    comp = float(np.max(np.abs(x * z))) if n else 0.0
    comp_ok = comp <= 1e-6 * c_scale * (1.0 + float(np.max(np.abs(x), initial=0.0)))
    return {
        "ok": bool(feasible and dual_ok and comp_ok),
        "primal_residual": residual,
        "min_x": float(x.min(initial=0.0)),
        "min_reduced_cost": float(z.min(initial=0.0)),
        "complementarity": comp,
    }
