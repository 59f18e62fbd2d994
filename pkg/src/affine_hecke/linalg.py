"""Exact linear algebra over Q and Z: solving, Smith form, and a small simplex.

Everything here works on tuples/lists of ints or Fractions.  No floats are
allowed anywhere in the package; alcove membership and lattice quotients are
integer-threshold decisions and rounding would silently corrupt them.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence


Vec = tuple  # tuple of int | Fraction
Mat = tuple  # tuple of row tuples


def vec(v) -> tuple:
    return tuple(v)


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vec_neg(a):
    return tuple(-x for x in a)


def vec_scale(c, a):
    return tuple(c * x for x in a)


def vec_dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def mat_vec(M, v):
    return tuple(vec_dot(row, v) for row in M)


def mat_mul(A, B):
    bt = list(zip(*B))
    return tuple(tuple(vec_dot(row, col) for col in bt) for row in A)


def mat_transpose(M):
    return tuple(zip(*M))


def mat_identity(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_eq(A, B):
    return all(all(x == y for x, y in zip(r, s)) for r, s in zip(A, B))


def _to_frac_rows(M):
    return [[Fraction(x) for x in row] for row in M]


def row_reduce(M: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q.  Returns (rref, pivot column list)."""
    R = _to_frac_rows(M)
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        pv = R[r][c]
        R[r] = [x / pv for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def rank(M) -> int:
    if not M:
        return 0
    return len(row_reduce(M)[1])


def solve(A, b) -> Optional[tuple]:
    """One solution of A x = b over Q, or None if inconsistent."""
    if not A:
        return ()
    n = len(A[0])
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    R, pivots = row_reduce(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = R[i][n]
    return tuple(x)


def nullspace(A) -> list[tuple]:
    """Basis of the kernel of A over Q."""
    if not A:
        return []
    n = len(A[0])
    R, pivots = row_reduce(A)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][fc]
        basis.append(tuple(v))
    return basis


def mat_inverse(M) -> Optional[tuple]:
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    R, pivots = row_reduce(aug)
    if pivots[:n] != list(range(n)):
        return None
    return tuple(tuple(R[i][n:]) for i in range(n))


def is_integer_matrix(M) -> bool:
    return all(Fraction(x).denominator == 1 for row in M for x in row)


def solve_affine(A, b) -> Optional[tuple[tuple, list[tuple]]]:
    """Full solution set of A x = b: (particular, kernel basis), or None."""
    p = solve(A, b)
    if p is None:
        return None
    return p, nullspace(A)


# ---------------------------------------------------------------------------
# Smith normal form over Z


def smith_normal_form(A: Sequence[Sequence[int]]):
    """Smith normal form: returns (D, U, V) with U A V = D.

    U, V are unimodular (built from elementary integer operations) and D is
    diagonal with d1 | d2 | ... | dr, all nonnegative.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, row)) for row in A]
    U = [list(r) for r in mat_identity(m)]
    V = [list(r) for r in mat_identity(n)]

    def row_op(i, j, q):  # row i -= q * row j
        D[i] = [a - q * b for a, b in zip(D[i], D[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col i -= q * col j
        for r in range(m):
            D[r][i] -= q * D[r][j]
        for r in range(n):
            V[r][i] -= q * V[r][j]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in range(m):
            D[r][i], D[r][j] = D[r][j], D[r][i]
        for r in range(n):
            V[r][i], V[r][j] = V[r][j], V[r][i]

    t = 0
    while t < min(m, n):
        # find a nonzero pivot in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] != 0:
                    if piv is None or abs(D[i][j]) < abs(D[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        again = True
        while again:
            again = False
            for i in range(t + 1, m):
                if D[i][t] != 0:
                    q = D[i][t] // D[t][t]
                    row_op(i, t, q)
                    if D[i][t] != 0:
                        swap_rows(t, i)
                        again = True
            for j in range(t + 1, n):
                if D[t][j] != 0:
                    q = D[t][j] // D[t][t]
                    col_op(j, t, q)
                    if D[t][j] != 0:
                        swap_cols(t, j)
                        again = True
        # enforce divisibility d_t | D[i][j] for the rest
        bad = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if D[i][j] % D[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            row_op(t, bad, -1)  # add row `bad` into row t, redo
            continue
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return (
        tuple(tuple(r) for r in D),
        tuple(tuple(r) for r in U),
        tuple(tuple(r) for r in V),
    )


def hnf_row_canonical(rows: Iterable[Sequence[int]]) -> tuple:
    """Canonical basis (row-style HNF) of the integer row span of `rows`.

    Pivots positive, entries above pivots reduced to [0, pivot).  Used to fix
    a deterministic basis for quotient projections.
    """
    R = [list(map(int, r)) for r in rows if any(r)]
    if not R:
        return ()
    n = len(R[0])
    out = []
    col = 0
    while R and col < n:
        cand = [r for r in R if r[col] != 0]
        if not cand:
            col += 1
            continue
        while True:
            cand.sort(key=lambda r: abs(r[col]))
            p = cand[0]
            done = True
            for r in cand[1:]:
                q = r[col] // p[col]
                for k in range(n):
                    r[k] -= q * p[k]
                if r[col] != 0:
                    done = False
            cand = [p] + [r for r in cand[1:] if r[col] != 0]
            if done or len(cand) == 1:
                break
        if p[col] < 0:
            for k in range(n):
                p[k] = -p[k]
        out.append(p)
        R = [r for r in R if r is not p and any(r)]
        col += 1
    # reduce above pivots
    for i in reversed(range(len(out))):
        pc = next(k for k in range(n) if out[i][k] != 0)
        for j in range(i):
            q = out[j][pc] // out[i][pc]
            if q:
                for k in range(n):
                    out[j][k] -= q * out[i][k]
    return tuple(tuple(r) for r in out)


# ---------------------------------------------------------------------------
# Exact LP (two-phase simplex, Bland's rule).  Small and slow, which is fine:
# it is only used off the hot path to locate rational points in polyhedra.


class LPResult:
    __slots__ = ("status", "x", "value")

    def __init__(self, status, x=None, value=None):
        self.status = status  # "optimal" | "infeasible" | "unbounded"
        self.x = x
        self.value = value


def _simplex_core(T, basis, nrows, ncols, ncols_pivot=None):
    # T is (nrows+1) x (ncols+1); last row = reduced costs (maximization),
    # last col = rhs.  Bland's rule (least index) for anti-cycling.
    limit = ncols if ncols_pivot is None else ncols_pivot
    while True:
        pivot_col = next((j for j in range(limit) if T[nrows][j] > 0), None)
        if pivot_col is None:
            return "optimal"
        pivot_row = None
        best = None
        for i in range(nrows):
            if T[i][pivot_col] > 0:
                ratio = T[i][ncols] / T[i][pivot_col]
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[pivot_row]
                ):
                    best = ratio
                    pivot_row = i
        if pivot_row is None:
            return "unbounded"
        pv = T[pivot_row][pivot_col]
        T[pivot_row] = [x / pv for x in T[pivot_row]]
        for i in range(nrows + 1):
            if i != pivot_row and T[i][pivot_col] != 0:
                f = T[i][pivot_col]
                T[i] = [a - f * b for a, b in zip(T[i], T[pivot_row])]
        basis[pivot_row] = pivot_col


def lp_maximize(c, A_ub, b_ub, A_eq=(), b_eq=()) -> LPResult:
    """Maximize c.x subject to A_ub x <= b_ub and A_eq x = b_eq, x free.

    Exact over Q.  Free variables are split as x = u - w with u, w >= 0.
    """
    n = len(c)
    rows = []
    rhs = []
    for row, b in zip(A_ub, b_ub):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(b))
    eq_start = len(rows)
    for row, b in zip(A_eq, b_eq):
        rows.append([Fraction(v) for v in row])
        rhs.append(Fraction(b))
    m = len(rows)
    # standard form columns: u(n), w(n), slacks (one per <= row), artificials
    nslack = eq_start
    ncols0 = 2 * n + nslack
    tab = []
    for i in range(m):
        row = [Fraction(0)] * ncols0
        for j in range(n):
            row[j] = rows[i][j]
            row[n + j] = -rows[i][j]
        if i < eq_start:
            row[2 * n + i] = Fraction(1)
        if rhs[i] < 0:
            row = [-x for x in row]
            rhs[i] = -rhs[i]
        tab.append(row + [rhs[i]])

    # phase 1: add artificials for every row, minimize their sum.  With the
    # artificials basic, the reduced-cost row is the sum of the constraint
    # rows on the structural columns; rhs cell tracks minus the objective.
    ncols = ncols0 + m
    basis = []
    for i in range(m):
        tab[i] = tab[i][:-1] + [Fraction(0)] * m + [tab[i][-1]]
        tab[i][ncols0 + i] = Fraction(1)
        basis.append(ncols0 + i)
    obj = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        obj = [a + b for a, b in zip(obj, tab[i])]
    for i in range(m):
        obj[ncols0 + i] = Fraction(0)
    tab.append(obj)
    _simplex_core(tab, basis, m, ncols, ncols_pivot=ncols0)
    if tab[m][ncols] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= ncols0:
            pc = next((j for j in range(ncols0) if tab[i][j] != 0), None)
            if pc is not None:
                pv = tab[i][pc]
                tab[i] = [x / pv for x in tab[i]]
                for k in range(m + 1):
                    if k != i and tab[k][pc] != 0:
                        f = tab[k][pc]
                        tab[k] = [a - f * b for a, b in zip(tab[k], tab[i])]
                basis[i] = pc
    # phase 2
    keep = [j for j in range(ncols0)]
    tab = [
        [row[j] for j in keep] + [row[ncols]] for row in tab[:m]
    ]
    basis2 = []
    for i, b in enumerate(basis):
        basis2.append(b if b < ncols0 else -1)
    obj = [Fraction(0)] * (ncols0 + 1)
    for j in range(n):
        obj[j] = Fraction(c[j])
        obj[n + j] = -Fraction(c[j])
    tab.append(obj)
    # make objective row consistent with current basis
    for i in range(m):
        if basis2[i] >= 0 and tab[m][basis2[i]] != 0:
            f = tab[m][basis2[i]]
            tab[m] = [a - f * b for a, b in zip(tab[m], tab[i])]
    status = _simplex_core(tab, basis2, m, ncols0)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [Fraction(0)] * (2 * n)
    for i in range(m):
        if 0 <= basis2[i] < 2 * n:
            x[basis2[i]] = tab[i][ncols0]
    sol = tuple(x[j] - x[n + j] for j in range(n))
    val = vec_dot(sol, [Fraction(v) for v in c])
    return LPResult("optimal", sol, val)


def relative_interior_point(A_ub, b_ub, A_eq=(), b_eq=(), slack_cap=Fraction(1)):
    """A point of {x : A_ub x <= b_ub, A_eq x = b_eq} with maximal uniform slack.

    Returns (point, strict_mask) where strict_mask[i] says inequality i can be
    (and at the returned point is) strictly satisfied, or None if infeasible.
    Constraints that are implicit equalities of the polyhedron get mask False.
    """
    m = len(b_ub)
    n = len(A_ub[0]) if m else len(A_eq[0]) if b_eq else 0
    feas = lp_maximize([0] * n, A_ub, b_ub, A_eq, b_eq)
    if feas.status == "infeasible":
        return None
    strict = []
    for i in range(m):
        c = [-Fraction(v) for v in A_ub[i]]
        r = lp_maximize(c, A_ub, b_ub, A_eq, b_eq)
        # max slack b_i - A_i x; positive means the face is not forced
        strict.append(r.status == "unbounded" or (r.value + Fraction(b_ub[i])) > 0)
    # maximize t subject to A_i x + t <= b_i for strict rows, and t <= cap
    A2 = []
    b2 = []
    for i in range(m):
        row = list(A_ub[i]) + [1 if strict[i] else 0]
        A2.append(row)
        b2.append(b_ub[i])
    A2.append([0] * n + [1])
    b2.append(slack_cap)
    E2 = [list(r) + [0] for r in A_eq]
    r = lp_maximize([0] * n + [1], A2, b2, E2, list(b_eq))
    if r.status != "optimal":
        return None
    return r.x[:n], strict
