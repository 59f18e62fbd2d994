import itertools
import random
from fractions import Fraction

from affine_hecke.linalg import (
    hnf_row_canonical,
    lp_maximize,
    mat_identity,
    mat_inverse,
    mat_mul,
    mat_vec,
    nullspace,
    relative_interior_point,
    smith_normal_form,
    solve,
)


def test_solve_and_nullspace():
    A = ((1, 2), (2, 4))
    assert solve(A, (1, 2)) is not None
    assert solve(A, (1, 3)) is None
    ns = nullspace(A)
    assert len(ns) == 1
    assert mat_vec(A, ns[0]) == (0, 0)


def test_mat_inverse():
    A = ((2, 1), (1, 1))
    inv = mat_inverse(A)
    assert mat_mul(A, inv) == mat_identity(2)
    assert mat_inverse(((1, 1), (2, 2))) is None


def test_smith_normal_form_random():
    rng = random.Random(1)
    for _ in range(100):
        m, n = rng.randint(1, 4), rng.randint(1, 4)
        A = tuple(tuple(rng.randint(-5, 5) for _ in range(n)) for _ in range(m))
        D, U, V = smith_normal_form(A)
        assert mat_mul(mat_mul(U, A), V) == D
        diag = [D[i][i] for i in range(min(m, n))]
        for i in range(m):
            for j in range(n):
                if i != j:
                    assert D[i][j] == 0
        nz = [d for d in diag if d]
        for a, b in zip(nz, nz[1:]):
            assert a > 0 and b % a == 0
        # U, V unimodular
        for M in (U, V):
            inv = mat_inverse(M)
            assert inv is not None
            assert all(Fraction(x).denominator == 1 for row in inv for x in row)


def test_hnf_row_canonical():
    # GL_n style: the saturation of multiples of (1,1,1) is (1,1,1)
    assert hnf_row_canonical([(2, 2, 2), (3, 3, 3)]) == ((1, 1, 1),)
    rows = hnf_row_canonical([(2, 0), (0, 3), (1, 1)])
    assert rows == ((1, 0), (0, 1))


def test_lp_basics():
    r = lp_maximize([1], [[1], [-1]], [3, 0])
    assert r.status == "optimal" and r.value == 3
    assert lp_maximize([0], [[1], [-1]], [-1, -1]).status == "infeasible"
    assert lp_maximize([1], [[-1]], [0]).status == "unbounded"
    r = lp_maximize([1, 1], [[1, 0], [0, 1]], [2, 2], [[1, -1]], [0])
    assert r.status == "optimal" and r.value == 4 and r.x == (2, 2)


def test_lp_against_vertex_enumeration():
    rng = random.Random(5)
    for _ in range(200):
        m = rng.randint(2, 6)
        A = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(m)]
        b = [rng.randint(-3, 3) for _ in range(m)]
        c = [rng.randint(-3, 3) for _ in range(2)]
        r = lp_maximize(c, A, b)
        best = None
        feas = False
        for i, j in itertools.combinations(range(m), 2):
            det = A[i][0] * A[j][1] - A[i][1] * A[j][0]
            if det == 0:
                continue
            x = Fraction(b[i] * A[j][1] - A[i][1] * b[j], det)
            y = Fraction(A[i][0] * b[j] - b[i] * A[j][0], det)
            if all(A[k][0] * x + A[k][1] * y <= b[k] for k in range(m)):
                feas = True
                val = c[0] * x + c[1] * y
                best = val if best is None or val > best else best
        if r.status == "optimal" and best is not None:
            assert r.value >= best
            assert all(
                A[k][0] * r.x[0] + A[k][1] * r.x[1] <= b[k] for k in range(m)
            )
        if r.status == "infeasible":
            assert not feas


def test_relative_interior():
    pt, strict = relative_interior_point(
        [[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 0, 1, 0]
    )
    assert all(strict)
    assert 0 < pt[0] < 1 and 0 < pt[1] < 1
    pt, strict = relative_interior_point(
        [[1, 0], [-1, 0], [0, 1], [0, -1]], [0, 0, 1, 0]
    )
    assert pt[0] == 0 and 0 < pt[1] < 1
    assert strict == [False, False, True, True]
