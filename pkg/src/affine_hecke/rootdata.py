"""Based root data with automorphisms, parabolic subdata, and X/ZR quotients.

A datum is the tuple (X, R, Y, R^vee, F0) with a perfect pairing X x Y -> Z,
plus a finite group Gamma of automorphisms preserving F0.  X and Y are both
realized as Z^rank; the pairing is an explicit unimodular integer matrix, so
<x, y> = x^T P y.  All arithmetic is exact.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from functools import cached_property

from .linalg import (
    hnf_row_canonical,
    mat_identity,
    mat_inverse,
    mat_mul,
    mat_vec,
    is_integer_matrix,
    smith_normal_form,
    solve,
    vec_dot,
    vec_neg,
    vec_scale,
    vec_sub,
)


def _reflection_matrix(alpha, phi, d):
    # s_alpha: x -> x - <x, alpha_vee> alpha, with phi = P.alpha_vee precomputed
    cols = []
    for j in range(d):
        e = tuple(1 if k == j else 0 for k in range(d))
        cols.append(vec_sub(e, vec_scale(phi[j], alpha)))
    return tuple(zip(*cols))


def _is_perm_matrix(M):
    for row in M:
        if sum(1 for x in row if x == 1) != 1 or any(x not in (0, 1) for x in row):
            return False
    return all(sum(col) == 1 for col in zip(*M))


class RootDatum:
    """Immutable based root datum.

    roots/coroots are stored with all positive roots first (sorted by height
    then lexicographically) followed by their negatives in the same order, so
    index i + npos is the negative of index i.
    """

    def __init__(self, name, rank, roots, coroots, pairing, simple_roots, gammas,
                 _gamma_space=None, _gamma_allowed=None, parent=None):
        self.name = name
        self.rank = rank
        self.pairing = tuple(tuple(int(x) for x in row) for row in pairing)
        root_pairs = [
            (tuple(int(x) for x in r), tuple(int(x) for x in c))
            for r, c in zip(roots, coroots)
        ]
        simple_vecs = [tuple(int(x) for x in s) for s in simple_roots]
        pos, neg = self._split_positive(root_pairs, simple_vecs)
        self.pos_roots = tuple(p[0] for p in pos)
        self.pos_coroots = tuple(p[1] for p in pos)
        self.npos = len(pos)
        self.roots = self.pos_roots + tuple(p[0] for p in neg)
        self.coroots = self.pos_coroots + tuple(p[1] for p in neg)
        self.simple_idx = tuple(self.pos_roots.index(s) for s in simple_vecs)
        self.parent = parent
        if _gamma_space is None:
            gens = [tuple(tuple(int(x) for x in row) for row in g) for g in gammas]
            space = self._close_group(gens, rank)
            self.gamma_space = space
            self.gamma_allowed = tuple(range(len(space)))
        else:
            self.gamma_space = _gamma_space
            self.gamma_allowed = tuple(_gamma_allowed)
        self._root_index = {r: i for i, r in enumerate(self.roots)}

    # -- construction helpers -------------------------------------------------

    def _split_positive(self, root_pairs, simple_vecs):
        d = self.rank
        if not root_pairs:
            return [], []
        A = tuple(zip(*simple_vecs)) if simple_vecs else ()
        coords = {}
        for r, _ in root_pairs:
            if simple_vecs:
                sol = solve(A, r)
                if sol is None:
                    raise ValueError(f"root {r} not in span of simples")
                coords[r] = sol
        pos = []
        for pair in root_pairs:
            c = coords[pair[0]]
            if all(x >= 0 for x in c):
                ht = sum(c)
                if ht.denominator != 1:
                    raise ValueError(f"non-integral height for root {pair[0]}")
                pos.append((int(ht), pair))
        pos.sort(key=lambda t: (t[0], t[1][0]))
        pos_pairs = [p for _, p in pos]
        neg_pairs = [(vec_neg(r), vec_neg(c)) for r, c in pos_pairs]
        known = {p[0] for p in pos_pairs} | {p[0] for p in neg_pairs}
        if known != {p[0] for p in root_pairs} or 2 * len(pos_pairs) != len(root_pairs):
            raise ValueError("roots do not split as R+ and -R+")
        return pos_pairs, neg_pairs

    @staticmethod
    def _close_group(gens, rank):
        ident = mat_identity(rank)
        if not gens:
            return (ident,)
        seen = {ident: 0}
        order = [ident]
        frontier = [ident]
        while frontier:
            nxt = []
            for m in frontier:
                for g in gens:
                    p = mat_mul(m, g)
                    if p not in seen:
                        seen[p] = len(order)
                        order.append(p)
                        nxt.append(p)
            frontier = nxt
            if len(order) > 10000:
                raise ValueError("gamma group too large")
        order = [ident] + sorted(order[1:])
        return tuple(order)

    # -- basic queries ---------------------------------------------------------

    @cached_property
    def phi(self):
        """phi[i] = P . coroot_i, so <x, coroot_i> = dot(x, phi[i])."""
        return tuple(tuple(mat_vec(self.pairing, c)) for c in self.coroots)

    def pair(self, x, root_idx):
        return vec_dot(x, self.phi[root_idx])

    def root_index(self, vec):
        return self._root_index.get(tuple(vec))

    def neg_index(self, idx):
        return idx + self.npos if idx < self.npos else idx - self.npos

    @cached_property
    def simple_refl_mats(self):
        return tuple(
            _reflection_matrix(self.roots[i], self.phi[i], self.rank)
            for i in self.simple_idx
        )

    def refl_mat(self, root_idx):
        return _reflection_matrix(self.roots[root_idx], self.phi[root_idx], self.rank)

    @cached_property
    def perm_like(self):
        mats = list(self.simple_refl_mats) + [self.gamma_space[i] for i in self.gamma_allowed]
        return all(_is_perm_matrix(m) for m in mats)

    @cached_property
    def heights(self):
        """Coordinates of each positive root and coroot in the simple basis."""
        A = tuple(zip(*[self.roots[i] for i in self.simple_idx]))
        Ac = tuple(zip(*[self.coroots[i] for i in self.simple_idx]))
        out = []
        for i in range(self.npos):
            c = solve(A, self.roots[i])
            cc = solve(Ac, self.coroots[i])
            out.append((int(sum(c)), int(sum(cc))))
        return tuple(out)

    @cached_property
    def components(self):
        """Partition of simple indices (0..len(simples)-1) into Dynkin components."""
        n = len(self.simple_idx)
        adj = [[False] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                if a != b and self.pair(self.roots[self.simple_idx[a]], self.simple_idx[b]) != 0:
                    adj[a][b] = True
        seen = [False] * n
        comps = []
        for a in range(n):
            if seen[a]:
                continue
            comp, stack = [], [a]
            seen[a] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in range(n):
                    if adj[u][v] and not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    def _extreme_roots(self, which):
        A = tuple(zip(*[self.roots[i] for i in self.simple_idx]))
        out = []
        for comp in self.components:
            supp = set(comp)
            best = None
            for i in range(self.npos):
                c = solve(A, self.roots[i])
                used = {j for j, x in enumerate(c) if x != 0}
                if used <= supp:
                    if best is None or self.heights[i][which] > self.heights[best][which]:
                        best = i
            out.append(best)
        return tuple(out)

    @cached_property
    def highest_roots(self):
        """Highest root index per component (maximal height within the component)."""
        return self._extreme_roots(0)

    @cached_property
    def highest_coroot_roots(self):
        """Per component, the root whose coroot is the highest coroot.  The walls
        of the fundamental alcove not through 0 are <v, theta_vee> = 1 for these:
        the binding ceiling is the dominance-maximal coroot."""
        return self._extreme_roots(1)

    @cached_property
    def two_rho(self):
        v = tuple(0 for _ in range(self.rank))
        for i in range(self.npos):
            v = tuple(a + b for a, b in zip(v, self.roots[i]))
        return v

    @cached_property
    def two_rho_covec(self):
        """Functional x -> <x, 2 rho_vee> as a vector of ints."""
        v = tuple(0 for _ in range(self.rank))
        for i in range(self.npos):
            v = tuple(a + b for a, b in zip(v, self.phi[i]))
        return v

    @cached_property
    def fundamental_duals(self):
        """For each simple i: an integral x with <x, alpha_j_vee> = delta_ij, or None.

        Used only to pick small dominant splits for theta; any split works.
        """
        rows = [self.phi[j] for j in self.simple_idx]
        out = []
        for i in range(len(self.simple_idx)):
            target = [1 if j == i else 0 for j in range(len(self.simple_idx))]
            sol = solve(rows, target)
            if sol is not None and all(Fraction(x).denominator == 1 for x in sol):
                out.append(tuple(int(x) for x in sol))
            else:
                out.append(None)
        return tuple(out)

    def gamma_mat(self, idx):
        return self.gamma_space[idx]

    @cached_property
    def gamma_index(self):
        return {m: i for i, m in enumerate(self.gamma_space)}

    @cached_property
    def gamma_mul_table(self):
        n = len(self.gamma_space)
        return tuple(
            tuple(self.gamma_index[mat_mul(self.gamma_space[a], self.gamma_space[b])]
                  for b in range(n))
            for a in range(n)
        )

    @cached_property
    def gamma_inv_table(self):
        n = len(self.gamma_space)
        inv = [None] * n
        for a in range(n):
            for b in range(n):
                if self.gamma_mul_table[a][b] == 0:
                    inv[a] = b
        return tuple(inv)

    # -- serialization ---------------------------------------------------------

    def to_json(self):
        return {
            "name": self.name,
            "rank": self.rank,
            "roots": [list(r) for r in self.roots],
            "coroots": [list(c) for c in self.coroots],
            "pairing": [list(r) for r in self.pairing],
            "simples": list(self.simple_idx),
            "gammas": [[list(row) for row in self.gamma_space[i]] for i in self.gamma_allowed if i != 0],
        }

    @property
    def datum_hash(self):
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @staticmethod
    def from_json(obj):
        roots = [tuple(r) for r in obj["roots"]]
        simples = [roots[i] for i in obj["simples"]]
        return RootDatum(
            obj.get("name", "custom"),
            obj["rank"],
            roots,
            [tuple(c) for c in obj["coroots"]],
            obj["pairing"],
            simples,
            obj.get("gammas", []),
        )


# ---------------------------------------------------------------------------
# validation


def validate(datum: RootDatum) -> list[str]:
    """All invariant violations of the datum; empty list means valid."""
    bad = []
    d = datum.rank
    if len(datum.roots) != len(datum.coroots):
        bad.append("roots and coroots are not in bijection")
        return bad
    inv = mat_inverse(datum.pairing)
    if inv is None or not is_integer_matrix(inv):
        bad.append("pairing matrix is not unimodular")
    for i in range(len(datum.roots)):
        if datum.pair(datum.roots[i], i) != 2:
            bad.append(f"pairing(alpha, alpha_vee) != 2 at root {datum.roots[i]}")
    root_set = set(datum.roots)
    coroot_of = {datum.roots[i]: datum.coroots[i] for i in range(len(datum.roots))}
    for i in range(datum.npos):
        m = datum.refl_mat(i)
        for j, r in enumerate(datum.roots):
            img = mat_vec(m, r)
            if img not in root_set:
                bad.append(f"reflection s_{datum.roots[i]} does not permute R (at {r})")
                break
            # dual reflection on coroots must match the bijection
            cr = vec_sub(coroot_of[r], vec_scale(vec_dot(datum.roots[i], mat_vec(datum.pairing, coroot_of[r])), datum.coroots[i]))
            if cr != coroot_of[img]:
                bad.append(f"coroot reflection mismatch at root {r} under s_{datum.roots[i]}")
                break
    simples = {datum.roots[i] for i in datum.simple_idx}
    for gi in datum.gamma_allowed:
        g = datum.gamma_space[gi]
        if {tuple(mat_vec(g, s)) for s in simples} != simples:
            bad.append(f"gamma element {gi} does not permute the simple roots")
            continue
        for r in datum.roots:
            if tuple(mat_vec(g, r)) not in root_set:
                bad.append(f"gamma element {gi} does not preserve R")
                break
        gy = mat_mul(mat_inverse(datum.pairing), mat_mul(mat_transpose_inv(g), datum.pairing))
        if not is_integer_matrix(gy):
            bad.append(f"gamma element {gi} does not preserve the pairing over Z")
    pos = set(datum.pos_roots)
    if pos & {vec_neg(r) for r in pos} or pos | {vec_neg(r) for r in pos} != root_set:
        bad.append("R+ does not partition R as R+ and -R+")
    return bad


def mat_transpose_inv(g):
    from .linalg import mat_transpose
    inv = mat_inverse(mat_transpose(g))
    return tuple(tuple(x for x in row) for row in inv)


# ---------------------------------------------------------------------------
# parabolic subdata


def subdatum(datum: RootDatum, J) -> RootDatum:
    """Based root datum (X, R_J, Y, R_J^vee, J) for J a set of simple indices.

    J is given as indices into the simple list (0-based).  Gamma_J consists
    of the Gamma elements preserving R_J; the ambient gamma enumeration is
    shared so tau indices stay compatible between parent and child.
    """
    J = sorted(set(J))
    simple_positions = [datum.simple_idx[j] for j in J]
    simple_vecs = [datum.roots[p] for p in simple_positions]
    if simple_vecs:
        A = tuple(zip(*simple_vecs))
        sub_roots, sub_coroots = [], []
        for i, r in enumerate(datum.roots):
            if solve(A, r) is not None:
                sub_roots.append(r)
                sub_coroots.append(datum.coroots[i])
    else:
        sub_roots, sub_coroots = [], []
    rj = set(map(tuple, sub_roots))
    allowed = [
        gi for gi in datum.gamma_allowed
        if {tuple(mat_vec(datum.gamma_space[gi], r)) for r in rj} == rj
    ]
    name = f"{datum.name}|J={','.join(map(str, J))}"
    return RootDatum(
        name, datum.rank, sub_roots, sub_coroots, datum.pairing, simple_vecs,
        [], _gamma_space=datum.gamma_space, _gamma_allowed=allowed, parent=datum,
    )


# ---------------------------------------------------------------------------
# Kottwitz quotient X / ZR


class KottwitzGroup:
    """X/ZR with a deterministic projection, computed from the Smith form of
    the simple-root matrix.  Elements of the Kottwitz group of the extended
    group are (projection value, gamma index) pairs.
    """

    def __init__(self, datum: RootDatum):
        self.datum = datum
        d = datum.rank
        simples = [datum.roots[i] for i in datum.simple_idx]
        if simples:
            S = tuple(zip(*simples))  # d x k, columns are simple roots
            D, U, V = smith_normal_form(S)
            r = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i] != 0)
            self.torsion_rows = tuple(
                (tuple(U[i]), D[i][i]) for i in range(r) if D[i][i] > 1
            )
            free = [U[i] for i in range(r, d)]
        else:
            self.torsion_rows = ()
            free = [row for row in mat_identity(d)]
        self.free_rows = hnf_row_canonical(free)
        self.invariant_factors = tuple(m for _, m in self.torsion_rows)
        self.free_rank = len(self.free_rows)

    def project(self, x):
        free = tuple(vec_dot(row, x) for row in self.free_rows)
        tors = tuple(vec_dot(row, x) % m for row, m in self.torsion_rows)
        return free + tors

    def describe(self):
        parts = ["Z"] * self.free_rank + [f"Z/{m}" for m in self.invariant_factors]
        return " x ".join(parts) if parts else "0"

    def gamma_action_well_defined(self):
        """Check the induced Gamma action on X/ZR on generators (test hook)."""
        d = self.datum.rank
        for gi in self.datum.gamma_allowed:
            g = self.datum.gamma_space[gi]
            for s in self.datum.simple_idx:
                if self.project(mat_vec(g, self.datum.roots[s])) != self.project([0] * d):
                    return False
        return True


# ---------------------------------------------------------------------------
# dominant representatives


def dominant_rep(datum: RootDatum, v):
    """The dominant W0-orbit representative of v with a witness w, w(v) dominant.

    Works for exact rational vectors.  Returns (vbar, w_matrix).
    """
    v = tuple(Fraction(x) for x in v)
    w = mat_identity(datum.rank)
    guard = 0
    while True:
        i = next(
            (k for k, si in enumerate(datum.simple_idx) if datum.pair(v, si) < 0),
            None,
        )
        if i is None:
            return v, w
        m = datum.simple_refl_mats[i]
        v = tuple(mat_vec(m, v))
        w = mat_mul(m, w)
        guard += 1
        if guard > 4 * datum.npos * datum.npos + 16:
            raise RuntimeError("dominant_rep failed to terminate")


# ---------------------------------------------------------------------------
# presets


def _closure_datum(name, rank, pairing, simple_pairs, gammas=()):
    pairs = list(simple_pairs)
    seen = {p[0]: p[1] for p in pairs}
    frontier = list(pairs)
    P = pairing
    while frontier:
        nxt = []
        for alpha, avee in frontier:
            for salpha, savee in simple_pairs:
                c = vec_dot(alpha, mat_vec(P, savee))
                img = vec_sub(alpha, vec_scale(c, salpha))
                cimg = vec_sub(avee, vec_scale(vec_dot(salpha, mat_vec(P, avee)), savee))
                if img not in seen:
                    seen[img] = cimg
                    nxt.append((img, cimg))
        frontier = nxt
        if len(seen) > 400:
            raise ValueError("root closure did not terminate")
    roots = sorted(seen)
    return RootDatum(
        name, rank, roots, [seen[r] for r in roots], pairing,
        [p[0] for p in simple_pairs], gammas,
    )


def preset_gl(n):
    d = n
    e = lambda i: tuple(1 if k == i else 0 for k in range(d))
    simple_pairs = [
        (vec_sub(e(i), e(i + 1)), vec_sub(e(i), e(i + 1))) for i in range(n - 1)
    ]
    return _closure_datum(f"GL{n}", d, mat_identity(d), simple_pairs)


def preset_sl(n):
    # X = root lattice in simple-root coordinates (the paper's "adjoint" X = ZR)
    d = n - 1
    C = [[0] * d for _ in range(d)]
    for i in range(d):
        C[i][i] = 2
        if i + 1 < d:
            C[i][i + 1] = C[i + 1][i] = -1
    e = lambda i: tuple(1 if k == i else 0 for k in range(d))
    simple_pairs = [(e(i), tuple(C[j][i] for j in range(d))) for i in range(d)]
    return _closure_datum(f"SL{n}", d, mat_identity(d), simple_pairs)


def preset_a2_adjoint():
    datum = preset_sl(3)
    datum.name = "A2adj"
    return datum


def preset_c2():
    simple_pairs = [((1, -1), (1, -1)), ((0, 2), (0, 1))]
    return _closure_datum("C2", 2, mat_identity(2), simple_pairs)


def preset_b2():
    # short coroots lie in 2Y: the excluded case of the Bernstein relation
    simple_pairs = [((1, -1), (1, -1)), ((0, 1), (0, 2))]
    return _closure_datum("B2", 2, mat_identity(2), simple_pairs)


def preset_g2():
    simple_pairs = [((1, 0), (2, -3)), ((0, 1), (-1, 2))]
    return _closure_datum("G2", 2, mat_identity(2), simple_pairs)


def preset_gl3_twisted():
    # GL3 with the diagram flip x -> (-x3, -x2, -x1) as Gamma
    flip = ((0, 0, -1), (0, -1, 0), (-1, 0, 0))
    d = preset_gl(3)
    return RootDatum(
        "GL3tw", 3, d.roots, d.coroots, d.pairing,
        [d.roots[i] for i in d.simple_idx], [flip],
    )


_PRESETS = {}


def load_datum(spec: str) -> RootDatum:
    """Load 'preset:NAME' or a JSON file path."""
    if spec.startswith("preset:"):
        name = spec.split(":", 1)[1]
        if name not in _PRESETS:
            if name == "GL3tw":
                _PRESETS[name] = preset_gl3_twisted()
            elif name.startswith("GL"):
                n = int(name[2:])
                if not 2 <= n <= 8:
                    raise ValueError("GL presets cover n in 2..8")
                _PRESETS[name] = preset_gl(n)
            elif name.startswith("SL"):
                _PRESETS[name] = preset_sl(int(name[2:]))
            elif name == "A2adj":
                _PRESETS[name] = preset_a2_adjoint()
            elif name == "C2":
                _PRESETS[name] = preset_c2()
            elif name == "B2":
                _PRESETS[name] = preset_b2()
            elif name == "G2":
                _PRESETS[name] = preset_g2()
            else:
                raise ValueError(f"unknown preset {name}")
        return _PRESETS[name]
    with open(spec) as fh:
        return RootDatum.from_json(json.load(fh))
