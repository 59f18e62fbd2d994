"""The extended affine Weyl group W~ = X x| (W0 x| Gamma) as an exact engine.

Elements are plain hashable triples (lam, fin, tau):

  * lam: tuple of ints, the translation part in X,
  * fin: the W0 part, either a permutation of basis indices (type-A style
    presets where every generator permutes coordinates) or a tuple-of-rows
    integer matrix,
  * tau: index into the datum's enumerated Gamma closure.

The element acts on V = X (x) Q by v -> lam + fin(gamma_tau(v)).  Length,
descent and alcove queries reduce to integer pairings against coroots, so the
BFS-heavy conjugacy machinery never touches a Fraction.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import cached_property

from .linalg import (
    mat_identity,
    mat_inverse,
    mat_mul,
    mat_vec,
    nullspace,
    row_reduce,
    solve,
    solve_affine,
    vec_add,
    vec_dot,
    vec_neg,
    vec_scale,
    vec_sub,
)
from .rootdata import KottwitzGroup, RootDatum, dominant_rep, subdatum


class AffineSubspace:
    """Nonempty affine subspace base + span(dirs), dirs row-reduced."""

    def __init__(self, base, dirs):
        self.base = tuple(Fraction(x) for x in base)
        if dirs:
            R, pivots = row_reduce(dirs)
            self.dirs = tuple(tuple(R[i]) for i in range(len(pivots)))
        else:
            self.dirs = ()

    @property
    def dim(self):
        return len(self.dirs)

    def contains(self, point):
        diff = vec_sub(point, self.base)
        if not self.dirs:
            return all(x == 0 for x in diff)
        return solve(tuple(zip(*self.dirs)), diff) is not None

    def direction_contains(self, v):
        if not self.dirs:
            return all(x == 0 for x in v)
        return solve(tuple(zip(*self.dirs)), v) is not None

    def __eq__(self, other):
        return (
            isinstance(other, AffineSubspace)
            and self.dirs == other.dirs
            and other.contains(self.base)
            and self.contains(other.base)
        )


class DatumMismatch(ValueError):
    pass


class NotInWJ(ValueError):
    pass


def _perm_of_matrix(M):
    d = len(M)
    perm = [None] * d
    for j in range(d):
        col = [M[i][j] for i in range(d)]
        perm[j] = col.index(1)
    return tuple(perm)


class AffineEngine:
    def __init__(self, datum: RootDatum, rep=None):
        self.datum = datum
        self.d = datum.rank
        self.m = datum.npos
        self.rep = rep or ("perm" if datum.perm_like else "mat")
        if self.rep == "perm":
            self.fin_id = tuple(range(self.d))
        else:
            self.fin_id = mat_identity(self.d)
        self._gamma_fin = tuple(
            self._fin_of_matrix(datum.gamma_space[i]) for i in range(len(datum.gamma_space))
        )
        self._rimg = {}
        self._rinv = {}
        self._len = {}
        self._sub = {}
        self._mat_inv_cache = {}
        self.identity = (tuple([0] * self.d), self.fin_id, 0)

    # -- finite part primitives ------------------------------------------------

    def _fin_of_matrix(self, M):
        return _perm_of_matrix(M) if self.rep == "perm" else tuple(tuple(r) for r in M)

    def fin_matrix(self, fin):
        if self.rep == "mat":
            return fin
        M = [[0] * self.d for _ in range(self.d)]
        for i in range(self.d):
            M[fin[i]][i] = 1
        return tuple(tuple(r) for r in M)

    def fin_apply(self, fin, v):
        if self.rep == "perm":
            out = [0] * self.d
            for i in range(self.d):
                out[fin[i]] = v[i]
            return tuple(out)
        return tuple(vec_dot(row, v) for row in fin)

    def fin_compose(self, f, g):
        if self.rep == "perm":
            return tuple(f[g[i]] for i in range(self.d))
        return mat_mul(f, g)

    def fin_inv(self, f):
        if self.rep == "perm":
            out = [0] * self.d
            for i in range(self.d):
                out[f[i]] = i
            return tuple(out)
        r = self._mat_inv_cache.get(f)
        if r is None:
            inv = mat_inverse(f)
            r = tuple(tuple(int(x) for x in row) for row in inv)
            self._mat_inv_cache[f] = r
        return r

    def simple_fin(self, i):
        return self._fin_of_matrix(self.datum.simple_refl_mats[i])

    def refl_fin(self, root_idx):
        return self._fin_of_matrix(self.datum.refl_mat(root_idx))

    # -- group law ---------------------------------------------------------------

    def glin_apply(self, fin, tau, v):
        """The linear part fin . gamma_tau applied to v."""
        if tau:
            v = self.fin_apply(self._gamma_fin[tau], v)
        return self.fin_apply(fin, v)

    def mul(self, a, b):
        la, fa, ta = a
        lb, fb, tb = b
        lam = vec_add(la, self.glin_apply(fa, ta, lb))
        if ta:
            g = self._gamma_fin[ta]
            fb = self.fin_compose(g, self.fin_compose(fb, self.fin_inv(g)))
        return (lam, self.fin_compose(fa, fb), self.datum.gamma_mul_table[ta][tb])

    def inv(self, a):
        la, fa, ta = a
        ti = self.datum.gamma_inv_table[ta]
        fi = self.fin_inv(fa)
        if ta:
            g = self._gamma_fin[ta]
            gi = self.fin_inv(g)
            lam = vec_neg(self.fin_apply(gi, self.fin_apply(fi, la)))
            fnew = self.fin_compose(gi, self.fin_compose(fi, g))
        else:
            lam = vec_neg(self.fin_apply(fi, la))
            fnew = fi
        return (lam, fnew, ti)

    def conj(self, x, a):
        return self.mul(self.mul(x, a), self.inv(x))

    def translation(self, lam):
        return (tuple(int(v) for v in lam), self.fin_id, 0)

    def fin_elt(self, fin, tau=0):
        return (tuple([0] * self.d), fin, tau)

    def act(self, elt, v):
        lam, fin, tau = elt
        return vec_add(lam, self.glin_apply(fin, tau, v))

    # -- root permutations -------------------------------------------------------

    def root_images(self, fin, tau):
        """Array over positive-root indices of signed image index in [0, 2m)."""
        key = (fin, tau)
        arr = self._rimg.get(key)
        if arr is None:
            idx = self.datum._root_index
            arr = tuple(
                idx[self.glin_apply(fin, tau, self.datum.pos_roots[r])]
                for r in range(self.m)
            )
            self._rimg[key] = arr
        return arr

    def root_images_inv(self, fin, tau):
        key = (fin, tau)
        arr = self._rinv.get(key)
        if arr is None:
            fwd = self.root_images(fin, tau)
            out = [0] * self.m
            m = self.m
            for r in range(m):
                v = fwd[r]
                if v < m:
                    out[v] = r
                else:
                    out[v - m] = r + m
            arr = tuple(out)
            self._rinv[key] = arr
        return arr

    def signed_image(self, arr, signed_idx):
        m = self.m
        if signed_idx < m:
            return arr[signed_idx]
        v = arr[signed_idx - m]
        return v + m if v < m else v - m

    def pair_root(self, lam, signed_idx):
        """<lam, alpha_vee> for the signed root index."""
        m = self.m
        if signed_idx < m:
            return vec_dot(lam, self.datum.phi[signed_idx])
        return -vec_dot(lam, self.datum.phi[signed_idx - m])

    # -- length ------------------------------------------------------------------

    def length(self, elt):
        L = self._len.get(elt)
        if L is None:
            lam, fin, tau = elt
            inv = self.root_images_inv(fin, tau)
            m = self.m
            phi = self.datum.phi
            L = 0
            for r in range(m):
                c = vec_dot(lam, phi[r])
                if inv[r] < m:
                    L += c if c >= 0 else -c
                else:
                    c -= 1
                    L += c if c >= 0 else -c
            self._len[elt] = L
        return L

    # -- simple reflections and affine-root tests ---------------------------------

    @cached_property
    def simple_refls(self):
        """Elements of S: the finite simples, then one affine reflection per
        irreducible component of R (t^theta s_theta for theta the highest root)."""
        out = [self.fin_elt(self.simple_fin(i)) for i in range(len(self.datum.simple_idx))]
        for hi in self.datum.highest_coroot_roots:
            theta = self.datum.roots[hi]
            out.append((tuple(theta), self.refl_fin(hi), 0))
        return tuple(out)

    @cached_property
    def simple_affine_roots(self):
        """(signed root index, level) of the wall of each element of S."""
        out = [(self.datum.simple_idx[i], 0) for i in range(len(self.datum.simple_idx))]
        for hi in self.datum.highest_coroot_roots:
            out.append((hi + self.m, 1))
        return tuple(out)

    @property
    def n_finite(self):
        return len(self.datum.simple_idx)

    @cached_property
    def simple_param_classes(self):
        """Partition of S into W~-conjugacy classes (parameter equality classes):
        odd-bond connectivity in the Coxeter graph plus the Omega action."""
        ns = len(self.simple_refls)
        parent = list(range(ns))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            parent[find(a)] = find(b)

        for a in range(ns):
            for b in range(a + 1, ns):
                prod = self.mul(self.simple_refls[a], self.simple_refls[b])
                cur = prod
                order = 1
                while cur != self.identity and order <= 12:
                    cur = self.mul(cur, prod)
                    order += 1
                if cur == self.identity and order % 2 == 1:
                    union(a, b)
        lookup = {self.simple_refls[s]: s for s in range(ns)}
        for om in self.omega_conj_gens:
            for s in range(ns):
                img = self.conj(om, self.simple_refls[s])
                t = lookup.get(img)
                if t is not None:
                    union(s, t)
        groups = {}
        for s in range(ns):
            groups.setdefault(find(s), []).append(s)
        return tuple(tuple(g) for g in sorted(groups.values()))

    def aff_positive(self, signed_idx, k):
        return k > 0 or (k == 0 and signed_idx < self.m)

    def elt_on_affroot(self, elt, signed_idx, k):
        """Image (signed idx, level) of the affine root under the element."""
        lam, fin, tau = elt
        img = self.signed_image(self.root_images(fin, tau), signed_idx)
        return img, k - self.pair_root(lam, img)

    def inv_on_affroot(self, elt, signed_idx, k):
        lam, fin, tau = elt
        img = self.signed_image(self.root_images_inv(fin, tau), signed_idx)
        return img, k + self.pair_root(lam, signed_idx)

    def right_ascent(self, elt, s):
        """True iff l(elt * s) > l(elt)."""
        a, k = self.simple_affine_roots[s]
        return self.aff_positive(*self.elt_on_affroot(elt, a, k))

    def left_ascent(self, elt, s):
        """True iff l(s * elt) > l(elt)."""
        a, k = self.simple_affine_roots[s]
        return self.aff_positive(*self.inv_on_affroot(elt, a, k))

    def conj_simple(self, elt, s):
        """(s elt s, l(s elt s) - l(elt))."""
        se = self.simple_refls[s]
        d1 = 1 if self.left_ascent(elt, s) else -1
        m1 = self.mul(se, elt)
        d2 = 1 if self.right_ascent(m1, s) else -1
        return self.mul(m1, se), d1 + d2

    def descents_right(self, elt):
        return [s for s in range(len(self.simple_refls)) if not self.right_ascent(elt, s)]

    def descents_left(self, elt):
        return [s for s in range(len(self.simple_refls)) if not self.left_ascent(elt, s)]

    def reduced_word(self, elt):
        """A reduced word for the W-part: elt = omega * s_{i1} ... s_{ik}."""
        word = []
        cur = elt
        while True:
            ds = self.descents_right(cur)
            if not ds:
                break
            s = ds[0]
            cur = self.mul(cur, self.simple_refls[s])
            word.append(s)
        word.reverse()
        return cur, tuple(word)  # (omega, word)

    # -- Omega, kappa, walks -------------------------------------------------------

    def walk_to_omega(self, elt):
        """The length-zero element of W * elt (strip left descents)."""
        cur = elt
        while True:
            ds = self.descents_left(cur)
            if not ds:
                return cur
            cur = self.mul(self.simple_refls[ds[0]], cur)

    def omega_decompose(self, elt):
        """elt = omega * x with omega in Omega, x in W = ZR x| W0."""
        cur = elt
        y = self.identity
        while True:
            ds = self.descents_left(cur)
            if not ds:
                break
            s = self.simple_refls[ds[0]]
            cur = self.mul(s, cur)
            y = self.mul(s, y)
        omega = cur
        x = self.mul(self.inv(omega), self.mul(self.inv(y), omega))
        return omega, x

    @cached_property
    def kottwitz(self):
        return KottwitzGroup(self.datum)

    def kappa(self, elt):
        lam, _, tau = elt
        return (self.kottwitz.project(lam), tau)

    def kappa_invariant(self, elt):
        """Conjugation-invariant collapse of kappa: the canonical representative
        of (lam mod ZR) modulo im(1 - gamma_tau) on X/ZR, paired with the
        Gamma-conjugacy data.  Equals plain kappa when Gamma acts trivially."""
        lam, _, tau = elt
        if len(self.datum.gamma_space) == 1:
            return (self.kottwitz.project(lam), 0)
        best = None
        dat = self.datum
        for gi in dat.gamma_allowed:
            g = dat.gamma_space[gi]
            gin = dat.gamma_inv_table[gi]
            t2 = dat.gamma_mul_table[dat.gamma_mul_table[gi][tau]][gin]
            lam2 = mat_vec(g, lam)
            red = self._kappa_mod_tau(lam2, t2)
            cand = (t2, red)
            if best is None or cand < best:
                best = cand
        return (best[1], best[0])

    def _kappa_mod_tau(self, lam, tau):
        return self._kappa_reduce_proj(self.kottwitz.project(lam), tau)

    def _kappa_reduce_proj(self, base, tau):
        # canonical rep of a projection value modulo the subgroup proj((1 - tau) X)
        from .linalg import hnf_row_canonical

        proj = self.kottwitz.project
        d = self.d
        g = self.datum.gamma_space[tau]
        gens = []
        for j in range(d):
            e = tuple(1 if k == j else 0 for k in range(d))
            gens.append(vec_sub(e, mat_vec(g, e)))
        sub = [proj(v) for v in gens]
        n = len(base)
        if not any(any(r) for r in sub):
            return tuple(base)
        H = hnf_row_canonical([list(r) for r in sub])
        red = list(base)
        for row in H:
            pc = next(k for k in range(n) if row[k] != 0)
            q = red[pc] // row[pc]
            red = [a - q * b for a, b in zip(red, row)]
        return tuple(red)

    @cached_property
    def omega_conj_gens(self):
        """Finitely many elements whose conjugations generate the Omega action."""
        out = []
        seen = set()
        d = self.d
        for j in range(d):
            e = tuple(1 if k == j else 0 for k in range(d))
            if self.kottwitz.project(e) == self.kottwitz.project([0] * d):
                continue
            om = self.walk_to_omega(self.translation(e))
            for cand in (om, self.inv(om)):
                if cand not in seen:
                    seen.add(cand)
                    out.append(cand)
        for gi in self.datum.gamma_allowed:
            if gi:
                cand = self.fin_elt(self.fin_id, gi)
                if cand not in seen:
                    seen.add(cand)
                    out.append(cand)
                    out.append(self.inv(cand))
        return tuple(out)

    # -- Newton points and fixed spaces ---------------------------------------------

    def fin_order(self, fin, tau):
        cur = (fin, tau)
        n = 1
        while cur != (self.fin_id, 0):
            f, t = cur
            if t:
                g = self._gamma_fin[t]
                f2 = self.fin_compose(g, self.fin_compose(fin, self.fin_inv(g)))
            else:
                f2 = fin
            cur = (self.fin_compose(f, f2), self.datum.gamma_mul_table[t][tau])
            n += 1
            if n > 100000:
                raise RuntimeError("finite part order blew up")
        return n

    def newton_point(self, elt):
        _, fin, tau = elt
        n = self.fin_order(fin, tau)
        p = elt
        for _ in range(n - 1):
            p = self.mul(p, elt)
        lam, f, t = p
        assert f == self.fin_id and t == 0, "w^order is not a translation"
        return tuple(Fraction(x, n) for x in lam)

    def newton_dominant(self, elt):
        nu = self.newton_point(elt)
        return dominant_rep(self.datum, nu)[0]

    def lin_matrix(self, elt):
        _, fin, tau = elt
        M = self.fin_matrix(fin)
        if tau:
            M = mat_mul(M, self.datum.gamma_space[tau])
        return M

    def fixed_space(self, elt) -> AffineSubspace:
        """V_w = {v : w(v) = v + nu_w}; always nonempty."""
        nu = self.newton_point(elt)
        lam = elt[0]
        M = self.lin_matrix(elt)
        A = tuple(
            tuple(Fraction(M[i][j] - (1 if i == j else 0)) for j in range(self.d))
            for i in range(self.d)
        )
        b = tuple(Fraction(nu[i]) - lam[i] for i in range(self.d))
        sol = solve_affine(A, b)
        assert sol is not None, "V_w is empty; engine invariant broken"
        return AffineSubspace(sol[0], sol[1])

    def linear_fixed_space(self, elt) -> list:
        """Basis of V^{p(elt)} (fixed vectors of the linear part)."""
        M = self.lin_matrix(elt)
        A = tuple(
            tuple(Fraction(M[i][j] - (1 if i == j else 0)) for j in range(self.d))
            for i in range(self.d)
        )
        return nullspace(A)

    # -- alcove geometry ---------------------------------------------------------

    @cached_property
    def p0(self):
        """Interior point of the fundamental alcove: <p0, alpha_i_vee> = 1/(2h)."""
        if not self.datum.simple_idx:
            return tuple(Fraction(0) for _ in range(self.d))
        h = 1 + max(max(a, b) for a, b in self.datum.heights)
        rows = [self.datum.phi[i] for i in self.datum.simple_idx]
        target = [Fraction(1, 2 * h)] * len(rows)
        sol = solve(rows, target)
        assert sol is not None
        return sol

    def alcove_k(self, elt):
        """k(alpha, elt C0) over positive roots, as a tuple of ints."""
        p = self.act(elt, self.p0)
        return tuple(
            math.ceil(vec_dot(p, self.datum.phi[r])) for r in range(self.m)
        )

    def k_of_root(self, elt, signed_idx):
        p = self.act(elt, self.p0)
        return math.ceil(self.pair_root(p, signed_idx))

    def length_oracle(self, elt):
        """Separating-hyperplane count: sum over R+ of |k(alpha, wC0) - 1|."""
        return sum(abs(k - 1) for k in self.alcove_k(elt))

    # -- parabolic structure -------------------------------------------------------

    def subengine(self, J):
        J = tuple(sorted(set(J)))
        eng = self._sub.get(J)
        if eng is None:
            eng = AffineEngine(subdatum(self.datum, J), rep=self.rep)
            self._sub[J] = eng
        return eng

    @cached_property
    def root_support(self):
        """Simple-index support of each positive root."""
        A = tuple(zip(*[self.datum.roots[i] for i in self.datum.simple_idx]))
        out = []
        for r in range(self.m):
            c = solve(A, self.datum.pos_roots[r])
            out.append(frozenset(j for j, x in enumerate(c) if x != 0))
        return tuple(out)

    def pos_roots_in_J(self, J):
        J = frozenset(J)
        return [r for r in range(self.m) if self.root_support[r] <= J]

    def gamma_preserves_J(self, tau, J):
        if tau == 0:
            return True
        rj = {self.datum.pos_roots[r] for r in self.pos_roots_in_J(J)}
        rj |= {vec_neg(v) for v in rj}
        g = self.datum.gamma_space[tau]
        return all(tuple(mat_vec(g, v)) in rj for v in rj)

    def fin_in_WJ(self, fin, J):
        """Membership of a W0 element in the standard parabolic W_J."""
        cur = fin
        Jset = list(J)
        guard = 0
        while cur != self.fin_id:
            img = self.root_images(cur, 0)
            s = next(
                (j for j in Jset if img[self.datum.simple_idx[j]] >= self.m), None
            )
            if s is None:
                return False
            cur = self.fin_compose(cur, self.simple_fin(s))
            guard += 1
            if guard > 10 * self.m + 10:
                raise RuntimeError("W_J membership loop stuck")
        return True

    def in_tilde_WJ(self, elt, J):
        """p(elt) in W_J x| Gamma_J."""
        _, fin, tau = elt
        if not self.gamma_preserves_J(tau, J):
            return False
        return self.fin_in_WJ(fin, J)

    def length_J(self, elt, J):
        if not self.in_tilde_WJ(elt, J):
            raise NotInWJ(f"element not in W~_J for J={J}")
        return self.subengine(J).length(elt)

    def coset_min(self, elt, J, side="left"):
        """Minimal representative of W_J elt (left) or elt W_J (right)."""
        cur = elt
        while True:
            if side == "left":
                s = next((j for j in J if not self.left_ascent(cur, j)), None)
                if s is None:
                    return cur
                cur = self.mul(self.simple_refls[s], cur)
            else:
                s = next((j for j in J if not self.right_ascent(cur, j)), None)
                if s is None:
                    return cur
                cur = self.mul(cur, self.simple_refls[s])

    def coset_min_fin(self, fin, J, side="left"):
        e = self.fin_elt(fin)
        return self.coset_min(e, J, side)[1]

    # -- P-alcove test ---------------------------------------------------------------

    def is_p_alcove(self, elt, J, z_fin):
        """(J, z)-alcove test: z elt z^{-1} in W~_J and elt C0 >=_alpha C0 for
        alpha in z^{-1}(R+ - R_J+)."""
        z = self.fin_elt(z_fin)
        if not self.in_tilde_WJ(self.conj(z, elt), J):
            return False
        zinv_img = self.root_images_inv(z_fin, 0)
        in_J = set(self.pos_roots_in_J(J))
        p = self.act(elt, self.p0)
        for beta in range(self.m):
            if beta in in_J:
                continue
            alpha = zinv_img[beta]
            k_base = 1 if alpha < self.m else 0
            if math.ceil(self.pair_root(p, alpha)) < k_base:
                return False
        return True

    def palcove_step_z(self, z_fin, s, J):
        """The z-update of the alcove lemma: the minimal element of W_J z p(s)."""
        ps = self.simple_refls[s][1]
        return self.coset_min_fin(self.fin_compose(z_fin, ps), J, side="left")

    # -- regular points ----------------------------------------------------------------

    def regular_point_in_closure(self, E: AffineSubspace, region="alcove"):
        """A rational point p of E inside the closed region such that every
        hyperplane through p contains all of E; None if no such point exists.

        region: "alcove" (closure of C0) or "chamber" (dominant cone).
        """
        from .linalg import relative_interior_point

        k = len(E.dirs)
        consts = []
        coeffs = []
        for r in range(self.m):
            c0 = vec_dot(E.base, self.datum.phi[r])
            cv = tuple(vec_dot(d, self.datum.phi[r]) for d in E.dirs)
            consts.append(c0)
            coeffs.append(cv)
        rng = range(self.m) if region == "alcove" else [
            self.datum.simple_idx[i] for i in range(len(self.datum.simple_idx))
        ]
        if k == 0:
            ok = all(
                0 <= consts[r] and (region != "alcove" or consts[r] <= 1) for r in rng
            )
            return E.base if ok else None
        A_ub, b_ub, tag = [], [], []
        for r in rng:
            A_ub.append([-x for x in coeffs[r]])
            b_ub.append(consts[r])
            tag.append(r)
            if region == "alcove":
                A_ub.append(list(coeffs[r]))
                b_ub.append(1 - consts[r])
                tag.append(r)
        if not A_ub:
            return E.base
        ri = relative_interior_point(A_ub, b_ub)
        if ri is None:
            return None
        t, strict = ri
        nonconst = [r for r in range(self.m) if any(x != 0 for x in coeffs[r])]
        # constraints that are implicit equalities on a non-constant functional
        # pin E cap region inside a hyperplane E is not contained in
        for i, r in enumerate(tag):
            if not strict[i] and r in nonconst:
                return None

        def g(r, tv):
            return consts[r] + vec_dot(coeffs[r], tv)

        guard = 0
        while True:
            viol = [r for r in nonconst if g(r, t).denominator == 1]
            if not viol:
                break
            guard += 1
            assert guard <= self.m + 2, "regular point repair failed to converge"
            r0 = viol[0]
            q = next(
                (
                    tuple(1 if j == jj else 0 for j in range(k))
                    for jj in range(k)
                    if coeffs[r0][jj] != 0
                ),
                None,
            )
            assert q is not None
            lo, hi = None, None
            for Ai, bi in zip(A_ub, b_ub):
                a = vec_dot(Ai, q)
                slack = bi - vec_dot(Ai, t)
                if a > 0:
                    cand = Fraction(slack, a)
                    hi = cand if hi is None or cand < hi else hi
                elif a < 0:
                    cand = Fraction(slack, a)
                    lo = cand if lo is None or cand > lo else lo
            lo = lo if lo is not None else Fraction(-1)
            hi = hi if hi is not None else Fraction(1)
            bad = set()
            for r in nonconst:
                a = vec_dot(coeffs[r], q)
                if a == 0:
                    continue
                v0 = g(r, t)
                zlo = math.floor(min(v0 + lo * a, v0 + hi * a))
                zhi = math.ceil(max(v0 + lo * a, v0 + hi * a))
                for z in range(zlo, zhi + 1):
                    bad.add(Fraction(z - v0, a))
            pts = sorted(b for b in bad | {lo, hi} if lo <= b <= hi)
            eps = None
            for a, b in zip(pts, pts[1:]):
                if a < b:
                    mid = (a + b) / 2
                    if mid != 0 and (eps is None or abs(mid) < abs(eps)):
                        eps = mid
            assert eps is not None, "no room to perturb off hyperplanes"
            t = vec_add(t, vec_scale(eps, q))
        return vec_add(E.base, tuple(vec_dot(t, col) for col in zip(*E.dirs)))

    # -- dominant sorting with an infinitesimal (lexicographic) perturbation -------------

    def sort_dominant_eps(self, va, vb, J=None):
        """Sort the formal vector va + eps*vb (eps infinitesimal > 0) into the
        dominant chamber, using reflections from J only (default: all simples).
        Returns (wa, wb, fin) with fin applied to both."""
        va = tuple(Fraction(x) for x in va)
        vb = tuple(Fraction(x) for x in vb)
        idxs = range(len(self.datum.simple_idx)) if J is None else J
        fin = self.fin_id
        guard = 0
        while True:
            pick = None
            for i in idxs:
                si = self.datum.simple_idx[i]
                a = vec_dot(va, self.datum.phi[si])
                b = vec_dot(vb, self.datum.phi[si])
                if a < 0 or (a == 0 and b < 0):
                    pick = i
                    break
            if pick is None:
                return va, vb, fin
            sf = self.simple_fin(pick)
            va = self.fin_apply(sf, va)
            vb = self.fin_apply(sf, vb)
            fin = self.fin_compose(sf, fin)
            guard += 1
            if guard > 4 * self.m * self.m + 16:
                raise RuntimeError("eps-dominant sort failed to terminate")

    @cached_property
    def weight_duals(self):
        """Rational vectors in the root span with <w_i, alpha_j_vee> = delta_ij."""
        simples = [tuple(Fraction(x) for x in self.datum.roots[i]) for i in self.datum.simple_idx]
        n = len(simples)
        cartan = tuple(
            tuple(self.datum.pair(simples[i], self.datum.simple_idx[j]) for j in range(n))
            for i in range(n)
        )
        inv = mat_inverse(cartan)
        out = []
        for i in range(n):
            v = tuple(Fraction(0) for _ in range(self.d))
            for k in range(n):
                v = vec_add(v, vec_scale(inv[i][k], simples[k]))
            out.append(v)
            assert all(
                self.datum.pair(v, self.datum.simple_idx[j]) == (1 if j == i else 0)
                for j in range(n)
            )
        return tuple(out)

    # -- notation -----------------------------------------------------------------------

    def format(self, elt) -> str:
        lam, fin, tau = elt
        parts = []
        if any(lam):
            parts.append("t[" + ",".join(str(x) for x in lam) + "]")
        if fin != self.fin_id:
            if self.rep == "perm":
                parts.append(_perm_cycles_str(fin))
            else:
                img = self.root_images(fin, 0)
                toks = []
                for j in range(len(self.datum.simple_idx)):
                    v = img[self.datum.simple_idx[j]]
                    toks.append(str(v + 1) if v < self.m else str(-(v - self.m + 1)))
                parts.append("p[" + ",".join(toks) + "]")
        if tau:
            parts.append(f"g{tau}")
        return "*".join(parts) if parts else "e"

    def parse(self, text: str):
        text = text.strip()
        if text in ("e", "1", ""):
            return self.identity
        out = self.identity
        for token in text.split("*"):
            token = token.strip()
            if not token or token == "e":
                continue
            if token.startswith("t["):
                body = token[2:-1]
                lam = tuple(int(x) for x in body.split(",")) if body else ()
                if len(lam) != self.d:
                    raise ValueError(f"translation arity mismatch in {token!r}")
                out = self.mul(out, self.translation(lam))
            elif token.startswith("("):
                if self.rep != "perm":
                    raise ValueError("cycle notation needs a permutation-type datum")
                out = self.mul(out, self.fin_elt(_parse_cycles(token, self.d)))
            elif token.startswith("p["):
                out = self.mul(out, self.fin_elt(self._fin_from_simple_images(token)))
            elif token.startswith("g"):
                gi = int(token[1:])
                if gi not in self.datum.gamma_allowed:
                    raise ValueError(f"gamma index {gi} not in this datum's Gamma")
                out = self.mul(out, self.fin_elt(self.fin_id, gi))
            else:
                raise ValueError(f"cannot parse element token {token!r}")
        return out

    def _fin_from_simple_images(self, token):
        body = token[2:-1]
        vals = [int(x) for x in body.split(",")] if body else []
        if len(vals) != len(self.datum.simple_idx):
            raise ValueError("image list arity mismatch")
        imgs = []
        for v in vals:
            r = abs(v) - 1
            if not 0 <= r < self.m:
                raise ValueError(f"root index {v} out of range")
            vec = self.datum.pos_roots[r]
            imgs.append(vec if v > 0 else vec_neg(vec))
        simples = [self.datum.roots[i] for i in self.datum.simple_idx]
        comp = nullspace([self.datum.phi[i] for i in self.datum.simple_idx])
        basis = [tuple(Fraction(x) for x in s) for s in simples] + list(comp)
        images = [tuple(Fraction(x) for x in v) for v in imgs] + list(comp)
        B = tuple(zip(*basis))
        Binv = mat_inverse(B)
        M = mat_mul(tuple(zip(*images)), Binv)
        if any(Fraction(x).denominator != 1 for row in M for x in row):
            raise ValueError("simple-root images do not define an integral map")
        mat = tuple(tuple(int(x) for x in row) for row in M)
        return self._fin_of_matrix(mat)

    def sort_key(self, elt):
        lam, fin, tau = elt
        fk = fin if self.rep == "perm" else tuple(x for row in fin for x in row)
        return (lam, fk, tau)

    def full_key(self, elt):
        return (self.length(elt),) + self.sort_key(elt)


def _perm_cycles_str(perm):
    n = len(perm)
    seen = [False] * n
    cycles = []
    for i in range(n):
        if seen[i] or perm[i] == i:
            seen[i] = True
            continue
        cyc = [i]
        seen[i] = True
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen[j] = True
            j = perm[j]
        cycles.append(cyc)
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cycles)


def _parse_cycles(token, d):
    perm = list(range(d))
    for grp in re.findall(r"\(([^()]*)\)", token):
        vals = [int(x) - 1 for x in re.split(r"[,\s]+", grp.strip()) if x]
        if not vals:
            continue
        if any(not 0 <= v < d for v in vals):
            raise ValueError(f"cycle entry out of range in {token!r}")
        for a, b in zip(vals, vals[1:] + vals[:1]):
            perm[a] = b
    return tuple(perm)
