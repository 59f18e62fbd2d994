"""Minimal-length conjugacy machinery: twisted-conjugation reduction, minimal
sets, canonical class keys, partial conjugation, and ellipticity.

The reduction moves are w -> s w s with non-increasing length.  A class key is
(dominant Newton point, Kottwitz value, canonical minimal representative); the
canonical representative is the least element of the computed minimal set
under (length, translation, finite part, gamma).  Minimal sets are closed
under length-preserving simple conjugation, Omega-conjugation, and a bounded
conjugation search by short W-elements satisfying the length-additivity
condition; coincidences of (Newton, kappa) between distinct keys trigger a
deeper connection search and are reported, never silently merged.
"""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction

from .engine import AffineEngine, AffineSubspace
from .linalg import mat_identity, nullspace, rank, row_reduce, solve, vec_dot


class ReductionPath:
    """Conjugation path start -> end by steps (s, result), lengths non-increasing."""

    def __init__(self, start, steps):
        self.start = start
        self.steps = tuple(steps)

    @property
    def end(self):
        return self.steps[-1][1] if self.steps else self.start

    def replay(self, eng):
        cur = self.start
        prev_len = eng.length(cur)
        for s, res in self.steps:
            cur, delta = eng.conj_simple(cur, s)
            if cur != res or delta > 0:
                return False
            L = eng.length(cur)
            if L > prev_len:
                return False
            prev_len = L
        return True

    def to_json(self, eng):
        return {
            "start": eng.format(self.start),
            "steps": [[int(s), eng.format(r)] for s, r in self.steps],
            "end": eng.format(self.end),
        }


class ClassKey:
    """Canonical identifier of a W~-conjugacy class."""

    __slots__ = ("nu", "kappa", "canonical_min", "length", "invariant", "lab")

    def __init__(self, nu, kappa, canonical_min, length, invariant, lab):
        self.nu = nu
        self.kappa = kappa
        self.canonical_min = canonical_min
        self.length = length
        self.invariant = invariant
        self.lab = lab

    def __repr__(self):
        return f"ClassKey({self.lab.eng.format(self.canonical_min)})"

    def sort_token(self):
        return (self.length,) + self.lab.eng.sort_key(self.canonical_min)

    def to_json(self):
        eng = self.lab.eng
        return {
            "nu": [f"{Fraction(x).numerator}/{Fraction(x).denominator}" for x in self.nu],
            "kappa": repr(self.kappa),
            "min_rep": eng.format(self.canonical_min),
        }


def _det_fraction(A):
    A = [list(map(Fraction, row)) for row in A]
    d = len(A)
    sign = 1
    for c in range(d):
        p = next((r for r in range(c, d) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        for r in range(c + 1, d):
            f = A[r][c] / A[c][c]
            A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    det = Fraction(sign)
    for c in range(d):
        det *= A[c][c]
    return det


def char_poly(M):
    """Coefficients of det(M - xI), exact; a conjugation invariant."""
    d = len(M)
    pts = list(range(d + 1))
    vals = [
        _det_fraction([[M[i][j] - (x if i == j else 0) for j in range(d)] for i in range(d)])
        for x in pts
    ]
    coeffs = [Fraction(0)] * (d + 1)
    for i, xi in enumerate(pts):
        num = [Fraction(1)]
        den = Fraction(1)
        for j, xj in enumerate(pts):
            if i != j:
                num = _poly_mul_linear(num, -xj)
                den *= xi - xj
        f = vals[i] / den
        for k in range(len(num)):
            coeffs[k] += f * num[k]
    return tuple(coeffs)


def _poly_mul_linear(p, c):
    # p(x) * (x + c)
    out = [Fraction(0)] * (len(p) + 1)
    for i, a in enumerate(p):
        out[i + 1] += a
        out[i] += a * c
    return out


class ConjugacyLab:
    def __init__(self, eng: AffineEngine, ball_bound=None, audit_node_cap=200000):
        self.eng = eng
        if ball_bound is None:
            ball_bound = 6 if eng.d <= 3 else 3
        self.ball_bound = ball_bound
        self.audit_node_cap = audit_node_cap
        self._minimal = {}
        self._key_of = {}
        self._by_inv = {}
        self._ball = None
        self._wj_cache = {}
        self.audit_events = []

    # -- orbit scans ------------------------------------------------------------

    def slice_key(self, elt):
        """Kottwitz value and gamma part; Omega-conjugation moves are restricted
        to this slice so that equal-length orbits stay finite when Gamma acts
        nontrivially on X/ZR.  A no-op restriction for trivial Gamma."""
        lam, _, tau = elt
        return (self.eng.kottwitz.project(lam), tau)

    def _scan(self, elt, use_omega, rng=None, parents=None):
        """BFS over length-preserving conjugates of elt.

        Returns ("pivot", u, s) for the first conjugate u with a strict descent
        l(s u s) < l(u), or ("minimal", visited-set) on exhaustion.
        """
        eng = self.eng
        start = elt
        slice0 = self.slice_key(elt)
        seen = {start}
        frontier = deque([start])
        ns = len(eng.simple_refls)
        order = list(range(ns))
        while frontier:
            u = frontier.popleft()
            if rng is not None:
                rng.shuffle(order)
            for s in order:
                v, delta = eng.conj_simple(u, s)
                if delta < 0:
                    return ("pivot", u, s)
                if delta == 0 and v not in seen:
                    seen.add(v)
                    if parents is not None:
                        parents[v] = (u, s)
                    frontier.append(v)
            if use_omega:
                for om in eng.omega_conj_gens:
                    v = eng.conj(om, u)
                    if v not in seen and self.slice_key(v) == slice0:
                        seen.add(v)
                        if parents is not None:
                            parents[v] = (u, None)
                        frontier.append(v)
        return ("minimal", seen)

    def descent_pivot(self, elt, rng=None):
        if self._minimal.get(elt):
            return None
        res = self._scan(elt, use_omega=True, rng=rng)
        if res[0] == "minimal":
            for v in res[1]:
                self._minimal[v] = True
            return None
        return res[1], res[2]

    def is_minimal(self, elt):
        return self.descent_pivot(elt) is None

    def reduce_to_min(self, elt):
        """(minimal element, ReductionPath); path uses simple conjugations only."""
        eng = self.eng
        steps = []
        cur = elt
        while True:
            if self._minimal.get(cur):
                break
            parents = {}
            res = self._scan(cur, use_omega=False, parents=parents)
            if res[0] == "minimal":
                for v in res[1]:
                    self._minimal[v] = True
                break
            _, u, s = res
            chain = []
            node = u
            while node != cur:
                p, ps = parents[node]
                chain.append((ps, node))
                node = p
            steps.extend(reversed(chain))
            nxt, delta = eng.conj_simple(u, s)
            assert delta < 0
            steps.append((s, nxt))
            cur = nxt
        return cur, ReductionPath(elt, steps)

    # -- minimal sets -----------------------------------------------------------

    def ball_W(self, bound):
        """All W-elements of length <= bound (excluding the identity)."""
        if self._ball is not None and self._ball[0] >= bound:
            return [x for x in self._ball[1] if self.eng.length(x) <= bound]
        eng = self.eng
        out = []
        seen = {eng.identity}
        frontier = [eng.identity]
        for _ in range(bound):
            nxt = []
            for u in frontier:
                for s in range(len(eng.simple_refls)):
                    if eng.right_ascent(u, s):
                        v = eng.mul(u, eng.simple_refls[s])
                        if v not in seen:
                            seen.add(v)
                            nxt.append(v)
            frontier = nxt
            out.extend(nxt)
        self._ball = (bound, out)
        return out

    def _close_equal_length(self, seeds):
        eng = self.eng
        seeds = list(seeds)
        slice0 = self.slice_key(seeds[0])
        seen = set(seeds)
        frontier = deque(seeds)
        while frontier:
            u = frontier.popleft()
            for s in range(len(eng.simple_refls)):
                v, delta = eng.conj_simple(u, s)
                assert delta >= 0, "min_set seed was not minimal"
                if delta == 0 and v not in seen:
                    seen.add(v)
                    frontier.append(v)
            for om in eng.omega_conj_gens:
                v = eng.conj(om, u)
                if v not in seen and self.slice_key(v) == slice0:
                    seen.add(v)
                    frontier.append(v)
        return seen

    def min_set(self, m, ball_bound=None):
        """Closure of a minimal element under the three kinds of moves."""
        eng = self.eng
        B = self.ball_bound if ball_bound is None else ball_bound
        closure = self._close_equal_length([m])
        if B > 0:
            L = eng.length(m)
            ball = self.ball_W(B)
            while True:
                new = []
                for u in closure:
                    lu = eng.length(u)
                    for x in ball:
                        lx = eng.length(x)
                        if eng.length(eng.mul(x, u)) == lx + lu or eng.length(
                            eng.mul(u, eng.inv(x))
                        ) == lx + lu:
                            v = eng.conj(x, u)
                            if eng.length(v) == L and v not in closure:
                                new.append(v)
                if not new:
                    break
                closure = self._close_equal_length(closure | set(new))
        return frozenset(closure)

    # -- class keys ---------------------------------------------------------------

    def class_key(self, elt) -> ClassKey:
        k = self._key_of.get(elt)
        if k is not None:
            return k
        m, _ = self.reduce_to_min(elt)
        k = self._key_for_min(m)
        self._key_of[elt] = k
        return k

    def fixed_locus_invariant(self, elt):
        """Sorted fractional pairings of V_elt against the coroots vanishing on
        its direction space; invariant under conjugation in W~."""
        eng = self.eng
        E = eng.fixed_space(elt)
        out = []
        for r in range(eng.m):
            if all(vec_dot(d, eng.datum.phi[r]) == 0 for d in E.dirs):
                v = vec_dot(E.base, eng.datum.phi[r])
                out.append(Fraction(v) - (Fraction(v).numerator // Fraction(v).denominator))
        return tuple(sorted(out))

    def _key_for_min(self, m):
        eng = self.eng
        if m in self._key_of:
            return self._key_of[m]
        members = self.min_set(m)
        canon = min(members, key=eng.sort_key)
        if canon in self._key_of:
            key = self._key_of[canon]
        else:
            nu = eng.newton_dominant(canon)
            kinv = eng.kappa_invariant(canon)
            L = eng.length(canon)
            fin_inv = char_poly(eng.lin_matrix(canon))
            inv = (nu, kinv, L, fin_inv, self.fixed_locus_invariant(canon))
            key = None
            for other in self._by_inv.get(inv, []):
                if self._connected(canon, other.canonical_min):
                    self.audit_events.append(
                        ("merged", eng.format(canon), eng.format(other.canonical_min))
                    )
                    key = other
                    if eng.sort_key(canon) < eng.sort_key(key.canonical_min):
                        key.canonical_min = canon
                    break
                else:
                    self.audit_events.append(
                        ("unresolved-coincidence", eng.format(canon), eng.format(other.canonical_min))
                    )
            if key is None:
                key = ClassKey(nu, eng.kappa(canon), canon, L, inv, self)
                self._by_inv.setdefault(inv, []).append(key)
        for v in members:
            self._key_of[v] = key
            self._minimal[v] = True
        return key

    def _connected(self, a, b):
        """Bounded search for a conjugator linking two minimal elements."""
        eng = self.eng
        targets = self._close_equal_length([b])
        if a in targets:
            return True
        for x in self.ball_W(2 * self.ball_bound):
            la, lx = eng.length(a), eng.length(x)
            if eng.length(eng.mul(x, a)) == lx + la or eng.length(
                eng.mul(a, eng.inv(x))
            ) == lx + la:
                if eng.conj(x, a) in targets:
                    return True
        # excursion search: allow conjugation through length l(a)+2
        L = eng.length(a)
        slice0 = self.slice_key(a)
        seen = {a}
        frontier = deque([a])
        nodes = 0
        while frontier and nodes < self.audit_node_cap:
            u = frontier.popleft()
            nodes += 1
            for s in range(len(eng.simple_refls)):
                v, _ = eng.conj_simple(u, s)
                lv = eng.length(v)
                if lv > L + 2 or v in seen:
                    continue
                if lv == L and v in targets:
                    return True
                seen.add(v)
                frontier.append(v)
            for om in eng.omega_conj_gens:
                v = eng.conj(om, u)
                if v not in seen and self.slice_key(v) == slice0:
                    if eng.length(v) == L and v in targets:
                        return True
                    seen.add(v)
                    frontier.append(v)
        return False

    # -- partial conjugation ---------------------------------------------------------

    def conj_simple_to_simple(self, elt, j):
        """Index j' with elt s_j elt^{-1} = s_{j'}, or None."""
        eng = self.eng
        a, k = eng.simple_affine_roots[j]
        img, kk = eng.elt_on_affroot(elt, a, k)
        if not eng.aff_positive(img, kk):
            img = eng.datum.neg_index(img)
            kk = -kk
        for jp, (a2, k2) in enumerate(eng.simple_affine_roots):
            if (a2, k2) == (img, kk):
                return jp
        return None

    def I_of(self, J, elt):
        """Largest K subset of J with elt K elt^{-1} = K (simple index sets)."""
        eng = self.eng
        for j in J:
            if not eng.left_ascent(elt, j):
                raise ValueError("element is not a minimal coset representative for J")
        K = set(J)
        while True:
            K2 = set()
            for j in K:
                jp = self.conj_simple_to_simple(self.eng.inv(elt), j)
                if jp is not None and jp in K:
                    K2.add(j)
            if K2 == K:
                break
            K = K2
        # sanity: elt K elt^-1 == K
        img = {self.conj_simple_to_simple(elt, j) for j in K}
        assert img == K, "I(J, w) is not normalized by w"
        return frozenset(K)

    def partial_min(self, elt, J):
        """Reduce under conjugation by W_J only: returns (u, x, path) with
        u in ^J W~ minimal, x in W_{I(J, u)}, and x * u in the W_J-orbit."""
        eng = self.eng
        J = tuple(sorted(J))
        steps = []
        cur = elt
        while True:
            moved = True
            while moved:
                moved = False
                for s in J:
                    v, delta = eng.conj_simple(cur, s)
                    if delta < 0:
                        steps.append((s, v))
                        cur = v
                        moved = True
            # explore the equal-length J-orbit for a descent or a valid form
            parents = {}
            seen = {cur}
            frontier = deque([cur])
            found_desc = None
            candidate = None
            while frontier and found_desc is None:
                u = frontier.popleft()
                cand = self._try_partial_form(u, J)
                if cand is not None and candidate is None:
                    candidate = (u, cand)
                for s in J:
                    v, delta = eng.conj_simple(u, s)
                    if delta < 0:
                        found_desc = (u, s, v)
                        break
                    if delta == 0 and v not in seen:
                        seen.add(v)
                        parents[v] = (u, s)
                        frontier.append(v)
            if found_desc is None:
                assert candidate is not None, "partial conjugation found no canonical form"
                u0, (umin, x) = candidate
                node = u0
                chain = []
                while node != cur:
                    p, ps = parents[node]
                    chain.append((ps, node))
                    node = p
                steps.extend(reversed(chain))
                return umin, x, ReductionPath(elt, steps)
            u, s, v = found_desc
            node = u
            chain = []
            while node != cur:
                p, ps = parents[node]
                chain.append((ps, node))
                node = p
            steps.extend(reversed(chain))
            steps.append((s, v))
            cur = v

    def _try_partial_form(self, u, J):
        eng = self.eng
        umin = eng.coset_min(u, J, side="left")
        x = eng.mul(u, eng.inv(umin))
        lam, fin, tau = x
        if any(lam) or tau != 0:
            return None
        I = self.I_of(J, umin)
        if not eng.fin_in_WJ(fin, I):
            return None
        return umin, x

    # -- ellipticity --------------------------------------------------------------

    def fixed_space_of_group(self, J):
        """Basis of V^{W_J x| Gamma_J}."""
        eng = self.eng
        rows = [eng.datum.phi[eng.datum.simple_idx[j]] for j in J]
        sub = eng.subengine(J)
        for gi in sub.datum.gamma_allowed:
            if gi == 0:
                continue
            g = eng.datum.gamma_space[gi]
            for i in range(eng.d):
                rows.append(tuple(g[i][k] - (1 if i == k else 0) for k in range(eng.d)))
        if not rows:
            return [tuple(Fraction(int(i == j)) for j in range(eng.d)) for i in range(eng.d)]
        return nullspace(rows)

    def is_elliptic(self, elt, J):
        """V^{p(elt)} inside V^{W_J x| Gamma_J}; precondition p(elt) in W_J x| Gamma_J."""
        eng = self.eng
        if not eng.in_tilde_WJ(elt, J):
            raise ValueError("finite part not in W_J x| Gamma_J")
        fix_w = eng.linear_fixed_space(elt)
        amb = self.fixed_space_of_group(J)
        if not fix_w:
            return True
        if not amb:
            return False
        M = list(amb)
        base_rank = rank(M)
        return rank(M + list(fix_w)) == base_rank

    # -- Theorem-4.6-style conjugator search ------------------------------------------

    def enumerate_WJ_fins(self, J, cap=100000):
        J = tuple(sorted(J))
        got = self._wj_cache.get(J)
        if got is not None:
            return got
        eng = self.eng
        seen = {eng.fin_id: 0}
        order = [eng.fin_id]
        frontier = [eng.fin_id]
        while frontier:
            nxt = []
            for f in frontier:
                for j in J:
                    g = eng.fin_compose(f, eng.simple_fin(j))
                    if g not in seen:
                        seen[g] = 0
                        order.append(g)
                        nxt.append(g)
            frontier = nxt
            if len(order) > cap:
                raise RuntimeError("W_J enumeration exceeded cap")
        order.sort(key=lambda f: (eng.length(eng.fin_elt(f)), eng.sort_key(eng.fin_elt(f))))
        self._wj_cache[J] = order
        return order

    def find_h(self, I, J, w_elt, u_elt):
        """h in ^{I(J,u)} W_J ^{I} with h w h^{-1} = u and h I h^{-1} inside I(J,u).

        w_elt, u_elt are finite elements (possibly with gamma part), of minimal
        length in their common W_J-conjugacy class.
        """
        eng = self.eng
        # I(J, u): largest K inside J with u K u^{-1} = K
        Iu = self._stable_subset(J, u_elt)
        for fin in self.enumerate_WJ_fins(J):
            h = eng.fin_elt(fin)
            if eng.conj(h, w_elt) != u_elt:
                continue
            if any(not eng.left_ascent(h, j) for j in Iu):
                continue
            if any(not eng.right_ascent(h, j) for j in I):
                continue
            hI = {self.conj_simple_to_simple(h, j) for j in I}
            if None in hI or not hI <= set(Iu):
                continue
            return h, frozenset(Iu)
        return None, frozenset(Iu)

    def _stable_subset(self, J, elt):
        K = set(J)
        while True:
            K2 = set()
            for j in K:
                jp = self.conj_simple_to_simple(elt, j)
                if jp is not None and jp in K:
                    K2.add(j)
            if K2 == K:
                return frozenset(K)
            K = K2
