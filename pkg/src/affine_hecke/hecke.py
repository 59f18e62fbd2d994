"""Equal-parameter affine Hecke algebra in the Iwahori-Matsumoto basis.

Elements are dicts {group element: Laurent}.  The defining relations are
T_x T_y = T_{xy} when lengths add, and T_s^2 = 1 + (v - v^{-1}) T_s for the
simple reflections; every product reduces to these through reduced words and
the length-zero subgroup.

theta_lam are the Bernstein elements T_chi T_{chi'}^{-1} for a dominant split
lam = chi - chi'; the split is canonical and the result split-independent.
"""

from __future__ import annotations

from .engine import AffineEngine, DatumMismatch, NotInWJ
from .laurent import XI, Laurent


def hadd(h1, h2):
    out = dict(h1)
    for e, c in h2.items():
        n = out.get(e)
        n = c if n is None else n + c
        if n.is_zero():
            out.pop(e, None)
        else:
            out[e] = n
    return out


def hscale(h, c):
    if isinstance(c, int):
        c = Laurent.const(c)
    out = {}
    for e, k in h.items():
        n = k * c
        if not n.is_zero():
            out[e] = n
    return out


def hekeys(h):
    return sorted(h)


class HeckeAlgebra:
    def __init__(self, eng: AffineEngine):
        self.eng = eng
        self._theta_cache = {}
        self._inv_cache = {}
        self._sub = {}

    # -- basics -------------------------------------------------------------------

    def T(self, elt, coeff=None):
        self.check_element(elt)
        return {elt: coeff if coeff is not None else Laurent.one()}

    def one(self):
        return {self.eng.identity: Laurent.one()}

    def check_element(self, elt):
        lam, fin, tau = elt
        if len(lam) != self.eng.d or tau not in self.eng.datum.gamma_allowed:
            raise DatumMismatch("element does not belong to this algebra's datum")

    def equal(self, h1, h2):
        return {e: c for e, c in h1.items() if c} == {e: c for e, c in h2.items() if c}

    # -- multiplication --------------------------------------------------------------

    def rmul_simple(self, h, s):
        eng = self.eng
        se = eng.simple_refls[s]
        out = {}
        for elt, c in h.items():
            tgt = eng.mul(elt, se)
            if eng.right_ascent(elt, s):
                n = out.get(tgt)
                n = c if n is None else n + c
                if n.is_zero():
                    out.pop(tgt, None)
                else:
                    out[tgt] = n
            else:
                n = out.get(tgt)
                n = c if n is None else n + c
                if n.is_zero():
                    out.pop(tgt, None)
                else:
                    out[tgt] = n
                cc = c * XI
                n = out.get(elt)
                n = cc if n is None else n + cc
                if n.is_zero():
                    out.pop(elt, None)
                else:
                    out[elt] = n
        return out

    def lmul_simple(self, s, h):
        eng = self.eng
        se = eng.simple_refls[s]
        out = {}
        for elt, c in h.items():
            tgt = eng.mul(se, elt)
            asc = eng.left_ascent(elt, s)
            n = out.get(tgt)
            n = c if n is None else n + c
            if n.is_zero():
                out.pop(tgt, None)
            else:
                out[tgt] = n
            if not asc:
                cc = c * XI
                n = out.get(elt)
                n = cc if n is None else n + cc
                if n.is_zero():
                    out.pop(elt, None)
                else:
                    out[elt] = n
        return out

    def rmul_T(self, h, y):
        """h * T_y."""
        eng = self.eng
        omega, word = eng.reduced_word(y)
        if omega != eng.identity:
            h = {eng.mul(e, omega): c for e, c in h.items()}
        for s in word:
            h = self.rmul_simple(h, s)
        return h

    def lmul_T(self, y, h):
        """T_y * h."""
        eng = self.eng
        omega, word = eng.reduced_word(y)
        for s in reversed(word):
            h = self.lmul_simple(s, h)
        if omega != eng.identity:
            h = {eng.mul(omega, e): c for e, c in h.items()}
        return h

    def mul(self, h1, h2):
        out = {}
        for y, c in sorted(h2.items(), key=lambda t: self.eng.sort_key(t[0])):
            out = hadd(out, hscale(self.rmul_T(h1, y), c))
        return out

    def inv_T(self, elt):
        """T_elt^{-1} as a Hecke element (T_s^{-1} = T_s - xi along a word)."""
        got = self._inv_cache.get(elt)
        if got is not None:
            return got
        eng = self.eng
        omega, word = eng.reduced_word(elt)
        h = self.one()
        for s in reversed(word):
            h = hadd(self.rmul_simple(h, s), hscale(h, -XI))
        if omega != eng.identity:
            oi = eng.inv(omega)
            h = {eng.mul(e, oi): c for e, c in h.items()}
        self._inv_cache[elt] = h
        return h

    # -- Bernstein elements --------------------------------------------------------------

    def is_dominant(self, lam):
        eng = self.eng
        return all(eng.pair_root(lam, i) >= 0 for i in eng.datum.simple_idx)

    def theta_split(self, lam):
        """Canonical dominant split lam = chi - chi'.

        Prefers the small split chi' = sum of max(0, -<lam, a_i^vee>) dual
        vectors when integral duals exist; falls back to the 2rho-regularizing
        shift with minimal coefficient.  Any split yields the same theta.
        """
        eng = self.eng
        lam = tuple(int(x) for x in lam)
        duals = eng.datum.fundamental_duals
        if all(d is not None for d in duals):
            chi2 = tuple(0 for _ in range(eng.d))
            for i, si in enumerate(eng.datum.simple_idx):
                c = -eng.pair_root(lam, si)
                if c > 0:
                    chi2 = tuple(a + c * b for a, b in zip(chi2, duals[i]))
            chi = tuple(a + b for a, b in zip(lam, chi2))
            if self.is_dominant(chi) and self.is_dominant(chi2):
                return chi, chi2
        from .rootdata import dominant_rep

        lam_plus, _ = dominant_rep(eng.datum, lam)
        lam_plus = tuple(int(x) for x in lam_plus)
        two_rho = eng.datum.two_rho
        diff = tuple(a - b for a, b in zip(lam_plus, lam))
        c = 0
        while True:
            chi2 = tuple(a + c * b for a, b in zip(diff, two_rho))
            if self.is_dominant(chi2):
                break
            c += 1
        chi = tuple(a + b for a, b in zip(lam, chi2))
        assert self.is_dominant(chi)
        return chi, chi2

    def theta(self, lam, split=None):
        lam = tuple(int(x) for x in lam)
        if split is None and lam in self._theta_cache:
            return self._theta_cache[lam]
        eng = self.eng
        chi, chi2 = split if split is not None else self.theta_split(lam)
        assert tuple(a - b for a, b in zip(chi, chi2)) == lam
        assert self.is_dominant(chi) and self.is_dominant(chi2)
        if not any(chi2):
            out = self.T(eng.translation(chi))
        else:
            out = self.lmul_T(eng.translation(chi), self.inv_T(eng.translation(chi2)))
        if split is None:
            self._theta_cache[lam] = out
        return out

    def weyl_orbit(self, lam):
        eng = self.eng
        lam = tuple(int(x) for x in lam)
        seen = {lam}
        frontier = [lam]
        while frontier:
            nxt = []
            for v in frontier:
                for i in range(len(eng.datum.simple_idx)):
                    w = eng.fin_apply(eng.simple_fin(i), v)
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
                for gi in eng.datum.gamma_allowed:
                    if gi:
                        w = eng.fin_apply(eng._gamma_fin[gi], v)
                        if w not in seen:
                            seen.add(w)
                            nxt.append(w)
            frontier = nxt
        return sorted(seen)

    def central_z(self, lam):
        """z_lam = sum of theta over the finite Weyl (x Gamma) orbit; central."""
        if not self.is_dominant(lam):
            raise ValueError("central_z expects a dominant weight")
        out = {}
        for mu in self.weyl_orbit(lam):
            out = hadd(out, self.theta(mu))
        return out

    def bernstein_comm_check(self, chi, i):
        """The commutation identity for theta_chi against the i-th simple
        reflection, with the geometric-sum right side; True iff it holds."""
        eng = self.eng
        si = eng.datum.simple_idx[i]
        coroot = eng.datum.coroots[si]
        if all(x % 2 == 0 for x in coroot):
            raise ValueError("coroot in 2Y: excluded case")
        chi = tuple(int(x) for x in chi)
        n = eng.pair_root(chi, si)
        alpha = eng.datum.roots[si]
        s_elt = eng.simple_refls[i]
        schi = eng.fin_apply(s_elt[1], chi)
        lhs = hadd(
            self.rmul_T(self.theta(chi), s_elt),
            hscale(self.lmul_T(s_elt, self.theta(schi)), -1),
        )
        rhs = {}
        if n > 0:
            for k in range(n):
                rhs = hadd(rhs, self.theta(tuple(a - k * b for a, b in zip(chi, alpha))))
        elif n < 0:
            for k in range(1, -n + 1):
                rhs = hadd(
                    rhs, hscale(self.theta(tuple(a + k * b for a, b in zip(chi, alpha))), -1)
                )
        rhs = hscale(rhs, XI)
        return self.equal(lhs, rhs)

    # -- parabolic subalgebras ---------------------------------------------------------

    def parabolic(self, J):
        J = tuple(sorted(set(J)))
        H = self._sub.get(J)
        if H is None:
            H = HeckeAlgebra(self.eng.subengine(J))
            self._sub[J] = H
        return H

    def embed_special(self, lam, w1, x1, J):
        """theta_lam * T_{w1^{-1}}^{-1} * T_{x1} in the ambient algebra.

        This is the image of the parabolic basis element T^J_{t^lam w1 x1}
        when lam is J-dominant, t^lam w1 is a minimal coset representative for
        W_J, and lengths add onto x1.
        """
        eng = self.eng
        for r in eng.pos_roots_in_J(J):
            if eng.pair_root(lam, r) < 0:
                raise NotInWJ("lambda is not J-dominant")
        if not eng.in_tilde_WJ(w1, J) or any(w1[0]) :
            raise NotInWJ("w1 must be a finite element of W_J x| Gamma_J")
        if not (eng.fin_in_WJ(x1[1], J) and x1[2] == 0 and not any(x1[0])):
            raise NotInWJ("x1 must lie in W_J")
        h = self.mul(self.theta(lam), self.inv_T(eng.inv(w1)))
        if x1 != eng.identity:
            h = self.rmul_T(h, x1)
        return h

    # -- serialization --------------------------------------------------------------------

    def to_json(self, h):
        eng = self.eng
        return [
            {"elt": eng.format(e), "coeff": h[e].to_json()}
            for e in sorted(h, key=eng.sort_key)
        ]

    def from_json(self, obj):
        eng = self.eng
        return {eng.parse(t["elt"]): Laurent.from_json(t["coeff"]) for t in obj}

    def pretty(self, h):
        eng = self.eng
        if not h:
            return "0"
        return " + ".join(
            f"({h[e]})*T[{eng.format(e)}]" for e in sorted(h, key=eng.sort_key)
        )
