"""Construction of the parabolic presentation data for a conjugacy class:
a minimal representative with a regular fixed-locus point in the closed base
alcove, a chamber-aligning z, the parabolic type J, and the special-shape
element t^lam w1 x1 whose embedded basis element represents the class in the
cocenter.

"Sufficiently small" perturbations are handled with an infinitesimal second
component (lexicographic pairs), never a numeric epsilon; the concrete rational
v stored in the datum is produced afterwards from exact thresholds.
"""

from __future__ import annotations

from fractions import Fraction

from .cocenter import PipelineError
from .linalg import vec_add, vec_dot, vec_scale
from .rootdata import dominant_rep


class BernsteinDatum:
    def __init__(self, key, w_prime, e_prime, v, direction, z_fin, J, w0):
        self.key = key
        self.w_prime = w_prime
        self.e_prime = e_prime
        self.v = v
        self.direction = direction
        self.z = z_fin
        self.J = J
        self.w0 = w0

    def to_json(self):
        eng = self.key.lab.eng
        return {
            "class": self.key.to_json(),
            "w_prime": eng.format(self.w_prime),
            "regular_point": [str(Fraction(x)) for x in self.e_prime],
            "v": [str(Fraction(x)) for x in self.v],
            "z": eng.format(eng.fin_elt(self.z)),
            "J": list(self.J),
            "w0": eng.format(self.w0),
        }


class Embedding:
    """The special-shape element w1tilde = t^lam w1 x1 inside W~_J together
    with its ambient Hecke realization theta_lam T_{w1^{-1}}^{-1} T_{x1}."""

    def __init__(self, co, J, J_e, w0, u1, x1, lam, w1, e, hecke, audits):
        self.co = co
        self.J = J
        self.J_e = J_e
        self.w0 = w0
        self.u1 = u1
        self.x1 = x1
        self.lam = lam
        self.w1 = w1
        self.e = e
        self.hecke = hecke
        self.audits = audits

    @property
    def w1tilde(self):
        return self.co.eng.mul(self.u1, self.x1)

    def to_json(self):
        eng = self.co.eng
        return {
            "J": list(self.J),
            "J_e": list(self.J_e),
            "w0": eng.format(self.w0),
            "w1tilde": eng.format(self.w1tilde),
            "lam": list(self.lam),
            "w1": eng.format(self.w1),
            "x1": eng.format(self.x1),
            "e": [str(Fraction(x)) for x in self.e],
            "witness": self.co.H.to_json(self.hecke),
            "audits": [[name, bool(ok)] for name, ok in self.audits],
        }


def regular_direction(eng, dirs):
    """Rational d in span(dirs) with <d, a_vee> != 0 for every coroot not
    vanishing on the span."""
    if not dirs:
        return tuple(Fraction(0) for _ in range(eng.d))
    relevant = [
        r
        for r in range(eng.m)
        if any(vec_dot(b, eng.datum.phi[r]) != 0 for b in dirs)
    ]
    N = 1
    while True:
        d = tuple(Fraction(0) for _ in range(eng.d))
        c = Fraction(1)
        for b in dirs:
            d = vec_add(d, vec_scale(c, b))
            c *= N
        if all(vec_dot(d, eng.datum.phi[r]) != 0 for r in relevant):
            return d
        N += 1
        if N > 10000:
            raise PipelineError("no regular direction found")


def _pick_in_gap(bound, bad):
    """Deterministic rational in (0, bound) avoiding the bad set."""
    pts = sorted(set(b for b in bad if 0 < b < bound) | {Fraction(0), Fraction(bound)})
    for a, b in zip(pts, pts[1:]):
        if a < b:
            return (a + b) / 2
    raise PipelineError("no admissible epsilon")


def concrete_v(eng, nu, d):
    """nu + eps*d with exact eps: preserves all strict pairing signs of nu and
    keeps <v, a_vee> non-integral whenever <d, a_vee> != 0."""
    nu = tuple(Fraction(x) for x in nu)
    d = tuple(Fraction(x) for x in d)
    if all(x == 0 for x in d):
        return nu
    bound = Fraction(1, 2)
    bad = set()
    for r in range(eng.m):
        a = vec_dot(nu, eng.datum.phi[r])
        b = vec_dot(d, eng.datum.phi[r])
        if b == 0:
            continue
        if a != 0:
            bound = min(bound, abs(a) / (2 * abs(b)))
        lo = min(a, a + bound * b)
        hi = max(a, a + bound * b)
        import math

        for k in range(math.floor(lo), math.ceil(hi) + 1):
            bad.add(Fraction(k - a, b))
    eps = _pick_in_gap(bound, bad)
    return vec_add(nu, vec_scale(eps, d))


def chamber_data_free(co, w_star):
    """z, J, v for the class of w_star, with v a regular point of the fixed
    direction space sharing a chamber closure with the Newton point."""
    eng = co.eng
    E = eng.fixed_space(w_star)
    nu = eng.newton_point(w_star)
    d = regular_direction(eng, E.dirs)
    nu_bar, d_bar, z0 = eng.sort_dominant_eps(nu, d)
    J = tuple(
        i
        for i in range(eng.n_finite)
        if vec_dot(nu_bar, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
        and vec_dot(d_bar, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
    )
    z = eng.coset_min_fin(z0, J, side="left")
    znu = eng.glin_apply(z, 0, nu)
    if znu != nu_bar:
        raise PipelineError("chamber alignment failed to sort the Newton point")
    return z, J, concrete_v(eng, nu, d), d


def chamber_data_directed(co, w_star, J_amb, z_amb):
    """The alcove-adapted choice v = nu + eps z^{-1}(mu), mu cutting out J_amb;
    produces J' = J_{nubar} cap J_{vbar} inside J_amb."""
    eng = co.eng
    nu = eng.newton_point(w_star)
    mu = tuple(Fraction(0) for _ in range(eng.d))
    for i in range(eng.n_finite):
        if i not in J_amb:
            mu = vec_add(mu, eng.weight_duals[i])
    g = eng.fin_elt(w_star[1], w_star[2])
    zg = eng.conj(eng.fin_elt(z_amb), g)
    if eng.glin_apply(zg[1], zg[2], mu) != mu:
        raise PipelineError("z p(w) z^{-1} does not fix the J-defining weight")
    dvec = eng.glin_apply(eng.fin_inv(z_amb), 0, mu)
    E = eng.fixed_space(w_star)
    if not E.direction_contains(dvec):
        raise PipelineError("direction z^{-1}(mu) does not stabilize V_w")
    znu = eng.glin_apply(z_amb, 0, nu)
    wa, wb, ufin = eng.sort_dominant_eps(znu, mu, J=J_amb)
    z1 = eng.fin_compose(ufin, z_amb)
    for i in range(eng.n_finite):
        si = eng.datum.simple_idx[i]
        a = vec_dot(wa, eng.datum.phi[si])
        b = vec_dot(wb, eng.datum.phi[si])
        if a < 0 or (a == 0 and b < 0):
            raise PipelineError("aligned point is not dominant outside J")
    Jp = tuple(
        i
        for i in range(eng.n_finite)
        if vec_dot(wa, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
        and vec_dot(wb, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
    )
    if not set(Jp) <= set(J_amb):
        raise PipelineError("derived parabolic type is not inside J")
    z2 = eng.coset_min_fin(z1, Jp, side="left")
    return z2, Jp, concrete_v(eng, nu, dvec), dvec


def bernstein_datum(co, key):
    """The constructive datum (J, z, w0) for a conjugacy class key."""
    eng = co.eng
    lab = co.lab
    m = key.canonical_min
    w_star = e = None
    for cand in sorted(lab.min_set(m), key=eng.sort_key):
        E = eng.fixed_space(cand)
        pt = eng.regular_point_in_closure(E, "alcove")
        if pt is not None:
            w_star, e = cand, pt
            break
    if w_star is None:
        raise PipelineError(
            "no minimal representative carries a regular point of its fixed "
            "locus in the closed base alcove; search bound too small or bug"
        )
    z, J, v, d = chamber_data_free(co, w_star)
    w0 = eng.conj(eng.fin_elt(z), w_star)
    if not eng.in_tilde_WJ(w0, J):
        raise PipelineError("z w' z^{-1} left W~_J")
    sub = co.sub(J)
    m0, _ = sub.lab.reduce_to_min(w0)
    if sub.eng.length(m0) != sub.eng.length(w0):
        raise PipelineError("w0 is not parabolically minimal")
    if not lab.is_elliptic(w0, J):
        raise PipelineError("w0 is not elliptic in W~_J")
    return BernsteinDatum(key, w_star, e, v, d, z, J, w0)


def embed_from_chamber(co, w_star, e_star, z_fin, J):
    """From a minimal representative with regular point e_star and aligned z:
    conjugate into W~_J, partially conjugate at the stabilizer type of the
    regular point, and realize the resulting t^lam w1 x1 in the ambient
    algebra.  Every inequality used along the way is checked exactly."""
    eng = co.eng
    lab = co.lab
    audits = []

    def check(name, ok):
        audits.append((name, ok))
        if not ok:
            raise PipelineError(f"embedding audit failed: {name}")

    z = eng.fin_elt(z_fin)
    w0 = eng.conj(z, w_star)
    check("w0 in parabolic group", eng.in_tilde_WJ(w0, J))
    sub = co.sub(J)
    m0, _ = sub.lab.reduce_to_min(w0)
    check("w0 parabolically minimal", sub.eng.length(m0) == sub.eng.length(w0))
    e = eng.glin_apply(z_fin, 0, tuple(Fraction(x) for x in e_star))
    check(
        "regular point within unit pairings",
        all(abs(vec_dot(e, eng.datum.phi[r])) <= 1 for r in range(eng.m)),
    )
    in_J = set(eng.pos_roots_in_J(J))
    check(
        "regular point J-nonnegative",
        all(vec_dot(e, eng.datum.phi[r]) >= 0 for r in in_J),
    )
    J_e = tuple(
        i
        for i in range(eng.n_finite)
        if vec_dot(e, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
    )
    check("stabilizer type inside J", set(J_e) <= set(J))
    u1, xL, _ = lab.partial_min(w0, J_e)
    x1 = eng.mul(eng.inv(u1), eng.mul(xL, u1))
    lam = u1[0]
    w1 = (tuple([0] * eng.d), u1[1], u1[2])
    w1t = eng.mul(u1, x1)
    check("partial form preserved length", sub.eng.length(w1t) == sub.eng.length(w0))
    I = lab.I_of(tuple(J_e), u1)
    check("x1 in stable parabolic", eng.fin_in_WJ(x1[1], I) and x1[2] == 0 and not any(x1[0]))
    check("lam J-dominant", all(vec_dot(lam, eng.datum.phi[r]) >= 0 for r in in_J))
    check(
        "lam bounded below",
        all(vec_dot(lam, eng.datum.phi[r]) >= -1 for r in range(eng.m)),
    )
    check(
        "lam = -1 only against negative pairings of e",
        all(
            vec_dot(e, eng.datum.phi[r]) < 0
            for r in range(eng.m)
            if vec_dot(lam, eng.datum.phi[r]) == -1
        ),
    )
    check("u1 minimal for W_J", all(eng.left_ascent(u1, j) for j in J))
    w1t_e = eng.act(w1t, e)
    check(
        "image of regular point above -1",
        all(vec_dot(w1t_e, eng.datum.phi[r]) > -1 for r in range(eng.m)),
    )
    check(
        "translation length splits",
        sub.eng.length(eng.translation(lam))
        == sub.eng.length(u1) + sub.eng.length(eng.fin_elt(u1[1], u1[2])),
    )
    check(
        "length additive onto x1",
        sub.eng.length(w1t) == sub.eng.length(u1) + sub.eng.length(x1),
    )
    witness = co.H.embed_special(lam, w1, x1, J)
    subH = co.H.parabolic(J)
    inside = subH.mul(subH.theta(lam), subH.inv_T(sub.eng.inv(w1)))
    if x1 != eng.identity:
        inside = subH.rmul_T(inside, x1)
    check("parabolic basis identity", subH.equal(inside, subH.T(w1t)))
    return Embedding(co, J, J_e, w0, u1, x1, lam, w1, e, witness, audits)


def directed_leaf_witness(co, elt, J, z_fin):
    """Theorem-A leaf: an embedded witness in H_{J'} with J' inside J, for a
    minimal (J, z)-alcove element."""
    w_star, e_star, z2 = _regular_in_orbit_with_z(co, elt, J, z_fin)
    z3, Jp, v, dvec = chamber_data_directed(co, w_star, J, z2)
    return embed_from_chamber(co, w_star, e_star, z3, Jp)


def _regular_in_orbit_with_z(co, elt, J, z_fin):
    eng = co.eng
    seen = {elt}
    frontier = [(elt, z_fin)]
    while frontier:
        nxt = []
        for u, zu in frontier:
            E = eng.fixed_space(u)
            pt = eng.regular_point_in_closure(E, "alcove")
            if pt is not None:
                return u, pt, zu
            for s in range(len(eng.simple_refls)):
                v, delta = eng.conj_simple(u, s)
                if delta < 0:
                    raise PipelineError("leaf construction expects a minimal element")
                if delta == 0 and v not in seen:
                    zv = eng.palcove_step_z(zu, s, J)
                    if not eng.is_p_alcove(v, J, zv):
                        raise PipelineError("alcove transport failed in leaf walk")
                    seen.add(v)
                    nxt.append((v, zv))
        frontier = nxt
    raise PipelineError("no conjugate with a regular point in the closed alcove")


class TransportAudit:
    """Certifies the cocenter identity by transporting the witness, through
    exact Hecke-level conjugation identities, onto a single basis element
    T_{t^lambar w2 x''} that is minimal in the class."""

    def __init__(self, checks, m_star, ok):
        self.checks = checks
        self.m_star = m_star
        self.ok = ok

    def to_json(self):
        return {
            "checks": [[name, bool(v)] for name, v in self.checks],
            "transported_min": self.m_star,
            "pass": self.ok,
        }


def transport_audit(co, key, bd, emb):
    eng = co.eng
    lab = co.lab
    H = co.H
    checks = []

    def check(name, ok):
        checks.append((name, ok))
        return ok

    lam = emb.lam
    lam_bar_f, wmat = dominant_rep(eng.datum, lam)
    lam_bar = tuple(int(x) for x in lam_bar_f)
    y0 = eng._fin_of_matrix(tuple(tuple(int(v) for v in row) for row in wmat))
    J_lb = tuple(
        i
        for i in range(eng.n_finite)
        if vec_dot(lam_bar, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
    )
    y = eng.coset_min_fin(y0, J_lb, side="left")
    yelt = eng.fin_elt(y)
    check("y sorts lam", eng.fin_apply(y, lam) == lam_bar)
    w1y = eng.conj(yelt, emb.w1)
    ly, lw1 = eng.length(yelt), eng.length(eng.fin_elt(emb.w1[1], emb.w1[2]))
    check("conjugated w1 length", eng.length(w1y) == 2 * ly + lw1)
    nu_rho = vec_dot(key.nu, eng.datum.two_rho_covec)
    lam_rhoJ = vec_dot(lam, co.sub(emb.J).eng.datum.two_rho_covec)
    check(
        "sorted translation length identity",
        vec_dot(lam_bar, eng.datum.two_rho_covec) == nu_rho + lam_rhoJ + 2 * ly,
    )
    xp = eng.conj(yelt, emb.x1)
    check(
        "x1 conjugates additively",
        eng.length(eng.mul(yelt, emb.x1)) == ly + eng.length(emb.x1),
    )
    B = H.mul(H.theta(lam_bar), H.inv_T(eng.inv(w1y)))
    if xp != eng.identity:
        B = H.rmul_T(B, xp)
    check(
        "theta transport identity",
        H.equal(H.lmul_T(yelt, emb.hecke), H.rmul_T(B, yelt)),
    )
    u2, x2L, _ = lab.partial_min(bd.w_prime, tuple(range(eng.n_finite)))
    if not check("sorted translation parts agree", u2[0] == lam_bar):
        return TransportAudit(checks, None, False)
    w2 = eng.fin_elt(u2[1], u2[2])
    I_src = lab.I_of(tuple(emb.J_e), emb.u1)
    I_img = {lab.conj_simple_to_simple(yelt, j) for j in I_src}
    if not check("stable type transports to simples", None not in I_img):
        return TransportAudit(checks, None, False)
    h, Iu = lab.find_h(sorted(I_img), J_lb, w1y, w2)
    if not check("conjugator h found", h is not None):
        return TransportAudit(checks, None, False)
    xpp = eng.conj(h, xp)
    D = H.mul(H.theta(lam_bar), H.inv_T(eng.inv(w2)))
    if xpp != eng.identity:
        D = H.rmul_T(D, xpp)
    check("h transport identity", H.equal(H.lmul_T(h, B), H.rmul_T(D, h)))
    m_star = eng.mul(eng.translation(lam_bar), eng.mul(w2, xpp))
    check("transport lands on a basis element", H.equal(D, H.T(m_star)))
    check("transported element minimal", co.pivot(m_star)[0] == "min")
    check("transported element in the class", lab.class_key(m_star) is key)
    ok = all(v for _, v in checks)
    return TransportAudit(checks, eng.format(m_star), ok)


def pair_equivalent(co, J, keyJ, J2, keyJ2):
    """Equivalence of parabolic pairs (J, C) ~ (J', C'): same Newton point and
    a double-coset-minimal x in W_{J_nu} x| Gamma_{J_nu} with x J x^{-1} = J'
    carrying one elliptic class to the other."""
    eng = co.eng
    lab = co.lab
    w = keyJ.canonical_min
    w2 = keyJ2.canonical_min
    nu = eng.newton_point(w)
    nu2 = eng.newton_point(w2)
    for v in (nu, nu2):
        if any(vec_dot(v, eng.datum.phi[eng.datum.simple_idx[i]]) < 0 for i in range(eng.n_finite)):
            raise ValueError("pair classes must have dominant Newton points")
    if nu != nu2:
        return False, None
    Jnu = tuple(
        i
        for i in range(eng.n_finite)
        if vec_dot(nu, eng.datum.phi[eng.datum.simple_idx[i]]) == 0
    )
    if not (set(J) <= set(Jnu) and set(J2) <= set(Jnu)):
        raise ValueError("pair types must fix the Newton point")
    sub2 = co.sub(J2)
    gammas = eng.subengine(Jnu).datum.gamma_allowed
    for fin in lab.enumerate_WJ_fins(Jnu):
        for gi in gammas:
            x = eng.fin_elt(fin, gi)
            if any(not eng.left_ascent(x, j) for j in J2):
                continue
            if any(not eng.right_ascent(x, j) for j in J):
                continue
            img = {lab.conj_simple_to_simple(x, j) for j in J}
            if None in img or img != set(J2):
                continue
            y = eng.conj(x, w)
            if not eng.in_tilde_WJ(y, J2):
                continue
            if sub2.lab.class_key(y) is keyJ2:
                return True, x
    return False, None
