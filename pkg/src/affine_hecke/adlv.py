"""Combinatorial affine Deligne-Lusztig layer.

sigma-conjugacy classes enter only through their invariants (dominant Newton
point, Kottwitz value); the dimension formula reads

    dim = max over contributing classes of
          (l(w) + l(w_O) + deg f_{w delta, O}) / 2  -  <nu_b, 2 rho_vee>

with "empty" when no class of the twisted coset matches the invariants, and
the parabolic emptiness criterion compares kappa_J of z w delta z^{-1} against
kappa_J(b), cross-audited through the class-polynomial comparison.
"""

from __future__ import annotations

from fractions import Fraction

from .cocenter import Cocenter
from .linalg import vec_dot


class SigmaClassSpec:
    """(nu_bar, kappa) for an abstracted sigma-conjugacy class; context "G"
    or ("M_J", J)."""

    def __init__(self, nu_bar, kappa, context="G", J=None):
        self.nu_bar = tuple(Fraction(x) for x in nu_bar)
        self.kappa = tuple(kappa)
        self.context = context
        self.J = tuple(sorted(J)) if J is not None else None
        if context != "G" and self.J is None:
            raise ValueError("M_J context needs J")

    def validate(self, eng):
        idxs = (
            range(eng.n_finite)
            if self.context == "G"
            else [j for j in range(eng.n_finite) if j in self.J]
        )
        for i in idxs:
            if vec_dot(self.nu_bar, eng.datum.phi[eng.datum.simple_idx[i]]) < 0:
                raise ValueError("Newton point is not dominant for the context")

    def to_json(self):
        return {
            "nu_bar": [str(x) for x in self.nu_bar],
            "kappa": list(self.kappa),
            "context": self.context if self.context == "G" else f"M_J {list(self.J)}",
        }


class DimensionReport:
    def __init__(self, co, elt, spec, delta, contributors, dimension):
        self.co = co
        self.elt = elt
        self.spec = spec
        self.delta = delta
        self.contributors = contributors  # list of (key, len_min, deg, value)
        self.dimension = dimension  # Fraction or None for empty

    @property
    def empty(self):
        return self.dimension is None

    def to_json(self):
        eng = self.co.eng
        return {
            "elt": eng.format(self.elt),
            "spec": self.spec.to_json(),
            "dimension": str(self.dimension) if self.dimension is not None else "empty",
            "contributors": [
                {
                    "class": k.to_json(),
                    "len_min": lm,
                    "deg_f": dg,
                    "value": str(val),
                }
                for k, lm, dg, val in self.contributors
            ],
        }


def kappa_matches(eng, key, spec_kappa, delta_idx):
    """Conjugation-robust comparison of a class Kottwitz value against a
    specifier tuple; reduces both modulo im(1 - delta) on X/ZR."""
    if len(eng.datum.gamma_space) == 1 or delta_idx == 0:
        return tuple(key.kappa[0]) == tuple(spec_kappa)
    d = eng.d
    zero = tuple(0 for _ in range(d))
    red_key = eng._kappa_reduce_proj(tuple(key.kappa[0]), delta_idx)
    red_spec = eng._kappa_reduce_proj(tuple(spec_kappa), delta_idx)
    return red_key == red_spec


def adlv_dimension(co: Cocenter, elt, spec: SigmaClassSpec, delta_idx=0):
    """Dimension (or emptiness) of the abstract X_w(b) from class polynomials."""
    eng = co.eng
    spec.validate(eng)
    if spec.context != "G":
        raise ValueError("adlv_dimension expects a G-context specifier")
    wd = eng.mul(elt, eng.fin_elt(eng.fin_id, delta_idx)) if delta_idx else elt
    f = co.class_polynomials(wd)
    contributors = []
    two_rho_term = vec_dot(spec.nu_bar, eng.datum.two_rho_covec)
    L = eng.length(wd)
    for key in sorted(f, key=lambda k: k.sort_token()):
        if tuple(key.nu) != spec.nu_bar:
            continue
        if not kappa_matches(eng, key, spec.kappa, delta_idx):
            continue
        p = f[key]
        val = Fraction(L + key.length + p.degree, 2) - two_rho_term
        contributors.append((key, key.length, p.degree, val))
    dim = max((c[3] for c in contributors), default=None)
    return DimensionReport(co, elt, spec, delta_idx, contributors, dim)


class EmptinessReport:
    def __init__(self, co, elt, J, z_fin, spec, delta, kappa_lhs, verdict, audit_ok, audit_classes):
        self.co = co
        self.elt = elt
        self.J = J
        self.z_fin = z_fin
        self.spec = spec
        self.delta = delta
        self.kappa_lhs = kappa_lhs
        self.verdict = verdict  # "empty" | "not decided by this criterion"
        self.audit_ok = audit_ok
        self.audit_classes = audit_classes

    def to_json(self):
        eng = self.co.eng
        return {
            "elt": eng.format(self.elt),
            "J": list(self.J),
            "z": eng.format(eng.fin_elt(self.z_fin)),
            "spec": self.spec.to_json(),
            "kappa_J_of_zwz": list(self.kappa_lhs),
            "verdict": self.verdict,
            "audit_agrees": self.audit_ok,
            "matching_parabolic_classes": [k.to_json() for k in self.audit_classes],
        }


def emptiness_check(co: Cocenter, elt, J, z_fin, spec: SigmaClassSpec, delta_idx=0):
    """One-directional emptiness criterion for a (J, z)-alcove element, with
    the class-polynomial comparison as an independent audit."""
    eng = co.eng
    J = tuple(sorted(set(J)))
    if spec.context == "G" or spec.J != J:
        raise ValueError("emptiness_check expects an M_J specifier for the same J")
    spec.validate(eng)
    wd = eng.mul(elt, eng.fin_elt(eng.fin_id, delta_idx)) if delta_idx else elt
    if not eng.is_p_alcove(wd, J, z_fin):
        raise ValueError("w delta is not a (J, z)-alcove element")
    y = eng.conj(eng.fin_elt(z_fin), wd)
    sub = co.sub(J)
    kap = sub.eng.kappa(y)
    kappa_lhs = tuple(kap[0])
    match = kappa_lhs == tuple(spec.kappa)
    fJ = sub.class_polynomials(y)
    audit_classes = []
    for keyJ in sorted(fJ, key=lambda k: k.sort_token()):
        nuJ = sub.eng.newton_dominant(keyJ.canonical_min)
        if tuple(nuJ) == spec.nu_bar and tuple(keyJ.kappa[0]) == tuple(spec.kappa):
            audit_classes.append(keyJ)
    if not match:
        verdict = "empty"
        audit_ok = not audit_classes
    else:
        verdict = "not decided by this criterion"
        audit_ok = True
    return EmptinessReport(co, elt, J, z_fin, spec, delta_idx, kappa_lhs, verdict, audit_ok, audit_classes)
