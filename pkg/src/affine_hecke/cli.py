"""Batch front-end: load data, run computations and verifications, manage the
persistent class-polynomial cache, emit JSON/CSV tables.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import cache as diskcache
from .adlv import SigmaClassSpec, adlv_dimension, emptiness_check
from .cocenter import Cocenter, PipelineError
from .engine import AffineEngine, DatumMismatch, NotInWJ
from .hecke import HeckeAlgebra
from .rootdata import load_datum, validate

DEFAULT_SEED = 20240801


class Usage(Exception):
    pass


def build_context(args):
    datum = load_datum(args.datum)
    eng = AffineEngine(datum)
    H = HeckeAlgebra(eng)
    co = Cocenter(H)
    loaded = frozenset()
    cache_path = getattr(args, "cache", None)
    if cache_path is None and os.environ.get("AFFHECKE_CACHE_DIR"):
        cache_path = os.path.join(
            os.environ["AFFHECKE_CACHE_DIR"], f"{datum.name}-{datum.datum_hash}.jsonl"
        )
    if cache_path:
        loaded = frozenset(diskcache.load(cache_path, co))
    return eng, co, cache_path, loaded


def flush_cache(co, cache_path, loaded):
    if cache_path:
        diskcache.save(cache_path, co, loaded)


def parse_J(eng, text):
    if text in (None, "", "-", "none"):
        return ()
    out = []
    for tok in text.split(","):
        j = int(tok) - 1
        if not 0 <= j < eng.n_finite:
            raise Usage(f"simple index {tok} out of range 1..{eng.n_finite}")
        out.append(j)
    return tuple(sorted(set(out)))


def parse_z(eng, text):
    if text in (None, "", "e", "1"):
        return eng.fin_id
    elt = eng.parse(text)
    if any(elt[0]) or elt[2] != 0:
        raise Usage("z must be a finite Weyl element")
    return elt[1]


def parse_nu(text):
    return tuple(Fraction(tok) for tok in text.split(","))


def parse_kappa(text):
    return tuple(int(tok) for tok in text.split(","))


def emit(args, payload, is_csv=False):
    out = getattr(args, "out", None)
    if is_csv:
        buf = io.StringIO()
        w = csv.writer(buf)
        for row in payload:
            w.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def omega_window(eng):
    """Length-zero elements with Kottwitz free part in the canonical box."""
    central = _central_lattice_projs(eng)
    nfree = eng.kottwitz.free_rank
    box = []
    for i in range(nfree):
        vals = [abs(v[i]) for v in central if v[i]]
        box.append(min(vals) if vals else 1)
    seen = {eng.identity}
    out = [eng.identity]
    frontier = [eng.identity]
    gens = list(eng.omega_conj_gens)
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = eng.mul(u, g)
                if v in seen:
                    continue
                proj = eng.kottwitz.project(v[0])
                if all(0 <= proj[i] < box[i] for i in range(nfree)):
                    seen.add(v)
                    out.append(v)
                    nxt.append(v)
        frontier = nxt
    out.sort(key=eng.sort_key)
    return out


def _central_lattice_projs(eng):
    from .linalg import nullspace

    rows = []
    for i in range(eng.n_finite):
        m = eng.datum.simple_refl_mats[i]
        for r in range(eng.d):
            rows.append(tuple(m[r][c] - (1 if r == c else 0) for c in range(eng.d)))
    for gi in eng.datum.gamma_allowed:
        if gi:
            g = eng.datum.gamma_space[gi]
            for r in range(eng.d):
                rows.append(tuple(g[r][c] - (1 if r == c else 0) for c in range(eng.d)))
    if not rows:
        basis = [tuple(1 if i == j else 0 for j in range(eng.d)) for i in range(eng.d)]
    else:
        basis = nullspace(rows)
    projs = []
    for b in basis:
        den = 1
        for x in b:
            den = den * Fraction(x).denominator // _gcd(den, Fraction(x).denominator)
        v = tuple(int(Fraction(x) * den) for x in b)
        projs.append(eng.kottwitz.project(v))
    return projs


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def ball_elements(eng, max_len, window=None):
    window = window if window is not None else omega_window(eng)
    base = {eng.identity}
    frontier = [eng.identity]
    for _ in range(max_len):
        nxt = []
        for u in frontier:
            for s in range(len(eng.simple_refls)):
                if eng.right_ascent(u, s):
                    v = eng.mul(u, eng.simple_refls[s])
                    if v not in base:
                        base.add(v)
                        nxt.append(v)
        frontier = nxt
    out = []
    for om in window:
        for x in base:
            out.append(eng.mul(om, x))
    out.sort(key=eng.full_key)
    return out


def palcove_triples(eng, co, max_len):
    import itertools

    W0 = co.lab.enumerate_WJ_fins(tuple(range(eng.n_finite)))
    rows = []
    for w in ball_elements(eng, max_len):
        for r in range(eng.n_finite + 1):
            for J in itertools.combinations(range(eng.n_finite), r):
                for z in W0:
                    if not co.check_z_min(z, J):
                        continue
                    if eng.is_p_alcove(w, J, z):
                        rows.append((w, J, z))
    return rows


# -- commands ---------------------------------------------------------------------


def cmd_validate(args):
    datum = load_datum(args.datum)
    bad = validate(datum)
    emit(args, {"datum": datum.name, "violations": bad, "valid": not bad})
    return 0 if not bad else 2


def cmd_length(args):
    eng, co, cache_path, loaded = build_context(args)
    elt = eng.parse(args.elt)
    L = eng.length(elt)
    oracle = eng.length_oracle(elt)
    emit(args, {"elt": eng.format(elt), "length": L, "oracle": oracle})
    return 0 if L == oracle else 3


def cmd_minimize(args):
    eng, co, cache_path, loaded = build_context(args)
    elt = eng.parse(args.elt)
    m, path = co.lab.reduce_to_min(elt)
    emit(
        args,
        {
            "elt": eng.format(elt),
            "minimal": eng.format(m),
            "length": eng.length(m),
            "path": path.to_json(eng),
            "class": co.lab.class_key(elt).to_json(),
        },
    )
    return 0


def cmd_classes(args):
    eng, co, cache_path, loaded = build_context(args)
    groups = {}
    for w in ball_elements(eng, args.max_len):
        k = co.lab.class_key(w)
        groups.setdefault(k, []).append(w)
    rows = [["min_rep", "nu", "kappa", "min_length", "members_in_window"]]
    for k in sorted(groups, key=lambda k: k.sort_token()):
        rows.append(
            [
                eng.format(k.canonical_min),
                ";".join(str(x) for x in k.nu),
                ";".join(str(x) for x in k.kappa[0]) or "0",
                k.length,
                len(groups[k]),
            ]
        )
    emit(args, rows, is_csv=True)
    return 0


def cmd_classpoly(args):
    eng, co, cache_path, loaded = build_context(args)
    elt = eng.parse(args.elt)
    f = co.class_polynomials(elt)
    emit(args, co.vector_to_json(f))
    flush_cache(co, cache_path, loaded)
    return 0


def cmd_reduce(args):
    eng, co, cache_path, loaded = build_context(args)
    if args.hecke:
        with open(args.hecke) as fh:
            h = co.H.from_json(json.load(fh))
    else:
        h = co.H.T(eng.parse(args.elt))
    vec = co.reduce_T(h)
    emit(args, co.vector_to_json(vec))
    flush_cache(co, cache_path, loaded)
    return 0


def cmd_palcove_scan(args):
    eng, co, cache_path, loaded = build_context(args)
    rows = [["elt", "J", "z"]]
    for w, J, z in palcove_triples(eng, co, args.max_len):
        rows.append(
            [eng.format(w), ",".join(str(j + 1) for j in J), eng.format(eng.fin_elt(z))]
        )
    emit(args, rows, is_csv=True)
    return 0


def cmd_bernstein_datum(args):
    from .bernstein import bernstein_datum, embed_from_chamber

    eng, co, cache_path, loaded = build_context(args)
    elt = eng.parse(args.elt)
    key = co.lab.class_key(elt)
    bd = bernstein_datum(co, key)
    emb = embed_from_chamber(co, bd.w_prime, bd.e_prime, bd.z, bd.J)
    emit(args, {"datum": bd.to_json(), "embedding": emb.to_json()})
    flush_cache(co, cache_path, loaded)
    return 0


def cmd_verify_b(args):
    eng, co, cache_path, loaded = build_context(args)
    targets = []
    if args.elt:
        targets.append(eng.parse(args.elt))
    else:
        seen = set()
        for w in ball_elements(eng, args.max_len):
            k = co.lab.class_key(w)
            if k not in seen:
                seen.add(k)
                targets.append(k.canonical_min)
    reports = []
    ok = True
    for t in targets:
        rep = co.verify_theorem_B(t, strategy=args.strategy)
        reports.append(rep.to_json())
        ok = ok and rep.ok
    emit(args, reports if len(reports) > 1 else reports[0])
    flush_cache(co, cache_path, loaded)
    return 0 if ok else 2


def _verify_scan(args, kind):
    eng, co, cache_path, loaded = build_context(args)
    if args.elt:
        J = parse_J(eng, args.J)
        z = parse_z(eng, args.z)
        triples = [(eng.parse(args.elt), J, z)]
    else:
        triples = palcove_triples(eng, co, args.max_len)
    rows = [["elt", "J", "z", "pass"]]
    ok = True
    runner = co.verify_theorem_C if kind == "C" else co.verify_theorem_A
    for w, J, z in triples:
        rep = runner(w, J, z)
        rows.append(
            [
                eng.format(w),
                ",".join(str(j + 1) for j in J),
                eng.format(eng.fin_elt(z)),
                rep.ok,
            ]
        )
        ok = ok and rep.ok
    emit(args, rows, is_csv=True)
    flush_cache(co, cache_path, loaded)
    return 0 if ok else 2


def cmd_verify_c(args):
    return _verify_scan(args, "C")


def cmd_verify_a(args):
    return _verify_scan(args, "A")


def cmd_adlv_dim(args):
    eng, co, cache_path, loaded = build_context(args)
    elt = eng.parse(args.elt)
    spec = SigmaClassSpec(parse_nu(args.nu), parse_kappa(args.kappa))
    rep = adlv_dimension(co, elt, spec, delta_idx=args.delta)
    rows = [["elt", "nu_bar", "kappa", "dimension", "contributing_classes"]]
    rows.append(
        [
            eng.format(elt),
            ";".join(str(x) for x in spec.nu_bar),
            ";".join(str(x) for x in spec.kappa),
            "empty" if rep.empty else str(rep.dimension),
            " | ".join(eng.format(k.canonical_min) for k, *_ in rep.contributors),
        ]
    )
    emit(args, rows, is_csv=True)
    flush_cache(co, cache_path, loaded)
    return 0


def cmd_adlv_empty(args):
    eng, co, cache_path, loaded = build_context(args)
    elt = eng.parse(args.elt)
    J = parse_J(eng, args.J)
    z = parse_z(eng, args.z)
    spec = SigmaClassSpec(parse_nu(args.nu), parse_kappa(args.kappa), context="M_J", J=J)
    rep = emptiness_check(co, elt, J, z, spec, delta_idx=args.delta)
    emit(args, rep.to_json())
    flush_cache(co, cache_path, loaded)
    return 0 if rep.audit_ok else 2


def cmd_cache(args):
    if args.action != "gc":
        raise Usage("cache supports the action: gc")
    datum_hash = None
    if args.datum:
        datum_hash = load_datum(args.datum).datum_hash
    kept, dropped = diskcache.gc(args.cache, datum_hash)
    emit(args, {"kept": kept, "dropped": dropped})
    return 0


def main(argv=None):
    ap = argparse.ArgumentParser(prog="affhecke", description=__doc__)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        if flags.get("datum", True):
            p.add_argument("--datum", required=True, help="preset:NAME or JSON path")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--cache", help="class-polynomial cache path")
        p.add_argument("--threads", type=int, default=1)
        return p

    add("validate", cmd_validate)
    p = add("length", cmd_length)
    p.add_argument("--elt", required=True)
    p = add("minimize", cmd_minimize)
    p.add_argument("--elt", required=True)
    p = add("classes", cmd_classes)
    p.add_argument("--max-len", type=int, required=True)
    p = add("classpoly", cmd_classpoly)
    p.add_argument("--elt", required=True)
    p = add("reduce", cmd_reduce)
    p.add_argument("--elt")
    p.add_argument("--hecke", help="JSON file with a Hecke element")
    p = add("palcove-scan", cmd_palcove_scan)
    p.add_argument("--max-len", type=int, required=True)
    p = add("bernstein-datum", cmd_bernstein_datum)
    p.add_argument("--elt", required=True)
    p = add("verify-b", cmd_verify_b)
    p.add_argument("--elt")
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--strategy", choices=["direct", "transport"], default="direct")
    for name, fn in [("verify-c", cmd_verify_c), ("verify-a", cmd_verify_a)]:
        p = add(name, fn)
        p.add_argument("--elt")
        p.add_argument("--J", default="")
        p.add_argument("--z", default="e")
        p.add_argument("--max-len", type=int, default=4)
    p = add("adlv-dim", cmd_adlv_dim)
    p.add_argument("--elt", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--kappa", required=True)
    p.add_argument("--delta", type=int, default=0)
    p = add("adlv-empty", cmd_adlv_empty)
    p.add_argument("--elt", required=True)
    p.add_argument("--J", default="")
    p.add_argument("--z", default="e")
    p.add_argument("--nu", required=True)
    p.add_argument("--kappa", required=True)
    p.add_argument("--delta", type=int, default=0)
    p = sub.add_parser("cache")
    p.set_defaults(fn=cmd_cache)
    p.add_argument("action", choices=["gc"])
    p.add_argument("--cache", required=True)
    p.add_argument("--datum")
    p.add_argument("--out")

    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, NotInWJ, DatumMismatch, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PipelineError, AssertionError) as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
