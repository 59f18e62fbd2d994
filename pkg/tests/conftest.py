import random

import pytest

from affine_hecke.cocenter import Cocenter
from affine_hecke.engine import AffineEngine
from affine_hecke.hecke import HeckeAlgebra
from affine_hecke.rootdata import load_datum

SEED = 20240801

_ENGINES = {}


def engine(preset) -> AffineEngine:
    if preset not in _ENGINES:
        _ENGINES[preset] = AffineEngine(load_datum(f"preset:{preset}"))
    return _ENGINES[preset]


_COCENTERS = {}


def cocenter(preset) -> Cocenter:
    if preset not in _COCENTERS:
        _COCENTERS[preset] = Cocenter(HeckeAlgebra(engine(preset)))
    return _COCENTERS[preset]


def random_elements(eng, count, word_len=8, seed=SEED):
    rng = random.Random(seed)
    gens = list(eng.simple_refls) + list(eng.omega_conj_gens)
    out = []
    for _ in range(count):
        x = eng.identity
        for _ in range(rng.randint(0, word_len)):
            x = eng.mul(x, gens[rng.randrange(len(gens))])
        out.append(x)
    return out


def w_ball(eng, max_len):
    """All W-elements of length <= max_len (no Omega part)."""
    seen = {eng.identity}
    frontier = [eng.identity]
    for _ in range(max_len):
        nxt = []
        for u in frontier:
            for s in range(len(eng.simple_refls)):
                if eng.right_ascent(u, s):
                    v = eng.mul(u, eng.simple_refls[s])
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
        frontier = nxt
    return sorted(seen, key=eng.full_key)


def window_ball(eng, max_len):
    """Omega-window times the W-ball: every class meeting this length appears."""
    from affine_hecke.cli import omega_window

    out = []
    for om in omega_window(eng):
        for x in w_ball(eng, max_len):
            out.append(eng.mul(om, x))
    return sorted(set(out), key=eng.full_key)
