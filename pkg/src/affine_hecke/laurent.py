"""Sparse Laurent polynomials in v, and polynomials in xi = v - v^{-1}.

Integer coefficients throughout; the equal-parameter Hecke algebra lives over
Z[v, v^{-1}] and class polynomials over Z[xi].
"""

from __future__ import annotations


class Laurent:
    """Sparse Laurent polynomial: dict exponent -> nonzero int coefficient."""

    __slots__ = ("c",)

    def __init__(self, c=None):
        self.c = {e: int(k) for e, k in (c or {}).items() if k}

    @staticmethod
    def zero():
        return Laurent()

    @staticmethod
    def one():
        return Laurent({0: 1})

    @staticmethod
    def const(n):
        return Laurent({0: n})

    @staticmethod
    def v_pow(e, k=1):
        return Laurent({e: k})

    def is_zero(self):
        return not self.c

    def __bool__(self):
        return bool(self.c)

    def __add__(self, other):
        out = dict(self.c)
        for e, k in other.c.items():
            n = out.get(e, 0) + k
            if n:
                out[e] = n
            else:
                out.pop(e, None)
        return Laurent(out)

    def __neg__(self):
        return Laurent({e: -k for e, k in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Laurent({e: k * other for e, k in self.c.items()})
        out = {}
        for e1, k1 in self.c.items():
            for e2, k2 in other.c.items():
                e = e1 + e2
                n = out.get(e, 0) + k1 * k2
                if n:
                    out[e] = n
                else:
                    out.pop(e, None)
        return Laurent(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Laurent) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def subs_v(self, q):
        """Exact evaluation at a rational point (for rank checks)."""
        from fractions import Fraction

        q = Fraction(q)
        return sum((Fraction(k) * q ** e for e, k in self.c.items()), Fraction(0))

    def __repr__(self):
        if not self.c:
            return "0"
        terms = []
        for e in sorted(self.c):
            k = self.c[e]
            if e == 0:
                terms.append(f"{k}")
            elif e == 1:
                terms.append(f"{k}*v" if k != 1 else "v")
            else:
                terms.append(f"{k}*v^{e}" if k != 1 else f"v^{e}")
        return " + ".join(terms)

    def to_json(self):
        return {str(e): k for e, k in sorted(self.c.items())}

    @staticmethod
    def from_json(obj):
        return Laurent({int(e): int(k) for e, k in obj.items()})


XI = Laurent({1: 1, -1: -1})


class Xi:
    """Polynomial in xi = v - v^{-1}: coefficient tuple, lowest degree first."""

    __slots__ = ("c",)

    def __init__(self, c=()):
        c = list(c)
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(int(x) for x in c)

    @staticmethod
    def zero():
        return Xi()

    @staticmethod
    def one():
        return Xi((1,))

    def is_zero(self):
        return not self.c

    def __bool__(self):
        return bool(self.c)

    @property
    def degree(self):
        return len(self.c) - 1 if self.c else -1

    def __add__(self, other):
        n = max(len(self.c), len(other.c))
        return Xi(
            tuple(
                (self.c[i] if i < len(self.c) else 0)
                + (other.c[i] if i < len(other.c) else 0)
                for i in range(n)
            )
        )

    def __neg__(self):
        return Xi(tuple(-x for x in self.c))

    def __sub__(self, other):
        return self + (-other)

    def shift(self):
        """Multiplication by xi."""
        return Xi((0,) + self.c)

    def __mul__(self, other):
        if isinstance(other, int):
            return Xi(tuple(x * other for x in self.c))
        out = [0] * (len(self.c) + len(other.c))
        for i, a in enumerate(self.c):
            for j, b in enumerate(other.c):
                out[i + j] += a * b
        return Xi(tuple(out))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Xi) and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def nonneg(self):
        return all(x >= 0 for x in self.c)

    def to_laurent(self) -> Laurent:
        out = Laurent.zero()
        p = Laurent.one()
        for k in self.c:
            out = out + p * k
            p = p * XI
        return out

    def __repr__(self):
        if not self.c:
            return "0"
        terms = []
        for i, k in enumerate(self.c):
            if k == 0:
                continue
            if i == 0:
                terms.append(str(k))
            elif i == 1:
                terms.append(f"{k}*xi" if k != 1 else "xi")
            else:
                terms.append(f"{k}*xi^{i}" if k != 1 else f"xi^{i}")
        return " + ".join(terms)

    def to_json(self):
        return list(self.c)

    @staticmethod
    def from_json(obj):
        return Xi(tuple(obj))
