"""Point counting, Frobenius data and isogeny-class bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np
from sympy import factorint, nextprime
from sympy.ntheory.modular import crt

from .curvekit import Curve, j_invariant, point_order, quadratic_twist, random_point, scalar_mul
from .errors import Ambiguous, DivisionByZero, FieldTooLarge, PreconditionError
from .fieldkit import ExtField, Poly, PrimeField, gf, MAX_SCAN
from .rng import SeededRng


@dataclass(frozen=True)
class FrobeniusData:
    q: int
    order: int
    trace: int
    disc: int

    @classmethod
    def from_order(cls, q: int, order: int) -> "FrobeniusData":
        t = q + 1 - order
        return cls(q, order, t, t * t - 4 * q)


def hasse_window(q: int):
    w = 2 * isqrt(q) + 2
    lo, hi = q + 1 - w, q + 1 + w
    # tighten to the exact integer bounds |t| <= 2 sqrt(q)
    while (q + 1 - lo) ** 2 > 4 * q:
        lo += 1
    while (hi - q - 1) ** 2 > 4 * q:
        hi -= 1
    return lo, hi


# ---------------------------------------------------------------------------
# naive counting


@lru_cache(maxsize=32)
def _chi_table(p: int) -> np.ndarray:
    chi = np.full(p, -1, dtype=np.int64)
    chi[0] = 0
    sq = (np.arange(1, p, dtype=np.int64) ** 2) % p
    chi[sq] = 1
    return chi


def count_naive(E: Curve) -> int:
    """1 + sum over x of (1 + chi(x^3 + a x + b))."""
    F = E.field
    if F.order > MAX_SCAN:
        raise FieldTooLarge("naive counting needs a field with at most 2^22 elements")
    if isinstance(F, PrimeField):
        p = F.p
        xs = np.arange(p, dtype=np.int64)
        vals = ((xs * xs % p) * xs + E.a * xs + E.b) % p
        return int(p + 1 + _chi_table(p)[vals].sum())
    total = 1
    for x in F.elements():
        r = E.rhs(x)
        if F.is_zero(r):
            total += 1
        elif F.is_square(r):
            total += 2
    return total


def count_all_prime_field(p: int) -> dict:
    """{(a, b): #E(F_p)} over every nonsingular y^2 = x^3 + a x + b."""
    chi = _chi_table(p)
    xs = np.arange(p, dtype=np.int64)
    bs = np.arange(p, dtype=np.int64)
    cube = xs ** 3 % p
    out = {}
    for a in range(p):
        vals = (cube[None, :] + a * xs[None, :] + bs[:, None]) % p
        counts = p + 1 + chi[vals].sum(axis=1)
        for b in range(p):
            if (4 * a ** 3 + 27 * b * b) % p:
                out[(a, b)] = int(counts[b])
    return out


# ---------------------------------------------------------------------------
# baby-step giant-step


def _bsgs_multiple(P, lo: int, hi: int):
    """Some m in [lo, hi] with [m]P = O, or None."""
    width = hi - lo + 1
    s = isqrt(width) + 1
    baby = {}
    R = P.curve.infinity
    for j in range(s):
        baby.setdefault(R, j)
        R = R + P
    step = scalar_mul(s, P)
    G = scalar_mul(hi, P)
    # [hi - i s]P = [j]P  ->  [hi - i s - j]P = O
    for i in range(s + 1):
        j = baby.get(G)
        if j is not None:
            m = hi - i * s - j
            if lo <= m <= hi:
                return m
        G = G - step
    return None


def _lcm(a, b):
    from math import gcd

    return a // gcd(a, b) * b


def count_bsgs(E: Curve, rng: SeededRng, max_rounds: int = 200) -> int:
    """Order via point orders on E and its twist until one Hasse candidate is left."""
    q = E.q
    if q > 1 << 48:
        raise PreconditionError("BSGS counting is limited to fields with at most 2^48 elements")
    lo, hi = hasse_window(q)
    T = quadratic_twist(E)
    lcm_e, lcm_t = 1, 1
    for round_ in range(max_rounds):
        on_twist = round_ % 2 == 1
        C = T if on_twist else E
        P = random_point(C, rng)
        # twist order is 2q + 2 - N, which also ranges over the Hasse window
        m = _bsgs_multiple(P, lo, hi)
        if m is None:
            raise Ambiguous("no multiple of a point order in the Hasse window")
        n = point_order(P, m)
        if on_twist:
            lcm_t = _lcm(lcm_t, n)
        else:
            lcm_e = _lcm(lcm_e, n)
        cands = [N for N in range(lo - lo % lcm_e, hi + 1, lcm_e)
                 if lo <= N <= hi and (2 * q + 2 - N) % lcm_t == 0]
        if len(cands) == 1:
            return cands[0]
        if not cands:
            raise Ambiguous("no order is consistent with the sampled points")
    if q <= MAX_SCAN:
        return count_naive(E)
    raise Ambiguous(f"order of {E} not determined after {max_rounds} samples")


# ---------------------------------------------------------------------------
# Schoof


class _Split(Exception):
    def __init__(self, factor):
        self.factor = factor


class _SymbolicRing:
    """Points (X(x), Y(x) y) of E with coordinates modulo h | psi_l."""

    def __init__(self, E: Curve, h: Poly):
        self.E = E
        self.h = h
        self.f = E.rhs_poly % h
        self.a = Poly.const(E.field, E.a)

    def inv(self, u: Poly) -> Poly:
        u = u % self.h
        g, s, _ = u.xgcd(self.h)
        if g.degree != 0:
            if g.degree > 0 and g.degree < self.h.degree:
                raise _Split(g)
            raise DivisionByZero("zero divisor spans the whole ring")
        return s % self.h

    def is_zero(self, u: Poly) -> bool:
        u = u % self.h
        if u.is_zero():
            return True
        g = u.gcd(self.h)
        if g.degree > 0:
            raise _Split(g)
        return False

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        h = self.h
        X1, Y1 = P
        X2, Y2 = Q
        if self.is_zero(X2 - X1):
            if self.is_zero(Y1 + Y2):
                return None
            if self.is_zero(Y1 - Y2):
                return self.double(P)
            raise DivisionByZero("inconsistent symbolic points")
        lam = ((Y2 - Y1) * self.inv(X2 - X1)) % h
        X3 = (lam * lam * self.f - X1 - X2) % h
        Y3 = (lam * (X1 - X3) - Y1) % h
        return (X3, Y3)

    def double(self, P):
        if P is None:
            return None
        h = self.h
        X, Y = P
        if self.is_zero(Y):
            return None
        num = (X * X).scale(self.E.field.from_int(3)) + self.a
        lam = (num * self.inv((Y * self.f).scale(self.E.field.from_int(2)))) % h
        X3 = (lam * lam * self.f - X - X) % h
        Y3 = (lam * (X - X3) - Y) % h
        return (X3, Y3)

    def neg(self, P):
        return None if P is None else (P[0], (-P[1]) % self.h)

    def mul(self, n: int, P):
        if n < 0:
            return self.mul(-n, self.neg(P))
        R = None
        while n:
            if n & 1:
                R = self.add(R, P)
            n >>= 1
            if n:
                P = self.double(P)
        return R

    def equal(self, P, Q) -> bool:
        if P is None or Q is None:
            return P is None and Q is None
        return self.is_zero(P[0] - Q[0]) and self.is_zero(P[1] - Q[1])

    def frobenius(self, P, power: int):
        """pi^k applied to the generic point (x, y), with q^k = ``power``."""
        X, Y = P
        h = self.h
        Xq = X.powmod(power, h)
        # y^power = y * f^((power-1)/2)
        Yq = (Y.powmod(power, h) * self.f.powmod((power - 1) // 2, h)) % h
        return (Xq, Yq)

    def generic_point(self):
        F = self.E.field
        return (Poly.x(F) % self.h, Poly.const(F, F.one))


def _trace_mod_2(E: Curve) -> int:
    x = Poly.x(E.field)
    f = E.rhs_poly
    g = (x.powmod(E.q, f) - x).gcd(f)
    return 0 if g.degree > 0 else 1


def _trace_mod_ell(E: Curve, ell: int) -> int:
    from .curvekit import division_poly

    q = E.q
    h = division_poly(E, ell).even_part.monic()
    while True:
        try:
            return _trace_mod_ell_in(E, ell, h)
        except _Split as split:
            g = split.factor.monic()
            other = h.exact_div(g)
            h = g if g.degree <= other.degree else other.monic()


def _trace_mod_ell_in(E, ell, h) -> int:
    q = E.q
    R = _SymbolicRing(E, h)
    P = R.generic_point()
    piP = R.frobenius(P, q)
    pi2P = R.frobenius(P, q * q)
    S = R.add(pi2P, R.mul(q % ell, P))
    if S is None:
        return 0
    T = None
    for tau in range(1, ell):
        T = R.add(T, piP)
        if R.equal(S, T):
            return tau
    raise DivisionByZero(f"no trace residue found modulo {ell}")


def schoof_trace(E: Curve) -> int:
    F = E.field
    if not isinstance(F, PrimeField):
        raise PreconditionError("Schoof's algorithm is implemented over prime fields")
    q = F.p
    if q <= 3:
        raise PreconditionError("p must exceed 3")
    residues, moduli = [_trace_mod_2(E)], [2]
    bound = 4 * isqrt(q) + 4
    ell = 3
    prod = 2
    while prod <= 4 * q ** 0.5:
        if ell != q:
            residues.append(_trace_mod_ell(E, ell))
            moduli.append(ell)
            prod *= ell
        ell = nextprime(ell)
    t, M = crt(moduli, residues)
    t, M = int(t), int(M)
    if t > M // 2:
        t -= M
    if t * t > 4 * q:
        raise Ambiguous(f"CRT trace {t} outside the Hasse bound")
    return t


# ---------------------------------------------------------------------------
# Frobenius data, extensions, supersingularity


def count(E: Curve, method: str = "auto", rng: SeededRng = None) -> int:
    if method == "naive" or (method == "auto" and E.q <= 4096):
        return count_naive(E)
    if method == "schoof":
        return E.q + 1 - schoof_trace(E)
    if isinstance(E.field, ExtField) and _defined_over_prime_field(E):
        return _order_from_subfield(E)
    return count_bsgs(E, rng or SeededRng(0xC0FFEE))


def _defined_over_prime_field(E: Curve) -> bool:
    F = E.field
    return F.in_prime_field(E.a) and F.in_prime_field(E.b)


def _order_from_subfield(E: Curve) -> int:
    F = E.field
    base = F.base
    E0 = Curve(base, E.a[0], E.b[0])
    data = frobenius_data(E0)
    return extension_order(data, F.degree)


def frobenius_data(E: Curve, method: str = "auto", rng: SeededRng = None) -> FrobeniusData:
    return FrobeniusData.from_order(E.q, count(E, method, rng))


def power_sums(t: int, q: int, n: int) -> int:
    """alpha^n + beta^n for the roots of X^2 - t X + q."""
    s_prev, s = 2, t
    if n == 0:
        return 2
    for _ in range(n - 1):
        s_prev, s = s, t * s - q * s_prev
    return s


def extension_order(base: FrobeniusData, n: int) -> int:
    if n < 1:
        raise PreconditionError("extension degree must be positive")
    return base.q ** n + 1 - power_sums(base.trace, base.q, n)


def is_supersingular(E: Curve, rng: SeededRng = None) -> bool:
    p = E.field.characteristic
    t = E.q + 1 - count(E, "auto", rng)
    return t % p == 0


def isogeny_class_partition(p: int) -> dict:
    """{order: sorted j-invariants} over all curves y^2 = x^3 + a x + b over F_p."""
    if p > 200:
        raise PreconditionError("full enumeration is limited to p <= 200")
    buckets: dict = {}
    for (a, b), n in count_all_prime_field(p).items():
        j = 1728 * 4 * a ** 3 * pow(4 * a ** 3 + 27 * b * b, -1, p) % p
        buckets.setdefault(n, set()).add(j)
    return {n: sorted(js) for n, js in sorted(buckets.items())}


def fundamental_discriminant(D: int):
    """(d_K, f) with D = f^2 d_K and d_K a fundamental discriminant (D < 0)."""
    if D >= 0:
        raise PreconditionError("discriminant must be negative")
    sq = 1
    rest = -D
    for r, e in factorint(rest).items():
        sq *= r ** (e // 2)
    d = D // (sq * sq)
    if d % 4 == 1:
        return d, sq
    # squarefree d = 2, 3 (mod 4): D = 0, 1 (mod 4) forces sq to be even
    return 4 * d, sq // 2


def conductor_valuation(data: FrobeniusData, ell: int) -> int:
    """v_ell(f_pi) where t^2 - 4q = f_pi^2 d_K."""
    _, f = fundamental_discriminant(data.disc)
    v = 0
    while f % ell == 0:
        f //= ell
        v += 1
    return v
