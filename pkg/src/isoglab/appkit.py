"""Pollard p-1, Lenstra's elliptic curve method and Couveignes-Lercier irreducibles."""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import gcd

from sympy import isprime, primerange

from .countkit import count
from .curvekit import Curve, CurvePoint, random_point, scalar_mul
from .errors import (
    BadInput,
    CurveSearchExhausted,
    IrreducibilityCheckFailed,
    PreconditionError,
)
from .fieldkit import Poly, gf, is_irreducible
from .isogenykit import isogeny_from_generator
from .rng import SeededRng


@dataclass
class FactorResult:
    status: str  # "split" or "fail"
    p: int = None
    q: int = None
    attempts: int = 0
    elapsed: float = 0.0

    @classmethod
    def split(cls, N, d, attempts, t0):
        a, b = sorted((d, N // d))
        assert a * b == N and 1 < a
        return cls("split", a, b, attempts, time.perf_counter() - t0)

    def to_json(self) -> dict:
        out = {"status": self.status, "attempts": self.attempts}
        if self.status == "split":
            out["factors"] = [self.p, self.q]
        return out


def _floor_log(r: int, bound: int) -> int:
    """Largest k with r^k <= bound."""
    k, x = 0, r
    while x <= bound:
        k += 1
        x *= r
    return k


def smooth_exponent(N: int, B: int) -> int:
    """prod over primes r < B of r^floor(log_r sqrt(N))."""
    e = 1
    for r in primerange(2, B):
        k = 0
        while r ** (2 * (k + 1)) <= N:
            k += 1
        e *= r ** max(k, 1)
    return e


def _check_n(N: int):
    if N < 3 or N % 2 == 0 or N >= 1 << 62 or isprime(N):
        raise BadInput("N must be an odd composite below 2^62")


def pollard_pminus1(N: int, B: int, seed: int) -> FactorResult:
    _check_n(N)
    if B > 10 ** 5:
        raise PreconditionError("B is limited to 10^5")
    t0 = time.perf_counter()
    rng = SeededRng(seed)
    x = rng.randint(2, N - 2)
    d = gcd(x, N)
    if d > 1:
        return FactorResult.split(N, d, 1, t0)
    y = pow(x, smooth_exponent(N, B), N)
    d = gcd(y - 1, N)
    if 1 < d < N:
        return FactorResult.split(N, d, 1, t0)
    return FactorResult("fail", attempts=1, elapsed=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# arithmetic on E(Z/NZ)


class FoundFactor(Exception):
    def __init__(self, d):
        super().__init__(d)
        self.d = d


@dataclass(frozen=True)
class ModNPoint:
    """Projective (X : Y : Z) on y^2 = x^3 + a x + b modulo N."""

    X: int
    Y: int
    Z: int
    a: int
    b: int
    N: int

    @property
    def is_infinity(self) -> bool:
        return self.Z % self.N == 0 and self.X % self.N == 0

    def affine(self):
        """(x, y), None for the identity; a non-invertible Z raises FoundFactor."""
        N = self.N
        if self.Z % N == 0:
            return None
        d = gcd(self.Z, N)
        if d > 1:
            raise FoundFactor(d)
        zi = pow(self.Z, -1, N)
        return self.X * zi % N, self.Y * zi % N

    def _new(self, X, Y, Z):
        return ModNPoint(X % self.N, Y % self.N, Z % self.N, self.a, self.b, self.N)

    def double(self) -> "ModNPoint":
        X1, Y1, Z1, a, N = self.X, self.Y, self.Z, self.a, self.N
        if Z1 % N == 0:
            return self
        # homogeneous doubling, derived from the tangent slope (3x^2 + a z^2) / (2 y z)
        w = (a * Z1 * Z1 + 3 * X1 * X1) % N
        s = Y1 * Z1 % N
        B = X1 * Y1 * s % N
        h = (w * w - 8 * B) % N
        return self._new(2 * h * s, w * (4 * B - h) - 8 * Y1 * Y1 * s * s, 8 * s * s * s)

    def __add__(self, other: "ModNPoint") -> "ModNPoint":
        N = self.N
        if self.Z % N == 0:
            return other
        if other.Z % N == 0:
            return self
        X1, Y1, Z1 = self.X, self.Y, self.Z
        X2, Y2, Z2 = other.X, other.Y, other.Z
        u = (Y2 * Z1 - Y1 * Z2) % N
        v = (X2 * Z1 - X1 * Z2) % N
        if v == 0:
            if u == 0:
                return self.double()
            return self._new(0, 1, 0)
        # v may be a zero divisor; the formulas stay valid modulo each prime
        # where it is a unit, and collapse to zero modulo the others
        vv = v * v % N
        vvv = vv * v % N
        R = vv * X1 * Z2 % N
        A = (u * u * Z1 * Z2 - vvv - 2 * R) % N
        return self._new(v * A, u * (R - A) - vvv * Y1 * Z2, vvv * Z1 * Z2)

    def __mul__(self, k: int) -> "ModNPoint":
        R = self._new(0, 1, 0)
        P = self
        while k:
            if k & 1:
                R = R + P
            k >>= 1
            if k:
                P = P.double()
        return R

    __rmul__ = __mul__


def ecm(N: int, B: int, seed: int, max_curves: int = 200) -> FactorResult:
    """Lenstra's method: random (a, X, Y), b from the point, [e]P, then gcd(Z, N)."""
    if N % 2 == 0 or N % 3 == 0:
        raise BadInput("N must be coprime to 6")
    _check_n(N)
    t0 = time.perf_counter()
    rng = SeededRng(seed)
    primes = list(primerange(2, B))
    for attempt in range(1, max_curves + 1):
        a = rng.randbelow(N)
        X = rng.randbelow(N)
        Y = rng.randbelow(N)
        b = (Y * Y - X ** 3 - a * X) % N
        d = gcd((4 * a ** 3 + 27 * b * b) % N, N)
        if 1 < d < N:
            return FactorResult.split(N, d, attempt, t0)
        if d == N:
            continue
        P = ModNPoint(X, Y, 1, a, b, N)
        for r in primes:
            P = P * (r ** _floor_log(r, N))
            d = gcd(P.Z, N)
            if 1 < d < N:
                return FactorResult.split(N, d, attempt, t0)
            if d == N:
                break
    return FactorResult("fail", attempts=max_curves, elapsed=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Couveignes-Lercier


def _fiber_pullback(f: Poly, g: Poly, h: Poly) -> Poly:
    """Numerator of f(g/h): sum_k c_k g^k h^(d-k)."""
    d = f.degree
    F = f.field
    out = Poly._raw(F, [])
    gp = [Poly.const(F, F.one)]
    hp = [Poly.const(F, F.one)]
    for _ in range(d):
        gp.append(gp[-1] * g)
        hp.append(hp[-1] * h)
    for k, c in enumerate(f.coeffs):
        out = out + (gp[k] * hp[d - k]).scale(c)
    return out


def couveignes_lercier(q: int, ell: int, e: int, seed: int, max_curves: int = 10 ** 4) -> Poly:
    """Monic irreducible of degree ell^e over F_q from a fibre of an ell-isogeny chain."""
    if not isprime(q) or q < 5:
        raise PreconditionError("q must be a prime >= 5")
    if ell == 2 or not isprime(ell) or ell == q:
        raise PreconditionError("ell must be an odd prime different from q")
    if (q - 1) % ell == 0:
        raise PreconditionError("ell must not divide q - 1")
    if ell ** e > 3000 or e < 1:
        raise PreconditionError("ell^e must be at most 3000")
    F = gf(q)
    rng = SeededRng(seed)
    for _ in range(max_curves):
        a, b = rng.randbelow(q), rng.randbelow(q)
        if (4 * a ** 3 + 27 * b * b) % q == 0:
            continue
        E0 = Curve(F, a, b)
        N = count(E0)
        if N % ell:
            continue
        chain = []
        E = E0
        for _ in range(e):
            K = E.infinity
            while K.is_infinity:
                K = scalar_mul(N // ell, random_point(E, rng))
            phi = isogeny_from_generator(E, K, ell)
            chain.append(phi)
            E = phi.codomain
        P = E.infinity
        while scalar_mul(N // ell, P).is_infinity:
            P = random_point(E, rng)
        f = Poly(F, [F.neg(P.x), F.one])
        for phi in reversed(chain):
            f = _fiber_pullback(f, phi.num, phi.den)
        f = f.monic()
        if f.degree != ell ** e or not is_irreducible(f):
            raise IrreducibilityCheckFailed(f"fibre polynomial of degree {f.degree} is not irreducible")
        return f
    raise CurveSearchExhausted(f"no curve with {ell} | #E found in {max_curves} draws")


# ---------------------------------------------------------------------------
# irreducibility oracles


def irreducible_by_trial_division(f: Poly, limit: int = 2 * 10 ** 6) -> bool:
    """Divide by every monic polynomial of degree 1 .. deg f // 2."""
    import itertools

    F = f.field
    q, d = F.order, f.degree
    if sum(q ** k for k in range(1, d // 2 + 1)) > limit:
        raise PreconditionError("too many candidate divisors")
    elems = list(F.elements())
    for k in range(1, d // 2 + 1):
        for low in itertools.product(elems, repeat=k):
            g = Poly(F, list(low) + [F.one])
            if (f % g).is_zero():
                return False
    return True


def berlekamp_factor_count(f: Poly) -> int:
    """Number of distinct irreducible factors of a squarefree f: nullity of Q - I."""
    F = f.field
    q, d = F.order, f.degree
    if F.degree != 1:
        raise PreconditionError("prime fields only")
    rows = []
    xq = Poly.x(F).powmod(q, f)
    cur = Poly.const(F, F.one)
    for i in range(d):
        rows.append([cur[j] if j <= cur.degree else 0 for j in range(d)])
        cur = (cur * xq) % f
    if f.gcd(f.derivative()).degree > 0:
        raise PreconditionError("f must be squarefree")
    for i in range(d):
        rows[i][i] -= 1
    return d - _rank_mod(rows, q)


def _rank_mod(M, p: int) -> int:
    M = [[x % p for x in row] for row in M]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(M)) if M[r][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [x * inv % p for x in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][c]:
                k = M[r][c]
                M[r] = [(x - k * y) % p for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank
