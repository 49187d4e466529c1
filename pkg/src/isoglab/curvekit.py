"""Short-Weierstrass curves y^2 = x^3 + a x + b and their affine group law."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from sympy import factorint

from .errors import (
    BadGroupOrder,
    CurveMismatch,
    ExtensionTooLarge,
    NotOnCurve,
    PreconditionError,
    SamplingFailure,
    SingularCurve,
)
from .fieldkit import (
    ExtField,
    FieldElement,
    Poly,
    PrimeField,
    _Element,
    enumerate_roots,
    gf,
    max_ext_elements,
    MAX_SCAN,
)
from .rng import SeededRng


def _raw(field, v):
    if isinstance(v, _Element):
        if v.field == field:
            return v.raw
        if isinstance(field, ExtField):
            return field.coerce(v)
        raise CurveMismatch(f"coefficient from {v.field!r} used over {field!r}")
    if isinstance(v, int):
        return field.from_int(v)
    if isinstance(v, (tuple, list)):
        return field.coerce(v) if isinstance(field, ExtField) else int(v[0]) % field.p
    return v


class Curve:
    """Elliptic curve y^2 = x^3 + a x + b over a prime or extension field."""

    def __init__(self, field, a, b):
        if field.characteristic in (2, 3):
            raise SingularCurve("characteristic 2 and 3 are not supported")
        self.field = field
        self.a = _raw(field, a)
        self.b = _raw(field, b)
        F = field
        disc = F.add(F.smul(4, F.pow(self.a, 3)), F.smul(27, F.mul(self.b, self.b)))
        if F.is_zero(disc):
            raise SingularCurve(f"4a^3 + 27b^2 = 0 for {self}")
        self._disc = disc

    def __eq__(self, other):
        return (
            isinstance(other, Curve)
            and self.field == other.field
            and self.a == other.a
            and self.b == other.b
        )

    def __hash__(self):
        return hash((self.field, self.a, self.b))

    def __str__(self):
        F = self.field
        return f"y^2=x^3+{F.label(self.a)}x+{F.label(self.b)} over GF({F.characteristic}^{F.degree})"

    __repr__ = __str__

    @property
    def q(self) -> int:
        return self.field.order

    def rhs(self, x):
        """x^3 + a x + b for a raw x."""
        F = self.field
        return F.add(F.mul(F.add(F.mul(x, x), self.a), x), self.b)

    @cached_property
    def rhs_poly(self) -> Poly:
        F = self.field
        return Poly._raw(F, [self.b, self.a, F.zero, F.one])

    def contains(self, x, y) -> bool:
        F = self.field
        return F.mul(y, y) == self.rhs(x)

    def point(self, x, y) -> "CurvePoint":
        F = self.field
        x, y = _raw(F, x), _raw(F, y)
        if not self.contains(x, y):
            raise NotOnCurve(f"({F.label(x)},{F.label(y)}) is not on {self}")
        return CurvePoint(self, x, y)

    @cached_property
    def infinity(self) -> "CurvePoint":
        return CurvePoint(self, None, None)

    def base_change(self, field) -> "Curve":
        """The same equation over an extension of a prime base field."""
        if field == self.field:
            return self
        if not isinstance(self.field, PrimeField) or field.characteristic != self.field.p:
            raise CurveMismatch("base change only from a prime field to its extensions")
        return Curve(field, field.embed(self.a), field.embed(self.b))

    def points(self):
        """All rational points, infinity first (exhaustive; small fields only)."""
        if self.q > MAX_SCAN:
            raise ExtensionTooLarge("point enumeration over a field with more than 2^22 elements")
        F = self.field
        out = [self.infinity]
        for x in F.elements():
            r = self.rhs(x)
            y = F.sqrt(r)
            if y is None:
                continue
            out.append(CurvePoint(self, x, y))
            if not F.is_zero(y):
                out.append(CurvePoint(self, x, F.neg(y)))
        return out


class CurvePoint:
    """Affine point, or the point at infinity when ``x is None``."""

    __slots__ = ("curve", "x", "y")

    def __init__(self, curve: Curve, x, y):
        self.curve = curve
        self.x = x
        self.y = y

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other):
        return (
            isinstance(other, CurvePoint)
            and self.curve == other.curve
            and self.x == other.x
            and self.y == other.y
        )

    def __hash__(self):
        return hash((self.curve, self.x, self.y))

    def __str__(self):
        if self.x is None:
            return "O"
        F = self.curve.field
        return f"({F.label(self.x)},{F.label(self.y)})"

    __repr__ = __str__

    def __add__(self, other):
        return add(self, other)

    def __neg__(self):
        if self.x is None:
            return self
        return CurvePoint(self.curve, self.x, self.curve.field.neg(self.y))

    def __sub__(self, other):
        return add(self, -other)

    def __rmul__(self, n: int):
        return scalar_mul(n, self)

    @property
    def xy(self):
        """Coordinates as field elements."""
        F = self.curve.field
        if self.x is None:
            return None
        wrap = FieldElement if isinstance(F, PrimeField) else F.element_at
        if isinstance(F, PrimeField):
            return FieldElement(F, self.x), FieldElement(F, self.y)
        return wrap(self.x), wrap(self.y)

    def key(self):
        F = self.curve.field
        if self.x is None:
            return (0,)
        return (1, F.key(self.x), F.key(self.y))


def add(P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    E = P.curve
    if Q.curve != E:
        raise CurveMismatch("points on different curves")
    if P.x is None:
        return Q
    if Q.x is None:
        return P
    F = E.field
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if F.add(y1, y2) == F.zero:
            return E.infinity
        lam = F.div(F.add(F.smul(3, F.mul(x1, x1)), E.a), F.smul(2, y1))
    else:
        lam = F.div(F.sub(y2, y1), F.sub(x2, x1))
    x3 = F.sub(F.sub(F.mul(lam, lam), x1), x2)
    y3 = F.add(F.sub(F.neg(F.mul(lam, x3)), y1), F.mul(lam, x1))
    return CurvePoint(E, x3, y3)


def scalar_mul(n: int, P: CurvePoint) -> CurvePoint:
    if n < 0:
        n, P = -n, -P
    R = P.curve.infinity
    while n:
        if n & 1:
            R = add(R, P)
        n >>= 1
        if n:
            P = add(P, P)
    return R


def j_invariant(E: Curve):
    """1728 * 4a^3 / (4a^3 + 27b^2), as a raw field value."""
    F = E.field
    four_a3 = F.smul(4, F.pow(E.a, 3))
    return F.div(F.smul(1728, four_a3), E._disc)


def j_label(E: Curve) -> str:
    return E.field.label(j_invariant(E))


def curve_from_j(field, j) -> Curve:
    """Standard model with invariant j (y^2=x^3+1 for 0, y^2=x^3+x for 1728)."""
    F = field
    j = _raw(F, j)
    if F.is_zero(j):
        return Curve(F, 0, 1)
    if j == F.from_int(1728):
        return Curve(F, 1, 0)
    c = F.sub(F.from_int(1728), j)
    jc = F.mul(j, c)
    return Curve(F, F.smul(3, jc), F.smul(2, F.mul(jc, c)))


def quadratic_twist(E: Curve) -> Curve:
    """y^2 = x^3 + d^2 a x + d^3 b for the smallest non-square d of the field."""
    F = E.field
    d = F.nonsquare()
    d2 = F.mul(d, d)
    return Curve(F, F.mul(d2, E.a), F.mul(F.mul(d2, d), E.b))


def isomorphic_model(E: Curve, u) -> Curve:
    """Image of E under (x, y) -> (u^2 x, u^3 y)."""
    F = E.field
    u2 = F.mul(u, u)
    return Curve(F, F.mul(F.mul(u2, u2), E.a), F.mul(F.pow(u2, 3), E.b))


def random_point(E: Curve, rng: SeededRng, max_draws: int = 10 ** 6) -> CurvePoint:
    """Uniform abscissa until x^3+ax+b is a square; the ordinate sign is a coin flip."""
    F = E.field
    for _ in range(max_draws):
        x = F.random(rng)
        y = F.sqrt(E.rhs(x))
        if y is None:
            continue
        if rng.getrandbits(1):
            y = F.neg(y)
        return CurvePoint(E, x, y)
    raise SamplingFailure(f"no point found on {E} after {max_draws} draws")


def point_order(P: CurvePoint, group_order: int) -> int:
    if not scalar_mul(group_order, P).is_infinity:
        raise BadGroupOrder(f"[{group_order}]P is not the identity")
    n = group_order
    for r, e in factorint(group_order).items():
        for _ in range(e):
            if scalar_mul(n // r, P).is_infinity:
                n //= r
            else:
                break
    return n


def order_by_addition(P: CurvePoint, limit: int = 10 ** 7) -> int:
    """Order by repeated addition; the slow oracle for ``point_order``."""
    R, n = P, 1
    while not R.is_infinity:
        R = add(R, P)
        n += 1
        if n > limit:
            raise SamplingFailure("order exceeds limit")
    return n


# ---------------------------------------------------------------------------
# division polynomials


@dataclass(frozen=True)
class DivisionPolynomial:
    """psi_m = even_part(x) * y^y_parity after reducing y^2 = x^3 + ax + b."""

    m: int
    even_part: Poly
    y_parity: int

    def eval_sq(self, E: Curve, x):
        """psi_m(P)^2 as a function of x only."""
        F = E.field
        v = self.even_part(x)
        v = F.mul(v, v)
        return F.mul(v, E.rhs(x)) if self.y_parity else v


class _DivPolys:
    """Memoised reduced division polynomials F_m (psi_m = F_m * y^(m even))."""

    def __init__(self, E: Curve):
        self.E = E
        F = E.field
        self.f = E.rhs_poly
        self.f2 = self.f * self.f
        a, b = E.a, E.b
        P = lambda cs: Poly._raw(F, list(cs))
        sm, mul, add, neg = F.smul, F.mul, F.add, F.neg
        a2 = mul(a, a)
        self.memo = {
            0: P([]),
            1: P([F.one]),
            2: P([F.from_int(2)]),
            3: P([neg(a2), sm(12, b), sm(6, a), F.zero, F.from_int(3)]),
            4: P(
                [
                    sm(4, neg(add(mul(a2, a), sm(8, mul(b, b))))),
                    sm(4, neg(sm(4, mul(a, b)))),
                    sm(4, neg(sm(5, a2))),
                    sm(80, b),
                    sm(20, a),
                    F.zero,
                    F.from_int(4),
                ]
            ),
        }
        self.half = F.inv(F.from_int(2))

    def __call__(self, m: int) -> Poly:
        if m < 0:
            return -self(-m)
        memo = self.memo
        if m in memo:
            return memo[m]
        # iterate to avoid deep recursion
        todo = [m]
        while todo:
            n = todo[-1]
            k = n // 2
            need = [k - 2, k - 1, k, k + 1, k + 2] if n % 2 == 0 else [k - 1, k, k + 1, k + 2]
            missing = [i for i in need if i >= 0 and i not in memo]
            if missing:
                todo.extend(missing)
                continue
            todo.pop()
            if n in memo:
                continue
            memo[n] = self._step(n)
        return memo[m]

    def _step(self, n: int) -> Poly:
        g = self.memo.get
        k = n // 2
        if n % 2:
            a = g(k + 2) * g(k) ** 3
            b = g(k - 1) * g(k + 1) ** 3
            if k % 2 == 0:
                return a * self.f2 - b
            return a - b * self.f2
        inner = g(k + 2) * g(k - 1) ** 2 - g(k - 2) * g(k + 1) ** 2
        return (g(k) * inner).scale(self.half)


_divpoly_cache: dict = {}


def _divpolys(E: Curve) -> _DivPolys:
    dp = _divpoly_cache.get(E)
    if dp is None:
        if len(_divpoly_cache) > 256:
            _divpoly_cache.clear()
        dp = _divpoly_cache[E] = _DivPolys(E)
    return dp


def division_poly(E: Curve, m: int) -> DivisionPolynomial:
    if not 1 <= m <= 200:
        raise PreconditionError("division polynomial index must be in [1, 200]")
    return DivisionPolynomial(m, _divpolys(E)(m), 1 - m % 2)


@dataclass(frozen=True)
class MulByM:
    """[m]P = (phi(x) / psi_m(P)^2, omega(P) / psi_m(P)^3).

    ``omega_even`` carries a factor y when ``omega_parity`` is 1.
    """

    m: int
    phi: Poly
    psi: DivisionPolynomial
    omega_even: Poly
    omega_parity: int

    def evaluate(self, P: CurvePoint) -> CurvePoint:
        E = P.curve
        F = E.field
        if P.is_infinity:
            return P
        x, y = P.x, P.y
        psi = self.psi.even_part(x)
        if self.psi.y_parity:
            psi = F.mul(psi, y)
        if F.is_zero(psi):
            return E.infinity
        psi2 = F.mul(psi, psi)
        X = F.div(self.phi(x), psi2)
        w = self.omega_even(x)
        if self.omega_parity:
            w = F.mul(w, y)
        Y = F.div(w, F.mul(psi2, psi))
        return CurvePoint(E, X, Y)


def mul_by_m_maps(E: Curve, m: int) -> MulByM:
    if not 2 <= m <= 50:
        raise PreconditionError("multiplication maps are built for 2 <= m <= 50")
    dp = _divpolys(E)
    F = E.field
    f = dp.f
    x = Poly.x(F)
    Fm, Fp1, Fm1 = dp(m), dp(m + 1), dp(m - 1)
    if m % 2 == 0:
        phi = x * f * Fm * Fm - Fp1 * Fm1
    else:
        phi = x * Fm * Fm - f * Fp1 * Fm1
    inner = dp(m + 2) * dp(m - 1) ** 2 - dp(m - 2) * dp(m + 1) ** 2
    quarter = F.inv(F.from_int(4))
    omega = inner.scale(quarter)
    return MulByM(m, phi, division_poly(E, m), omega, m % 2)


# ---------------------------------------------------------------------------
# torsion


def torsion_points(E: Curve, m: int, max_ext_degree: int):
    """All of E[m] over the smallest extension F_{p^k} (k <= max_ext_degree) containing it.

    Returns ``(points, field)`` where ``points`` is a list of
    ``(point, minimal_degree)`` pairs on ``E.base_change(field)``.
    """
    if not isinstance(E.field, PrimeField):
        raise PreconditionError("torsion enumeration is defined for curves over prime fields")
    p = E.field.p
    if m % p == 0:
        raise PreconditionError("gcd(m, p) must be 1")
    cap = min(max_ext_elements(), MAX_SCAN)
    psi = division_poly(E, m).even_part if m > 1 else None
    for k in range(1, max_ext_degree + 1):
        if p ** k > cap:
            break
        L = gf(p, k)
        EL = E.base_change(L)
        pts = _torsion_over(EL, m, psi)
        if len(pts) == m * m:
            return [(P, _min_degree(P)) for P in pts], L
    raise ExtensionTooLarge(f"E[{m}] is not rational over GF({p}^k) for any allowed k <= {max_ext_degree}")


def _torsion_over(EL: Curve, m: int, psi: Poly):
    L = EL.field
    xs = []
    if m > 1:
        lifted = Poly._raw(L, [L.embed(c) for c in psi.coeffs]) if isinstance(L, ExtField) else psi
        xs.extend(enumerate_roots(lifted))
        if m % 2 == 0:
            xs.extend(enumerate_roots(EL.rhs_poly))
    pts = [EL.infinity]
    for x in sorted(set(xs), key=L.key):
        y = L.sqrt(EL.rhs(x))
        if y is None:
            continue
        pts.append(CurvePoint(EL, x, y))
        if not L.is_zero(y):
            pts.append(CurvePoint(EL, x, L.neg(y)))
    return pts


def _min_degree(P: CurvePoint) -> int:
    if P.is_infinity:
        return 1
    L = P.curve.field
    for d in range(1, L.degree + 1):
        if L.degree % d == 0 and L.frobenius(P.x, d) == P.x and L.frobenius(P.y, d) == P.y:
            return d
    return L.degree


def is_isomorphic(E1: Curve, E2: Curve, order1: int = None, order2: int = None) -> bool:
    """Isomorphic over the base field: equal j and, when supplied, equal orders."""
    if E1.field != E2.field or j_invariant(E1) != j_invariant(E2):
        return False
    if order1 is not None and order2 is not None:
        return order1 == order2
    return True
