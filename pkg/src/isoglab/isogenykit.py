"""Separable isogenies from Velu's formulas, duals, Frobenius and chains.

An isogeny is stored through its kernel polynomial ``D`` (one root per
kernel abscissa).  The x-map denominator is the full product
``H = prod_{Q in G \\ O} (X - x(Q))``, i.e. ``D^2`` with the 2-torsion
abscissas taken once, and the x-map is ``g/H`` with

    g/H = d X - p1 - (3X^2 + a) H'/H - 2 (X^3 + a X + b) (H'/H)'

where ``d = #G`` is the isogeny degree and ``p1`` the sum of the roots of H.
The y-map is ``y * (g/H)'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

from .curvekit import (
    Curve,
    CurvePoint,
    division_poly,
    j_invariant,
    mul_by_m_maps,
    scalar_mul,
    _divpolys,
)
from .errors import (
    ContractViolation,
    KernelNotGaloisStable,
    LinkMismatch,
    NotASubgroup,
    PreconditionError,
)
from .fieldkit import ExtField, Poly, PrimeField, enumerate_roots, factor_squarefree, poly_key


def _power_sums(H: Poly, F):
    """s1, s2, s3 of the roots of the monic polynomial H (with multiplicity)."""
    n = H.degree
    c = lambda i: H[n - i] if n - i >= 0 else F.zero
    e1 = F.neg(c(1))
    e2 = c(2)
    e3 = F.neg(c(3))
    s1 = e1
    s2 = F.sub(F.mul(e1, e1), F.smul(2, e2))
    s3 = F.add(F.sub(F.pow(e1, 3), F.smul(3, F.mul(e1, e2))), F.smul(3, e3))
    return s1, s2, s3


class Isogeny:
    """Separable isogeny with kernel polynomial ``kernel_poly``.

    ``scale`` post-composes with (x, y) -> (u^2 x, u^3 y) into ``codomain``.
    """

    def __init__(self, domain: Curve, kernel_poly: Poly, *, scale=None, generator=None, order=None):
        F = domain.field
        D = kernel_poly.monic()
        if D.field != F:
            raise PreconditionError("kernel polynomial must have coefficients in the curve's field")
        f = domain.rhs_poly
        T = D.gcd(f)
        H = D * D.exact_div(T)
        n = H.degree
        self.domain = domain
        self.kernel_poly = D
        self.den = H
        self.degree = n + 1
        self.generator = generator
        self.generator_order = order
        a, b = domain.a, domain.b
        s1, s2, s3 = _power_sums(H, F)
        a1 = F.sub(a, F.smul(5, F.add(F.smul(3, s2), F.smul(n, a))))
        b1 = F.sub(
            b,
            F.smul(7, F.add(F.add(F.smul(5, s3), F.smul(3, F.mul(a, s1))), F.smul(2 * n, b))),
        )
        self.velu_codomain = Curve(F, a1, b1)
        self.scale = scale
        if scale is None:
            self.codomain = self.velu_codomain
        else:
            u2 = F.mul(scale, scale)
            self.codomain = Curve(F, F.mul(F.mul(u2, u2), a1), F.mul(F.pow(u2, 3), b1))
        # numerator from the derivative formula, divided exactly by H
        X = Poly.x(F)
        dH = H.derivative()
        ddH = dH.derivative()
        fp = f.derivative()
        N = (
            (X * H * H).scale(F.from_int(self.degree))
            - (H * H).scale(s1)
            - fp * dH * H
            - (f * (ddH * H - dH * dH)).scale(F.from_int(2))
        )
        self.num = N.exact_div(H)
        self._dnum = self.num.derivative()
        self._dden = dH

    def __repr__(self):
        return f"Isogeny({self.domain} -> {self.codomain}, degree {self.degree})"

    def key(self):
        return (str(self.domain), str(self.codomain), poly_key(self.kernel_poly))

    def __eq__(self, other):
        return isinstance(other, Isogeny) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def x_map(self, x, L=None):
        """Image abscissa of a raw x (in ``L``, an extension of the base field)."""
        L = L or self.domain.field
        h = self.den.eval_in(L, x)
        if L.is_zero(h):
            return None
        X = L.div(self.num.eval_in(L, x), h)
        if self.scale is not None:
            u = L.embed(self.scale) if L != self.domain.field else self.scale
            X = L.mul(L.mul(u, u), X)
        return X

    def evaluate(self, P: CurvePoint) -> CurvePoint:
        E = P.curve
        L = E.field
        if E != self.domain and E != self.domain.base_change(L):
            raise PreconditionError("point is not on the isogeny's domain")
        target = self.codomain if L == self.domain.field else self.codomain.base_change(L)
        if P.is_infinity:
            return target.infinity
        x, y = P.x, P.y
        h = self.den.eval_in(L, x)
        if L.is_zero(h):
            return target.infinity
        g = self.num.eval_in(L, x)
        dg = self._dnum.eval_in(L, x)
        dh = self._dden.eval_in(L, x)
        hinv = L.inv(h)
        X = L.mul(g, hinv)
        Y = L.mul(y, L.mul(L.sub(L.mul(dg, h), L.mul(g, dh)), L.mul(hinv, hinv)))
        if self.scale is not None:
            u = self.scale if L == self.domain.field else L.embed(self.scale)
            u2 = L.mul(u, u)
            X, Y = L.mul(u2, X), L.mul(L.mul(u2, u), Y)
        return CurvePoint(target, X, Y)

    __call__ = evaluate

    def to_json(self) -> dict:
        F = self.domain.field
        return {
            "domain": str(self.domain),
            "codomain": str(self.codomain),
            "degree": self.degree,
            "kernel_poly": [F.label(c) for c in self.kernel_poly.coeffs],
        }


class FrobeniusIsogeny:
    """(x, y) -> (x^p, y^p) onto E^(p): y^2 = x^3 + a^p x + b^p."""

    def __init__(self, domain: Curve):
        F = domain.field
        p = F.characteristic
        self.domain = domain
        self.degree = p
        self.codomain = Curve(F, F.frobenius(domain.a), F.frobenius(domain.b))
        self.kernel_poly = Poly.const(F, F.one)

    def evaluate(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return self.codomain.infinity
        F = self.domain.field
        return CurvePoint(self.codomain, F.frobenius(P.x), F.frobenius(P.y))

    __call__ = evaluate


def frobenius_isogeny(E: Curve) -> FrobeniusIsogeny:
    return FrobeniusIsogeny(E)


# ---------------------------------------------------------------------------
# construction from kernels


def kernel_poly_from_points(E: Curve, points) -> Poly:
    """Kernel polynomial over E's field for a Galois-stable set of points."""
    pts = [P for P in points if not P.is_infinity]
    L = pts[0].curve.field if pts else E.field
    xs = sorted({P.x for P in pts}, key=L.key)
    D = Poly.from_roots(L, xs)
    if L == E.field:
        return D
    coeffs = []
    for c in D.coeffs:
        if not L.in_prime_field(c):
            raise KernelNotGaloisStable("kernel abscissas do not descend to the base field")
        coeffs.append(c[0])
    return Poly(E.field, coeffs)


def velu_from_kernel(E: Curve, kernel) -> Isogeny:
    """Isogeny with the given finite subgroup as kernel (points may lie over an extension)."""
    kernel = list(kernel)
    pts = set(kernel)
    C = kernel[0].curve if kernel else E
    if C != E and C != E.base_change(C.field):
        raise PreconditionError("kernel points are not on E")
    if C.infinity not in pts:
        raise NotASubgroup("kernel must contain the identity")
    for P in pts:
        if -P not in pts:
            raise NotASubgroup("kernel is not closed under negation")
        for Q in pts:
            if P + Q not in pts:
                raise NotASubgroup("kernel is not closed under addition")
    if len(pts) % E.field.characteristic == 0:
        raise PreconditionError("kernel order must be coprime to p")
    gen = max(pts, key=lambda P: (_order_in(P, len(pts)), P.key()))
    return Isogeny(E, kernel_poly_from_points(E, pts), generator=gen, order=len(pts))


def _order_in(P, bound):
    R, n = P, 1
    while not R.is_infinity and n <= bound:
        R = R + P
        n += 1
    return n


def isogeny_from_generator(E: Curve, K: CurvePoint, order: int) -> Isogeny:
    """Cyclic isogeny with kernel <K>; ``order`` is the exact order of K."""
    xs = []
    R = K
    for _ in range(order // 2):
        xs.append(R.x)
        R = R + K
    D = Poly.from_roots(E.field, xs)
    return Isogeny(E, D, generator=K, order=order)


# ---------------------------------------------------------------------------
# x-only kernel polynomials in K[z]/(g)


def _compose_mod(P: Poly, z: Poly, g: Poly) -> Poly:
    """P(z) mod g by Horner."""
    F = P.field
    acc = Poly._raw(F, [])
    for c in reversed(P.coeffs):
        acc = (acc * z + Poly.const(F, c)) % g
    return acc


def _x_multiple_in_ring(E: Curve, k: int, z: Poly, g: Poly) -> Poly:
    """x([k]P) as an element of K[z]/(g), given x(P) = z mod g."""
    if k == 1:
        return z % g
    maps = mul_by_m_maps(E, k)
    dp = _divpolys(E)
    Fk = dp(k)
    psi2 = Fk * Fk
    if k % 2 == 0:
        psi2 = psi2 * E.rhs_poly
    num = _compose_mod(maps.phi, z, g)
    den = _compose_mod(psi2, z, g)
    return (num * den.invmod(g)) % g


def _kernel_poly_in_ring(E: Curve, ell: int, z: Poly, g: Poly):
    """Kernel polynomial of <P> (x(P) = z mod g, P of prime order ell), or None if not rational."""
    F = E.field
    if ell == 2:
        if z.degree > 0:
            return None
        return Poly._raw(F, [F.neg(z[0]) if z.degree == 0 else F.zero, F.one])
    roots = [_x_multiple_in_ring(E, k, z, g) for k in range(1, (ell - 1) // 2 + 1)]
    D = [Poly.const(F, F.one)]  # coefficients in K[z]/(g), low to high
    for r in roots:
        # multiply by (X - r)
        new = [Poly._raw(F, [])] * (len(D) + 1)
        for i, c in enumerate(D):
            new[i + 1] = new[i + 1] + c
            new[i] = (new[i] - c * r) % g
        D = new
    coeffs = []
    for c in D:
        c = c % g
        if c.degree > 0:
            return None
        coeffs.append(c[0] if c.degree == 0 else F.zero)
    return Poly._raw(F, coeffs)


def rational_kernel_polys(E: Curve, ell: int) -> list:
    """All kernel polynomials of rational ell-isogenies from E, sorted canonically."""
    F = E.field
    if ell == F.characteristic:
        raise PreconditionError("ell must differ from the characteristic")
    if ell == 2:
        found = [Poly._raw(F, [F.neg(r), F.one]) for r in enumerate_roots(E.rhs_poly)]
        return sorted(found, key=poly_key)
    psi = division_poly(E, ell).even_part
    half = (ell - 1) // 2
    found = {}
    z = Poly.x(F)
    for g in factor_squarefree(psi):
        if g.degree > half:
            continue
        D = _kernel_poly_in_ring(E, ell, z, g)
        if D is not None:
            found[D.coeffs] = D
    return sorted(found.values(), key=poly_key)


def enumerate_ell_isogenies(E: Curve, ell: int, max_ext: int = None) -> list:
    """Every degree-ell isogeny from E defined over E's field (0, 1, 2 or ell+1 of them)."""
    if ell > 13:
        raise PreconditionError("ell is limited to 13")
    return [Isogeny(E, D) for D in rational_kernel_polys(E, ell)]


def ell_subgroups_by_torsion(E: Curve, ell: int, max_ext: int):
    """The ell+1 cyclic subgroups of E[ell], from explicit torsion points.

    Returns ``(subgroups, field)``; each subgroup is a list of points.
    """
    from .curvekit import torsion_points

    pts, L = torsion_points(E, ell, max_ext)
    seen = set()
    groups = []
    for P, _ in sorted(pts, key=lambda t: t[0].key()):
        if P.is_infinity or P in seen:
            continue
        G = [P.curve.infinity]
        R = P
        while not R.is_infinity:
            G.append(R)
            seen.add(R)
            R = R + P
        groups.append(G)
    return groups, L


def rational_kernel_polys_by_torsion(E: Curve, ell: int, max_ext: int) -> list:
    groups, _ = ell_subgroups_by_torsion(E, ell, max_ext)
    out = {}
    for G in groups:
        try:
            D = kernel_poly_from_points(E, G)
        except KernelNotGaloisStable:
            continue
        out[D.coeffs] = D
    return sorted(out.values(), key=poly_key)


# ---------------------------------------------------------------------------
# duals and chains


def _prime_dual_kernel(phi: Isogeny, ell: int) -> Poly:
    E, E1 = phi.domain, phi.codomain
    F = E.field
    D = phi.kernel_poly
    if ell == 2:
        rest = E.rhs_poly.exact_div(D)
        factors = factor_squarefree(rest)
        g = factors[0]
    else:
        psi = division_poly(E, ell).even_part
        candidates = [g for g in factor_squarefree(psi) if g.gcd(D).degree == 0]
        g = min(candidates, key=lambda h: h.degree)
    z = Poly.x(F) % g
    xr = _compose_mod(phi.num, z, g) * _compose_mod(phi.den, z, g).invmod(g) % g
    if phi.scale is not None:
        u = phi.scale
        xr = xr.scale(F.mul(u, u))
    D1 = _kernel_poly_in_ring(E1, ell, xr, g)
    if D1 is None:
        raise ContractViolation("dual kernel is not rational")
    return D1


def dual(phi):
    """Dual isogeny; prime degrees give an Isogeny, composite ones an IsogenyChain."""
    from sympy import factorint

    n = phi.degree
    if n == 1:
        return Isogeny(phi.codomain, Poly.const(phi.codomain.field, phi.codomain.field.one))
    if n % phi.domain.field.characteristic == 0:
        raise PreconditionError("degree must be coprime to p")
    if n > 13:
        raise PreconditionError("dual is implemented for degree <= 13")
    fac = factorint(n)
    if len(fac) == 1 and list(fac.values())[0] == 1:
        return _prime_dual(phi, n)
    if phi.generator is None:
        raise PreconditionError("composite-degree duals need the kernel generator")
    chain = decompose(phi)
    return IsogenyChain([_prime_dual(step, step.degree) for step in reversed(chain.steps)])


def _prime_dual(phi: Isogeny, ell: int) -> Isogeny:
    F = phi.domain.field
    D1 = _prime_dual_kernel(phi, ell)
    # invariant differentials: phi scales by 1/u, so the dual must scale by ell*u
    # for the composite to be [ell]; a Velu map followed by (x, y) -> (v^2 x, v^3 y)
    # scales by 1/v, hence v = 1/(ell*u)
    E = phi.domain
    u = F.from_int(ell) if phi.scale is None else F.smul(ell, phi.scale)
    u = F.inv(u)
    out = Isogeny(phi.codomain, D1, scale=u)
    if out.codomain != E:
        raise ContractViolation(f"dual codomain {out.codomain} differs from {E}")
    return out


def decompose(phi: Isogeny) -> "IsogenyChain":
    """Prime-degree factorisation of a cyclic isogeny with known generator."""
    from sympy import factorint

    K, n = phi.generator, phi.degree
    E = phi.domain
    primes = []
    for r, e in sorted(factorint(n).items()):
        primes += [r] * e
    steps = []
    remaining = n
    for r in primes:
        kernel_pt = scalar_mul(remaining // r, K)
        step = isogeny_from_generator(E, kernel_pt, r)
        steps.append(step)
        K = step.evaluate(K)
        E = step.codomain
        remaining //= r
    if E != phi.codomain:
        raise ContractViolation("prime steps do not land on the Velu codomain")
    return IsogenyChain(steps)


@dataclass
class IsogenyChain:
    steps: list = dc_field(default_factory=list)

    def __post_init__(self):
        for s, t in zip(self.steps, self.steps[1:]):
            if s.codomain != t.domain:
                raise LinkMismatch(f"{s.codomain} does not match {t.domain}")

    @property
    def degree(self) -> int:
        d = 1
        for s in self.steps:
            d *= s.degree
        return d

    @property
    def domain(self):
        return self.steps[0].domain if self.steps else None

    @property
    def codomain(self):
        return self.steps[-1].codomain if self.steps else None

    def evaluate(self, P: CurvePoint) -> CurvePoint:
        for s in self.steps:
            P = s.evaluate(P)
        return P

    __call__ = evaluate


def compose(chain) -> IsogenyChain:
    if not isinstance(chain, IsogenyChain):
        chain = IsogenyChain(list(chain))
    return chain
