import itertools

import pytest

from isoglab.countkit import count_naive
from isoglab.curvekit import Curve, j_invariant, random_point, scalar_mul
from isoglab.errors import ExtensionTooLarge, LinkMismatch, NotASubgroup
from isoglab.fieldkit import enumerate_roots, gf
from isoglab.graphkit import supersingular_models
from isoglab.isogenykit import (
    IsogenyChain,
    compose,
    dual,
    enumerate_ell_isogenies,
    ell_subgroups_by_torsion,
    frobenius_isogeny,
    isogeny_from_generator,
    rational_kernel_polys,
    rational_kernel_polys_by_torsion,
    velu_from_kernel,
)
from isoglab.rng import SeededRng

from oracles import check_velu_instance, homomorphism_violations, velu_instances

E13 = Curve(gf(13), -4, 5)


def point_of_order(E, k):
    for P in E.points()[1:]:
        if scalar_mul(k, P).is_infinity and all(
            not scalar_mul(d, P).is_infinity for d in range(1, k)
        ):
            return P
    return None


def test_trivial_kernel_is_identity():
    phi = velu_from_kernel(E13, [E13.infinity])
    assert phi.degree == 1 and phi.codomain == E13
    for P in E13.points():
        assert phi.evaluate(P) == P


def test_two_isogeny_f13():
    E = Curve(gf(13), 1, 1)
    roots = enumerate_roots(E.rhs_poly)
    assert roots, "curve must have rational 2-torsion"
    T = E.point(roots[0], 0)
    phi = velu_from_kernel(E, [E.infinity, T])
    assert phi.degree == 2
    C = phi.codomain
    for P in E.points():
        Q = phi.evaluate(P)
        assert Q.is_infinity or C.contains(Q.x, Q.y)
    assert homomorphism_violations(phi, E.points()) == 0


def test_exhaustive_homomorphism_f13():
    pts = E13.points()
    for k in (2, 3, 4, 5, 6, 7):
        K = point_of_order(E13, k)
        if K is None:
            continue
        phi = isogeny_from_generator(E13, K, k)
        images = {P: phi.evaluate(P) for P in pts}
        for P, Q in itertools.product(pts, repeat=2):
            assert images[P + Q] == images[P] + images[Q]


def test_velu_codomain_matches_sum_formula():
    rng = SeededRng(31)
    for E, K, k in velu_instances(30, 3):
        F = E.field
        phi = isogeny_from_generator(E, K, k)
        kernel = [scalar_mul(i, K) for i in range(1, k)]
        # a' = a - 5t, b' = b - 7w; each {Q, -Q} pair contributes once, with
        # t_Q doubled unless Q is 2-torsion
        t_half = sum(
            ((3 * Q.x ** 2 + E.a) * (1 if (Q + Q).is_infinity else 2)) for Q in _half(kernel)
        )
        w_half = sum(
            4 * (Q.x ** 3 + E.a * Q.x + E.b)
            + Q.x * (3 * Q.x ** 2 + E.a) * (1 if (Q + Q).is_infinity else 2)
            for Q in _half(kernel)
        )
        assert phi.codomain.a == (E.a - 5 * t_half) % F.p
        assert phi.codomain.b == (E.b - 7 * w_half) % F.p
        assert check_velu_instance(E, K, k, 3, rng) == []


def _half(kernel):
    seen, out = set(), []
    for Q in kernel:
        if Q.x in seen:
            continue
        seen.add(Q.x)
        out.append(Q)
    return out


def test_evaluate_kernel_and_infinity():
    K = point_of_order(E13, 3) or point_of_order(E13, 2)
    k = 3 if scalar_mul(3, K).is_infinity else 2
    phi = isogeny_from_generator(E13, K, k)
    assert phi.evaluate(K).is_infinity
    assert phi.evaluate(E13.infinity).is_infinity


def test_kernel_poly_degree_bookkeeping():
    for E, K, k in velu_instances(40, 9):
        phi = isogeny_from_generator(E, K, k)
        if k % 2:
            assert phi.kernel_poly.degree == (k - 1) // 2
            assert phi.den == phi.kernel_poly * phi.kernel_poly
        else:
            assert phi.kernel_poly.degree == k // 2
        assert phi.degree == k


def test_velu_rejects_non_subgroups():
    pts = E13.points()
    with pytest.raises(NotASubgroup):
        velu_from_kernel(E13, [pts[1]])
    with pytest.raises(NotASubgroup):
        velu_from_kernel(E13, [E13.infinity, pts[1]])


def test_fibre_sizes_equal_degree():
    # over F_{p^2} every fibre of a non-kernel image point has deg(phi) points
    p = 11
    E = Curve(gf(p), 1, 3)
    for k in (2, 3, 5):
        K = point_of_order(E, k)
        if K is None:
            continue
        phi = isogeny_from_generator(E, K, k)
        L = gf(p, 2)
        EL = E.base_change(L)
        fibres = {}
        for P in EL.points():
            fibres.setdefault(phi.evaluate(P), []).append(P)
        assert all(len(v) == k for v in fibres.values())


@pytest.mark.parametrize("p", [11, 13, 17])
@pytest.mark.parametrize("ell", [2, 3, 5])
def test_isogeny_counts_and_torsion_oracle(p, ell):
    rng = SeededRng(p * ell)
    F = gf(p)
    for _ in range(4):
        a, b = rng.randbelow(p), rng.randbelow(p)
        if (4 * a ** 3 + 27 * b * b) % p == 0:
            continue
        E = Curve(F, a, b)
        fast = rational_kernel_polys(E, ell)
        assert len(fast) in (0, 1, 2, ell + 1)
        try:
            slow = rational_kernel_polys_by_torsion(E, ell, 8)
            groups, _ = ell_subgroups_by_torsion(E, ell, 8)
        except ExtensionTooLarge:
            continue
        assert len(groups) == ell + 1
        assert [f.coeffs for f in fast] == [f.coeffs for f in slow]


def test_supersingular_97_has_three_2_isogenies():
    models = supersingular_models(97)
    E = next(iter(models.values()))
    isos = enumerate_ell_isogenies(E, 2)
    assert len(isos) == 3
    for phi in isos:
        assert count_naive(phi.codomain) == count_naive(E)


def test_dual_properties():
    rng = SeededRng(5)
    for E, K, k in velu_instances(25, 17):
        phi = isogeny_from_generator(E, K, k)
        psi = dual(phi)
        assert psi.degree == phi.degree
        assert psi.codomain == E
        for _ in range(20):
            P = random_point(E, rng)
            assert psi.evaluate(phi.evaluate(P)) == scalar_mul(k, P)
        if k in (2, 3, 5, 7):
            assert dual(psi).kernel_poly == phi.kernel_poly


def test_frobenius_isogeny():
    E = Curve(gf(13), 2, 9)
    pi = frobenius_isogeny(E)
    assert pi.codomain == E
    assert all(pi.evaluate(P) == P for P in E.points())
    assert pi.evaluate(E.infinity).is_infinity
    F = gf(7, 2)
    z = F.parse("1+1*i")
    E49 = Curve(F, z, F.from_int(3))
    pi = frobenius_isogeny(E49)
    assert j_invariant(pi.codomain) == F.pow(j_invariant(E49), 7)
    # the only kernel point is the identity
    assert sum(1 for P in E49.points() if pi.evaluate(P).is_infinity) == 1


def test_chains():
    empty = compose([])
    assert empty.degree == 1
    P = random_point(E13, SeededRng(1))
    assert empty.evaluate(P) == P
    E = Curve(gf(13), 1, 1)
    K6 = point_of_order(E, 6)
    phi2 = isogeny_from_generator(E, scalar_mul(3, K6), 2)
    phi3 = isogeny_from_generator(phi2.codomain, phi2.evaluate(K6), 3)
    chain = compose([phi2, phi3])
    assert chain.degree == 6
    assert chain.evaluate(K6).is_infinity
    rng = SeededRng(2)
    for E, K, k in velu_instances(10, 23):
        phi = isogeny_from_generator(E, K, k)
        chain = compose([phi, dual(phi)] if k in (2, 3, 5, 7) else [phi])
        Q = random_point(E, rng)
        if len(chain.steps) == 2:
            assert chain.evaluate(Q) == scalar_mul(k, Q)
    with pytest.raises(LinkMismatch):
        IsogenyChain([phi3, phi2])


def test_isogeny_over_extension_points():
    # points over an extension are mapped by the same rational maps
    E = Curve(gf(11), 1, 3)
    K = point_of_order(E, 2) or point_of_order(E, 3)
    k = 2 if scalar_mul(2, K).is_infinity else 3
    phi = isogeny_from_generator(E, K, k)
    EL = E.base_change(gf(11, 2))
    pts = EL.points()
    assert homomorphism_violations(phi, pts) == 0
