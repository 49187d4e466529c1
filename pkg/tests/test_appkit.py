import pytest
from hypothesis import given, settings, strategies as st
from sympy import isprime

from isoglab.appkit import (
    ModNPoint,
    berlekamp_factor_count,
    couveignes_lercier,
    ecm,
    irreducible_by_trial_division,
    pollard_pminus1,
    smooth_exponent,
)
from isoglab.curvekit import Curve, random_point, scalar_mul
from isoglab.errors import BadInput, PreconditionError
from isoglab.fieldkit import Poly, gf, is_irreducible
from isoglab.rng import SeededRng


def test_pminus1_example():
    r = pollard_pminus1(299, 4, seed=1)
    assert r.status == "split" and (r.p, r.q) == (13, 23)
    assert smooth_exponent(299, 4) % 12 == 0


def test_pminus1_fails_without_smooth_factor():
    # 1019 - 1 = 2 * 509 and 1031 - 1 = 2 * 5 * 103, neither 20-smooth
    r = pollard_pminus1(1019 * 1031, 20, seed=3)
    assert r.status == "fail" and r.to_json() == {"status": "fail", "attempts": 1}


@pytest.mark.parametrize("N", [4, 13, 97, 1 << 62])
def test_bad_inputs(N):
    with pytest.raises(BadInput):
        pollard_pminus1(N, 10, seed=0)


def test_ecm_examples():
    r = ecm(455839, 15, seed=1)
    assert r.status == "split" and (r.p, r.q) == (599, 761)
    r = ecm(8051, 15, seed=1)
    assert r.status == "split" and r.p * r.q == 8051 and r.attempts <= 50
    with pytest.raises(BadInput):
        ecm(3 * 5 * 7, 15, seed=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_ecm_split_multiplies_back(seed):
    rng = SeededRng(seed)
    ps = [p for p in range(101, 2000) if isprime(p)]
    N = rng.choice(ps) * rng.choice(ps)
    if N % 2 == 0 or N % 3 == 0 or isprime(N) or int(N ** 0.5) ** 2 == N:
        return
    r = ecm(N, 30, seed)
    if r.status == "split":
        assert r.p * r.q == N and 1 < r.p <= r.q


def test_modn_arithmetic_matches_affine_curve():
    # for prime N the projective formulas must agree with the field implementation
    p = 1009
    E = Curve(gf(p), 3, 7)
    rng = SeededRng(4)
    for _ in range(30):
        P, Q = random_point(E, rng), random_point(E, rng)
        A = ModNPoint(P.x, P.y, 1, 3, 7, p)
        B = ModNPoint(Q.x, Q.y, 1, 3, 7, p)
        for lhs, rhs in ((A + B, P + Q), (A.double(), P + P), (A * 17, scalar_mul(17, P))):
            xy = lhs.affine()
            assert (xy is None) == rhs.is_infinity
            if xy is not None:
                assert xy == (rhs.x, rhs.y)
    O = ModNPoint(0, 1, 0, 3, 7, p)
    assert (A + O).affine() == A.affine() and O.is_infinity


def test_modn_identity_on_composite():
    N = 455839
    P = ModNPoint(2, 3, 1, 5, (9 - 8 - 10) % N, N)
    assert (P * 0).is_infinity
    assert (P * 1).affine() == (2, 3)


def _check_cl(q, ell, e, seed=1):
    f = couveignes_lercier(q, ell, e, seed)
    assert f.is_monic() and f.degree == ell ** e
    assert f.field == gf(q)
    return f


@pytest.mark.parametrize("q,ell,e", [(7, 5, 1), (11, 7, 1)])
def test_cl_small_trial_division(q, ell, e):
    f = _check_cl(q, ell, e)
    assert irreducible_by_trial_division(f)
    assert berlekamp_factor_count(f) == 1


def test_cl_degree_25():
    f = _check_cl(7, 5, 2)
    assert berlekamp_factor_count(f) == 1
    assert is_irreducible(f)


def test_cl_rejects_bad_parameters():
    with pytest.raises(PreconditionError):
        couveignes_lercier(11, 5, 1, seed=1)  # 5 | 10
    with pytest.raises(PreconditionError):
        couveignes_lercier(7, 2, 1, seed=1)
    with pytest.raises(PreconditionError):
        couveignes_lercier(7, 5, 5, seed=1)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.lists(st.integers(0, 6), min_size=2, max_size=6))
def test_irreducibility_oracles_agree(q, low):
    F = gf(q)
    f = Poly(F, [c % q for c in low] + [1])
    if f.gcd(f.derivative()).degree > 0:
        return
    trial = irreducible_by_trial_division(f)
    assert trial == (berlekamp_factor_count(f) == 1) == is_irreducible(f)


def test_berlekamp_counts_factors():
    F = gf(5)
    x = Poly.x(F)
    f = (x - Poly.const(F, 1)) * (x * x + Poly.const(F, 2)) * (x * x * x + x + Poly.const(F, 1))
    # x^2 + 2 and x^3 + x + 1 are irreducible over F_5
    assert irreducible_by_trial_division(x * x + Poly.const(F, 2))
    assert irreducible_by_trial_division(x * x * x + x + Poly.const(F, 1))
    assert berlekamp_factor_count(f) == 3
