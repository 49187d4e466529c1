import json
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from isoglab.countkit import count_naive, extension_order, frobenius_data
from isoglab.curvekit import Curve, j_invariant, point_order, random_point, scalar_mul
from isoglab.errors import (
    BadDirectionSet,
    BadGenerator,
    BadInput,
    MalformedCiphertext,
    NotPrime,
    NotSupersingular,
)
from isoglab.fieldkit import Poly, enumerate_roots, gf
from isoglab.graphkit import build_supersingular_graph, export, hasse_invariant_vanishes
from isoglab.protokit import (
    EcdhParams,
    SidhCiphertext,
    cgl_hash,
    dlp_solve,
    ecdh_default_params,
    ecdh_run,
    eigen_kernel,
    rs_apply,
    rs_default_params,
    rs_keyexchange,
    rs_step,
    schreier_walk_dh,
    sidh_decrypt,
    sidh_encrypt,
    sidh_keygen,
    sidh_setup,
    sidh_shared,
    walk_apply,
    zk_identify,
)
from isoglab.rng import SeededRng

from oracles import cgl_walk_from_json


@lru_cache(maxsize=None)
def sidh431():
    return sidh_setup(2, 4, 3, 3, 1, seed=1)


@lru_cache(maxsize=None)
def rs101():
    return rs_default_params((3, 5))


# ---------------------------------------------------------------------------
# ECDH and DLP


def test_ecdh_agreement_and_dlp():
    params = ecdh_default_params(1019)
    assert count_naive(params.curve) == params.n
    for seed in range(10):
        tr = ecdh_run(params, seed)
        assert tr.shared_alice == tr.shared_bob
        assert dlp_solve(params.P, tr.A, params.n) == tr.a
        assert scalar_mul(tr.b, tr.A) == tr.shared_alice
    assert scalar_mul(1, params.P) == params.P


def test_ecdh_rejects_bad_generator():
    params = ecdh_default_params(1019)
    with pytest.raises(BadGenerator):
        ecdh_run(EcdhParams(params.curve, params.curve.infinity, params.n), 1)


def test_dlp_edge_cases_and_roundtrip():
    E = Curve(gf(10007), 3, 7)
    N = count_naive(E)
    P = random_point(E, SeededRng(6))
    n = point_order(P, N)
    assert dlp_solve(P, E.infinity, n) == 0
    assert dlp_solve(P, P, n) == 1
    rng = SeededRng(8)
    for _ in range(100):
        k = rng.randbelow(n)
        assert dlp_solve(P, scalar_mul(k, P), n) == k


def test_dlp_recovers_ecdh_secret():
    params = ecdh_default_params(10007)
    tr = ecdh_run(params, 3)
    a = dlp_solve(params.P, tr.A, params.n)
    assert scalar_mul(a, tr.B) == tr.shared_bob


# ---------------------------------------------------------------------------
# CGL


def test_cgl_examples():
    assert cgl_hash(97, "-3375", "") == "20+0*i"
    assert cgl_hash(97, "-3375", "010101") == cgl_hash(97, "20", "010101")
    # frozen from the independent walk over the exported adjacency
    assert cgl_hash(97, "-3375", "010101") == "81+75*i"
    with pytest.raises(NotSupersingular):
        cgl_hash(97, "5", "0")
    with pytest.raises(BadInput):
        cgl_hash(97, "20", "012")


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([97, 157, 193]), st.integers(0, 1 << 30), st.text("01", max_size=40))
def test_cgl_matches_json_oracle(p, pick, bits):
    G = build_supersingular_graph(p, 2)
    # p = 1 mod 12 keeps j = 0 and 1728 out of the graph, so the export is exact
    start = G.vertices[pick % G.n]
    doc = json.loads(export(G, "json"))
    assert cgl_hash(p, start, bits) == cgl_walk_from_json(doc, start, bits)


# ---------------------------------------------------------------------------
# Rostovtsev-Stolbunov


def test_rs_default_params():
    params = rs101()
    E = params.curve
    # independent check of the parameter search
    n = count_naive(E)
    assert params.trace == E.q + 1 - n
    assert params.disc == params.trace ** 2 - 4 * E.q
    for ell, lam in params.lambdas.items():
        assert (lam * lam - params.trace * lam + E.q) % ell == 0


class _Twisted:
    """Points (X, y0 * W) with y0^2 = r0 fixed, all arithmetic in F_{q^2}.

    Lets a kernel point whose y lives in F_{q^4} be handled without building
    that field: Frobenius sends y0 to y0 * r0^((q-1)/2).
    """

    def __init__(self, L, a, r0):
        self.L, self.a, self.r0 = L, a, r0

    def add(self, P, Q):
        L = self.L
        if P is None:
            return Q
        if Q is None:
            return P
        (X1, W1), (X2, W2) = P, Q
        if X1 == X2:
            if L.add(W1, W2) == L.zero:
                return None
            num = L.add(L.smul(3, L.mul(X1, X1)), self.a)
            S = L.div(num, L.smul(2, L.mul(self.r0, W1)))
        else:
            S = L.div(L.sub(W2, W1), L.sub(X2, X1))
        X3 = L.sub(L.sub(L.mul(self.r0, L.mul(S, S)), X1), X2)
        W3 = L.sub(L.mul(S, L.sub(X1, X3)), W1)
        return X3, W3

    def mul(self, k, P):
        R = None
        for _ in range(k):
            R = self.add(R, P)
        return R


def _eigenvalue_by_points(C, D, ell):
    """Read lambda off pi(P) = [lambda]P for every kernel point with x a root of D."""
    q = C.field.p
    L = gf(q, 2)
    DL = Poly._raw(L, [L.embed(c) for c in D.coeffs])
    found = set()
    a = L.embed(C.a)
    for x in enumerate_roots(DL):
        r0 = L.add(L.mul(x, L.add(L.mul(x, x), a)), L.embed(C.b))
        T = _Twisted(L, a, r0)
        P = (x, L.one)
        piP = (L.pow(x, q), L.pow(r0, (q - 1) // 2))
        found |= {lam for lam in range(1, ell) if T.mul(lam, P) == piP}
    return found


def test_rs_eigen_kernel_matches_point_oracle():
    params = rs101()
    C = params.curve
    for _ in range(4):
        for ell in params.ells:
            D = eigen_kernel(params, C, ell)
            assert _eigenvalue_by_points(C, D, ell) == {params.lambdas[ell]}
        C = rs_step(params, C, params.ells[0])


def _jl(C):
    return C.field.label(j_invariant(C))


def test_rs_exchange_and_commutation():
    params = rs101()
    E = params.curve
    assert rs_apply(params, E, []) == E
    assert _jl(rs_apply(params, E, [3, 5, 5])) == _jl(rs_apply(params, E, [5, 3, 5])) == _jl(rs_apply(params, E, [5, 5, 3]))
    for seed in range(5):
        out = rs_keyexchange(params, seed)
        assert out["agree"] and out["shared_a"] == out["shared_b"]
    empty = rs_keyexchange(params, 1, route_len=0)
    assert empty["public_a"] == empty["public_b"] == _jl(E)


# ---------------------------------------------------------------------------
# SIDH


def test_sidh_setup_431():
    params = sidh431()
    assert params.p == 431
    base = frobenius_data(Curve(gf(431), 1, 0))
    assert base.trace == 0
    assert extension_order(base, 2) == 432 ** 2
    for ell, e, P, Q in ((2, 4, params.PA, params.QA), (3, 3, params.PB, params.QB)):
        for R in (P, Q):
            assert scalar_mul(ell ** e, R).is_infinity
            assert not scalar_mul(ell ** (e - 1), R).is_infinity
        small_P = scalar_mul(ell ** (e - 1), P)
        span = {scalar_mul(k, small_P) for k in range(ell)}
        assert scalar_mul(ell ** (e - 1), Q) not in span
    with pytest.raises(NotPrime):
        sidh_setup(2, 4, 3, 3, 5, seed=1)


def test_sidh_keygen_contracts():
    params = sidh431()
    for side, seed in (("A", 3), ("B", 4)):
        kp = sidh_keygen(params, side, seed)
        ell, e, P, Q, Po, Qo = params.side(side)
        oell, oe = (params.lB, params.eB) if side == "A" else (params.lA, params.eA)
        K = scalar_mul(kp.m, P) + scalar_mul(kp.n, Q)
        assert kp.evaluate(K).is_infinity
        for R in (kp.public.P, kp.public.Q):
            assert scalar_mul(oell ** oe, R).is_infinity
            assert not scalar_mul(oell ** (oe - 1), R).is_infinity
        assert hasse_invariant_vanishes(kp.public.curve)
        deg = 1
        for step in kp.chain:
            deg *= step.degree
        assert deg == ell ** e


def test_sidh_shared_secret():
    params = sidh431()
    ss = set(build_supersingular_graph(431, 2).vertices)
    for seed in range(10):
        a = sidh_keygen(params, "A", 2 * seed)
        b = sidh_keygen(params, "B", 2 * seed + 1)
        s1 = sidh_shared(params, a, b.public)
        assert s1 == sidh_shared(params, b, a.public)
        assert s1 in ss


def test_sidh_encryption():
    params = sidh431()
    sk = sidh_keygen(params, "A", 9)
    msg = b"isogeny walks"
    seen = set()
    for seed in range(50):
        ct = sidh_encrypt(params, sk.public, msg, seed)
        assert sidh_decrypt(params, sk, ct) == msg
        seen.add(json.dumps(ct.to_json(), sort_keys=True))
    assert len(seen) > 1
    ct = sidh_encrypt(params, sk.public, msg, 123)
    flipped = SidhCiphertext(ct.ephemeral, bytes([ct.body[0] ^ 0x10]) + ct.body[1:])
    out = sidh_decrypt(params, sk, flipped)
    assert out[0] == msg[0] ^ 0x10 and out[1:] == msg[1:]
    with pytest.raises(MalformedCiphertext):
        sidh_decrypt(params, sk, SidhCiphertext(ct.ephemeral, "not bytes"))


def test_zk_honest_and_cheating():
    params = sidh431()
    kp = sidh_keygen(params, "A", 5)
    honest = zk_identify(params, kp, 10, seed=1)
    assert honest["accepted"] and len(honest["rounds"]) == 10
    accepted = sum(
        zk_identify(params, kp, 10, seed=s, cheat=True, stop_on_reject=True)["accepted"]
        for s in range(2000)
    )
    assert accepted / 2000 < 0.01


def test_zk_stop_on_reject_keeps_verdict():
    params = sidh431()
    kp = sidh_keygen(params, "A", 5)
    for s in range(20):
        full = zk_identify(params, kp, 4, seed=s, cheat=True)
        short = zk_identify(params, kp, 4, seed=s, cheat=True, stop_on_reject=True)
        assert full["accepted"] == short["accepted"]
        assert short["rounds"] == full["rounds"][: len(short["rounds"])]


# ---------------------------------------------------------------------------
# Schreier walk exchange


def test_schreier_toy_run():
    out = schreier_walk_dh(13, [2, 3, 5], seed=0, routes=([2, 3, 2, 5], [3, 3, 5, 2]))
    assert out["modulus"] == 53
    assert out["g_a"] == "g^8" and out["g_b"] == "g^12"
    assert out["shared_a"] == out["shared_b"] == "g^5"
    empty = schreier_walk_dh(13, [2, 3, 5], seed=0, routes=([], []))
    assert empty["g_a"] == empty["g_b"] == "g^1"
    with pytest.raises(BadDirectionSet):
        schreier_walk_dh(13, [2, 7], seed=0)


def test_walk_is_exponentiation_by_product():
    P, n = 53, 13
    g = pow(2, 4, 53)
    rng = SeededRng(77)
    for _ in range(100):
        route = [rng.choice([2, 3, 5]) for _ in range(rng.randbelow(8))]
        prod = 1
        for s in route:
            prod *= s
        assert walk_apply(g, route, P) == pow(g, prod, P)
