"""Key exchanges, hashing, identification and encryption on curves and isogeny graphs."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dc_field

from sympy import factorint, isprime
from sympy.ntheory.modular import crt

from .countkit import _SymbolicRing, count, fundamental_discriminant
from .curvekit import Curve, CurvePoint, j_invariant, random_point, scalar_mul
from .errors import (
    BadDirectionSet,
    BadGenerator,
    BadInput,
    BasisSamplingFailure,
    DegenerateKernel,
    EigenvalueNotFound,
    MalformedCiphertext,
    NotInSubgroup,
    NotPrime,
    NotSupersingular,
    PreconditionError,
    SingularCurve,
)
from .fieldkit import Poly, factor_squarefree, gf, kronecker
from .graphkit import build_supersingular_graph
from .isogenykit import isogeny_from_generator, rational_kernel_polys, Isogeny
from .rng import SeededRng


def point_json(P: CurvePoint):
    if P.is_infinity:
        return "O"
    F = P.curve.field
    return [F.label(P.x), F.label(P.y)]


def curve_json(E: Curve) -> dict:
    F = E.field
    return {"a": F.label(E.a), "b": F.label(E.b), "j": F.label(j_invariant(E))}


# ---------------------------------------------------------------------------
# ECDH and discrete logarithms


@dataclass
class EcdhParams:
    curve: Curve
    P: CurvePoint
    n: int


@dataclass
class EcdhTranscript:
    params: EcdhParams
    a: int
    b: int
    A: CurvePoint
    B: CurvePoint
    shared_alice: CurvePoint
    shared_bob: CurvePoint

    def to_json(self) -> dict:
        E = self.params.curve
        return {
            "curve": curve_json(E),
            "p": E.field.characteristic,
            "generator": point_json(self.params.P),
            "order": self.params.n,
            "a": self.a,
            "b": self.b,
            "A": point_json(self.A),
            "B": point_json(self.B),
            "shared": point_json(self.shared_alice),
            "agree": self.shared_alice == self.shared_bob,
        }


def ecdh_default_params(p: int) -> EcdhParams:
    """First curve y^2 = x^3 + a x + b over F_p (lexicographic a, b) of prime order."""
    F = gf(p)
    for a in range(1, p):
        for b in range(1, p):
            try:
                E = Curve(F, a, b)
            except SingularCurve:
                continue
            n = count(E)
            if not isprime(n):
                continue
            for x in range(p):
                y = F.sqrt(E.rhs(x))
                if y is not None and y != 0:
                    return EcdhParams(E, CurvePoint(E, x, min(y, p - y)), n)
    raise PreconditionError(f"no prime-order curve found over F_{p}")


def ecdh_run(params: EcdhParams, seed: int) -> EcdhTranscript:
    if not isprime(params.n) or not scalar_mul(params.n, params.P).is_infinity or params.P.is_infinity:
        raise BadGenerator("generator must have the stated prime order")
    rng = SeededRng(seed)
    a = rng.randint(1, params.n - 1)
    b = rng.randint(1, params.n - 1)
    A = scalar_mul(a, params.P)
    B = scalar_mul(b, params.P)
    return EcdhTranscript(params, a, b, A, B, scalar_mul(a, B), scalar_mul(b, A))


def _bsgs(G: CurvePoint, H: CurvePoint, r: int) -> int:
    """d in [0, r) with [d]G = H, for G of order r."""
    m = int(r ** 0.5) + 1
    baby = {}
    R = G.curve.infinity
    for i in range(m):
        baby.setdefault(R, i)
        R = R + G
    giant = -scalar_mul(m, G)
    T = H
    for k in range(m + 1):
        if T in baby:
            return (k * m + baby[T]) % r
        T = T + giant
    raise NotInSubgroup("point is not in the subgroup")


def dlp_solve(P: CurvePoint, A: CurvePoint, n: int) -> int:
    """log_P(A) by Pohlig-Hellman over the factorisation of n, BSGS in each prime."""
    if n >= 1 << 48:
        raise PreconditionError("group order must be below 2^48")
    if A.curve != P.curve or not scalar_mul(n, A).is_infinity:
        raise NotInSubgroup("A is not in <P>")
    residues, moduli = [], []
    for r, e in sorted(factorint(n).items()):
        re = r ** e
        P0 = scalar_mul(n // re, P)
        A0 = scalar_mul(n // re, A)
        gamma = scalar_mul(r ** (e - 1), P0)
        x = 0
        for i in range(e):
            h = scalar_mul(r ** (e - 1 - i), A0 - scalar_mul(x, P0))
            x += _bsgs(gamma, h, r) * r ** i
        residues.append(x)
        moduli.append(re)
    x = int(crt(moduli, residues)[0]) % n if moduli else 0
    if scalar_mul(x, P) != A:
        raise NotInSubgroup("A is not in <P>")
    return x


# ---------------------------------------------------------------------------
# CGL hash


def _neighbour_lists(G) -> dict:
    out = {}
    for i, v in enumerate(G.vertices):
        lst = []
        for j, m in enumerate(G.adjacency[i]):
            lst += [G.vertices[j]] * m
        out[v] = sorted(lst)
    return out


def normalise_j(p: int, text: str) -> str:
    F2 = gf(p, 2)
    return F2.label(F2.parse(text))


def cgl_hash(p: int, j0: str, message: str) -> str:
    """Non-backtracking walk in the 2-isogeny graph driven by the bits of ``message``.

    The first step takes two bits (0, 1, 2 pick among the three edges; 3 is
    discarded and two more bits are read); every later step takes one bit
    choosing between the two edges other than the arrival edge.  Edges are
    ordered by the codomain label, smaller first.
    """
    if any(c not in "01" for c in message):
        raise BadInput("message must be a bit string")
    G = build_supersingular_graph(p, 2)
    j0 = normalise_j(p, j0)
    if j0 not in G.vertices:
        raise NotSupersingular(f"{j0} is not a supersingular invariant mod {p}")
    nbrs = _neighbour_lists(G)
    bits = list(message)
    cur, prev = j0, None
    while bits:
        if prev is None:
            if len(bits) == 1:
                choice = int(bits.pop(0))
            else:
                choice = int(bits.pop(0)) * 2 + int(bits.pop(0))
                if choice == 3:
                    continue
            options = nbrs[cur]
        else:
            options = list(nbrs[cur])
            options.remove(prev)
            choice = int(bits.pop(0))
        prev, cur = cur, options[choice]
    return cur


# ---------------------------------------------------------------------------
# Rostovtsev-Stolbunov


@dataclass
class RsParams:
    curve: Curve
    trace: int
    disc: int
    ells: list
    lambdas: dict

    def to_json(self) -> dict:
        return {
            "curve": curve_json(self.curve),
            "q": self.curve.q,
            "trace": self.trace,
            "disc": self.disc,
            "ells": self.ells,
            "lambdas": {str(k): v for k, v in sorted(self.lambdas.items())},
        }


def rs_params(E: Curve, ells) -> RsParams:
    """Elkies data for E: the smaller root of X^2 - t X + q mod each ell is the positive direction."""
    q = E.q
    t = q + 1 - count(E)
    D = t * t - 4 * q
    if t % E.field.characteristic == 0:
        raise PreconditionError("the curve must be ordinary")
    lambdas = {}
    for ell in sorted(ells):
        if ell > 7 or not isprime(ell) or ell == 2:
            raise PreconditionError("ell must be an odd prime <= 7")
        roots = [x for x in range(ell) if (x * x - t * x + q) % ell == 0]
        if kronecker(D, ell) != 1 or len(roots) != 2:
            raise EigenvalueNotFound(f"{ell} is not an Elkies prime for this curve")
        lambdas[ell] = roots[0]
    return RsParams(E, t, D, sorted(ells), lambdas)


def rs_default_params(ells=(3, 5)) -> RsParams:
    """Smallest prime q > 100 and curve over F_q for which every ell is Elkies, prime to f_pi,
    and the positive step for the first ell has an orbit longer than 2."""
    from sympy import nextprime

    q = 100
    while True:
        q = nextprime(q)
        F = gf(q)
        for a in range(1, q):
            for b in range(1, q):
                try:
                    E = Curve(F, a, b)
                except SingularCurve:
                    continue
                t = q + 1 - count(E)
                D = t * t - 4 * q
                if t % q == 0:
                    continue
                _, f = fundamental_discriminant(D)
                if any(kronecker(D, l) != 1 or f % l == 0 for l in ells):
                    continue
                params = rs_params(E, ells)
                C, seen = E, set()
                for _ in range(3):
                    seen.add(F.label(j_invariant(C)))
                    C = rs_step(params, C, ells[0])
                if len(seen) == 3:
                    return params


def eigen_kernel(params: RsParams, C: Curve, ell: int) -> Poly:
    """Kernel polynomial of the rational ell-isogeny from C on which Frobenius acts as lambda."""
    lam = params.lambdas[ell]
    q = C.q
    for D in rational_kernel_polys(C, ell):
        g = factor_squarefree(D)[0]
        R = _SymbolicRing(C, g)
        P = R.generic_point()
        if R.equal(R.frobenius(P, q), R.mul(lam, P)):
            return D
    raise EigenvalueNotFound(f"no kernel with eigenvalue {lam} for ell={ell}")


def rs_step(params: RsParams, C: Curve, ell: int) -> Curve:
    return Isogeny(C, eigen_kernel(params, C, ell)).codomain


def rs_apply(params: RsParams, C: Curve, route) -> Curve:
    for ell in route:
        C = rs_step(params, C, ell)
    return C


def rs_keyexchange(params: RsParams, seed: int, route_len: int = 4) -> dict:
    rng = SeededRng(seed)
    F = params.curve.field
    route_a = [rng.choice(params.ells) for _ in range(route_len)]
    route_b = [rng.choice(params.ells) for _ in range(route_len)]
    EA = rs_apply(params, params.curve, route_a)
    EB = rs_apply(params, params.curve, route_b)
    sa = rs_apply(params, EB, route_a)
    sb = rs_apply(params, EA, route_b)
    lab = lambda E: F.label(j_invariant(E))
    return {
        "params": params.to_json(),
        "route_a": route_a,
        "route_b": route_b,
        "public_a": lab(EA),
        "public_b": lab(EB),
        "shared_a": lab(sa),
        "shared_b": lab(sb),
        "agree": lab(sa) == lab(sb),
    }


# ---------------------------------------------------------------------------
# SIDH


@dataclass
class SidhParams:
    lA: int
    eA: int
    lB: int
    eB: int
    f: int
    p: int
    E0: Curve
    PA: CurvePoint
    QA: CurvePoint
    PB: CurvePoint
    QB: CurvePoint

    def side(self, s: str):
        """(ell, e, P, Q) for side s and (P, Q) of the other side."""
        if s == "A":
            return self.lA, self.eA, self.PA, self.QA, self.PB, self.QB
        if s == "B":
            return self.lB, self.eB, self.PB, self.QB, self.PA, self.QA
        raise PreconditionError("side must be 'A' or 'B'")

    def to_json(self) -> dict:
        return {
            "lA": self.lA, "eA": self.eA, "lB": self.lB, "eB": self.eB, "f": self.f, "p": self.p,
            "E0": curve_json(self.E0),
            "PA": point_json(self.PA), "QA": point_json(self.QA),
            "PB": point_json(self.PB), "QB": point_json(self.QB),
        }


@dataclass
class SidhPublic:
    curve: Curve
    P: CurvePoint
    Q: CurvePoint

    def to_json(self) -> dict:
        return {"curve": curve_json(self.curve), "P": point_json(self.P), "Q": point_json(self.Q)}


@dataclass
class SidhKeyPair:
    side: str
    m: int
    n: int
    public: SidhPublic
    chain: list = dc_field(default_factory=list, repr=False)

    def evaluate(self, P: CurvePoint) -> CurvePoint:
        for step in self.chain:
            P = step.evaluate(P)
        return P


def _exact_order(P: CurvePoint, ell: int, e: int) -> bool:
    return not scalar_mul(ell ** (e - 1), P).is_infinity and scalar_mul(ell ** e, P).is_infinity


def _torsion_basis(E: Curve, cof: int, ell: int, e: int, rng: SeededRng, max_draws: int):
    def draw():
        for _ in range(max_draws):
            P = scalar_mul(cof, random_point(E, rng))
            if _exact_order(P, ell, e):
                return P
        raise BasisSamplingFailure(f"no point of order {ell}^{e} after {max_draws} draws")

    P = draw()
    small = scalar_mul(ell ** (e - 1), P)
    sub = {scalar_mul(k, small) for k in range(ell)}
    for _ in range(max_draws):
        Q = draw()
        if scalar_mul(ell ** (e - 1), Q) not in sub:
            return P, Q
    raise BasisSamplingFailure("no independent second basis point found")


def sidh_setup(lA: int, eA: int, lB: int, eB: int, f: int, seed: int, max_draws: int = 10 ** 6) -> SidhParams:
    p = lA ** eA * lB ** eB * f - 1
    if not isprime(p):
        raise NotPrime(f"{lA}^{eA} * {lB}^{eB} * {f} - 1 = {p} is not prime")
    if p % 4 != 3 or p > 1 << 20:
        raise PreconditionError("p must be 3 mod 4 and at most 2^20")
    F2 = gf(p, 2)
    E0 = Curve(F2, 1, 0)
    # y^2 = x^3 + x has trace 0 over F_p, so (p+1)^2 points over F_{p^2}
    rng = SeededRng(seed)
    N = p + 1
    PA, QA = _torsion_basis(E0, N // lA ** eA, lA, eA, rng, max_draws)
    PB, QB = _torsion_basis(E0, N // lB ** eB, lB, eB, rng, max_draws)
    return SidhParams(lA, eA, lB, eB, f, p, E0, PA, QA, PB, QB)


def _walk(E: Curve, K: CurvePoint, ell: int, e: int, carry):
    """Chain of e degree-ell steps with kernel <K>; returns (codomain, steps, images of carry)."""
    steps = []
    for i in range(e):
        kern = scalar_mul(ell ** (e - 1 - i), K)
        phi = isogeny_from_generator(E, kern, ell)
        steps.append(phi)
        if i < e - 1:
            K = phi.evaluate(K)
        carry = [phi.evaluate(P) for P in carry]
        E = phi.codomain
    return E, steps, carry


def _sample_secret(ell: int, e: int, rng: SeededRng):
    while True:
        m = rng.randbelow(ell ** e)
        n = rng.randbelow(ell ** e)
        if m % ell or n % ell:
            return m, n


def sidh_keygen(params: SidhParams, side: str, seed: int) -> SidhKeyPair:
    ell, e, P, Q, Po, Qo = params.side(side)
    m, n = _sample_secret(ell, e, SeededRng(seed))
    K = scalar_mul(m, P) + scalar_mul(n, Q)
    E, steps, (P1, Q1) = _walk(params.E0, K, ell, e, [Po, Qo])
    return SidhKeyPair(side, m, n, SidhPublic(E, P1, Q1), steps)


def sidh_shared(params: SidhParams, keypair: SidhKeyPair, other: SidhPublic) -> str:
    ell, e = params.side(keypair.side)[:2]
    K = scalar_mul(keypair.m, other.P) + scalar_mul(keypair.n, other.Q)
    if not _exact_order(K, ell, e):
        raise DegenerateKernel(f"kernel generator does not have order {ell}^{e}")
    E, _, _ = _walk(other.curve, K, ell, e, [])
    return E.field.label(j_invariant(E))


MASK_LIMIT = 256


def mask_bytes(j_label: str, n: int) -> bytes:
    """Public byte expansion of a j-label (SHAKE-256)."""
    return hashlib.shake_256(b"isoglab-mask:" + j_label.encode()).digest(n)


@dataclass
class SidhCiphertext:
    ephemeral: SidhPublic
    body: bytes

    def to_json(self) -> dict:
        return {"ephemeral": self.ephemeral.to_json(), "body": self.body.hex()}


def sidh_encrypt(params: SidhParams, pk: SidhPublic, message: bytes, seed: int) -> SidhCiphertext:
    if len(message) > MASK_LIMIT:
        raise BadInput(f"message longer than {MASK_LIMIT} bytes")
    eph = sidh_keygen(params, "B", seed)
    s = sidh_shared(params, eph, pk)
    body = bytes(x ^ y for x, y in zip(message, mask_bytes(s, len(message))))
    return SidhCiphertext(eph.public, body)


def sidh_decrypt(params: SidhParams, sk: SidhKeyPair, ct: SidhCiphertext) -> bytes:
    pub = ct.ephemeral
    try:
        on_curve = all(P.curve == pub.curve for P in (pub.P, pub.Q))
    except AttributeError:
        on_curve = False
    if not on_curve or not isinstance(ct.body, (bytes, bytearray)):
        raise MalformedCiphertext("ciphertext points are not on its curve")
    try:
        s = sidh_shared(params, sk, pub)
    except DegenerateKernel as exc:
        raise MalformedCiphertext(str(exc)) from exc
    return bytes(x ^ y for x, y in zip(ct.body, mask_bytes(s, len(ct.body))))


# ---------------------------------------------------------------------------
# zero-knowledge identification


def _j(E: Curve) -> str:
    return E.field.label(j_invariant(E))


def _kernel_lands(E: Curve, K: CurvePoint, ell: int, e: int, target: str) -> bool:
    if K is None or K.curve != E or not _exact_order(K, ell, e):
        return False
    return _j(_walk(E, K, ell, e, [])[0]) == target


def zk_identify(
    params: SidhParams,
    keypair: SidhKeyPair,
    rounds: int,
    seed: int,
    cheat: bool = False,
    stop_on_reject: bool = False,
) -> dict:
    """Prover holds Alice's secret isogeny; with ``cheat`` it only knows the public key.

    The cheater guesses the challenge: for 0 it commits honestly from the
    public images of Bob's basis, for 1 it commits to E/<B>/<C> for a
    random C.  A wrong guess leaves it with nothing to answer.
    With ``stop_on_reject`` the verifier ends the session at the first
    failed round; the verdict is unchanged.
    """
    if rounds < 1:
        raise PreconditionError("rounds must be at least 1")
    if keypair.side != "A":
        raise PreconditionError("the prover holds an A-side key")
    lA, eA, PA, QA, PB, QB = params.side("A")
    lB, eB = params.lB, params.eB
    prover = SeededRng(seed).spawn(1)
    verifier = SeededRng(seed).spawn(2)
    EA = keypair.public.curve
    log = []
    for _ in range(rounds):
        mb, nb = _sample_secret(lB, eB, prover)
        B = scalar_mul(mb, PB) + scalar_mul(nb, QB)
        E1, beta, _ = _walk(params.E0, B, lB, eB, [])
        if cheat:
            guess = prover.getrandbits(1)
            if guess == 0:
                aB = scalar_mul(mb, keypair.public.P) + scalar_mul(nb, keypair.public.Q)
                E2 = _walk(EA, aB, lB, eB, [])[0]
                answers = {0: (B, aB)}
            else:
                C = None
                while C is None or not _exact_order(C, lA, eA):
                    m, n = _sample_secret(lA, eA, prover)
                    C = _push(beta, scalar_mul(m, PA) + scalar_mul(n, QA))
                E2 = _walk(E1, C, lA, eA, [])[0]
                answers = {1: C}
        else:
            aB = keypair.evaluate(B)
            E2 = _walk(EA, aB, lB, eB, [])[0]
            A = scalar_mul(keypair.m, PA) + scalar_mul(keypair.n, QA)
            answers = {0: (B, aB), 1: _push(beta, A)}
        b = verifier.getrandbits(1)
        resp = answers.get(b)
        j1, j2 = _j(E1), _j(E2)
        if resp is None:
            ok = False
        elif b == 0:
            ok = _kernel_lands(params.E0, resp[0], lB, eB, j1) and _kernel_lands(EA, resp[1], lB, eB, j2)
        else:
            ok = _kernel_lands(E1, resp, lA, eA, j2)
        log.append({
            "commitment": [j1, j2],
            "challenge": b,
            "response": None if resp is None else (
                [point_json(resp[0]), point_json(resp[1])] if b == 0 else point_json(resp)
            ),
            "verdict": ok,
        })
        if stop_on_reject and not ok:
            break
    return {"rounds": log, "accepted": all(r["verdict"] for r in log)}


def _push(steps, P):
    for s in steps:
        P = s.evaluate(P)
    return P


# ---------------------------------------------------------------------------
# Schreier-graph walk exchange


def _cyclic_group(n: int):
    """(P, g): smallest prime P = 1 mod n and the image of the smallest primitive root."""
    from sympy import primitive_root

    k = 1
    while not isprime(k * n + 1):
        k += 1
    P = k * n + 1
    return P, pow(primitive_root(P), k, P)


def walk_apply(h: int, route, P: int) -> int:
    """Each step raises the current element to the power sigma."""
    for s in route:
        h = pow(h, s, P)
    return h


def schreier_walk_dh(n: int, D, seed: int, route_len: int = 4, routes=None) -> dict:
    D = sorted({d % n for d in D})
    from math import gcd

    for d in D:
        if gcd(d, n) != 1:
            raise BadDirectionSet(f"{d} is not a unit modulo {n}")
        if pow(d, -1, n) in D:
            raise BadDirectionSet(f"{d} and its inverse are both in the direction set")
    P, g = _cyclic_group(n)
    if routes is None:
        rng = SeededRng(seed)
        routes = ([rng.choice(D) for _ in range(route_len)], [rng.choice(D) for _ in range(route_len)])
    ra, rb = (list(r) for r in routes)
    if any(s not in D for s in ra + rb):
        raise BadDirectionSet("routes must use directions from D")
    logs = {pow(g, x, P): x for x in range(n)}
    gA, gB = walk_apply(g, ra, P), walk_apply(g, rb, P)
    sa, sb = walk_apply(gB, ra, P), walk_apply(gA, rb, P)
    lab = lambda h: f"g^{logs[h]}"
    return {
        "n": n,
        "directions": D,
        "modulus": P,
        "route_a": ra,
        "route_b": rb,
        "g_a": lab(gA),
        "g_b": lab(gB),
        "shared_a": lab(sa),
        "shared_b": lab(sb),
        "agree": sa == sb,
    }
