"""Command-line entry point.

Machine output (canonical JSON, or DOT for graphs) goes to stdout; prose and
timings go to stderr.  Exit codes: 0 success, 2 bad input or precondition,
3 internal contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .errors import ContractViolation, IsoglabError, PreconditionError

RANDOMIZED = {"ecdh", "rs", "sidh", "zk", "ecm", "pminus1", "irred", "mitm", "schreier"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="isoglab", description="Isogeny workbench")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("count", help="point count and Frobenius trace")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=1, help="extension degree of the base field")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--method", choices=["auto", "naive", "schoof", "bsgs"], default="auto")
    p.add_argument("--seed", type=int, help="required for --method bsgs")

    p = sub.add_parser("graph", help="supersingular ell-isogeny graph over F_{p^2}")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--format", choices=["dot", "json"], default="json")

    p = sub.add_parser("volcano", help="ordinary ell-isogeny volcano of a curve over F_p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--format", choices=["dot", "json"], default="json")

    p = sub.add_parser("spectral", help="spectrum and expansion of a supersingular or Schreier graph")
    p.add_argument("--p", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--schreier-n", type=int)
    p.add_argument("--schreier-s", type=str)

    p = sub.add_parser(
        "cgl",
        help="hash a message by a non-backtracking 2-isogeny walk",
        description="The first step reads two bits (values 0-2 choose among three edges, "
        "3 is skipped); later steps read one bit each. Edges are ordered by codomain label.",
    )
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--start", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--message", help="hex string, 4 bits per digit")
    g.add_argument("--bits", help="string of 0 and 1")

    p = sub.add_parser("ecdh", help="elliptic curve Diffie-Hellman on a prime-order curve")
    p.add_argument("--p", type=int, default=1019)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("rs", help="Rostovtsev-Stolbunov key exchange")
    p.add_argument("action", choices=["demo"])
    p.add_argument("--q", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--ells", default="3,5")
    p.add_argument("--route-len", type=int, default=4)
    p.add_argument("--seed", type=int, required=True)

    for name, text in (("sidh", "SIDH key exchange and encryption"), ("zk", "SIDH identification")):
        p = sub.add_parser(name, help=text)
        p.add_argument("action", choices=["demo"])
        p.add_argument("--lA", type=int, default=2)
        p.add_argument("--eA", type=int, default=4)
        p.add_argument("--lB", type=int, default=3)
        p.add_argument("--eB", type=int, default=3)
        p.add_argument("--f", type=int, default=1)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--json", action="store_true", help="accepted for compatibility; output is always JSON")
        if name == "sidh":
            p.add_argument("--message", default="isogeny", help="plaintext for the encryption round trip")
        else:
            p.add_argument("--rounds", type=int, default=10)
            p.add_argument("--cheat", action="store_true")

    p = sub.add_parser("ecm", help="Lenstra elliptic curve factoring")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--max-curves", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("pminus1", help="Pollard p-1 factoring")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("irred", help="Couveignes-Lercier irreducible polynomial")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--e", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("mitm", help="meet-in-the-middle path in a supersingular graph")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--start", required=True)
    p.add_argument("--end", required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("schreier", help="random-walk key exchange on an exponentiation Schreier graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--directions", required=True)
    p.add_argument("--route-len", type=int, default=4)
    p.add_argument("--seed", type=int, required=True)
    return ap


# ---------------------------------------------------------------------------
# handlers return (params, outputs) or raw text for DOT


def _count(ns):
    from .countkit import count, hasse_window
    from .curvekit import Curve
    from .fieldkit import gf
    from .rng import SeededRng

    if ns.method == "bsgs" and ns.seed is None:
        raise UsageError("--seed is required with --method bsgs")
    F = gf(ns.p, ns.k)
    E = Curve(F, F.parse(ns.a), F.parse(ns.b))
    rng = SeededRng(ns.seed if ns.seed is not None else 0)
    n = count(E, ns.method, rng)
    lo, hi = hasse_window(E.q)
    params = {"p": ns.p, "k": ns.k, "a": F.label(E.a), "b": F.label(E.b), "method": ns.method}
    return params, {"curve": str(E), "order": n, "trace": E.q + 1 - n, "hasse": [lo, hi]}


def _graph_out(G, fmt, params):
    from . import graphkit as gk

    if fmt == "dot":
        return gk.export(G, "dot")
    return params, json.loads(gk.export(G, "json"))


def _graph(ns):
    from . import graphkit as gk

    G = gk.build_supersingular_graph(ns.p, ns.ell)
    return _graph_out(G, ns.format, {"p": ns.p, "ell": ns.ell})


def _volcano(ns):
    from . import graphkit as gk
    from .curvekit import Curve
    from .fieldkit import gf

    E = Curve(gf(ns.p), ns.a, ns.b)
    G, rep = gk.build_volcano(E, ns.ell)
    if ns.format == "dot":
        return gk.export(G, "dot")
    out = json.loads(gk.export(G, "json"))
    out.update(
        crater=rep.crater,
        levels=rep.levels,
        height=rep.height,
        expected_height=rep.expected_height,
        legendre=rep.legendre,
        violations=gk.volcano_violations(G, rep),
    )
    return {"p": ns.p, "a": ns.a, "b": ns.b, "ell": ns.ell}, out


def _spectral(ns):
    from . import graphkit as gk

    if ns.schreier_n is not None:
        if ns.schreier_s is None:
            raise UsageError("--schreier-s is required with --schreier-n")
        G = gk.build_schreier_exponentiation_graph(ns.schreier_n, _ints(ns.schreier_s))
        params = {"schreier_n": ns.schreier_n, "schreier_s": _ints(ns.schreier_s)}
    elif ns.p is not None and ns.ell is not None:
        G = gk.build_supersingular_graph(ns.p, ns.ell)
        params = {"p": ns.p, "ell": ns.ell}
    else:
        raise UsageError("give --p and --ell, or --schreier-n and --schreier-s")
    rep = gk.spectral_analysis(G)
    out = {
        "vertices": G.n,
        "k": rep.k,
        "eigenvalues": [round(x, 9) + 0.0 for x in rep.eigenvalues],
        "epsilon": None if rep.epsilon is None else round(rep.epsilon, 9),
        "epsilon_one_sided": None if rep.epsilon_one_sided is None else round(rep.epsilon_one_sided, 9),
        "ramanujan": rep.ramanujan,
    }
    if 2 <= G.n <= 20:
        h = gk.edge_expansion(G)
        out["edge_expansion"] = f"{h.numerator}/{h.denominator}"
    return params, out


def _cgl(ns):
    from .protokit import cgl_hash

    if ns.message is not None:
        try:
            bits = "".join(f"{int(c, 16):04b}" for c in ns.message)
        except ValueError as exc:
            raise UsageError("--message must be hexadecimal") from exc
    else:
        bits = ns.bits
    j = cgl_hash(ns.p, ns.start, bits)
    return {"p": ns.p, "start": ns.start, "bits": bits}, {"hash": j}


def _ecdh(ns):
    from . import protokit as pk

    return {"p": ns.p}, pk.ecdh_run(pk.ecdh_default_params(ns.p), ns.seed).to_json()


def _rs(ns):
    from . import protokit as pk
    from .curvekit import Curve
    from .fieldkit import gf

    ells = _ints(ns.ells)
    if ns.q is None:
        params = pk.rs_default_params(tuple(ells))
    else:
        if ns.a is None or ns.b is None:
            raise UsageError("--a and --b are required with --q")
        params = pk.rs_params(Curve(gf(ns.q), ns.a, ns.b), ells)
    return {"ells": ells, "route_len": ns.route_len}, pk.rs_keyexchange(params, ns.seed, ns.route_len)


def _sidh_params(ns):
    from . import protokit as pk

    return pk.sidh_setup(ns.lA, ns.eA, ns.lB, ns.eB, ns.f, ns.seed)


def _sidh(ns):
    from . import protokit as pk
    from .rng import SeededRng

    params = _sidh_params(ns)
    rng = SeededRng(ns.seed)
    alice = pk.sidh_keygen(params, "A", rng.spawn(1).next_u64())
    bob = pk.sidh_keygen(params, "B", rng.spawn(2).next_u64())
    ja = pk.sidh_shared(params, alice, bob.public)
    jb = pk.sidh_shared(params, bob, alice.public)
    msg = ns.message.encode()
    ct = pk.sidh_encrypt(params, alice.public, msg, rng.spawn(3).next_u64())
    back = pk.sidh_decrypt(params, alice, ct)
    out = {
        "params": params.to_json(),
        "alice_public": alice.public.to_json(),
        "bob_public": bob.public.to_json(),
        "shared_alice": ja,
        "shared_bob": jb,
        "agree": ja == jb,
        "ciphertext": ct.to_json(),
        "decrypted": back.decode(errors="replace"),
        "roundtrip": back == msg,
    }
    return {"lA": ns.lA, "eA": ns.eA, "lB": ns.lB, "eB": ns.eB, "f": ns.f}, out


def _zk(ns):
    from . import protokit as pk
    from .rng import SeededRng

    params = _sidh_params(ns)
    rng = SeededRng(ns.seed)
    alice = pk.sidh_keygen(params, "A", rng.spawn(1).next_u64())
    tr = pk.zk_identify(params, alice, ns.rounds, rng.spawn(2).next_u64(), ns.cheat)
    tr["public"] = alice.public.to_json()
    return {"eA": ns.eA, "eB": ns.eB, "f": ns.f, "rounds": ns.rounds, "cheat": ns.cheat}, tr


def _ecm(ns):
    from .appkit import ecm

    r = ecm(ns.n, ns.bound, ns.seed, ns.max_curves)
    return {"n": ns.n, "bound": ns.bound, "max_curves": ns.max_curves}, r.to_json()


def _pminus1(ns):
    from .appkit import pollard_pminus1

    return {"n": ns.n, "bound": ns.bound}, pollard_pminus1(ns.n, ns.bound, ns.seed).to_json()


def _irred(ns):
    from .appkit import couveignes_lercier

    f = couveignes_lercier(ns.q, ns.ell, ns.e, ns.seed)
    return {"q": ns.q, "ell": ns.ell, "e": ns.e}, {"degree": f.degree, "coefficients": list(f.coeffs)}


def _mitm(ns):
    from .graphkit import mitm_path
    from .protokit import normalise_j
    from .rng import SeededRng

    s, t = normalise_j(ns.p, ns.start), normalise_j(ns.p, ns.end)
    path = mitm_path(ns.p, ns.ell, s, t, SeededRng(ns.seed))
    return {"p": ns.p, "ell": ns.ell, "start": s, "end": t}, {"path": path, "length": len(path)}


def _schreier(ns):
    from .graphkit import build_schreier_exponentiation_graph
    from .protokit import schreier_walk_dh

    D = _ints(ns.directions)
    tr = schreier_walk_dh(ns.n, D, ns.seed, ns.route_len)
    G = build_schreier_exponentiation_graph(ns.n, D)
    tr["graph"] = {"vertices": G.n, "degree": G.regular_degree(), "components": len(G.components())}
    return {"n": ns.n, "directions": D, "route_len": ns.route_len}, tr


HANDLERS = {
    "count": _count,
    "graph": _graph,
    "volcano": _volcano,
    "spectral": _spectral,
    "cgl": _cgl,
    "ecdh": _ecdh,
    "rs": _rs,
    "sidh": _sidh,
    "zk": _zk,
    "ecm": _ecm,
    "pminus1": _pminus1,
    "irred": _irred,
    "mitm": _mitm,
    "schreier": _schreier,
}


def dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        t0 = time.perf_counter()
        res = HANDLERS[ns.command](ns)
    except UsageError as exc:
        print(f"isoglab: usage error: {exc}", file=stderr)
        return 2
    except PreconditionError as exc:
        print(f"isoglab: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    except ContractViolation as exc:
        print(f"isoglab: internal error: {type(exc).__name__}: {exc}", file=stderr)
        return 3
    except (IsoglabError, ValueError) as exc:
        print(f"isoglab: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    except Exception as exc:  # anything else is a bug
        print(f"isoglab: internal error: {type(exc).__name__}: {exc}", file=stderr)
        return 3
    elapsed = (time.perf_counter() - t0) * 1000
    if isinstance(res, str):
        stdout.write(res)
    else:
        params, outputs = res
        report = {"command": ns.command, "params": params, "outputs": outputs}
        if ns.command in RANDOMIZED or getattr(ns, "seed", None) is not None:
            report["seed"] = ns.seed
        stdout.write(dump(report) + "\n")
    print(f"isoglab {ns.command}: done in {elapsed:.1f} ms", file=stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
