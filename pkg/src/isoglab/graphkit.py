"""Isogeny graphs, Schreier graphs, spectra, expansion and volcanoes.

Adjacency matrices count kernels: row i, column j holds the number of
degree-ell kernels of the model at vertex i whose codomain has invariant j.
Rows therefore sum to the out-degree.  Away from j = 0 and j = 1728 this
matrix is symmetric; at those two vertices extra automorphisms identify
kernels, and the matrix satisfies B[i][j] w[j] = B[j][i] w[i] with
w = 3 at j = 0, w = 2 at j = 1728 and w = 1 elsewhere.  Spectra are taken
of the similar symmetric matrix W^(-1/2) B W^(1/2).
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd

import numpy as np

from .countkit import conductor_valuation, count, fundamental_discriminant, FrobeniusData
from .curvekit import Curve, curve_from_j, j_invariant
from .errors import (
    BadActionElement,
    ContractViolation,
    NoPath,
    PreconditionError,
    TooLargeForExact,
    UnsupportedPrime,
)
from .fieldkit import Poly, enumerate_roots, gf, kronecker
from .isogenykit import enumerate_ell_isogenies
from .rng import SeededRng


@dataclass
class Graph:
    """Vertices (string labels) plus an integer adjacency matrix."""

    vertices: list
    adjacency: list

    @property
    def n(self) -> int:
        return len(self.vertices)

    def degrees(self) -> list:
        return [sum(row) for row in self.adjacency]

    def regular_degree(self):
        d = set(self.degrees())
        return d.pop() if len(d) == 1 else None

    def is_symmetric(self) -> bool:
        A = self.adjacency
        return all(A[i][j] == A[j][i] for i in range(self.n) for j in range(i))

    def neighbours(self, i: int) -> list:
        return [j for j, m in enumerate(self.adjacency[i]) if m]

    def index(self, label: str) -> int:
        return self.vertices.index(label)

    def components(self) -> list:
        seen, out = set(), []
        for s in range(self.n):
            if s in seen:
                continue
            comp, todo = [], [s]
            seen.add(s)
            while todo:
                i = todo.pop()
                comp.append(i)
                for j in self.neighbours(i):
                    if j not in seen:
                        seen.add(j)
                        todo.append(j)
            out.append(sorted(comp))
        return out


@dataclass
class IsogenyGraph(Graph):
    ell: int = 2
    provenance: dict = dc_field(default_factory=dict)
    models: list = dc_field(default_factory=list)


@dataclass
class SchreierGraph(Graph):
    n_group: int = 0
    actions: list = dc_field(default_factory=list)


@dataclass
class SpectralReport:
    eigenvalues: list
    k: object
    epsilon: object
    epsilon_one_sided: object
    ramanujan: bool

    @property
    def second(self) -> float:
        """max(|lambda_2|, |lambda_n|)."""
        ev = self.eigenvalues
        if len(ev) < 2:
            return 0.0
        return max(abs(ev[1]), abs(ev[-1]))


@dataclass
class VolcanoReport:
    crater: list
    levels: dict
    height: int
    expected_height: int
    legendre: int


# ---------------------------------------------------------------------------
# supersingular graphs

# class-number-one CM invariants, used to seed the breadth-first search
_CM_SEEDS = [
    (-4, 1728),
    (-3, 0),
    (-7, -3375),
    (-8, 8000),
    (-11, -32768),
    (-19, -884736),
    (-43, -884736000),
    (-67, -147197952000),
    (-163, -262537412640768000),
]


def expected_supersingular_count(p: int) -> int:
    return p // 12 + {1: 0, 5: 1, 7: 1, 11: 2}[p % 12]


def _seed_curve(p: int) -> Curve:
    """A curve over F_p with supersingular reduction (trace 0, so -2p over F_{p^2})."""
    F = gf(p)
    for D, j in _CM_SEEDS:
        if kronecker(D, p) != 1:
            return curve_from_j(F, j % p)
    raise UnsupportedPrime(f"no class-number-one seed is supersingular at {p}")


def _ss_graph_prime_check(p: int, ell: int):
    from sympy import isprime

    if not isprime(p) or p < 5 or p > 2000:
        raise UnsupportedPrime("p must be a prime with 5 <= p <= 2000")
    if ell not in (2, 3, 5, 7) or ell == p:
        raise PreconditionError("ell must be one of 2, 3, 5, 7 and differ from p")


def supersingular_models(p: int) -> dict:
    """{j-label: model over F_{p^2}} for every supersingular j, all of trace -2p.

    Found by breadth-first search over 2-isogenies from a CM seed; Velu
    codomains keep the trace, so every model has all ell-torsion rational.
    """
    return dict(_supersingular_models(p))


@lru_cache(maxsize=64)
def _supersingular_models(p: int):
    F2 = gf(p, 2)
    seed = _seed_curve(p).base_change(F2)
    models = {F2.label(j_invariant(seed)): seed}
    todo = deque([seed])
    while todo:
        E = todo.popleft()
        for phi in enumerate_ell_isogenies(E, 2):
            C = phi.codomain
            lab = F2.label(j_invariant(C))
            if lab not in models:
                models[lab] = C
                todo.append(C)
    return tuple(sorted(models.items()))


def build_supersingular_graph(p: int, ell: int) -> IsogenyGraph:
    _ss_graph_prime_check(p, ell)
    models = supersingular_models(p)
    labels = sorted(models)
    if len(labels) != expected_supersingular_count(p):
        raise ContractViolation(f"found {len(labels)} supersingular invariants at p={p}")
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    A = [[0] * n for _ in range(n)]
    F2 = gf(p, 2)
    for lab in labels:
        E = models[lab]
        isos = enumerate_ell_isogenies(E, ell)
        if len(isos) != ell + 1:
            raise ContractViolation(f"{lab} has {len(isos)} rational {ell}-isogenies")
        for phi in isos:
            A[index[lab]][index[F2.label(j_invariant(phi.codomain))]] += 1
    return IsogenyGraph(
        labels,
        A,
        ell=ell,
        provenance={"kind": "supersingular", "p": p},
        models=[models[lab] for lab in labels],
    )


def hasse_invariant_vanishes(E: Curve) -> bool:
    """Coefficient of x^(p-1) in (x^3 + a x + b)^((p-1)/2) is zero."""
    p = E.field.characteristic
    g = E.rhs_poly ** ((p - 1) // 2)
    return E.field.is_zero(g[p - 1])


def supersingular_j_scan(p: int) -> list:
    """Oracle: every j in F_{p^2} tested one by one (small p only)."""
    if p > 60:
        raise TooLargeForExact("the exhaustive scan is limited to p <= 60")
    F2 = gf(p, 2)
    return sorted(F2.label(j) for j in F2.elements() if hasse_invariant_vanishes(curve_from_j(F2, j)))


def supersingular_j_legendre(p: int) -> list:
    """Oracle: j(lambda) over the roots of sum_i C(m, i)^2 lambda^i, m = (p-1)/2."""
    F2 = gf(p, 2)
    m = (p - 1) // 2
    Hp = Poly(F2, [F2.from_int(comb(m, i) ** 2) for i in range(m + 1)])
    out = set()
    for lam in enumerate_roots(Hp):
        l2 = F2.sub(F2.mul(lam, lam), lam)
        num = F2.smul(256, F2.pow(F2.add(l2, F2.one), 3))
        out.add(F2.label(F2.div(num, F2.mul(l2, l2))))
    return sorted(out)


# ---------------------------------------------------------------------------
# ordinary volcanoes


def build_volcano(E: Curve, ell: int, max_ext: int = 6):
    """Component of j(E) in the rational ell-isogeny graph, with levels."""
    F = E.field
    data = FrobeniusData.from_order(E.q, count(E))
    if data.trace % F.characteristic == 0:
        raise PreconditionError("volcanoes are built for ordinary curves")
    models = {F.label(j_invariant(E)): E}
    edges = {}
    todo = deque([E])
    while todo:
        C = todo.popleft()
        lab = F.label(j_invariant(C))
        out = edges.setdefault(lab, {})
        for phi in enumerate_ell_isogenies(C, ell, max_ext):
            D = phi.codomain
            dl = F.label(j_invariant(D))
            out[dl] = out.get(dl, 0) + 1
            if dl not in models:
                models[dl] = D
                todo.append(D)
    labels = sorted(models)
    idx = {lab: i for i, lab in enumerate(labels)}
    A = [[0] * len(labels) for _ in labels]
    for lab, out in edges.items():
        for dl, m in out.items():
            A[idx[lab]][idx[dl]] = m
    G = IsogenyGraph(
        labels,
        A,
        ell=ell,
        provenance={"kind": "ordinary", "q": E.q, "order": data.order},
        models=[models[lab] for lab in labels],
    )
    # distance from the floor (degree-one vertices) gives the level
    deg = G.degrees()
    floor = [i for i, d in enumerate(deg) if d == 1]
    dist = {}
    if floor and len(floor) < len(labels):
        todo = deque(floor)
        for i in floor:
            dist[i] = 0
        while todo:
            i = todo.popleft()
            for j in G.neighbours(i):
                if j not in dist:
                    dist[j] = dist[i] + 1
                    todo.append(j)
        height = max(dist.values())
    else:
        dist = {i: 0 for i in range(len(labels))}
        height = 0
    levels = {labels[i]: height - d for i, d in dist.items()}
    crater_idx = [i for i in range(len(labels)) if levels[labels[i]] == 0]
    d_K, _ = fundamental_discriminant(data.disc)
    report = VolcanoReport(
        crater=_cycle_order(G, crater_idx),
        levels=levels,
        height=height,
        expected_height=conductor_valuation(data, ell),
        legendre=kronecker(d_K, ell),
    )
    return G, report


def _cycle_order(G: Graph, idx: list) -> list:
    if not idx:
        return []
    rest = set(idx)
    cur = min(idx)
    order = [cur]
    rest.discard(cur)
    while rest:
        nxt = [j for j in G.neighbours(cur) if j in rest]
        cur = min(nxt) if nxt else min(rest)
        order.append(cur)
        rest.discard(cur)
    return [G.vertices[i] for i in order]


def volcano_violations(G: IsogenyGraph, report: VolcanoReport) -> list:
    """Structural checks: height, ascending edges, crater degree by the Legendre symbol."""
    bad = []
    if report.height != report.expected_height:
        bad.append(f"height {report.height} != v_ell(f_pi) = {report.expected_height}")
    lv = report.levels
    crater = set(report.crater)
    for i, lab in enumerate(G.vertices):
        row = G.adjacency[i]
        if lab in crater:
            horiz = sum(m for j, m in enumerate(row) if G.vertices[j] in crater)
            if horiz != 1 + report.legendre:
                bad.append(f"crater vertex {lab} has {horiz} horizontal edges")
        else:
            up = sum(m for j, m in enumerate(row) if lv[G.vertices[j]] == lv[lab] - 1)
            if up != 1:
                bad.append(f"{lab} has {up} ascending edges")
    return bad


# ---------------------------------------------------------------------------
# Schreier graphs


def build_schreier_exponentiation_graph(n: int, S) -> SchreierGraph:
    """Graph on the generators g^x of a cyclic group of order n, edges x -> s x."""
    acts = set()
    for s in S:
        s %= n
        if gcd(s, n) != 1:
            raise BadActionElement(f"{s} is not a unit modulo {n}")
        acts.add(s)
        acts.add(pow(s, -1, n))
    acts = sorted(acts)
    units = [x for x in range(1, n) if gcd(x, n) == 1] if n > 1 else [0]
    idx = {x: i for i, x in enumerate(units)}
    A = [[0] * len(units) for _ in units]
    for x in units:
        for s in acts:
            A[idx[x]][idx[x * s % n]] += 1
    return SchreierGraph([f"g^{x}" for x in units], A, n_group=n, actions=acts)


# ---------------------------------------------------------------------------
# spectra


def vertex_weights(A: list) -> list:
    """Fractions w with A_ij w_j = A_ji w_i, normalised to 1 on each component's first vertex.

    All ones for symmetric matrices; 2 at j = 1728 and 3 at j = 0 in
    supersingular graphs.
    """
    n = len(A)
    w = [None] * n
    for s in range(n):
        if w[s] is not None:
            continue
        w[s] = Fraction(1)
        todo = [s]
        while todo:
            i = todo.pop()
            for j in range(n):
                if A[i][j] and w[j] is None:
                    if not A[j][i]:
                        raise PreconditionError("adjacency has a one-way edge")
                    w[j] = w[i] * A[j][i] / A[i][j]
                    todo.append(j)
    for i in range(n):
        for j in range(n):
            if A[i][j] * w[j] != A[j][i] * w[i]:
                raise PreconditionError("adjacency is not symmetrisable")
    return w


def _symmetrise(A: list) -> np.ndarray:
    """Symmetric matrix W^(-1/2) A W^(1/2), similar to A."""
    M = np.array(A, dtype=float)
    r = np.sqrt(np.array([float(x) for x in vertex_weights(A)]))
    S = M * r[None, :] / r[:, None]
    return (S + S.T) / 2


def jacobi_eigenvalues(S: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100) -> list:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below tol."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-15:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
    else:
        raise ContractViolation("Jacobi iteration did not converge")
    return sorted((float(x) for x in np.diag(A)), reverse=True)


def spectral_analysis(G: Graph) -> SpectralReport:
    if G.n > 500:
        raise PreconditionError("spectral analysis is limited to 500 vertices")
    ev = jacobi_eigenvalues(_symmetrise(G.adjacency))
    k = G.regular_degree()
    eps = eps1 = None
    ram = k is not None and len(ev) == 1
    if k and len(ev) > 1:
        lam2, lamn = ev[1], ev[-1]
        eps1 = max(0.0, 1 - lam2 / k)
        eps = max(0.0, min(eps1, 1 + lamn / k))
        ram = max(abs(lam2), abs(lamn)) <= 2 * math.sqrt(k - 1) + 1e-8
    return SpectralReport(ev, k, eps, eps1, ram)


# ---------------------------------------------------------------------------
# edge expansion


def edge_expansion(G: Graph, exact_cap: int = 20) -> Fraction:
    """min over nonempty F with pi(F) <= 1/2 of (edges leaving F) / #F.

    Vertices carry the stationary measure pi_i proportional to 1/w_i, so
    for symmetric adjacency this is the usual count; at j = 0 and j = 1728
    a kernel leaving the vertex weighs 1/w.
    """
    n = G.n
    if n > exact_cap:
        raise TooLargeForExact(f"{n} vertices exceeds the exact cap {exact_cap}")
    if n < 2:
        raise PreconditionError("edge expansion needs at least two vertices")
    w = vertex_weights(G.adjacency)
    L = 1
    for x in w:
        L = L * x.numerator // gcd(L, x.numerator)
    c = [int(L / x) for x in w]
    A = np.array(G.adjacency, dtype=np.int64) * np.array(c, dtype=np.int64)[:, None]
    rows = A.sum(axis=1)
    sym = A + A.T
    size = 1 << n
    inner = np.zeros(size, dtype=np.int64)  # twice the weight of edges inside F
    out = np.zeros(size, dtype=np.int64)  # weighted degree of F
    mass = np.zeros(size, dtype=np.int64)  # weighted size of F
    for k in range(n):
        lo = 1 << k
        link = np.zeros(lo, dtype=np.int64)
        for j in range(k):
            step = 1 << j
            link[step: 2 * step] = link[:step] + sym[k, j]
        inner[lo: 2 * lo] = inner[:lo] + 2 * link + 2 * A[k, k]
        out[lo: 2 * lo] = out[:lo] + rows[k]
        mass[lo: 2 * lo] = mass[:lo] + c[k]
    ok = (mass > 0) & (2 * mass <= sum(c))
    boundary = 2 * out[ok] - inner[ok]
    best = None
    for bd, m in zip(boundary.tolist(), mass[ok].tolist()):
        r = Fraction(bd, 2 * m)
        if best is None or r < best:
            best = r
    return best


def cheeger_bounds(G: Graph):
    """(lower, h, upper) for (eps/2) k <= h(G) <= sqrt(2 eps) k with one-sided eps."""
    rep = spectral_analysis(G)
    if rep.epsilon_one_sided is None:
        raise PreconditionError("the Cheeger check needs a regular graph with two or more vertices")
    h = edge_expansion(G)
    k = rep.k
    eps = rep.epsilon_one_sided
    return eps / 2 * k, h, math.sqrt(2 * eps) * k


# ---------------------------------------------------------------------------
# meet in the middle


def mitm_path(p: int, ell: int, j_start: str, j_end: str, rng: SeededRng = None) -> list:
    """Labels visited after j_start, ending at j_end; balls grow alternately from both ends."""
    G = build_supersingular_graph(p, ell)
    if j_start not in G.vertices or j_end not in G.vertices:
        raise PreconditionError("both invariants must be supersingular vertices")
    s, t = G.index(j_start), G.index(j_end)
    if s == t:
        return []
    rng = rng or SeededRng(0)
    par = [{s: None}, {t: None}]
    frontier = [[s], [t]]
    meet = None
    side = 0
    while meet is None:
        if not frontier[0] and not frontier[1]:
            raise NoPath(f"no path between {j_start} and {j_end}")
        nxt = []
        order = list(frontier[side])
        for i in range(len(order) - 1, 0, -1):
            r = rng.randbelow(i + 1)
            order[i], order[r] = order[r], order[i]
        for i in order:
            for j in G.neighbours(i):
                if j in par[side]:
                    continue
                par[side][j] = i
                nxt.append(j)
                if j in par[1 - side]:
                    meet = j
                    break
            if meet is not None:
                break
        frontier[side] = nxt
        side = 1 - side
    left, v = [], meet
    while v is not None:
        left.append(v)
        v = par[0][v]
    left.reverse()
    v = par[1][meet]
    while v is not None:
        left.append(v)
        v = par[1][v]
    path = [G.vertices[i] for i in left]
    _verify_path(G, path)
    return path[1:]


def _verify_path(G: IsogenyGraph, path: list):
    F2 = gf(G.provenance["p"], 2)
    for a, b in zip(path, path[1:]):
        E = G.models[G.index(a)]
        targets = {F2.label(j_invariant(phi.codomain)) for phi in enumerate_ell_isogenies(E, G.ell)}
        if b not in targets:
            raise ContractViolation(f"{a} -> {b} is not an {G.ell}-isogeny")


def diameter(G: Graph) -> int:
    best = 0
    for s in range(G.n):
        dist = {s: 0}
        todo = deque([s])
        while todo:
            i = todo.popleft()
            for j in G.neighbours(i):
                if j not in dist:
                    dist[j] = dist[i] + 1
                    todo.append(j)
        if len(dist) < G.n:
            return -1
        best = max(best, max(dist.values()))
    return best


# ---------------------------------------------------------------------------
# export


def undirected_edges(G: Graph) -> list:
    """[(i, j)] with i <= j, one entry per undirected edge (multiplicity kept)."""
    A = G.adjacency
    out = []
    for i in range(G.n):
        out.extend([(i, i)] * ((A[i][i] + 1) // 2))
        for j in range(i + 1, G.n):
            out.extend([(i, j)] * min(A[i][j], A[j][i]))
    return out


def export(G: Graph, fmt: str = "dot") -> str:
    ell = getattr(G, "ell", None)
    edges = undirected_edges(G)
    if fmt == "json":
        return json.dumps(
            {"vertices": list(G.vertices), "edges": [[i, j, ell] for i, j in edges]},
            sort_keys=True,
            separators=(",", ":"),
        )
    if fmt != "dot":
        raise PreconditionError(f"unknown format {fmt!r}")
    lines = ["graph G {"]
    lines += [f'  "{v}";' for v in G.vertices]
    for i, j in edges:
        lines.append(f'  "{G.vertices[i]}" -- "{G.vertices[j]}" [label="l={ell}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# mixing diagnostic


def walk_endpoint_distance(G: Graph, walks: int, length: int, rng: SeededRng) -> float:
    """Total-variation distance between random-walk endpoints and the uniform law."""
    A = np.array(G.adjacency, dtype=float)
    P = A / A.sum(axis=1, keepdims=True)
    cum = np.cumsum(P, axis=1)
    gen = np.random.default_rng(rng.next_u64())
    pos = gen.integers(0, G.n, size=walks)
    for _ in range(length):
        u = gen.random(walks)
        pos = np.minimum((cum[pos] < u[:, None]).sum(axis=1), G.n - 1)
    freq = np.bincount(pos, minlength=G.n) / walks
    return float(0.5 * np.abs(freq - 1.0 / G.n).sum())
