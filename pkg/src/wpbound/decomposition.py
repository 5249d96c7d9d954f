"""Linking choices, chains and wheels, and the inductive integration bounds.

A linking choice designates one minimal edge-slot at every vertex; the other
two edges at that vertex are *linked*.  Each edge end takes part in at most
one link, so the linking relation splits the edges into chains (paths, or
closed cycles).  Chains hang together at vertices: an open chain *ends* at
the outer vertex of each terminal edge, and every vertex is *interior* to the
chain holding its link.

``decompose`` arranges all chains into wheels joined by connecting chains,
following the inductive order used to integrate the edges out one at a time.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .mc_engine import QuadResult, quadrature
from .ribbon_graph import RibbonGraph

LN4 = math.log(4.0)


class DecompositionError(RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class LinkingChoice:
    """Index (0, 1, 2) into each vertex's cyclic half-edge list."""
    minimal_at: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (0, 1, 2) for s in self.minimal_at):
            raise ValueError("each vertex needs a minimal slot in {0, 1, 2}")

    @classmethod
    def from_edges(cls, graph: RibbonGraph, edges) -> "LinkingChoice":
        """Choice from one minimal edge per vertex (first matching slot)."""
        slots = []
        for cyc, e in zip(graph.vertices, edges):
            ids = [graph.edge_of[h] for h in cyc]
            if e not in ids:
                raise ValueError(f"edge {e} does not meet vertex {cyc}")
            slots.append(ids.index(e))
        return cls(tuple(slots))


def all_choices(graph: RibbonGraph):
    for slots in itertools.product(range(3), repeat=graph.num_vertices):
        yield LinkingChoice(slots)


@dataclass(frozen=True)
class Chain:
    edges: tuple[int, ...]
    closed: bool
    # half-edge by which each edge is entered, in chain order
    entries: tuple[int, ...]
    end_vertices: tuple[int, ...]
    interior_vertices: tuple[int, ...]

    def __len__(self):
        return len(self.edges)


@dataclass
class Wheel:
    chains: list[int]
    base_rule: str
    maximal: bool


@dataclass
class Decomposition:
    seed: int
    chains: list[Chain]
    wheels: list[Wheel] = field(default_factory=list)
    # (wheel index, chain index, "internal" | "connecting")
    attachments: list[tuple[int, int, str]] = field(default_factory=list)

    def chain_order(self) -> list[int]:
        order = []
        for w in self.wheels:
            order.extend(w.chains)
        order.extend(c for _, c, _ in self.attachments)
        return order

    def edge_multiset(self) -> list[int]:
        return sorted(e for c in self.chain_order() for e in self.chains[c].edges)

    def is_partition(self, num_edges: int) -> bool:
        return self.edge_multiset() == list(range(num_edges))

    @property
    def num_wheels(self) -> int:
        return len(self.wheels)


def _minimal_half_edges(graph: RibbonGraph, choice: LinkingChoice) -> set[int]:
    if len(choice.minimal_at) != graph.num_vertices:
        raise ValueError(f"choice covers {len(choice.minimal_at)} vertices, graph has {graph.num_vertices}")
    return {cyc[s] for cyc, s in zip(graph.vertices, choice.minimal_at)}


def _link_partner(graph: RibbonGraph, minimal: set[int], h: int) -> int | None:
    """The half-edge linked with h at its vertex, or None if h is the minimal slot."""
    if h in minimal:
        return None
    a, b = graph.sigma[h], graph.sigma[graph.sigma[h]]
    return b if a in minimal else a


def linked(graph: RibbonGraph, choice: LinkingChoice, e: int, f: int) -> bool:
    if e == f:
        raise ValueError("linked() needs two distinct edges")
    minimal = _minimal_half_edges(graph, choice)
    for h in graph.edges[e]:
        p = _link_partner(graph, minimal, h)
        if p is not None and graph.edge_of[p] == f:
            return True
    return False


def chains(graph: RibbonGraph, choice: LinkingChoice) -> list[Chain]:
    minimal = _minimal_half_edges(graph, choice)
    alpha, eo, vo = graph.alpha, graph.edge_of, graph.vertex_of
    seen = [False] * graph.num_edges
    out = []

    def walk(entry):
        # follow links from the edge entered at half-edge ``entry``
        edges, entries, interior = [], [], []
        h = entry
        while True:
            e = eo[h]
            if seen[e] and edges:
                return edges, entries, interior, True
            seen[e] = True
            edges.append(e)
            entries.append(h)
            far = alpha[h]
            nxt = _link_partner(graph, minimal, far)
            if nxt is None:
                return edges, entries, interior, False
            interior.append(vo[far])
            h = nxt

    # open chains first, each walked from its lower terminal half-edge
    terminals = sorted(minimal)
    for h in terminals:
        if seen[eo[h]]:
            continue
        edges, entries, interior, closed = walk(h)
        ends = (vo[h], vo[alpha[entries[-1]]])
        out.append(Chain(tuple(edges), False, tuple(entries), ends, tuple(interior)))
    for e in range(graph.num_edges):
        if seen[e]:
            continue
        edges, entries, interior, closed = walk(graph.edges[e][0])
        out.append(Chain(tuple(edges), True, tuple(entries), (), tuple(interior)))
    return out


def _vertex_roles(graph: RibbonGraph, chs: list[Chain]) -> dict[int, int]:
    interior_of = {}
    for i, c in enumerate(chs):
        for v in c.interior_vertices:
            interior_of[v] = i
    return interior_of


def _chain_vertices(graph: RibbonGraph, c: Chain) -> set[int]:
    return {graph.vertex_of[h] for e in c.edges for h in graph.edges[e]}


def _forward_closure(base: int, chs: list[Chain], interior_of: dict[int, int], used: set[int]) -> list[int]:
    """Chains reachable from ``base`` by 'ends at a vertex interior to'."""
    order = [base]
    inside = {base}
    i = 0
    while i < len(order):
        for v in chs[order[i]].end_vertices:
            c = interior_of[v]
            if c not in inside and c not in used:
                inside.add(c)
                order.append(c)
        i += 1
    return order


def is_wheel_sequence(chs: list[Chain], order: list[int], interior_of: dict[int, int]) -> bool:
    """Every chain after the first has an earlier chain ending inside it."""
    for i in range(1, len(order)):
        hits = {interior_of[v] for c in order[:i] for v in chs[c].end_vertices}
        if order[i] not in hits:
            return False
    return True


def decompose(graph: RibbonGraph, choice: LinkingChoice, mu: int) -> Decomposition:
    """Split the edges into wheels and the chains between them, seeded at ``mu``.

    The first wheel starts from the chain linked at an end of ``mu`` where
    ``mu`` is the designated minimal edge (the pair linked over ``mu``); if
    ``mu`` is minimal at neither end, from the chain containing ``mu``.  Each
    wheel is closed under "ends inside".  Remaining chains are attached while
    they have an end on the placed structure, preferring chains with all ends
    placed; a chain with a free end starts the next wheel there.
    """
    if not 0 <= mu < graph.num_edges:
        raise ValueError(f"seed edge {mu} out of range")
    chs = chains(graph, choice)
    interior_of = _vertex_roles(graph, chs)
    minimal = _minimal_half_edges(graph, choice)
    chain_of_edge = {e: i for i, c in enumerate(chs) for e in c.edges}
    dec = Decomposition(seed=mu, chains=chs)

    base, rule = chain_of_edge[mu], "contains-seed"
    for h in graph.edges[mu]:
        if h in minimal:
            base, rule = interior_of[graph.vertex_of[h]], "linked-over-seed"
            break

    used: set[int] = set()
    placed: set[int] = set()

    def add_wheel(start, rule):
        order = _forward_closure(start, chs, interior_of, used)
        used.update(order)
        for c in order:
            placed.update(_chain_vertices(graph, chs[c]))
        maximal = all(interior_of[v] in order for c in order for v in chs[c].end_vertices)
        dec.wheels.append(Wheel(order, rule, maximal))

    add_wheel(base, rule)
    while len(used) < len(chs):
        internal = connecting = None
        for i, c in enumerate(chs):
            if i in used or c.closed:
                continue
            on = [v in placed or interior_of[v] == i for v in c.end_vertices]
            if all(on):
                internal = i
                break
            if any(on) and connecting is None:
                connecting = i
        w = len(dec.wheels) - 1
        if internal is not None:
            used.add(internal)
            placed.update(_chain_vertices(graph, chs[internal]))
            dec.attachments.append((w, internal, "internal"))
        elif connecting is not None:
            c = chs[connecting]
            free = [v for v in c.end_vertices if v not in placed and interior_of[v] != connecting]
            used.add(connecting)
            placed.update(_chain_vertices(graph, c))
            dec.attachments.append((w, connecting, "connecting"))
            add_wheel(interior_of[free[0]], "end-of-connecting-chain")
        else:
            raise DecompositionError(
                f"{len(chs) - len(used)} chains cannot be reached from the placed structure", dec)
    if not dec.is_partition(graph.num_edges):
        raise DecompositionError("wheels and chains do not partition the edge set", dec)
    return dec


def per_graph_factor(N: int) -> float:
    """(8/3)^((N-1)/2): the bound for integrating out all edges but the minimal one."""
    return (8.0 / 3.0) ** ((N - 1) / 2)


# -- numeric checks of the integration lemmas ---------------------------------

@dataclass
class LemmaCheck:
    which: str
    params: dict
    numeric: float
    bound: float
    tail_bound: float
    quad_error: float
    passed: bool
    strict: bool = False
    extra: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return {
            "lemma": self.which,
            "params": self.params,
            "numeric": self.numeric,
            "bound": self.bound,
            "tail_bound": self.tail_bound,
            "quad_error": self.quad_error,
            "pass": self.passed,
            **self.extra,
        }


def _check(which, params, res: QuadResult, bound, tail=0.0, strict=False, tol=1e-8, **extra):
    upper = res.value + tail
    ok = upper < bound if strict else upper <= bound + tol
    return LemmaCheck(which, params, res.value, bound, tail, res.error, ok, strict, extra)


def _log_cut(tail_const: float, tol: float) -> float:
    # s such that tail_const * exp(-s) <= tol / 10
    return math.log(10 * tail_const / tol)


def verify_trick1(e: float, tol: float = 1e-8) -> LemmaCheck:
    """Linked neighbour f of a fixed edge e: f in [e/2, 2e], and f > 4."""
    res = quadrature(lambda f: 1.0 / f, [(max(4.0, e / 2), 2 * e)], tol)
    return _check("trick1", {"e": e}, res, LN4, tol=tol)


def verify_trick2(g: float, tol: float = 1e-8) -> LemmaCheck:
    """Linked pair (e, f) over a fixed minimal g: e, f >= g and |e - f| <= g.

    The outer variable is s = ln(f/g), cut at S with the remaining tail
    bounded by 4 exp(-S), since ln((1+x)/(1-x)) <= 4x for x = g/f <= 1/2.
    """
    S = _log_cut(4.0, tol)
    res = quadrature(
        lambda s, e: 1.0 / e,
        [(0.0, S), (lambda s: max(g, g * math.exp(s) - g), lambda s: g * math.exp(s) + g)],
        tol,
        breakpoints=[(math.log(2.0),), ()],
    )
    return _check("trick2", {"g": g}, res, 2.0, tail=4 * math.exp(-S), strict=True, tol=tol,
                  closed_form=math.pi**2 / 6)


def trick3_series(e: float, terms: int = 100_000) -> float:
    """Partial sum of sum_n (1 - (4/e)^n) / n^2 (each term below 1/n^2)."""
    r = 4.0 / e
    total = 0.0
    p = 1.0
    for n in range(1, terms + 1):
        p *= r
        total += (1.0 - p) / (n * n)
    return total


def verify_trick3(e: float, tol: float = 1e-8) -> LemmaCheck:
    """Minimal g and its linked partner f for a fixed e: 4 < g <= e, g <= f,
    and the triangle inequalities, so f in [max(g, e - g), e + g]."""
    res = quadrature(
        lambda g, f: 1.0 / (f * g),
        [(4.0, max(4.0, e)), (lambda g: max(g, e - g), lambda g: e + g)],
        tol,
        breakpoints=[(e / 2,), ()],
    )
    series = trick3_series(e) if e > 4 else 0.0
    return _check("trick3", {"e": e}, res, 8.0 / 3.0, strict=True, tol=tol,
                  series=series, series_ok=series < math.pi**2 / 6 < 5.0 / 3.0)


def verify_chainok(m: int, i: int, value: float, tol: float = 1e-8) -> LemmaCheck:
    """Chain e_0..e_{m-1} with e_i fixed: neighbours within a factor 2, all > 4."""
    if not 0 <= i < m:
        raise ValueError("fixed index outside the chain")
    # integrate outward from e_i; each variable is bounded by its inner neighbour
    order = sorted((j for j in range(m) if j != i), key=lambda j: (abs(j - i), j))
    pos = {i: None}
    for k, j in enumerate(order):
        pos[j] = k

    def bounds(j):
        nb = j + 1 if j < i else j - 1

        def lo(*outer):
            x = value if pos[nb] is None else outer[pos[nb]]
            return max(4.0, x / 2)

        def hi(*outer):
            x = value if pos[nb] is None else outer[pos[nb]]
            return 2 * x

        return lo, hi

    if not order:
        res = QuadResult(1.0, 0.0, 0)
    elif len(order) == 1:
        lo, hi = bounds(order[0])
        res = QuadResult(math.log(hi() / lo()), 0.0, 1)
    else:
        # nothing depends on the outermost chain edge, so its de/e integral
        # is the log of its interval; lower bounds kink where x/2 = 4
        last_lo, last_hi = bounds(order[-1])

        def fn(*xs):
            return math.log(last_hi(*xs) / last_lo(*xs)) * math.prod(1.0 / x for x in xs)

        region = [bounds(j) for j in order[:-1]]
        res = quadrature(fn, region, tol, breakpoints=[(8.0,)] * len(region))
    return _check("chainok", {"m": m, "i": i, "value": value}, res, LN4 ** (m - 1), tol=tol)


def verify_wheelok(m: int, g: float, tol: float = 1e-8) -> LemmaCheck:
    """Single closed chain of m in {2, 3} edges; e_1, e_2 linked over the fixed g.

    Other links only impose the factor-2 ratio; all edges exceed 4.
    """
    if m not in (2, 3):
        raise ValueError("wheel check implemented for closed chains of 2 or 3 edges")
    tail_const = 4.0 * LN4 ** (m - 2)
    S = _log_cut(tail_const, tol)
    region = [(0.0, S), (lambda s: max(g, g * math.exp(s) - g), lambda s: g * math.exp(s) + g)]
    bps = [(math.log(2.0),), ()]
    if m == 2:
        fn = lambda s, e2: 1.0 / e2
    else:
        # the third edge only sees ratio constraints, so its integral of
        # de3/e3 is a log of the interval end-points
        def fn(s, e2):
            e1 = g * math.exp(s)
            lo, hi = max(4.0, max(e1, e2) / 2), 2 * min(e1, e2)
            return math.log(hi / lo) / e2 if hi > lo else 0.0
        bps[1] = lambda s: (g * math.exp(s), 8.0)
    res = quadrature(fn, region, tol, breakpoints=bps)
    bound = max(LN4, math.sqrt(2.0)) ** m
    return _check("wheelok", {"m": m, "g": g}, res, bound, tail=tail_const * math.exp(-S), tol=tol)


def verify_lemma(which: str, params: dict, tol: float = 1e-8) -> LemmaCheck:
    table = {
        "trick1": verify_trick1,
        "trick2": verify_trick2,
        "trick3": verify_trick3,
        "chainok": verify_chainok,
        "wheelok": verify_wheelok,
    }
    if which not in table:
        raise ValueError(f"unknown lemma {which!r}; expected one of {', '.join(table)}")
    return table[which](**params, tol=tol)


def intout_theta(graph: RibbonGraph, choice: LinkingChoice, mu_edge: int = 2, mu: float = 12.0,
                 tol: float = 1e-8) -> LemmaCheck:
    """Integral of dl1/l1 dl2/l2 over the constrained region of a 3-edge graph.

    Fixed minimal edge ``mu_edge`` at value ``mu``; the other two edges must be
    >= mu, satisfy the triangle inequalities and the designated-minimal and
    linking-ratio constraints at both vertices.  All constraints are linear in
    the free edge for a fixed outer edge, so the inner range is an interval.
    The outer edge runs over [mu, mu e^S]; beyond it the inner range has
    length <= 2 mu, giving the tail bound 4 mu / (mu e^S).
    """
    if graph.num_edges != 3:
        raise ValueError("the desk check is written for graphs with three edges")
    a, b = (e for e in range(3) if e != mu_edge)
    minimal = _minimal_half_edges(graph, choice)
    constraints = []  # (coefs over (la, lb, mu), rhs): sum coef*x <= 0
    for cyc in graph.vertices:
        es = [graph.edge_of[h] for h in cyc]
        m = next(graph.edge_of[h] for h in cyc if h in minimal)
        others = list(es)
        others.remove(m)
        for x in others:
            constraints.append(((m, x), "le"))
        p, q = others
        constraints.append(((p, q), "ratio"))
        for k in range(3):
            x, y, z = es[k], es[(k + 1) % 3], es[(k + 2) % 3]
            constraints.append(((x, y, z), "tri"))

    def interval(la):
        # admissible lb for fixed la, as [lo, hi]
        lo, hi = mu, math.inf
        vals = {mu_edge: mu, a: la}
        for spec, kind in constraints:
            if kind == "le":
                m, x = spec
                lo, hi = _lin(lo, hi, {m: 1, x: -1}, vals, b)
            elif kind == "ratio":
                p, q = spec
                lo, hi = _lin(lo, hi, {p: 1, q: -2}, vals, b)
                lo, hi = _lin(lo, hi, {q: 1, p: -2}, vals, b)
            else:
                x, y, z = spec
                lo, hi = _lin(lo, hi, {x: 1, y: -1, z: -1}, vals, b)
        return lo, hi

    S = _log_cut(4.0, tol)
    res = quadrature(
        lambda s, lb: 1.0 / lb,
        [(0.0, S), (lambda s: interval(mu * math.exp(s))[0], lambda s: interval(mu * math.exp(s))[1])],
        tol,
        breakpoints=[(math.log(2.0),), ()],
    )
    bound = per_graph_factor(3)
    check = _check("intout", {"mu": mu, "choice": list(choice.minimal_at)}, res, bound,
                   tail=4 * math.exp(-S), strict=True, tol=tol)
    check.extra["margin"] = bound - (res.value + check.tail_bound)
    return check


def _lin(lo, hi, coefs, vals, free):
    """Intersect [lo, hi] with {sum coef * x <= 0} solved for the free variable."""
    c = 0.0
    k = 0.0
    for var, w in coefs.items():
        if var == free:
            k += w
        else:
            c += w * vals[var]
    if k > 0:
        hi = min(hi, -c / k)
    elif k < 0:
        lo = max(lo, -c / k)
    elif c > 0:
        hi = -math.inf
    return lo, hi
