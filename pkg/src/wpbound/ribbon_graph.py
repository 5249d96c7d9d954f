"""Ribbon graphs encoded as a pair of permutations on half-edges.

A ribbon graph on half-edges ``0..2E-1`` is given by

* ``sigma``: the vertex permutation; its cycles list the half-edges around
  each vertex in their cyclic order,
* ``alpha``: a fixed-point-free involution pairing half-edges into edges.

Faces (boundary cycles, one per puncture) are the orbits of
``phi = sigma o alpha``, i.e. ``phi(h) = sigma[alpha[h]]``: cross the edge,
then turn to the next half-edge in the cyclic order at the far vertex.

The Poincare dual swaps vertices and faces: it keeps ``alpha`` and uses
``phi`` as its vertex permutation.  A trivalent graph and its dual ideal
triangulation therefore share the same half-edge data.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

DEFAULT_MAX_VERTICES = 8


class RibbonGraphError(ValueError):
    """Malformed permutation pair or violated structural precondition."""


class EnumerationCapError(RibbonGraphError):
    pass


class ContractionError(RibbonGraphError):
    pass


def cycles_of(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycles of ``perm``, each starting at its smallest element, sorted."""
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        h = start
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = perm[h]
        out.append(tuple(cyc))
    return out


def perm_from_cycles(cycles: Sequence[Sequence[int]], size: int | None = None) -> tuple[int, ...]:
    if size is None:
        size = sum(len(c) for c in cycles)
    perm = list(range(size))
    for c in cycles:
        for i, h in enumerate(c):
            perm[h] = c[(i + 1) % len(c)]
    return tuple(perm)


@dataclass(frozen=True)
class RibbonGraph:
    sigma: tuple[int, ...]
    alpha: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(x) for x in self.sigma))
        object.__setattr__(self, "alpha", tuple(int(x) for x in self.alpha))
        self.validate()

    @classmethod
    def from_cycles(cls, sigma_cycles, alpha_cycles) -> "RibbonGraph":
        size = sum(len(c) for c in sigma_cycles)
        return cls(perm_from_cycles(sigma_cycles, size), perm_from_cycles(alpha_cycles, size))

    def validate(self) -> None:
        n = len(self.sigma)
        if len(self.alpha) != n:
            raise RibbonGraphError("sigma and alpha act on different half-edge sets")
        if n == 0 or n % 2:
            raise RibbonGraphError(f"need a positive even number of half-edges, got {n}")
        for name, p in (("sigma", self.sigma), ("alpha", self.alpha)):
            if sorted(p) != list(range(n)):
                raise RibbonGraphError(f"{name} is not a permutation of 0..{n - 1}")
        for h, a in enumerate(self.alpha):
            if a == h:
                raise RibbonGraphError(f"alpha fixes half-edge {h}")
            if self.alpha[a] != h:
                raise RibbonGraphError(f"alpha is not an involution at half-edge {h}")
        if not self._is_connected():
            raise RibbonGraphError("sigma and alpha do not act transitively")

    def _is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            h = stack.pop()
            for k in (self.sigma[h], self.alpha[h]):
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return len(seen) == len(self.sigma)

    # -- basic counts -----------------------------------------------------
    @property
    def num_half_edges(self) -> int:
        return len(self.sigma)

    @property
    def num_edges(self) -> int:
        return len(self.sigma) // 2

    @cached_property
    def vertices(self) -> list[tuple[int, ...]]:
        return cycles_of(self.sigma)

    @cached_property
    def phi(self) -> tuple[int, ...]:
        return tuple(self.sigma[a] for a in self.alpha)

    @cached_property
    def faces(self) -> list[tuple[int, ...]]:
        return cycles_of(self.phi)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """Edges as (h, alpha[h]) with h < alpha[h], ordered by h."""
        return [(h, a) for h, a in enumerate(self.alpha) if h < a]

    @cached_property
    def edge_of(self) -> tuple[int, ...]:
        out = [0] * self.num_half_edges
        for i, (h, a) in enumerate(self.edges):
            out[h] = out[a] = i
        return tuple(out)

    @cached_property
    def vertex_of(self) -> tuple[int, ...]:
        out = [0] * self.num_half_edges
        for i, cyc in enumerate(self.vertices):
            for h in cyc:
                out[h] = i
        return tuple(out)

    @cached_property
    def face_of(self) -> tuple[int, ...]:
        out = [0] * self.num_half_edges
        for i, cyc in enumerate(self.faces):
            for h in cyc:
                out[h] = i
        return tuple(out)

    def is_trivalent(self) -> bool:
        return all(len(c) == 3 for c in self.vertices)

    def require_trivalent(self) -> None:
        if not self.is_trivalent():
            lens = sorted({len(c) for c in self.vertices})
            raise RibbonGraphError(f"graph is not trivalent (vertex degrees {lens})")

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {"half_edges": self.num_half_edges, "sigma": list(self.sigma), "alpha": list(self.alpha)}

    @classmethod
    def from_json(cls, obj: dict) -> "RibbonGraph":
        g = cls(obj["sigma"], obj["alpha"])
        if "half_edges" in obj and obj["half_edges"] != g.num_half_edges:
            raise RibbonGraphError("half_edges field disagrees with permutation length")
        return g

    def relabel(self, pi: Sequence[int]) -> "RibbonGraph":
        """Conjugate by ``pi``: half-edge h becomes pi[h]."""
        n = self.num_half_edges
        sigma = [0] * n
        alpha = [0] * n
        for h in range(n):
            sigma[pi[h]] = pi[self.sigma[h]]
            alpha[pi[h]] = pi[self.alpha[h]]
        return RibbonGraph(sigma, alpha)


@dataclass(frozen=True)
class GraphInvariants:
    genus: int
    punctures: int
    num_edges: int
    num_vertices: int


@dataclass(frozen=True)
class IsoClass:
    canonical: RibbonGraph
    aut_order: int


def faces(g: RibbonGraph) -> list[tuple[int, ...]]:
    return g.faces


def genus(g: RibbonGraph) -> int:
    chi = g.num_vertices - g.num_edges + g.num_faces
    if chi % 2 or chi > 2:
        raise RibbonGraphError(f"Euler characteristic {chi} does not give a valid genus")
    return (2 - chi) // 2


def invariants(g: RibbonGraph) -> GraphInvariants:
    return GraphInvariants(genus(g), g.num_faces, g.num_edges, g.num_vertices)


def dual(g: RibbonGraph) -> RibbonGraph:
    return RibbonGraph(g.phi, g.alpha)


# -- isomorphism ------------------------------------------------------------

def _rooted_code(g: RibbonGraph, root: int) -> tuple[int, ...]:
    # BFS relabeling from ``root``; for a connected map an isomorphism is
    # determined by the image of a single half-edge.
    n = g.num_half_edges
    label = [-1] * n
    order = [root]
    label[root] = 0
    i = 0
    while i < len(order):
        h = order[i]
        i += 1
        for k in (g.sigma[h], g.alpha[h]):
            if label[k] < 0:
                label[k] = len(order)
                order.append(k)
    sigma = [label[g.sigma[h]] for h in order]
    alpha = [label[g.alpha[h]] for h in order]
    return tuple(sigma + alpha)


def canonical_form(g: RibbonGraph) -> IsoClass:
    best = None
    count = 0
    for root in range(g.num_half_edges):
        code = _rooted_code(g, root)
        if best is None or code < best:
            best, count = code, 1
        elif code == best:
            count += 1
    n = g.num_half_edges
    return IsoClass(RibbonGraph(best[:n], best[n:]), count)


def is_isomorphic(g1: RibbonGraph, g2: RibbonGraph) -> bool:
    if g1.num_half_edges != g2.num_half_edges:
        return False
    return canonical_form(g1).canonical == canonical_form(g2).canonical


def aut_order(g: RibbonGraph) -> int:
    return canonical_form(g).aut_order


# -- enumeration ------------------------------------------------------------

def _trivalent_pairings(num_vertices: int) -> Iterator[list[int]]:
    """Connected pairings against sigma = (0 1 2)(3 4 5)..., up to relabeling.

    The smallest unpaired half-edge is matched either with an unpaired
    half-edge on an already touched vertex or with the first half-edge of the
    first untouched vertex.  Untouched vertices are interchangeable and
    rotation-symmetric, so this loses no isomorphism class.  Vertices are
    touched in increasing order, so running out of open half-edges on touched
    vertices before all vertices are used means the graph is disconnected.
    """
    n = 3 * num_vertices
    alpha = [-1] * n

    def rec(touched: int):
        try:
            h = alpha.index(-1)
        except ValueError:
            yield list(alpha)
            return
        if h >= 3 * touched:
            return
        for k in range(h + 1, 3 * touched):
            if alpha[k] < 0:
                alpha[h], alpha[k] = k, h
                yield from rec(touched)
                alpha[h] = alpha[k] = -1
        if touched < num_vertices:
            k = 3 * touched
            alpha[h], alpha[k] = k, h
            yield from rec(touched + 1)
            alpha[h] = alpha[k] = -1

    yield from rec(1)


def standard_sigma(num_vertices: int) -> tuple[int, ...]:
    return perm_from_cycles([(3 * v, 3 * v + 1, 3 * v + 2) for v in range(num_vertices)])


def check_hyperbolic(g: int, n: int) -> None:
    if n <= 0:
        raise RibbonGraphError(f"need at least one puncture, got n={n}")
    if g < 0:
        raise RibbonGraphError(f"genus must be non-negative, got g={g}")
    if 2 * g + n < 3:
        raise RibbonGraphError(f"(g, n) = ({g}, {n}) is not hyperbolic: need 2g + n >= 3")


def enumerate_trivalent(g: int, n: int, max_vertices: int = DEFAULT_MAX_VERTICES) -> list[IsoClass]:
    """One canonical representative per class of trivalent ribbon graphs."""
    check_hyperbolic(g, n)
    V = 4 * g - 4 + 2 * n
    if V > max_vertices:
        raise EnumerationCapError(f"(g, n) = ({g}, {n}) needs V = {V} vertices, above the cap of {max_vertices}")
    sigma = standard_sigma(V)
    found: dict[tuple, IsoClass] = {}
    for alpha in _trivalent_pairings(V):
        rg = RibbonGraph(sigma, alpha)
        if rg.num_faces != n:
            continue
        iso = canonical_form(rg)
        key = iso.canonical.sigma + iso.canonical.alpha
        found.setdefault(key, iso)
    return [found[k] for k in sorted(found)]


# -- catalog files ------------------------------------------------------------

CANONICAL_VERSION = "bfs-root-min-v1"


def write_catalog(classes: Sequence[IsoClass], g: int, n: int, cache_dir: Path) -> Path:
    """Write one JSON per class plus an index; identical input gives identical files."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, iso in enumerate(classes):
        name = f"g{g}_n{n}_{i:04d}.json"
        payload = dict(iso.canonical.to_json(), aut_order=iso.aut_order)
        (cache_dir / name).write_text(json.dumps(payload, sort_keys=True) + "\n")
        entries.append({"file": name, "aut_order": iso.aut_order})
    index = {
        "genus": g,
        "punctures": n,
        "count": len(classes),
        "canonical_version": CANONICAL_VERSION,
        "entries": entries,
    }
    path = cache_dir / f"g{g}_n{n}_index.json"
    path.write_text(json.dumps(index, sort_keys=True, indent=1) + "\n")
    return path


def read_catalog(g: int, n: int, cache_dir: Path) -> list[IsoClass] | None:
    """Load a cached catalog; None when missing or stamped by another algorithm."""
    cache_dir = Path(cache_dir)
    path = cache_dir / f"g{g}_n{n}_index.json"
    if not path.exists():
        return None
    index = json.loads(path.read_text())
    if index.get("canonical_version") != CANONICAL_VERSION:
        return None
    out = []
    for entry in index["entries"]:
        obj = json.loads((cache_dir / entry["file"]).read_text())
        out.append(IsoClass(RibbonGraph.from_json(obj), obj["aut_order"]))
    return out


# -- triangulation side -------------------------------------------------------

def contract_puncture_pair(t: RibbonGraph, e: int) -> RibbonGraph:
    """Contract edge ``e`` of an ideal triangulation joining two punctures.

    ``t`` is the triangulation graph (vertices = punctures, faces =
    triangles).  The two punctures are identified and the triangles on
    either side of ``e`` collapse to arcs, so the surface keeps its genus and
    loses one puncture; three edges disappear.

    Implemented on the half-edge data directly: dropping ``e`` leaves each
    adjacent triangle with two sides, whose edges are merged into one arc by
    pairing their far half-edges.  A triangle left with a single side (when
    both sides of ``e`` are the same triangle) loses that side as well.
    """
    if not 0 <= e < t.num_edges:
        raise ContractionError(f"edge {e} out of range 0..{t.num_edges - 1}")
    h, h2 = t.edges[e]
    if t.vertex_of[h] == t.vertex_of[h2]:
        raise ContractionError(f"edge {e} is a loop at puncture {t.vertex_of[h]}; nothing to contract")
    # triangle corners: the face permutation of t is the vertex permutation
    # of the dual trivalent graph
    tri_next = tuple(t.phi)
    triangles = cycles_of(tri_next)
    if any(len(c) != 3 for c in triangles):
        raise ContractionError("input is not a triangulation (faces of length != 3)")

    alpha = dict(enumerate(t.alpha))
    corners = {i: list(c) for i, c in enumerate(triangles)}
    tri_of = {}
    for i, c in corners.items():
        for x in c:
            tri_of[x] = i

    def drop_edge(x):
        y = alpha.pop(x)
        alpha.pop(y)
        for z in (x, y):
            corners[tri_of[z]].remove(z)

    drop_edge(h)
    while True:
        short = [i for i, c in corners.items() if len(c) < 3]
        if not short:
            break
        i = short[0]
        c = corners.pop(i)
        if len(c) == 1:
            corners[i] = c
            drop_edge(c[0])
            corners.pop(i)
        elif len(c) == 2:
            p, q = c
            if alpha[p] == q:
                raise ContractionError(f"contracting edge {e} leaves no hyperbolic surface")
            ap, aq = alpha.pop(p), alpha.pop(q)
            alpha[ap], alpha[aq] = aq, ap

    if not alpha:
        raise ContractionError(f"contracting edge {e} leaves an empty triangulation")
    keep = sorted(alpha)
    relabel = {x: i for i, x in enumerate(keep)}
    new_alpha = [relabel[alpha[x]] for x in keep]
    tri_sigma = [0] * len(keep)
    for c in corners.values():
        for j, x in enumerate(c):
            tri_sigma[relabel[x]] = relabel[c[(j + 1) % 3]]
    trivalent = RibbonGraph(tri_sigma, new_alpha)
    return dual(trivalent)


def non_loop_edges(t: RibbonGraph) -> list[int]:
    return [i for i, (h, a) in enumerate(t.edges) if t.vertex_of[h] != t.vertex_of[a]]


# -- small fixtures ----------------------------------------------------------

def theta() -> RibbonGraph:
    """Genus-one theta graph: one face, the cell of M_{1,1}."""
    return RibbonGraph.from_cycles([(0, 1, 2), (3, 4, 5)], [(0, 3), (1, 4), (2, 5)])


def planar_theta() -> RibbonGraph:
    return RibbonGraph.from_cycles([(0, 1, 2), (3, 5, 4)], [(0, 3), (1, 4), (2, 5)])
