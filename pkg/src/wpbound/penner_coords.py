"""Lambda-length coordinate algebra on a trivalent ribbon graph.

All functions take lambda values as an array of shape ``(..., N)`` (one
column per edge, edges numbered as in ``RibbonGraph.edges``) and broadcast
over leading axes, so a batch of sample points costs one call.

Notation at a half-edge ``h`` on vertex ``v``: ``e = edge(h)`` and the other
two edges at ``v`` are ``f = edge(sigma h)``, ``g = edge(sigma^2 h)``.  Loop
edges are read slot by slot, so an edge may play the role of ``f`` or ``g``
at its own end.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .ribbon_graph import RibbonGraph


class CoordinateError(ValueError):
    pass


@dataclass(frozen=True)
class LambdaAssignment:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        arr = np.asarray(vals)
        if arr.size == 0 or not np.all(np.isfinite(arr)) or not np.all(arr > 0):
            raise CoordinateError("lambda-lengths must be positive and finite")
        object.__setattr__(self, "values", vals)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def to_json(self) -> str:
        return json.dumps(list(self.values))

    @classmethod
    def from_json(cls, text: str) -> "LambdaAssignment":
        return cls(json.loads(text))


@dataclass
class DomainDiagnostics:
    x: list[float]
    rho: list[float]
    rho_total: float
    min_lambda: float
    triangle_ok: bool
    in_domain: bool
    ge4_ok: bool
    rho_bound: float
    rholess_ok: bool

    def as_record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Tables:
    """Index arrays for vectorized evaluation, one row per half-edge."""
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    # sectors in face order: arrival half-edge p, opposite corner r = sigma^2 p
    sector_face: np.ndarray
    sector_in: np.ndarray
    sector_out: np.ndarray
    sector_opp: np.ndarray
    # traversal: face i passes along edge(h) for h in the face cycle
    trav_face: np.ndarray
    trav_edge: np.ndarray
    vertex_edges: np.ndarray
    num_edges: int
    num_faces: int


@lru_cache(maxsize=256)
def tables(graph: RibbonGraph) -> _Tables:
    graph.require_trivalent()
    s, a, eo = graph.sigma, graph.alpha, graph.edge_of
    H = graph.num_half_edges
    e = np.array([eo[h] for h in range(H)])
    f = np.array([eo[s[h]] for h in range(H)])
    g = np.array([eo[s[s[h]]] for h in range(H)])
    sf, si, so, sr, tf, te = [], [], [], [], [], []
    for i, cyc in enumerate(graph.faces):
        for h in cyc:
            p = a[h]
            sf.append(i)
            si.append(eo[p])
            so.append(eo[s[p]])
            sr.append(eo[s[s[p]]])
            tf.append(i)
            te.append(eo[h])
    vertex_edges = np.array([[eo[h] for h in cyc] for cyc in graph.vertices])
    return _Tables(e, f, g, np.array(sf), np.array(si), np.array(so), np.array(sr),
                   np.array(tf), np.array(te), vertex_edges, graph.num_edges, graph.num_faces)


def _lam(lam) -> np.ndarray:
    return np.asarray(lam, dtype=float)


def half_edge_terms(graph: RibbonGraph, lam) -> np.ndarray:
    """Contribution of each half-edge end to X of its edge, shape (..., 2N)."""
    t = tables(graph)
    lam = _lam(lam)
    le, lf, lg = lam[..., t.e], lam[..., t.f], lam[..., t.g]
    return lf / (le * lg) + lg / (le * lf) - le / (lf * lg)


def simplicial_coordinates(graph: RibbonGraph, lam) -> np.ndarray:
    t = tables(graph)
    terms = half_edge_terms(graph, lam)
    out = np.zeros(terms.shape[:-1] + (t.num_edges,))
    return _add_last(out, t.e, terms)


def _add_last(out, idx, vals):
    for j in range(vals.shape[-1]):
        out[..., idx[j]] += vals[..., j]
    return out


def simplicial_coordinate(graph: RibbonGraph, lam, e: int):
    return simplicial_coordinates(graph, lam)[..., e]


def alpha_lengths(graph: RibbonGraph, lam) -> np.ndarray:
    """alpha(edge(h), vertex(h)) = e/(f g) for every half-edge h, shape (..., 2N)."""
    t = tables(graph)
    lam = _lam(lam)
    return lam[..., t.e] / (lam[..., t.f] * lam[..., t.g])


def alpha_length(graph: RibbonGraph, lam, e: int, v: int):
    """alpha-length of edge ``e`` at its end vertex ``v``.

    For a loop both half-edges at ``v`` give the same value.
    """
    for h in graph.edges[e]:
        if graph.vertex_of[h] == v:
            return alpha_lengths(graph, lam)[..., h]
    raise CoordinateError(f"vertex {v} is not an end of edge {e}")


def rho_faces_path(graph: RibbonGraph, lam) -> np.ndarray:
    """rho_i as the sum of X_e along face i, edges counted with multiplicity."""
    t = tables(graph)
    x = simplicial_coordinates(graph, lam)
    out = np.zeros(x.shape[:-1] + (t.num_faces,))
    return _add_last(out, t.trav_face, x[..., t.trav_edge])


def sector_alphas(graph: RibbonGraph, lam) -> np.ndarray:
    t = tables(graph)
    lam = _lam(lam)
    return lam[..., t.sector_opp] / (lam[..., t.sector_in] * lam[..., t.sector_out])


def rho_faces_sector(graph: RibbonGraph, lam) -> np.ndarray:
    """rho_i as twice the alpha-lengths of the sectors face i turns through."""
    t = tables(graph)
    s = sector_alphas(graph, lam)
    out = np.zeros(s.shape[:-1] + (t.num_faces,))
    return 2.0 * _add_last(out, t.sector_face, s)


def rho_face(graph: RibbonGraph, lam, i: int):
    """(sector value, path value) for face ``i``; the sector value is primary."""
    return rho_faces_sector(graph, lam)[..., i], rho_faces_path(graph, lam)[..., i]


def rho_total(graph: RibbonGraph, lam):
    return rho_faces_sector(graph, lam).sum(axis=-1)


def triangle_ok(graph: RibbonGraph, lam) -> np.ndarray:
    """True where every vertex satisfies all three triangle inequalities."""
    t = tables(graph)
    lam = _lam(lam)
    trip = lam[..., t.vertex_edges]
    tot = trip.sum(axis=-1, keepdims=True)
    return np.all(2.0 * trip <= tot, axis=(-1, -2))


def diagnostics(graph: RibbonGraph, lam, tol: float = 1e-9) -> DomainDiagnostics:
    if tol < 0:
        raise CoordinateError("tol must be non-negative")
    lam = np.asarray(LambdaAssignment(np.ravel(lam)), dtype=float)
    x = simplicial_coordinates(graph, lam)
    rho = rho_faces_sector(graph, lam)
    mu = float(lam.min())
    rho_tot = float(rho.sum())
    bound = 8.0 * graph.num_vertices / mu
    return DomainDiagnostics(
        x=x.tolist(),
        rho=rho.tolist(),
        rho_total=rho_tot,
        min_lambda=mu,
        triangle_ok=bool(triangle_ok(graph, lam)),
        in_domain=bool(np.all(x > 0) and np.all(np.abs(rho - 1.0) <= tol)),
        ge4_ok=mu > 4.0,
        rho_bound=bound,
        rholess_ok=rho_tot < bound,
    )


def scale(lam, t: float) -> np.ndarray:
    if not t > 0:
        raise CoordinateError(f"scale factor must be positive, got {t}")
    return _lam(lam) * t


def normalize_to_slice(graph: RibbonGraph, lam) -> np.ndarray:
    """Rescale a one-face point radially onto rho = 1."""
    if graph.num_faces != 1:
        raise CoordinateError("slice normalization is only defined for one-face graphs")
    lam = _lam(lam)
    r = rho_total(graph, lam)
    if np.any(r <= 0):
        raise CoordinateError("rho must be positive to normalize")
    return lam * np.asarray(r)[..., None]


def drho_dlambda_all(graph: RibbonGraph, lam) -> np.ndarray:
    """Jacobian d rho_i / d lambda_e, shape (..., F, N).

    Each sector term r/(p q) has d/d(lambda_e) = (m_r - m_p - m_q) alpha / lambda_e
    where m counts the slots of the sector occupied by e.
    """
    t = tables(graph)
    lam = _lam(lam)
    s = sector_alphas(graph, lam)
    out = np.zeros(s.shape[:-1] + (t.num_faces, t.num_edges))
    for j in range(s.shape[-1]):
        i = t.sector_face[j]
        out[..., i, t.sector_opp[j]] += 2.0 * s[..., j]
        out[..., i, t.sector_in[j]] -= 2.0 * s[..., j]
        out[..., i, t.sector_out[j]] -= 2.0 * s[..., j]
    return out / lam[..., None, :]


def drho_dlambda(graph: RibbonGraph, lam, i: int, e: int):
    return drho_dlambda_all(graph, lam)[..., i, e]


def monogon_faces(graph: RibbonGraph) -> list[int]:
    """Faces of length one: bounded by a single loop edge."""
    return [i for i, c in enumerate(graph.faces) if len(c) == 1]
