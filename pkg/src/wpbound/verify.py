"""Property suites run by ``wpbound verify``.

Each suite returns ``Check`` records; a suite passes when every record does.
Records carry the property name so a failure says what was violated.
"""
from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field

import numpy as np

from . import penner_coords as pc
from .bounds import verify_counting_recursion
from .decomposition import (LinkingChoice, all_choices, decompose, intout_theta, trick3_series,
                            verify_lemma, DecompositionError)
from .mc_engine import domain_points, domain_points_walk, SamplingError
from .ribbon_graph import enumerate_trivalent, genus, theta
from .wp_form import (abs_density_batch, density_at, explicit_density_n1, explicit_prefactor, pfaffian,
                      restricted_form, two_form_matrix, volume_form_coeffs)

SUITES = ("triangle", "lemmas", "forms", "stokes", "decomposition", "counting")


@dataclass
class Check:
    suite: str
    property: str
    passed: bool
    params: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SuiteConfig:
    genus: int | None = None
    punctures: int | None = None
    samples: int = 10_000
    seed: int = 0
    tol: float = 1e-8


def _targets(cfg: SuiteConfig, default):
    if cfg.genus is None and cfg.punctures is None:
        return list(default)
    g = 1 if cfg.genus is None else cfg.genus
    n = 1 if cfg.punctures is None else cfg.punctures
    return [(g, n)]


def in_domain_points(graph, count: int, seed: int = 0) -> np.ndarray:
    """Rejection sampling where the cell is large, a confined walk otherwise."""
    try:
        return domain_points(graph, count, seed=seed, max_draws=max(50 * count, 1 << 18))
    except SamplingError:
        return domain_points_walk(graph, count, seed=seed)


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)


# -- triangle: coordinates and the in-domain theorems -------------------------

def suite_triangle(cfg: SuiteConfig) -> list[Check]:
    out = []
    rng = np.random.default_rng(cfg.seed)
    for g, n in _targets(cfg, [(1, 1), (0, 3), (1, 2), (2, 1)]):
        for k, iso in enumerate(enumerate_trivalent(g, n)):
            G = iso.canonical
            par = {"g": g, "n": n, "graph": k}
            lam = np.exp(rng.uniform(-3, 3, (cfg.samples, G.num_edges)))
            x = pc.simplicial_coordinates(G, lam)
            # sums of X_e cancel, so compare against the size of the terms
            scale_x = np.abs(pc.half_edge_terms(G, lam)).sum(axis=1)
            r_sec, r_path = pc.rho_faces_sector(G, lam), pc.rho_faces_path(G, lam)
            err_total = np.abs(r_sec.sum(axis=1) - 2 * x.sum(axis=1)) / (2 * scale_x)
            err_face = np.max(np.abs(r_sec - r_path), axis=1) / scale_x
            out.append(Check("triangle", "rho total equals twice the sum of X", bool(err_total.max() <= 1e-12),
                             par, {"max_rel_error": float(err_total.max())}))
            out.append(Check("triangle", "path and sector face sums agree", bool(err_face.max() <= 1e-12),
                             par, {"max_rel_error": float(err_face.max())}))
            if n != 1:
                continue
            pts = in_domain_points(G, cfg.samples, seed=cfg.seed)
            xs = pc.simplicial_coordinates(G, pts)
            rho = pc.rho_total(G, pts)
            mu = pts.min(axis=1)
            tri = pc.triangle_ok(G, pts)
            V = G.num_vertices
            out.append(Check("triangle", "sampled points lie in the cell",
                             bool(np.all(xs > 0) and np.all(np.abs(rho - 1) <= 1e-9)),
                             par, {"points": len(pts)}))
            out.append(Check("triangle", "triangle inequality at every vertex in the cell", bool(tri.all()),
                             par, {"violations": int((~tri).sum()), "points": len(pts)}))
            out.append(Check("triangle", "every lambda exceeds 4 in the cell", bool(np.all(mu > 4)),
                             par, {"violations": int((mu <= 4).sum()), "min_lambda": float(mu.min())}))
            ok = rho < 8 * V / mu
            out.append(Check("triangle", "rho below 8V/mu in the cell", bool(ok.all()),
                             par, {"violations": int((~ok).sum()), "max_ratio": float((rho * mu / (8 * V)).max())}))
    # the vertex inequality f/g + g/f - e^2/(fg) + 2 > 0 is the triangle inequality e < f + g
    e, f, g_ = np.exp(rng.uniform(-3, 3, (3, cfg.samples)))
    lhs = np.sign(f / g_ + g_ / f - e**2 / (f * g_) + 2)
    rhs = np.sign(f + g_ - e)
    out.append(Check("triangle", "vertex positivity equivalent to triangle inequality", bool(np.all(lhs == rhs)),
                     {"triples": cfg.samples}, {"mismatches": int((lhs != rhs).sum())}))
    return out


# -- stokes: the derivative bound ---------------------------------------------

def _repeated_slot_pairs(G) -> set[tuple[int, int]]:
    """(face, edge) pairs where the face turns between two ends of one loop edge."""
    t = pc.tables(G)
    return {(int(t.sector_face[j]), int(t.sector_in[j]))
            for j in range(len(t.sector_face)) if t.sector_in[j] == t.sector_out[j]}


def suite_stokes(cfg: SuiteConfig) -> list[Check]:
    out = []
    rng = np.random.default_rng(cfg.seed + 1)
    m = min(cfg.samples, 1000)
    for g, n in _targets(cfg, [(1, 1), (0, 3), (1, 2), (0, 4), (2, 1)]):
        for k, iso in enumerate(enumerate_trivalent(g, n)):
            G = iso.canonical
            par = {"g": g, "n": n, "graph": k}
            N = G.num_edges
            if n == 1:
                lam = in_domain_points(G, m, seed=cfg.seed)
            else:
                lam = np.exp(rng.uniform(-2, 2, (m, N)))
            d = pc.drho_dlambda_all(G, lam)
            rho = pc.rho_faces_sector(G, lam)
            ratio = np.abs(d) * lam[:, None, :] / rho[:, :, None]
            mask = np.ones(ratio.shape[1:], bool)
            for i, e in _repeated_slot_pairs(G):
                mask[i, e] = False
            plain = ratio[:, mask]
            worst = float(plain.max()) if plain.size else 0.0
            out.append(Check("stokes", "derivative of rho_i bounded by rho_i/lambda_e", worst <= 1 + 1e-12,
                             par, {"max_ratio": worst, "points": m}))
            if not mask.all():
                doubled = float(ratio[:, ~mask].max())
                out.append(Check("stokes", "monogon faces: derivative bounded by 2 rho_i/lambda_e",
                                 doubled <= 2 + 1e-12, par,
                                 {"max_ratio": doubled, "plain_bound_exceeded": bool(doubled > 1)}))
            # central differences in log lambda
            h = 1e-5
            fd = np.zeros_like(d)
            for e in range(N):
                up, dn = lam.copy(), lam.copy()
                up[:, e] *= math.exp(h)
                dn[:, e] *= math.exp(-h)
                fd[:, :, e] = (pc.rho_faces_sector(G, up) - pc.rho_faces_sector(G, dn)) / (2 * h * lam[:, None, e])
            err = np.abs(fd - d) / (rho[:, :, None] / lam[:, None, :])
            out.append(Check("stokes", "analytic derivative matches central differences",
                             bool(err.max() <= 1e-6), par, {"max_rel_error": float(err.max())}))
    return out


# -- forms --------------------------------------------------------------------

def slice_frame(G, lam) -> np.ndarray:
    """Orthonormal basis of the tangent space of rho = 1 at each point, (B, N, N-1)."""
    grad = pc.drho_dlambda_all(G, lam).sum(axis=-2)
    _, _, vt = np.linalg.svd(grad[:, None, :])
    return np.swapaxes(vt[:, 1:, :], 1, 2)


def suite_forms(cfg: SuiteConfig) -> list[Check]:
    out = []
    rng = np.random.default_rng(cfg.seed + 2)
    m = min(cfg.samples, 1000)
    for g, n in _targets(cfg, [(1, 1), (0, 3), (1, 2), (0, 4), (2, 1), (0, 5)]):
        for k, iso in enumerate(enumerate_trivalent(g, n)):
            G = iso.canonical
            par = {"g": g, "n": n, "graph": k}
            N = G.num_edges
            b = two_form_matrix(G).array
            ok = bool((b == -b.T).all() and (b % 2 == 0).all() and np.abs(b).max() <= 4)
            out.append(Check("forms", "two-form matrix antisymmetric with even entries of size <= 4", ok,
                             par, {"b": b.tolist()}))
            if N <= 9:
                coeffs = volume_form_coeffs(G, n).coefficients
                top = max(abs(v) for v in coeffs.values())
                out.append(Check("forms", "volume form coefficients bounded by 2^N", top <= 2**N,
                                 par, {"max_abs_coefficient": top, "bound": 2**N}))
                if n == 1:
                    vals = [coeffs[(i,)] for i in range(N)]
                    s = 1 if vals[0] < 0 else -1
                    want = [s * (-1) ** (i + 1) * explicit_prefactor(g) for i in range(N)]
                    out.append(Check("forms", "one-face coefficients are alternating +-2^(4g-2)", vals == want,
                                     par, {"coefficients": vals}))
            if n == 1:
                pts = in_domain_points(G, m, seed=cfg.seed)
                frames = slice_frame(G, pts)
                err = 0.0
                for lam, fr in zip(pts, frames):
                    a = abs(density_at(G, lam, fr))
                    c = abs(explicit_density_n1(G, lam, fr))
                    err = max(err, abs(a - c) / max(a, c))
                out.append(Check("forms", "Pfaffian density equals explicit one-face density",
                                 err <= 1e-9, par, {"max_rel_error": err, "points": m}))
            # Pf^2 = det on random restrictions
            lam = np.exp(rng.uniform(-1, 1, (50, N)))
            d2 = 2 * ((N - n) // 2)
            fr = rng.standard_normal((50, N, d2))
            err = 0.0
            for a in restricted_form(G, lam, fr):
                p2, det = pfaffian(a) ** 2, np.linalg.det(a)
                err = max(err, abs(p2 - det) / max(abs(det), abs(p2), 1e-300))
            out.append(Check("forms", "Pfaffian squared equals determinant", err <= 1e-9, par,
                             {"max_rel_error": err}))
    return out


# -- lemmas -------------------------------------------------------------------

def lemma_grid(count: int = 20) -> list[float]:
    """Log-spaced edge values above 4, always including e = 8."""
    vals = list(np.geomspace(4.5, 1e4, count - 1)) + [8.0]
    return sorted(float(v) for v in vals)


def suite_lemmas(cfg: SuiteConfig) -> list[Check]:
    out = []
    grid = lemma_grid(20)
    for which, key in (("trick1", "e"), ("trick2", "g"), ("trick3", "e")):
        for v in grid:
            r = verify_lemma(which, {key: v}, tol=cfg.tol)
            out.append(Check("lemmas", f"{which} bound", r.passed, r.params,
                             {"numeric": r.numeric, "bound": r.bound, "tail_bound": r.tail_bound,
                              "quad_error": r.quad_error, **r.extra}))
    for m in (2, 3, 4):
        for i in range(m):
            for v in (5.0, 50.0, 5000.0):
                r = verify_lemma("chainok", {"m": m, "i": i, "value": v}, tol=cfg.tol)
                out.append(Check("lemmas", "chainok bound", r.passed, r.params,
                                 {"numeric": r.numeric, "bound": r.bound}))
    for m in (2, 3):
        for v in (4.5, 12.0, 500.0):
            r = verify_lemma("wheelok", {"m": m, "g": v}, tol=cfg.tol)
            out.append(Check("lemmas", "wheelok bound", r.passed, r.params,
                             {"numeric": r.numeric, "bound": r.bound, "tail_bound": r.tail_bound}))
    s = trick3_series(1e12)
    out.append(Check("lemmas", "series sum below pi^2/6 < 5/3", s < math.pi**2 / 6 < 5 / 3, {},
                     {"series": s, "pi2_6": math.pi**2 / 6}))
    return out


# -- decomposition ------------------------------------------------------------

def suite_decomposition(cfg: SuiteConfig) -> list[Check]:
    out = []
    rnd = random.Random(cfg.seed)
    for g, n in _targets(cfg, [(1, 1), (0, 3), (1, 2), (0, 4), (2, 1)]):
        for k, iso in enumerate(enumerate_trivalent(g, n)):
            G = iso.canonical
            par = {"g": g, "n": n, "graph": k}
            V, N = G.num_vertices, G.num_edges
            if V <= 4:
                choices = list(all_choices(G))
            else:
                choices = [LinkingChoice(tuple(rnd.randrange(3) for _ in range(V))) for _ in range(100)]
            failures = []
            runs = 0
            for c in choices:
                for mu in range(N):
                    runs += 1
                    try:
                        d = decompose(G, c, mu)
                        if not d.is_partition(N):
                            failures.append({"choice": list(c.minimal_at), "mu": mu, "reason": "not a partition"})
                    except DecompositionError as exc:
                        failures.append({"choice": list(c.minimal_at), "mu": mu, "reason": str(exc)})
            out.append(Check("decomposition", "decomposition succeeds and partitions the edges", not failures,
                             par, {"runs": runs, "exhaustive": V <= 4, "failures": failures[:5]}))
            if n == 1:
                out.append(_linked_ratio_check(G, par, min(cfg.samples, 10_000), cfg.seed))
    t = theta()
    for c in all_choices(t):
        r = intout_theta(t, c, mu=12.0, tol=cfg.tol)
        out.append(Check("decomposition", "theta integral over a linking region below 8/3", r.passed,
                         r.params, {"numeric": r.numeric, "tail_bound": r.tail_bound,
                                    "bound": r.bound, "margin": r.extra["margin"]}))
    return out


def _linked_ratio_check(G, par, count, seed) -> Check:
    """Linked edges (other edge at the vertex is the smallest) stay within a factor 2."""
    pts = in_domain_points(G, count, seed=seed)
    ve = pc.tables(G).vertex_edges
    trip = pts[:, ve]  # (B, V, 3)
    order = np.sort(trip, axis=-1)
    # the two linked edges are the two largest at each vertex
    ratio = order[..., 2] / order[..., 1]
    tri = pc.triangle_ok(G, pts)
    worst = float(ratio[tri].max()) if tri.any() else 1.0
    return Check("decomposition", "linked edges within a factor 2 where triangle inequalities hold",
                 worst <= 2 + 1e-12, par, {"max_ratio": worst, "points": int(tri.sum())})


# -- counting -----------------------------------------------------------------

def suite_counting(cfg: SuiteConfig) -> list[Check]:
    out = []
    for g, n in _targets(cfg, [(1, 2), (0, 4), (0, 5)]):
        r = verify_counting_recursion(g, n)
        par = {"g": g, "n": n}
        out.append(Check("counting", "triangulation count recursion inequality", r["inequality_ok"], par,
                         {k: r[k] for k in ("count", "count_lower", "factor")}))
        out.append(Check("counting", "contractions land in the smaller catalog", r["contractions_closed"], par,
                         {"contractions": r["contractions"]}))
        out.append(Check("counting", "every triangulation has an edge between distinct punctures",
                         r["non_loop_edge_exists"], par, {}))
    return out


_TABLE = {
    "triangle": suite_triangle,
    "lemmas": suite_lemmas,
    "forms": suite_forms,
    "stokes": suite_stokes,
    "decomposition": suite_decomposition,
    "counting": suite_counting,
}


def run_suite(name: str, cfg: SuiteConfig) -> list[Check]:
    if name == "all":
        return [c for s in SUITES for c in _TABLE[s](cfg)]
    if name not in _TABLE:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES + ('all',))}")
    return _TABLE[name](cfg)
