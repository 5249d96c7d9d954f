"""Numerical integration: cell volumes for one-face graphs and adaptive quadrature.

The top cell D(G) of a one-face graph is the slice rho = 1 of the cone
{X_e > 0}.  Because X_e and rho are homogeneous of degree -1 in lambda,
every direction u with X(u) > 0 meets the slice exactly once, at
lambda = rho(u) * u.  We integrate over directions: sample u, push a tangent
frame of the direction chart through u -> rho(u) u, and evaluate the
volume form on the image frame.

Random draws come from a counter-based generator (Philox) keyed by the seed,
with one counter block per chunk of samples, so the stream and the merged
result do not depend on how chunks are spread over shards.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import penner_coords as pc
from .ribbon_graph import RibbonGraph
from .wp_form import abs_density_batch

BLOCK = 1 << 14
PROPOSALS = ("simplex", "cube", "log-uniform")


class SamplingError(RuntimeError):
    pass


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    samples: int = 100_000
    proposal: str = "simplex"
    cutoff: float = 1e4
    shards: int = 1
    boundary_eps: float = 1e-3

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if self.proposal not in PROPOSALS:
            raise ValueError(f"unknown proposal {self.proposal!r}")
        if self.proposal == "log-uniform" and not self.cutoff > 4:
            raise ValueError("log-uniform proposal needs cutoff > 4")
        if self.shards < 1:
            raise ValueError("shards must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


@dataclass
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    accept_rate: float
    proposal: str = "simplex"
    tail_fraction: float = 0.0
    mean_without_tail: float = 0.0
    extra: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return asdict(self)


def block_rng(seed: int, block: int) -> np.random.Generator:
    # block index in the top counter word: streams of different blocks never overlap
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


# -- chart maps ---------------------------------------------------------------

def slice_point(graph: RibbonGraph, u) -> np.ndarray:
    """The slice point lambda = rho(u) u on the ray through u."""
    u = np.asarray(u, dtype=float)
    return pc.rho_total(graph, u)[..., None] * u


def _push_frame(graph: RibbonGraph, v: np.ndarray, chart_frame: np.ndarray) -> np.ndarray:
    """Push chart tangent vectors through v -> rho(v) v.

    D(rho v) w = rho w + (grad rho . w) v.  ``v`` is (B, N), ``chart_frame``
    is (B, N, d); returns (B, N, d).
    """
    rho = pc.rho_total(graph, v)
    grad = pc.drho_dlambda_all(graph, v).sum(axis=-2)
    dots = np.einsum("bn,bnd->bd", grad, chart_frame)
    return rho[:, None, None] * chart_frame + v[:, :, None] * dots[:, None, :]


def _push_frame_fd(graph: RibbonGraph, v: np.ndarray, chart_frame: np.ndarray, h: float = 1e-6) -> np.ndarray:
    cols = []
    for d in range(chart_frame.shape[-1]):
        w = chart_frame[..., d]
        step = h * np.linalg.norm(v, axis=-1, keepdims=True) / np.maximum(np.linalg.norm(w, axis=-1, keepdims=True), 1e-300)
        cols.append((slice_point(graph, v + step * w) - slice_point(graph, v - step * w)) / (2 * step))
    return np.stack(cols, axis=-1)


def _draw(graph: RibbonGraph, cfg: SamplerConfig, rng: np.random.Generator, size: int):
    """Directions v (B, N), chart frames (B, N, N-1) and chart weights (B,)."""
    N = graph.num_edges
    if cfg.proposal == "simplex":
        u = rng.standard_exponential((size, N))
        u /= u.sum(axis=1, keepdims=True)
        frame = np.zeros((N, N - 1))
        frame[: N - 1] = np.eye(N - 1)
        frame[N - 1] = -1.0
        # uniform density on the simplex in (u_1..u_{N-1}) is (N-1)!
        weight = np.full(size, 1.0 / math.factorial(N - 1))
        return u, np.broadcast_to(frame, (size, N, N - 1)).copy(), weight
    if cfg.proposal == "cube":
        face = rng.integers(0, N, size)
        u = rng.random((size, N))
        u[np.arange(size), face] = 1.0
        frames = np.zeros((size, N, N - 1))
        for b in range(size):
            others = [j for j in range(N) if j != face[b]]
            frames[b, others, np.arange(N - 1)] = 1.0
        return u, frames, np.full(size, float(N))
    # log-uniform: log ratios to the last coordinate, truncated at the cutoff
    half = math.log(cfg.cutoff / 4.0)
    w = rng.uniform(-half, half, (size, N - 1))
    v = np.concatenate([np.exp(w), np.ones((size, 1))], axis=1)
    frames = np.zeros((size, N, N - 1))
    idx = np.arange(N - 1)
    frames[:, idx, idx] = v[:, : N - 1]
    return v, frames, np.full(size, (2 * half) ** (N - 1))


def _block_stats(graph: RibbonGraph, cfg: SamplerConfig, block: int, size: int, fd: bool = False):
    rng = block_rng(cfg.seed, block)
    v, frames, weight = _draw(graph, cfg, rng, BLOCK)
    v, frames, weight = v[:size], frames[:size], weight[:size]
    x = pc.simplicial_coordinates(graph, v)
    ok = np.all(x > 0, axis=1)
    vals = np.zeros(size)
    if ok.any():
        va = v[ok]
        push = _push_frame_fd if fd else _push_frame
        img = push(graph, va, frames[ok])
        lam = slice_point(graph, va)
        vals[ok] = weight[ok] * abs_density_batch(graph, lam, img)
    unit = v / v.sum(axis=1, keepdims=True)
    near = ok & (unit.min(axis=1) < cfg.boundary_eps)
    return (block, float(vals.sum()), float(np.square(vals).sum()), int(ok.sum()),
            int(near.sum()), float(vals[near].sum()))


def _run_blocks(graph, cfg, blocks, fd=False):
    return [_block_stats(graph, cfg, b, s, fd) for b, s in blocks]


def estimate_cell_volume_n1(graph: RibbonGraph, config: SamplerConfig, fd_jacobian: bool = False) -> McEstimate:
    """Monte Carlo estimate of the volume of the top cell of a one-face graph.

    Uses the divided-power volume form; the absolute value of the density is
    integrated.
    """
    if graph.num_faces != 1:
        raise SamplingError(f"cell volumes are only estimated for one-face graphs (got n = {graph.num_faces})")
    M = config.samples
    nblocks = -(-M // BLOCK)
    blocks = [(b, min(BLOCK, M - b * BLOCK)) for b in range(nblocks)]
    if config.shards == 1:
        stats = _run_blocks(graph, config, blocks, fd_jacobian)
    else:
        parts = [blocks[s:: config.shards] for s in range(config.shards)]
        with ProcessPoolExecutor(max_workers=config.shards) as pool:
            futures = [pool.submit(_run_blocks, graph, config, p, fd_jacobian) for p in parts]
            stats = [row for fut in futures for row in fut.result()]
    stats.sort(key=lambda r: r[0])
    s1 = s2 = tail = 0.0
    acc = near = 0
    for _, a, b, c, d, t in stats:
        s1 += a
        s2 += b
        acc += c
        near += d
        tail += t
    if acc == 0:
        raise SamplingError(f"no accepted samples out of {M}; the cell was never hit")
    mean = s1 / M
    var = max(s2 / M - mean * mean, 0.0)
    return McEstimate(
        mean=mean,
        std_error=math.sqrt(var / max(M - 1, 1)),
        samples=M,
        seed=config.seed,
        accept_rate=acc / M,
        proposal=config.proposal,
        tail_fraction=near / acc,
        mean_without_tail=(s1 - tail) / M,
    )


def sample_domain_points(graph: RibbonGraph, config: SamplerConfig) -> Iterator[np.ndarray]:
    """Yield slice points of D(G) (one-face graphs) from up to ``samples`` draws."""
    if graph.num_faces != 1:
        raise SamplingError("domain sampling needs a one-face graph")
    M = config.samples
    for b in range(-(-M // BLOCK)):
        size = min(BLOCK, M - b * BLOCK)
        v, _, _ = _draw(graph, config, block_rng(config.seed, b), BLOCK)
        v = v[:size]
        ok = np.all(pc.simplicial_coordinates(graph, v) > 0, axis=1)
        yield from slice_point(graph, v[ok])


def domain_points(graph: RibbonGraph, count: int, seed: int = 0, max_draws: int = 10**8) -> np.ndarray:
    """Collect ``count`` slice points, drawing blocks until enough are accepted."""
    out = []
    b = 0
    cfg = SamplerConfig(seed=seed, samples=BLOCK)
    total = 0
    while total < count:
        if b * BLOCK >= max_draws:
            raise SamplingError(f"only {total} of {count} domain points after {max_draws} draws")
        v, _, _ = _draw(graph, cfg, block_rng(seed, b), BLOCK)
        ok = np.all(pc.simplicial_coordinates(graph, v) > 0, axis=1)
        pts = slice_point(graph, v[ok])
        out.append(pts)
        total += len(pts)
        b += 1
    return np.concatenate(out)[:count]


# -- adaptive quadrature ------------------------------------------------------

@dataclass
class QuadResult:
    value: float
    error: float
    evaluations: int


def adaptive_simpson(fn: Callable[[float], float], a: float, b: float, tol: float,
                     max_depth: int = 48, breakpoints: Sequence[float] = ()) -> QuadResult:
    """Adaptive Simpson rule with Richardson correction.

    ``breakpoints`` inside (a, b) split the interval first so kinks sit on
    panel boundaries.  Raises QuadratureError when panels at ``max_depth``
    leave an error estimate above ``tol``.
    """
    if b <= a:
        return QuadResult(0.0, 0.0, 0)
    cuts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    total = err = 0.0
    evals = 0
    unresolved = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        flo, fmid, fhi = fn(lo), fn(0.5 * (lo + hi)), fn(hi)
        evals += 3
        whole = (hi - lo) / 6 * (flo + 4 * fmid + fhi)
        stack = [(lo, hi, flo, fmid, fhi, whole, tol * (hi - lo) / (b - a), 0)]
        while stack:
            x0, x1, f0, fm, f1, s, eps, depth = stack.pop()
            xm = 0.5 * (x0 + x1)
            fl, fr = fn(0.5 * (x0 + xm)), fn(0.5 * (xm + x1))
            evals += 2
            left = (xm - x0) / 6 * (f0 + 4 * fl + fm)
            right = (x1 - xm) / 6 * (fm + 4 * fr + f1)
            delta = left + right - s
            if abs(delta) <= 15 * eps or depth >= max_depth:
                total += left + right + delta / 15
                err += abs(delta) / 15
                if depth >= max_depth and abs(delta) > 15 * eps:
                    unresolved += abs(delta) / 15
                continue
            stack.append((x0, xm, f0, fl, fm, left, eps / 2, depth + 1))
            stack.append((xm, x1, fm, fr, f1, right, eps / 2, depth + 1))
    if unresolved > tol:
        raise QuadratureError("adaptive Simpson did not converge", err)
    return QuadResult(total, err, evals)


Bound = float | Callable[..., float]


def quadrature(fn: Callable[..., float], region: Sequence[tuple[Bound, Bound]], tol: float = 1e-8,
               breakpoints: Sequence[Sequence | Callable[..., Sequence]] | None = None) -> QuadResult:
    """Iterated adaptive quadrature over a region with dependent bounds.

    ``region[j] = (lo, hi)``; each bound is a number or a callable of the
    outer variables ``x_0..x_{j-1}``.  ``fn`` takes all variables.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dims = len(region)
    bps = list(breakpoints) if breakpoints is not None else [()] * dims
    evals = [0]
    errs = [0.0]

    def resolve(bound, outer):
        return bound(*outer) if callable(bound) else float(bound)

    def level(j, outer, eps):
        lo, hi = resolve(region[j][0], outer), resolve(region[j][1], outer)
        if hi <= lo:
            return 0.0
        bp = bps[j](*outer) if callable(bps[j]) else bps[j]
        if j == dims - 1:
            res = adaptive_simpson(lambda x: fn(*outer, x), lo, hi, eps, breakpoints=bp)
        else:
            # inner levels get a tighter tolerance so their noise stays below ours
            inner = eps / (10 * max(hi - lo, 1.0))
            res = adaptive_simpson(lambda x: level(j + 1, outer + (x,), inner), lo, hi, eps, breakpoints=bp)
        evals[0] += res.evaluations
        if j == 0:
            errs[0] = res.error
        return res.value

    value = level(0, (), tol)
    return QuadResult(value, errs[0], evals[0])


def domain_points_walk(graph: RibbonGraph, count: int, seed: int = 0, chains: int = 1000,
                       step: float = 0.05, burn_in: int = 200, thin: int = 5) -> np.ndarray:
    """In-domain slice points from a random walk confined to the cone X > 0.

    For graphs whose cell is a tiny fraction of the simplex, rejection is too
    slow.  Each chain starts at a rejection-sampled direction and proposes
    multiplicative log-normal moves; moves leaving {X > 0} are refused.  The
    stationary law is uniform in log-direction coordinates; the suites only
    need in-domain points that spread over the cell.
    """
    if graph.num_faces != 1:
        raise SamplingError("domain sampling needs a one-face graph")
    starts = domain_points(graph, min(chains, 64), seed=seed)
    rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 1, 0]))
    v = starts[rng.integers(0, len(starts), chains)].copy()
    out = []
    total = 0
    it = 0
    while total < count:
        prop = v * np.exp(step * rng.standard_normal(v.shape))
        ok = np.all(pc.simplicial_coordinates(graph, prop) > 0, axis=1)
        v[ok] = prop[ok]
        it += 1
        if it > burn_in and it % thin == 0:
            out.append(slice_point(graph, v))
            total += chains
    return np.concatenate(out)[:count]
