"""The Weil-Petersson two-form in logarithmic lambda coordinates.

At each vertex with cyclic edge order (e, f, g) the form picks up
``-2 (dln e ^ dln f + dln f ^ dln g + dln g ^ dln e)``.  We store it as an
antisymmetric integer matrix ``b`` with ``omega = sum_{j<k} b[j, k] dln_j ^ dln_k``.

Convention: the volume form is the divided power ``omega^k / k!`` with
``k = 3g - 3 + n``, so that

    omega^k / k! = sum_S Pf(b[S, S]) dln_S

over increasing index sets S of size 2k.  This is the normalization under
which the one-puncture closed form (prefactor 2^(4g-2)) and the coefficient
bound |a_I| <= 2^N both hold exactly; the plain power is k! times larger.
Pass ``divided=False`` to get the plain power.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ribbon_graph import RibbonGraph, RibbonGraphError, genus

MAX_EXACT_EDGES = 12


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class TwoFormMatrix:
    b: tuple[tuple[int, ...], ...]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.b, dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.b)

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.b]


@dataclass(frozen=True)
class VolumeFormExpansion:
    """Coefficient a_I of dln_1 ^ ... (omit I) ... ^ dln_N, keyed by sorted I."""
    power: int
    coefficients: dict

    def to_json(self) -> list[dict]:
        return [{"omitted": list(k), "coefficient": v} for k, v in sorted(self.coefficients.items())]


@lru_cache(maxsize=256)
def two_form_matrix(graph: RibbonGraph) -> TwoFormMatrix:
    try:
        graph.require_trivalent()
    except RibbonGraphError as exc:
        raise FormError(str(exc)) from None
    N = graph.num_edges
    b = [[0] * N for _ in range(N)]
    eo = graph.edge_of
    for cyc in graph.vertices:
        e, f, g = (eo[h] for h in cyc)
        for x, y in ((e, f), (f, g), (g, e)):
            b[x][y] -= 2
            b[y][x] += 2
    return TwoFormMatrix(tuple(tuple(r) for r in b))


def pfaffian_exact(a, idx: tuple[int, ...]) -> int:
    """Integer Pfaffian of the principal submatrix a[idx, idx] by row expansion."""
    memo: dict = {}

    def pf(rest: tuple[int, ...]) -> int:
        if not rest:
            return 1
        if rest in memo:
            return memo[rest]
        i0 = rest[0]
        total = 0
        for j in range(1, len(rest)):
            c = a[i0][rest[j]]
            if c:
                sub = rest[1:j] + rest[j + 1:]
                total += (-1) ** (j + 1) * c * pf(sub)
        memo[rest] = total
        return total

    if len(idx) % 2:
        return 0
    return pf(tuple(idx))


def volume_form_coeffs(graph: RibbonGraph, n: int | None = None, divided: bool = True) -> VolumeFormExpansion:
    """Exact integer coefficients of the volume form in the dln basis."""
    if n is None:
        n = graph.num_faces
    N = graph.num_edges
    if N > MAX_EXACT_EDGES:
        raise FormError(f"exact expansion capped at N <= {MAX_EXACT_EDGES} edges, got N = {N}")
    k = (N - n) // 2
    if N - n != 2 * k or k < 0:
        raise FormError(f"N - n = {N - n} must be even and non-negative")
    b = two_form_matrix(graph).b
    fact = 1 if divided else math.factorial(k)
    coeffs = {}
    for omitted in itertools.combinations(range(N), n):
        keep = tuple(j for j in range(N) if j not in omitted)
        coeffs[omitted] = fact * pfaffian_exact(b, keep)
    return VolumeFormExpansion(k, coeffs)


def pfaffian(a) -> float:
    """Pfaffian of a real antisymmetric matrix (Parlett-Reid elimination)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise FormError("pfaffian needs a square matrix")
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        p = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if p != k + 1:
            a[[k + 1, p], :] = a[[p, k + 1], :]
            a[:, [k + 1, p]] = a[:, [p, k + 1]]
            pf = -pf
        piv = a[k + 1, k]
        if piv == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            # eliminate row/col k using row/col k+1, preserving antisymmetry
            a[k + 2:, k + 2:] += np.outer(tau, a[k + 2:, k + 1]) - np.outer(a[k + 2:, k + 1], tau)
    return pf


def form_matrix_dlambda(graph: RibbonGraph, lam) -> np.ndarray:
    """M[j, k] = b[j, k] / (lambda_j lambda_k): the two-form in d-lambda coordinates."""
    b = two_form_matrix(graph).array.astype(float)
    lam = np.asarray(lam, dtype=float)
    return b / (lam[..., :, None] * lam[..., None, :])


def restricted_form(graph: RibbonGraph, lam, frame) -> np.ndarray:
    frame = np.asarray(frame, dtype=float)
    m = form_matrix_dlambda(graph, lam)
    return np.swapaxes(frame, -1, -2) @ m @ frame


def density_at(graph: RibbonGraph, lam, frame, divided: bool = True) -> float:
    """The volume form evaluated on the 2k columns of ``frame`` (shape N x 2k)."""
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 2 or frame.shape[0] != graph.num_edges:
        raise FormError(f"frame must have shape ({graph.num_edges}, 2k)")
    dim = frame.shape[1]
    if dim % 2:
        raise FormError(f"frame dimension {dim} is odd")
    norm = 1 if divided else math.factorial(dim // 2)
    return norm * pfaffian(restricted_form(graph, lam, frame))


def abs_density_batch(graph: RibbonGraph, lam, frames) -> np.ndarray:
    """|omega^k / k!| on a batch of frames via |Pf| = sqrt(|det|).

    ``lam`` has shape (B, N) and ``frames`` shape (B, N, 2k).
    """
    a = restricted_form(graph, lam, frames)
    return np.sqrt(np.abs(np.linalg.det(a)))


def explicit_prefactor(g: int) -> int:
    return 2 ** (4 * g - 2)


def explicit_density_n1(graph: RibbonGraph, lam, frame) -> float:
    """Penner's explicit one-puncture form on ``frame`` (N x (N-1)).

    2^(4g-2) * sum_i (-1)^i det(rows of (frame_j / lambda_j), row i omitted),
    with i counted from 1.
    """
    if graph.num_faces != 1:
        raise FormError("the explicit form applies to one-face graphs only")
    N = graph.num_edges
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (N, N - 1):
        raise FormError(f"frame must have shape ({N}, {N - 1}), got {frame.shape}")
    rows = frame / np.asarray(lam, dtype=float)[:, None]
    total = 0.0
    for i in range(N):
        total += (-1) ** (i + 1) * np.linalg.det(np.delete(rows, i, axis=0))
    return explicit_prefactor(genus(graph)) * total
