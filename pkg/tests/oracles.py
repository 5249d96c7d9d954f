"""Independent brute-force oracles used to freeze expected values.

Nothing here imports the code paths it checks beyond the RibbonGraph
container itself.
"""
from __future__ import annotations

import itertools
import math

import numba
import numpy as np


@numba.njit(cache=True)
def _num_faces(sigma, alpha, seen):
    n = sigma.shape[0]
    for i in range(n):
        seen[i] = False
    count = 0
    for s in range(n):
        if seen[s]:
            continue
        count += 1
        h = s
        while not seen[h]:
            seen[h] = True
            h = sigma[alpha[h]]
    return count


@numba.njit(cache=True)
def _connected(sigma, alpha, seen, stack):
    n = sigma.shape[0]
    for i in range(n):
        seen[i] = False
    top = 0
    stack[top] = 0
    top += 1
    seen[0] = True
    reached = 1
    while top > 0:
        top -= 1
        h = stack[top]
        for k in (sigma[h], alpha[h]):
            if not seen[k]:
                seen[k] = True
                reached += 1
                stack[top] = k
                top += 1
    return reached == n


@numba.njit(cache=True)
def _iso_from(s1, a1, s2, a2, target, f, stack):
    # try the map half-edge 0 -> target and propagate along sigma and alpha
    n = s1.shape[0]
    for i in range(n):
        f[i] = -1
    f[0] = target
    top = 0
    stack[top] = 0
    top += 1
    used = np.zeros(n, dtype=np.bool_)
    used[target] = True
    while top > 0:
        top -= 1
        h = stack[top]
        for which in range(2):
            if which == 0:
                k = s1[h]
                img = s2[f[h]]
            else:
                k = a1[h]
                img = a2[f[h]]
            if f[k] < 0:
                if used[img]:
                    return False
                f[k] = img
                used[img] = True
                stack[top] = k
                top += 1
            elif f[k] != img:
                return False
    return True


@numba.njit(cache=True)
def _isomorphic(s1, a1, s2, a2, f, stack):
    for t in range(s1.shape[0]):
        if _iso_from(s1, a1, s2, a2, t, f, stack):
            return True
    return False


@numba.njit(cache=True)
def _signature(alpha, num_vertices):
    # loops and doubled edges: cheap isomorphism invariants
    loops = 0
    doubled = 0
    for h in range(alpha.shape[0]):
        k = alpha[h]
        if h < k:
            if h // 3 == k // 3:
                loops += 1
            else:
                for j in range(3 * (h // 3), 3 * (h // 3) + 3):
                    m = alpha[j]
                    if j != h and m // 3 == k // 3 and j < h:
                        doubled += 1
    return loops * 1000 + doubled


@numba.njit(cache=True)
def _search(num_vertices, n_faces, max_reps):
    n = 3 * num_vertices
    sigma = np.empty(n, dtype=np.int64)
    for v in range(num_vertices):
        sigma[3 * v] = 3 * v + 1
        sigma[3 * v + 1] = 3 * v + 2
        sigma[3 * v + 2] = 3 * v
    reps = np.zeros((max_reps, n), dtype=np.int64)
    sigs = np.zeros(max_reps, dtype=np.int64)
    nreps = 0
    labeled = 0
    alpha = -np.ones(n, dtype=np.int64)
    # explicit DFS over perfect matchings: the smallest unpaired half-edge
    # is paired with every larger unpaired half-edge in turn
    lo = np.empty(n // 2, dtype=np.int64)
    cand = np.empty(n // 2, dtype=np.int64)
    seen = np.empty(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    f = np.empty(n, dtype=np.int64)
    depth = 0
    lo[0] = 0
    cand[0] = 0
    while depth >= 0:
        h = lo[depth]
        if cand[depth] > 0:
            k_old = cand[depth]
            alpha[h] = -1
            alpha[k_old] = -1
        k = cand[depth] + 1 if cand[depth] > 0 else h + 1
        while k < n and alpha[k] >= 0:
            k += 1
        if k >= n:
            cand[depth] = 0
            depth -= 1
            continue
        cand[depth] = k
        alpha[h] = k
        alpha[k] = h
        if depth == n // 2 - 1:
            if _connected(sigma, alpha, seen, stack) and _num_faces(sigma, alpha, seen) == n_faces:
                labeled += 1
                found = False
                sig = _signature(alpha, num_vertices)
                for r in range(nreps):
                    if sigs[r] == sig and _isomorphic(sigma, alpha, sigma, reps[r], f, stack):
                        found = True
                        break
                if not found:
                    reps[nreps, :] = alpha
                    sigs[nreps] = sig
                    nreps += 1
            continue
        nxt = h + 1
        while alpha[nxt] >= 0:
            nxt += 1
        depth += 1
        lo[depth] = nxt
        cand[depth] = 0
    return nreps, labeled, reps[:nreps]


def brute_force_classes(g: int, n: int, max_reps: int = 4096):
    """(class count, labeled pairing count, representative alphas).

    Every fixed-point-free involution on 3V half-edges is tried against
    sigma = (0 1 2)(3 4 5)...; survivors are deduplicated by a direct
    isomorphism search against each stored representative.
    """
    V = 4 * g - 4 + 2 * n
    count, labeled, reps = _search(V, n, max_reps)
    return int(count), int(labeled), reps


def brute_force_aut_order(sigma, alpha) -> int:
    """Count half-edge permutations commuting with sigma and alpha (all n!)."""
    size = len(sigma)
    total = 0
    for p in itertools.permutations(range(size)):
        if all(p[sigma[h]] == sigma[p[h]] and p[alpha[h]] == alpha[p[h]] for h in range(size)):
            total += 1
    return total


def labeled_count_from_mass(V: int, aut_orders) -> float:
    """Orbit-stabilizer: labeled pairings = V! 3^V sum 1/|Aut|."""
    return math.factorial(V) * 3**V * sum(1.0 / a for a in aut_orders)
