"""Closed-form upper and lower bounds on Weil-Petersson volumes.

Every bound is evaluated in log space first (factorials via ``math.lgamma``
on exact integers) so that g in the hundreds does not overflow; the float
value is ``exp`` of the log and may be ``inf`` for large g.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .ribbon_graph import check_hyperbolic, dual, enumerate_trivalent, canonical_form, contract_puncture_pair, non_loop_edges

LN4 = math.log(4.0)
VARIANTS = ("assembled", "conclusion-n1", "general-n")
# the general-n constant quoted after the final product: any C > 2^17 3^3 / e^2
GENERAL_N_CONSTANT = 2**17 * 3**3 / math.e**2

_PROVENANCE = {
    "per_graph_bound": "2^N 3^V N^n (8/3)^((N-1)/2) (2V)^n",
    "per_graph_bound_n1": "2^(4g-2) 3^V (8/3)^((N-1)/2) N",
    "cell_count_asymptotic": "(2g)!/N (6/e)^(2g)",
    "triangulation_bound": "(2g)! N^(2n-3) / 2^(n-1) (6/e)^(2g)",
    "conclusion-n1": "(2g)! 2^(4g-2) 3^(4g-2) (ln 4)^(6g-3) (6/e)^(2g)",
    "general-n": "(2g)! N^(2n-3)/2^(n-1) (6/e)^(2g) 2^N 3^V N^n (8/3)^(N/2) (2V)^n",
    "assembled": "cell_count_asymptotic(g) * per_graph_bound_n1(g)",
    "penner_lower": "(8 e^2/9)^(2g) (2g)! / (2 (6g-3)^2)",
}


class BoundError(ValueError):
    pass


def counts(g: int, n: int) -> tuple[int, int]:
    """(N, V) = (6g-6+3n, 4g-4+2n)."""
    check_hyperbolic(g, n)
    return 6 * g - 6 + 3 * n, 4 * g - 4 + 2 * n


def _lfact(m: int) -> float:
    return math.lgamma(m + 1)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def log_per_graph_bound(g: int, n: int) -> float:
    N, V = counts(g, n)
    return (N * math.log(2) + V * math.log(3) + n * math.log(N)
            + (N - 1) / 2 * math.log(8 / 3) + n * math.log(2 * V))


def per_graph_bound(g: int, n: int) -> float:
    return _exp(log_per_graph_bound(g, n))


def log_per_graph_bound_n1(g: int) -> float:
    N, V = counts(g, 1)
    return (4 * g - 2) * math.log(2) + V * math.log(3) + (N - 1) / 2 * math.log(8 / 3) + math.log(N)


def per_graph_bound_n1(g: int) -> float:
    return _exp(log_per_graph_bound_n1(g))


def log_cell_count_asymptotic(g: int) -> float:
    N, _ = counts(g, 1)
    return _lfact(2 * g) - math.log(N) + 2 * g * math.log(6 / math.e)


def cell_count_asymptotic(g: int) -> float:
    return _exp(log_cell_count_asymptotic(g))


def log_triangulation_bound(g: int, n: int) -> float:
    N, _ = counts(g, n)
    return (_lfact(2 * g) + (2 * n - 3) * math.log(N) - (n - 1) * math.log(2)
            + 2 * g * math.log(6 / math.e))


def triangulation_bound(g: int, n: int) -> float:
    return _exp(log_triangulation_bound(g, n))


def log_total_upper_bound(g: int, n: int, variant: str) -> float:
    if variant not in VARIANTS:
        raise BoundError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    N, V = counts(g, n)
    if variant in ("conclusion-n1", "assembled") and n != 1:
        raise BoundError(f"variant {variant!r} needs n = 1, got n = {n}")
    if variant == "conclusion-n1":
        return (_lfact(2 * g) + (4 * g - 2) * (math.log(2) + math.log(3))
                + (6 * g - 3) * math.log(LN4) + 2 * g * math.log(6 / math.e))
    if variant == "assembled":
        return log_cell_count_asymptotic(g) + log_per_graph_bound_n1(g)
    return (log_triangulation_bound(g, n) + N * math.log(2) + V * math.log(3) + n * math.log(N)
            + N / 2 * math.log(8 / 3) + n * math.log(2 * V))


def total_upper_bound(g: int, n: int, variant: str = "general-n") -> float:
    return _exp(log_total_upper_bound(g, n, variant))


def log_penner_lower_bound(g: int) -> float:
    check_hyperbolic(g, 1)
    return 2 * g * math.log(8 * math.e**2 / 9) + _lfact(2 * g) - math.log(2 * (6 * g - 3) ** 2)


def penner_lower_bound(g: int) -> float:
    return _exp(log_penner_lower_bound(g))


def limit_ratio(g: int, n: int, variant: str) -> float:
    """ln(total upper bound) / (g ln g); undefined at g = 1."""
    if g < 2:
        raise BoundError("the ratio ln(vol)/(g ln g) needs g >= 2")
    return log_total_upper_bound(g, n, variant) / (g * math.log(g))


def limit_report(g_max: int, n: int = 1, variants=None, g_min: int = 2) -> list[dict]:
    if variants is None:
        variants = ("conclusion-n1", "assembled", "general-n") if n == 1 else ("general-n",)
    rows = []
    for g in range(g_min, g_max + 1):
        row = {"g": g, "n": n}
        for v in variants:
            row[v] = limit_ratio(g, n, v)
        rows.append(row)
    return rows


# -- exact triangulation counts ----------------------------------------------

def count_triangulations_exact(g: int, n: int, max_vertices: int | None = None) -> int:
    """|T(g, n)|: ideal triangulations up to isomorphism, via their dual graphs."""
    kw = {} if max_vertices is None else {"max_vertices": max_vertices}
    return len(enumerate_trivalent(g, n, **kw))


def verify_counting_recursion(g: int, n: int, max_vertices: int | None = None) -> dict:
    """Check |T(g,n)| < N^2/2 |T(g,n-1)| and closure of contractions in T(g,n-1)."""
    kw = {} if max_vertices is None else {"max_vertices": max_vertices}
    upper = enumerate_trivalent(g, n, **kw)
    lower = enumerate_trivalent(g, n - 1, **kw)
    N, _ = counts(g, n)
    catalog = {iso.canonical for iso in lower}
    contractions = 0
    closed = True
    every_has_non_loop = True
    for iso in upper:
        tri = dual(iso.canonical)
        edges = non_loop_edges(tri)
        every_has_non_loop &= bool(edges)
        for e in edges:
            contracted = contract_puncture_pair(tri, e)
            contractions += 1
            closed &= canonical_form(dual(contracted)).canonical in catalog
    inequality = len(upper) < N**2 / 2 * len(lower)
    return {
        "g": g,
        "n": n,
        "count": len(upper),
        "count_lower": len(lower),
        "factor": N**2 / 2,
        "inequality_ok": inequality,
        "contractions": contractions,
        "contractions_closed": closed,
        "non_loop_edge_exists": every_has_non_loop,
        "ok": inequality and closed and every_has_non_loop,
    }


@dataclass
class BoundReport:
    g: int
    n: int
    N: int
    V: int
    per_graph_bound: float
    per_graph_bound_n1: float | None
    cell_count_asymptotic: float
    triangulation_bound: float
    total_upper: dict
    log_total_upper: dict
    penner_lower: float | None
    limit_ratio: dict
    cell_count_exact: int | None = None
    aut_mass_exact: float | None = None
    provenance: dict = field(default_factory=lambda: dict(_PROVENANCE))

    def as_record(self) -> dict:
        return asdict(self)


def bound_report(g: int, n: int, variant: str | None = None, exact_cap: int | None = 6) -> BoundReport:
    N, V = counts(g, n)
    if variant is None:
        variants = ["general-n"] + (["conclusion-n1", "assembled"] if n == 1 else [])
    else:
        log_total_upper_bound(g, n, variant)
        variants = [variant]
    logs = {v: log_total_upper_bound(g, n, v) for v in variants}
    ratios = {v: (logs[v] / (g * math.log(g)) if g >= 2 else None) for v in variants}
    exact = mass = None
    if exact_cap is not None and V <= exact_cap:
        classes = enumerate_trivalent(g, n)
        exact = len(classes)
        mass = sum(1.0 / c.aut_order for c in classes)
    return BoundReport(
        g=g,
        n=n,
        N=N,
        V=V,
        per_graph_bound=per_graph_bound(g, n),
        per_graph_bound_n1=per_graph_bound_n1(g) if n == 1 else None,
        cell_count_asymptotic=cell_count_asymptotic(g),
        triangulation_bound=triangulation_bound(g, n),
        total_upper={v: _exp(x) for v, x in logs.items()},
        log_total_upper=logs,
        penner_lower=penner_lower_bound(g) if n == 1 else None,
        limit_ratio=ratios,
        cell_count_exact=exact,
        aut_mass_exact=mass,
    )
