"""Graph polynomials attached to the loop series: the bivariate theta
polynomial with its contraction-deletion recurrence, the omega polynomial
obtained at the imaginary unit with its divisibility and counting
interpretations, the matching polynomial, and the determinant-sum identity.

theta is stored in (b, g) coordinates, where g stands for xi - 1/xi: every
term is a product of f polynomials in that variable, so the coefficients
are plain integers and identity checks are exact equalities.  Evaluations
at xi = sqrt(-1) substitute g = 2i over Gaussian integers; floating complex
never appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import DivisibilityError, IdentityError, SizeError
from .graph import (
    Multigraph,
    contract,
    cycle_rank,
    delete,
    enumerate_disjoint_cycles,
    enumerate_generalized_loops,
    enumerate_matchings,
    is_connected,
)
from .poly import (
    BiPoly,
    GaussianInt,
    UniPoly,
    exact_divide,
    f_poly,
)

ENUMERATION_CAP = 22
DETERMINANT_CAP = 12

_TWO_I = GaussianInt(0, 2)  # xi - 1/xi at xi = sqrt(-1)


@dataclass(frozen=True)
class ThetaPoly:
    """theta in (b, g) coordinates plus its host graph summary."""

    poly: BiPoly
    node_count: int
    edge_count: int
    cycle_rank: int | None  # None when the host graph is disconnected


@dataclass(frozen=True)
class OmegaPoly:
    poly: UniPoly  # integer coefficients, variable b


@dataclass(frozen=True)
class MatchingPoly:
    poly: UniPoly  # alpha(x) = sum_k (-1)^k p(k) x^(n-2k)


def _theta_wrap(g: Multigraph, poly: BiPoly) -> ThetaPoly:
    ok, _ = is_connected(g)
    return ThetaPoly(
        poly=poly,
        node_count=g.node_count,
        edge_count=len(g.edges),
        cycle_rank=cycle_rank(g) if ok else None,
    )


def theta_direct(g: Multigraph, cap: int = ENUMERATION_CAP) -> ThetaPoly:
    """Subset-sum construction: each generalized loop s contributes
    b^|s| * prod_i f_{d_i(s)}(g).  Non-loops vanish through f_1 = 0."""
    if len(g.edges) > cap:
        raise SizeError(f"{len(g.edges)} edges exceed the enumeration cap {cap}")
    acc = BiPoly()
    for s in enumerate_generalized_loops(g):
        deg = [0] * g.node_count
        for e in s:
            a, b = g.edges[e]
            deg[a] += 1
            deg[b] += 1
        term = UniPoly({0: 1}, "g")
        for d in deg:
            if d:
                term = term * f_poly(d)
        acc = acc.add_term(len(s), term)
    return _theta_wrap(g, acc)


def _canonical_key(g: Multigraph):
    return (g.node_count, tuple(sorted((min(a, b), max(a, b)) for a, b in g.edges)))


def _theta_cd_rec(g: Multigraph, memo: dict) -> BiPoly:
    key = _canonical_key(g)
    hit = memo.get(key)
    if hit is not None:
        return hit
    pivot = next((e for e, (a, b) in enumerate(g.edges) if a != b), None)
    if pivot is None:
        # Every edge is a self-loop: theta factorizes over nodes, each node
        # with L loops contributing sum_k C(L,k) b^k f_{2k}(g).
        out = BiPoly.constant(1)
        loops_at = [0] * g.node_count
        for a, _ in g.edges:
            loops_at[a] += 1
        for L in loops_at:
            if L == 0:
                continue
            node_poly = BiPoly()
            for k in range(L + 1):
                node_poly = node_poly.add_term(k, math.comb(L, k) * f_poly(2 * k))
            out = out * node_poly
    else:
        one_minus_b = BiPoly({(0, 0): 1, (1, 0): -1})
        b_var = BiPoly({(1, 0): 1})
        out = one_minus_b * _theta_cd_rec(delete(g, pivot), memo) + b_var * _theta_cd_rec(
            contract(g, pivot), memo
        )
    memo[key] = out
    return out


def theta_contraction_deletion(g: Multigraph) -> ThetaPoly:
    """theta by the recurrence theta = (1-b) theta_{G\\e} + b theta_{G/e} on
    the lowest-id non-loop edge, with all-self-loop graphs as the base case.

    Agrees with theta_direct exactly; that equality is an acceptance check.
    """
    return _theta_wrap(g, _theta_cd_rec(g, {}))


def theta_at_beta1(g: Multigraph) -> tuple[UniPoly, UniPoly]:
    """theta at b = 1, both as the substituted polynomial and as the
    binomial form sum_k C(n,k) f_{2k}; raises if they disagree."""
    n = cycle_rank(g)  # requires connectivity
    substituted = theta_direct(g).poly.eval_first(1).with_var("g")
    binomial = UniPoly({}, "g")
    for k in range(n + 1):
        binomial = binomial + math.comb(n, k) * f_poly(2 * k)
    binomial = binomial.with_var("g")
    if substituted != binomial:
        raise IdentityError(
            f"theta(1,.) mismatch: {substituted} vs binomial form {binomial}"
        )
    return substituted, binomial


def golden_ratio_value(g: Multigraph) -> float:
    """theta at b = 1 and g = 1 (i.e. xi at the golden ratio), which equals
    ((5-sqrt5)/2)^(n-1) + ((5+sqrt5)/2)^(n-1) for cycle rank n."""
    n = cycle_rank(g)
    r5 = math.sqrt(5.0)
    closed = ((5.0 - r5) / 2.0) ** (n - 1) + ((5.0 + r5) / 2.0) ** (n - 1)
    substituted, _ = theta_at_beta1(g)
    value = float(substituted.eval(1))
    if abs(value - closed) > 1e-9 * max(1.0, abs(closed)):
        raise IdentityError(
            f"theta(1, golden) = {value} but closed form gives {closed}"
        )
    return closed


@dataclass(frozen=True)
class LoopCountBound:
    bound: float
    count: int
    attained: bool


def loop_count_bound(g: Multigraph) -> LoopCountBound:
    """Count generalized loops against the golden-ratio bound.

    attained is decided by the combinatorial condition (every node of every
    generalized loop has degree at most three), not by float equality.
    """
    loops = enumerate_generalized_loops(g)
    count = len(loops)
    bound = golden_ratio_value(g)
    if count > bound + 1e-9:
        raise IdentityError(f"loop count {count} exceeds bound {bound}")
    attained = True
    for s in loops:
        deg = [0] * g.node_count
        for e in s:
            a, b = g.edges[e]
            deg[a] += 1
            deg[b] += 1
        if max(deg, default=0) > 3:
            attained = False
            break
    return LoopCountBound(bound=bound, count=count, attained=attained)


def omega(g: Multigraph) -> OmegaPoly:
    """theta at xi = sqrt(-1), divided exactly by (1-b)^(|E|-|V|).

    The quotient must come out with real integer coefficients; a nonzero
    remainder or a residual imaginary part falsifies the divisibility
    statement and raises.  For trees the exponent is -1, so we multiply by
    (1-b) instead.
    """
    ok, _ = is_connected(g)
    if not ok:
        raise ValueError("omega needs a connected graph")
    theta = theta_direct(g)
    at_imag = theta.poly.eval_second(_TWO_I)  # UniPoly in b, Gaussian coeffs
    power = len(g.edges) - g.node_count
    one_minus_b = UniPoly({0: 1, 1: -1}, "b")
    if power >= 0:
        quotient = at_imag
        for _ in range(power):
            try:
                quotient = exact_divide(quotient, one_minus_b)
            except DivisibilityError as exc:
                raise IdentityError(
                    f"theta(b, sqrt(-1)) not divisible by (1-b)^{power}: {exc}"
                ) from exc
    else:
        quotient = at_imag * one_minus_b
    coeffs = {}
    for e, c in quotient.coeffs.items():
        if isinstance(c, GaussianInt):
            if c.im != 0:
                raise IdentityError(f"omega coefficient {c} has an imaginary part")
            c = c.re
        coeffs[e] = c
    return OmegaPoly(UniPoly(coeffs, "b"))


def omega_at_1_count(g: Multigraph) -> tuple[int, int]:
    """(omega(1), brute-force count of injective incident-edge assignments).

    Counts maps from nodes to edges where each node takes a distinct edge
    incident to it; raises if the two numbers disagree.
    """
    if g.has_self_loop():
        raise ValueError("the counting interpretation needs a loop-free graph")
    value = omega(g).poly.eval(1)
    incident = [g.incident_edges(i) for i in range(g.node_count)]
    used = [False] * len(g.edges)

    def rec(i: int) -> int:
        if i == g.node_count:
            return 1
        total = 0
        for e in incident[i]:
            if not used[e]:
                used[e] = True
                total += rec(i + 1)
                used[e] = False
        return total

    count = rec(0)
    if value != count:
        raise IdentityError(f"omega(1) = {value} but assignment count = {count}")
    return value, count


def matching_polynomial(g: Multigraph) -> MatchingPoly:
    """alpha(x) = sum_k (-1)^k p(k) x^(n-2k) from the k-matching counts."""
    counts = enumerate_matchings(g)
    n = g.node_count
    coeffs = {}
    for k, p in enumerate(counts):
        if p:
            coeffs[n - 2 * k] = (-1) ** k * p
    return MatchingPoly(UniPoly(coeffs, "x"))


# ---------------------------------------------------------------------------
# Determinant-sum identity
# ---------------------------------------------------------------------------

def _bareiss_det(matrix: list[list[UniPoly]]) -> UniPoly:
    """Fraction-free determinant of a square matrix of integer polynomials.

    Bareiss elimination: every division is exact over Z[x], so no rational
    arithmetic is needed.  Row swaps flip the sign.
    """
    n = len(matrix)
    if n == 0:
        return UniPoly({0: 1}, "u")
    m = [row[:] for row in matrix]
    sign = 1
    prev = UniPoly({0: 1}, "u")
    for k in range(n - 1):
        if m[k][k].is_zero():
            pivot_row = next(
                (r for r in range(k + 1, n) if not m[r][k].is_zero()), None
            )
            if pivot_row is None:
                return UniPoly({}, "u")
            m[k], m[pivot_row] = m[pivot_row], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = exact_divide(num, prev)
            m[i][k] = UniPoly({}, "u")
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign == 1 else -det


def omega_determinant_form(g: Multigraph, cap: int = DETERMINANT_CAP) -> UniPoly:
    """Sum over node-disjoint cycle sets C of
    2^k(C) det[I + u^2 (D - I) - u A] restricted off C, times u^|C|.

    D and A are the degree and adjacency matrices of the full graph; the
    determinant is taken on the principal minor indexed by the untouched
    nodes.  The result must equal omega with b replaced by u^2.
    """
    if not g.is_simple():
        raise ValueError("determinant form needs a simple graph")
    ok, _ = is_connected(g)
    if not ok:
        raise ValueError("determinant form needs a connected graph")
    if g.node_count > cap:
        raise SizeError(f"{g.node_count} nodes exceed the determinant cap {cap}")
    deg = [g.degree(i) for i in range(g.node_count)]
    adj = [[0] * g.node_count for _ in range(g.node_count)]
    for a, b in g.edges:
        adj[a][b] += 1
        adj[b][a] += 1
    total = UniPoly({}, "u")
    for cyc, k in enumerate_disjoint_cycles(g):
        touched = set()
        for e in cyc:
            a, b = g.edges[e]
            touched.add(a)
            touched.add(b)
        keep = [v for v in range(g.node_count) if v not in touched]
        mat = []
        for r in keep:
            row = []
            for c in keep:
                entry = UniPoly({}, "u")
                if r == c:
                    entry = UniPoly({0: 1, 2: deg[r] - 1}, "u")
                if adj[r][c]:
                    entry = entry - UniPoly({1: adj[r][c]}, "u")
                row.append(entry)
            mat.append(row)
        det = _bareiss_det(mat)
        total = total + det * UniPoly({len(cyc): 2**k}, "u")
    expected = omega(g).poly.map_exponents(2).with_var("u")
    if total != expected:
        raise IdentityError(
            f"determinant sum {total} differs from omega(u^2) = {expected}"
        )
    return total


def regular_graph_matching_check(g: Multigraph) -> bool:
    """For a (q+1)-regular simple graph, whether
    omega(u^2) == alpha(1/u + q u) * u^n as polynomials in u.

    The left substitution doubles exponents; the right side expands through
    (1/u + qu)^m u^m = (1 + q u^2)^m, so no negative powers ever appear.
    """
    if not g.is_simple():
        raise ValueError("regularity check needs a simple graph")
    degs = {g.degree(i) for i in range(g.node_count)}
    if len(degs) != 1:
        raise ValueError(f"graph is not regular (degrees {sorted(degs)})")
    q = degs.pop() - 1
    n = g.node_count
    alpha = matching_polynomial(g).poly
    base = UniPoly({0: 1, 2: q}, "u")  # (1 + q u^2)
    rhs = UniPoly({}, "u")
    for e, c in alpha.coeffs.items():
        # c * x^e at x = 1/u + qu, times u^n: c * (1+qu^2)^e * u^(n-e)
        rhs = rhs + base**e * UniPoly({n - e: c}, "u")
    lhs = omega(g).poly.map_exponents(2).with_var("u")
    return lhs == rhs
