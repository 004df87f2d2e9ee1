"""The loop series: belief-derived coefficients and the exact finite
expansions of Z and of single-node marginals around the Bethe value, for
pairwise and factor-graph models.

Only generalized loops can contribute (f_1 = 0), so sums run over the
pruned enumeration; term accumulation uses math.fsum in the deterministic
lexicographic subset order because strong interactions can make the series
cancel heavily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import IdentityError, NotConvergedError
from .graph import (
    Multigraph,
    cycle_rank,
    enumerate_generalized_loops,
    is_connected,
)
from .lbp import LbpResult
from .model import FactorModel, PairwiseModel, factor_incidence_graph
from .poly import f_values, g_values

BELIEF_FLOOR = 1e-12


@dataclass
class SeriesCoefficients:
    """Per-node bias numbers gamma, per-node xi, and the correlation
    weights: per-edge beta for pairwise models, per-(factor, subset) beta
    for factor models."""

    xi: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray | None = None
    factor_beta: list = field(default_factory=list)  # per factor: {frozenset: float}


@dataclass
class SeriesReport:
    """Evaluated series: per-subset terms, their total, and the corrected
    partition value z_estimate = Z_B * total."""

    terms: list  # [(frozenset of edge ids, r(s))]
    total: float
    z_estimate: float
    log_z_b: float
    per_size: dict  # size -> sum of r(s) over that size


def _require_converged(res: LbpResult) -> None:
    if not res.converged:
        raise NotConvergedError(
            f"LBP did not converge (residual {res.residual:.3e}); "
            "the series requires a fixed point"
        )


def _xi_gamma(node_beliefs: np.ndarray):
    nb = np.asarray(node_beliefs, dtype=float)
    if nb.min() < BELIEF_FLOOR:
        raise ValueError(
            f"belief entry below {BELIEF_FLOOR}; refusing to extract coefficients"
        )
    xi = np.sqrt(nb[:, 1] / nb[:, 0])
    gamma = (nb[:, 1] - nb[:, 0]) / np.sqrt(nb[:, 1] * nb[:, 0])
    drift = np.abs(gamma - (xi - 1.0 / xi)) / np.maximum(1.0, np.abs(gamma))
    if drift.max() > 1e-12:
        raise IdentityError(f"gamma/xi consistency drift {drift.max():.3e}")
    return xi, gamma


def coefficients_from_beliefs(res: LbpResult) -> SeriesCoefficients:
    """Extract xi, gamma and per-edge beta from converged pairwise beliefs."""
    _require_converged(res)
    xi, gamma = _xi_gamma(res.node_beliefs)
    nb = np.asarray(res.node_beliefs)
    eb = np.asarray(res.edge_beliefs)
    if eb.min() < BELIEF_FLOOR:
        raise ValueError(
            f"belief entry below {BELIEF_FLOOR}; refusing to extract coefficients"
        )
    edges = res.model.graph.edges
    beta = np.empty(len(edges))
    for e, (i, j) in enumerate(edges):
        t = eb[e]
        beta[e] = (t[1, 1] * t[0, 0] - t[1, 0] * t[0, 1]) / (
            math.sqrt(nb[i, 1] * nb[i, 0]) * math.sqrt(nb[j, 1] * nb[j, 0])
        )
    return SeriesCoefficients(xi=xi, gamma=gamma, beta=beta)


def _subset_degrees(g: Multigraph, s) -> list[int]:
    deg = [0] * g.node_count
    for e in s:
        a, b = g.edges[e]
        deg[a] += 1
        deg[b] += 1
    return deg


def _evaluate_series(g, loops, edge_weight, node_value, log_z_b) -> SeriesReport:
    """Shared series accumulator.

    edge_weight(s) gives prod of correlation weights (with sign) for subset
    s; node_value(i, d) the node factor for degree d.
    """
    terms = []
    per_size: dict[int, list[float]] = {}
    for s in loops:
        deg = _subset_degrees(g, s)
        r = edge_weight(s)
        for i, d in enumerate(deg):
            r *= node_value(i, d)
        terms.append((s, r))
        per_size.setdefault(len(s), []).append(r)
    total = math.fsum(r for _, r in terms)
    return SeriesReport(
        terms=terms,
        total=total,
        z_estimate=math.exp(log_z_b) * total,
        log_z_b=log_z_b,
        per_size={k: math.fsum(v) for k, v in sorted(per_size.items())},
    )


def loop_series_z(m: PairwiseModel, res: LbpResult) -> SeriesReport:
    """The exact expansion Z = Z_B * sum_s r(s) over generalized loops,
    r(s) = prod_{ij in s} beta_ij * prod_i f_{d_i(s)}(gamma_i)."""
    _require_converged(res)
    coeff = coefficients_from_beliefs(res)
    g = res.model.graph
    f_tab = [
        f_values(coeff.gamma[i], g.degree(i)) for i in range(g.node_count)
    ]
    loops = enumerate_generalized_loops(g)
    return _evaluate_series(
        g,
        loops,
        edge_weight=lambda s: math.prod(coeff.beta[e] for e in s),
        node_value=lambda i, d: f_tab[i][d],
        log_z_b=res.log_z_b,
    )


@dataclass
class MarginalCorrection:
    """Series-corrected single-node marginal."""

    target: int
    bias_series: float
    series_total: float
    corrected_marginal: np.ndarray  # [p(-1), p(+1)]
    terms: list


def _corrected_marginal(node_belief, bias, total) -> np.ndarray:
    diff = math.sqrt(node_belief[1] * node_belief[0]) * bias / total
    return np.array([(1.0 - diff) / 2.0, (1.0 + diff) / 2.0])


def loop_series_marginal(
    m: PairwiseModel,
    res: LbpResult,
    target: int,
    z_report: SeriesReport | None = None,
) -> MarginalCorrection:
    """Exact marginal of the target node via the weighted series.

    The target is exempt from degree-one pruning because its weight is a g
    value and g_1 = -2 is nonzero; every other node still kills subsets at
    degree one through f_1 = 0.  z_report, when given, must be the
    loop_series_z output for the same fixed point; it is recomputed
    otherwise.
    """
    _require_converged(res)
    g = res.model.graph
    if not (0 <= target < g.node_count):
        raise ValueError(f"target node {target} out of range")
    coeff = coefficients_from_beliefs(res)
    f_tab = [f_values(coeff.gamma[i], g.degree(i)) for i in range(g.node_count)]
    g_tab = g_values(coeff.gamma[target], g.degree(target))
    loops = enumerate_generalized_loops(g, free_node=target)
    terms = []
    for s in loops:
        deg = _subset_degrees(g, s)
        r = math.prod(coeff.beta[e] for e in s)
        for i, d in enumerate(deg):
            r *= g_tab[d] if i == target else f_tab[i][d]
        terms.append((s, r))
    bias = math.fsum(r for _, r in terms)
    total = (z_report or loop_series_z(m, res)).total
    corrected = _corrected_marginal(res.node_beliefs[target], bias, total)
    return MarginalCorrection(
        target=target,
        bias_series=bias,
        series_total=total,
        corrected_marginal=corrected,
        terms=terms,
    )


def single_cycle_sign_check(m: PairwiseModel, res: LbpResult, target: int) -> bool:
    """On a one-cycle graph with the target on the cycle, check that the
    exact and the belief marginal biases share a sign (zero matches either).

    Also verifies the structural claim that exactly two subsets survive
    pruning and carry gamma and -(prod beta)*gamma respectively.
    """
    from .exact import brute_force

    g = res.model.graph
    ok, _ = is_connected(g)
    if not ok or cycle_rank(g) != 1:
        raise ValueError("sign check needs a connected graph with exactly one cycle")
    cycle_nodes = _two_core_nodes(g)
    if target not in cycle_nodes:
        raise ValueError(f"target {target} does not lie on the cycle")

    correction = loop_series_marginal(m, res, target)
    if len(correction.terms) != 2:
        raise IdentityError(
            f"expected exactly 2 contributing subsets, got {len(correction.terms)}"
        )
    coeff = coefficients_from_beliefs(res)
    gamma_t = coeff.gamma[target]
    (s0, r0), (s1, r1) = sorted(correction.terms, key=lambda t: len(t[0]))
    prod_beta = math.prod(coeff.beta[e] for e in s1)
    if not (
        s0 == frozenset()
        and math.isclose(r0, gamma_t, rel_tol=1e-12, abs_tol=1e-15)
        and math.isclose(r1, -prod_beta * gamma_t, rel_tol=1e-9, abs_tol=1e-13)
    ):
        raise IdentityError("series terms do not match the gamma*(1 - prod beta) form")

    exact = brute_force(m)
    p = exact.marginals[target]
    b = res.node_beliefs[target]
    sp = _sign(p[1] - p[0])
    sb = _sign(b[1] - b[0])
    return sp == 0 or sb == 0 or sp == sb


def _sign(x: float, tol: float = 0.0) -> int:
    if x > tol:
        return 1
    if x < -tol:
        return -1
    return 0


def _two_core_nodes(g: Multigraph) -> set[int]:
    """Nodes of the 2-core: strip degree-one nodes until none remain."""
    deg = [g.degree(i) for i in range(g.node_count)]
    alive_edges = set(range(len(g.edges)))
    changed = True
    while changed:
        changed = False
        for e in list(alive_edges):
            a, b = g.edges[e]
            if deg[a] == 1 or deg[b] == 1:
                alive_edges.discard(e)
                deg[a] -= 1
                deg[b] -= 1
                changed = True
    return {v for e in alive_edges for v in g.edges[e]}


# ---------------------------------------------------------------------------
# Factor-graph series
# ---------------------------------------------------------------------------

def factor_coefficients(res: LbpResult) -> SeriesCoefficients:
    """Extract xi, gamma and per-(factor, subset) beta from converged
    factor beliefs.

    The basis functions prod_{i in I} x_i xi_i^{-x_i} are orthonormal under
    the product of node beliefs, so beta^f_I is the plain expectation of the
    basis function under b_f.  The empty set is pinned to 1 and singletons
    to 0 (they vanish at a fixed point by margin consistency); the expansion
    is then verified by reconstructing every b_f, and a failure beyond
    tolerance is a hard error because it would invalidate the inversion.
    """
    _require_converged(res)
    fm: FactorModel = res.model
    xi, gamma = _xi_gamma(res.node_beliefs)
    nb = np.asarray(res.node_beliefs)
    factor_beta = []
    worst = 0.0
    for f, (scope, _) in enumerate(fm.factors):
        bf = np.asarray(res.factor_beliefs[f], dtype=float)
        if bf.min() < BELIEF_FLOOR:
            raise ValueError(
                f"belief entry below {BELIEF_FLOOR}; refusing to extract coefficients"
            )
        k = len(scope)
        spins = [
            [(-1.0 if ((idx >> (k - 1 - q)) & 1) == 0 else 1.0) for q in range(k)]
            for idx in range(1 << k)
        ]
        betas: dict[frozenset, float] = {}
        for mask in range(1 << k):
            members = [q for q in range(k) if (mask >> q) & 1]
            key = frozenset(scope[q] for q in members)
            if len(members) == 0:
                betas[key] = 1.0
                continue
            if len(members) == 1:
                betas[key] = 0.0
                continue
            total = 0.0
            for idx in range(1 << k):
                basis = 1.0
                for q in members:
                    s = spins[idx][q]
                    basis *= s * xi[scope[q]] ** (-s)
                total += bf[idx] * basis
            betas[key] = total
        # reconstruction check: the expansion must reproduce b_f
        for idx in range(1 << k):
            recon = 0.0
            for mask in range(1 << k):
                members = [q for q in range(k) if (mask >> q) & 1]
                key = frozenset(scope[q] for q in members)
                basis = 1.0
                for q in members:
                    s = spins[idx][q]
                    basis *= s * xi[scope[q]] ** (-s)
                recon += betas[key] * basis
            for q in range(k):
                recon *= nb[scope[q]][(idx >> (k - 1 - q)) & 1]
            worst = max(worst, abs(recon - bf[idx]))
        factor_beta.append(betas)
    if worst > 1e-10:
        raise IdentityError(
            f"factor belief reconstruction off by {worst:.3e}; "
            "coefficient inversion is invalid"
        )
    return SeriesCoefficients(xi=xi, gamma=gamma, factor_beta=factor_beta)


def loop_series_z_factor(fm: FactorModel, res: LbpResult) -> SeriesReport:
    """Factor-graph expansion over subsets of the bipartite incidence edges:
    r(s) = (-1)^{|s|} prod_f beta^f_{I_f(s)} * prod_i f_{d_i(s)}(gamma_i)."""
    _require_converged(res)
    coeff = factor_coefficients(res)
    gh = factor_incidence_graph(fm)
    n = fm.variable_count
    f_tab = [f_values(coeff.gamma[i], gh.degree(i)) for i in range(n)]
    loops = enumerate_generalized_loops(gh)

    def edge_weight(s):
        joined = [set() for _ in fm.factors]
        for e in s:
            var, fac = gh.edges[e]
            joined[fac - n].add(var)
        w = -1.0 if len(s) % 2 else 1.0
        for f, vars_ in enumerate(joined):
            w *= coeff.factor_beta[f][frozenset(vars_)]
        return w

    return _evaluate_series(
        gh,
        loops,
        edge_weight=edge_weight,
        node_value=lambda i, d: f_tab[i][d] if i < n else 1.0,
        log_z_b=res.log_z_b,
    )


def loop_series_marginal_factor(
    fm: FactorModel,
    res: LbpResult,
    target: int,
    z_report: SeriesReport | None = None,
) -> MarginalCorrection:
    """Factor analogue of the marginal series: the target variable takes g
    weights (and is exempt from degree-one pruning); factor nodes still
    prune at degree one because singleton betas vanish."""
    _require_converged(res)
    if not (0 <= target < fm.variable_count):
        raise ValueError(f"target variable {target} out of range")
    coeff = factor_coefficients(res)
    gh = factor_incidence_graph(fm)
    n = fm.variable_count
    f_tab = [f_values(coeff.gamma[i], gh.degree(i)) for i in range(n)]
    g_tab = g_values(coeff.gamma[target], gh.degree(target))
    terms = []
    for s in enumerate_generalized_loops(gh, free_node=target):
        deg = _subset_degrees(gh, s)
        joined = [set() for _ in fm.factors]
        for e in s:
            var, fac = gh.edges[e]
            joined[fac - n].add(var)
        r = -1.0 if len(s) % 2 else 1.0
        for f, vars_ in enumerate(joined):
            r *= coeff.factor_beta[f][frozenset(vars_)]
        for i in range(n):
            r *= g_tab[deg[i]] if i == target else f_tab[i][deg[i]]
        terms.append((s, r))
    bias = math.fsum(r for _, r in terms)
    total = (z_report or loop_series_z_factor(fm, res)).total
    corrected = _corrected_marginal(res.node_beliefs[target], bias, total)
    return MarginalCorrection(
        target=target,
        bias_series=bias,
        series_total=total,
        corrected_marginal=corrected,
        terms=terms,
    )


def truncated_series(report: SeriesReport, max_size: int):
    """Cumulative partial sums of the series by subset size.

    Returns [(size, partial sum over |s| <= size)] for every size present
    up to max_size, starting from the Bethe term alone.
    """
    out = []
    acc: list[float] = []
    for size in sorted(report.per_size):
        if size > max_size:
            break
        acc.append(report.per_size[size])
        out.append((size, math.fsum(acc)))
    if not out:
        out.append((0, 0.0))
    return out
