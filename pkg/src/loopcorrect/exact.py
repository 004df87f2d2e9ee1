"""Brute-force oracles: exact partition function and marginals by state
enumeration, plus direct two-sided evaluation of the subset-sum identities.

Everything here is the ground truth the fast paths are tested against, so
the code favours numerical care over speed: log-domain weights, chunked
vectorized enumeration, and compensated cross-chunk accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SizeError
from .graph import Multigraph, enumerate_generalized_loops
from .model import FactorModel, PairwiseModel
from .poly import f_values, g_values

_CHUNK_BITS = 16


@dataclass
class ExactResult:
    """Exact log partition function and marginals.

    marginals[i] = [p_i(-1), p_i(+1)].  pair_marginals is per edge for
    pairwise models; factor_marginals is per factor (flat tables) for
    factor models.
    """

    log_z: float
    marginals: np.ndarray
    pair_marginals: np.ndarray | None = None
    factor_marginals: list = field(default_factory=list)


def _state_chunks(n: int):
    """Yield bit matrices of shape (chunk, n); bit i of the state index is
    variable i."""
    total = 1 << n
    chunk = min(total, 1 << _CHUNK_BITS)
    shifts = np.arange(n, dtype=np.uint32)
    for off in range(0, total, chunk):
        idx = np.arange(off, min(off + chunk, total), dtype=np.uint32)
        yield (idx[:, None] >> shifts[None, :]) & 1


def _pairwise_log_weights(m: PairwiseModel, bits: np.ndarray) -> np.ndarray:
    logw = np.zeros(bits.shape[0])
    for i, tab in enumerate(m.node_potentials):
        lt = np.log(np.asarray(tab))
        logw += lt[bits[:, i]]
    for e, (a, b) in enumerate(m.graph.edges):
        lt = np.log(np.asarray(m.edge_potentials[e]))
        logw += lt[bits[:, a], bits[:, b]]
    return logw


def _factor_log_weights(fm: FactorModel, bits: np.ndarray) -> np.ndarray:
    logw = np.zeros(bits.shape[0])
    for scope, table in fm.factors:
        lt = np.log(np.asarray(table))
        idx = np.zeros(bits.shape[0], dtype=np.int64)
        for i in scope:
            idx = (idx << 1) | bits[:, i]
        logw += lt[idx]
    return logw


def brute_force(model, cap: int = 25) -> ExactResult:
    """Exact enumeration over all 2^N states.

    Weights are handled in the log domain; partial sums are taken per chunk
    relative to a running maximum and combined with compensated summation,
    so the result is trustworthy at the 1e-12 level the tests demand.
    """
    if isinstance(model, PairwiseModel):
        n = model.node_count
        log_weights = lambda bits: _pairwise_log_weights(model, bits)
    elif isinstance(model, FactorModel):
        n = model.variable_count
        log_weights = lambda bits: _factor_log_weights(model, bits)
    else:
        raise TypeError(f"unsupported model type {type(model)!r}")
    if n > cap:
        raise SizeError(f"{n} variables exceed the enumeration cap {cap}")

    best = -math.inf  # running maximum of log weights
    z_parts: list[float] = []
    node_parts: list[np.ndarray] = []
    pair_parts: list[np.ndarray] = []
    factor_parts: list[list[np.ndarray]] = []
    is_pairwise = isinstance(model, PairwiseModel)

    for bits in _state_chunks(n):
        logw = log_weights(bits)
        chunk_max = float(logw.max())
        if chunk_max > best:
            scale = math.exp(best - chunk_max) if best > -math.inf else 0.0
            z_parts = [p * scale for p in z_parts]
            node_parts = [p * scale for p in node_parts]
            pair_parts = [p * scale for p in pair_parts]
            factor_parts = [[t * scale for t in p] for p in factor_parts]
            best = chunk_max
        w = np.exp(logw - best)
        wsum = float(w.sum())
        z_parts.append(wsum)
        node = np.empty((n, 2))
        for i in range(n):
            on = float(w[bits[:, i] == 1].sum())
            node[i] = (wsum - on, on)
        node_parts.append(node)
        if is_pairwise:
            pair = np.empty((len(model.graph.edges), 4))
            for e, (a, b) in enumerate(model.graph.edges):
                idx = 2 * bits[:, a] + bits[:, b]
                pair[e] = np.bincount(idx, weights=w, minlength=4)
            pair_parts.append(pair)
        else:
            per_factor = []
            for scope, table in model.factors:
                idx = np.zeros(bits.shape[0], dtype=np.int64)
                for i in scope:
                    idx = (idx << 1) | bits[:, i]
                per_factor.append(np.bincount(idx, weights=w, minlength=len(table)))
            factor_parts.append(per_factor)

    z = math.fsum(z_parts)
    log_z = best + math.log(z)
    marginals = sum(node_parts) / z
    if is_pairwise:
        pair = (sum(pair_parts) / z).reshape(-1, 2, 2)
        return ExactResult(log_z, marginals, pair_marginals=pair)
    combined = []
    for f in range(len(model.factors)):
        acc = factor_parts[0][f].copy()
        for part in factor_parts[1:]:
            acc += part[f]
        combined.append(acc / z)
    return ExactResult(log_z, marginals, factor_marginals=combined)


def brute_force_reference(model) -> ExactResult:
    """Plain per-state Python loop; the slow reference the vectorized
    enumeration is tested against.  Practical only for small N."""
    if isinstance(model, PairwiseModel):
        n = model.node_count
    else:
        n = model.variable_count
    if n > 16:
        raise SizeError("reference oracle capped at 16 variables")
    logs = []
    for state in range(1 << n):
        bits = [(state >> i) & 1 for i in range(n)]
        lw = 0.0
        if isinstance(model, PairwiseModel):
            for i in range(n):
                lw += math.log(model.node_potentials[i][bits[i]])
            for e, (a, b) in enumerate(model.graph.edges):
                lw += math.log(model.edge_potentials[e][bits[a]][bits[b]])
        else:
            for scope, table in model.factors:
                idx = 0
                for i in scope:
                    idx = (idx << 1) | bits[i]
                lw += math.log(table[idx])
        logs.append(lw)
    best = max(logs)
    weights = [math.exp(lw - best) for lw in logs]
    z = math.fsum(weights)
    marg = np.zeros((n, 2))
    for state, w in enumerate(weights):
        for i in range(n):
            marg[i][(state >> i) & 1] += w
    return ExactResult(best + math.log(z), marg / z)


def belief_ratio_state_sum(model, res) -> float:
    """State sum of prod_local [b_local / prod b_i] * prod_i b_i over beliefs.

    res is an LBP result (or anything with node_beliefs plus edge_beliefs /
    factor_beliefs).  At a fixed point this equals Z / Z_B; away from one it
    is just the quantity itself.
    """
    if isinstance(model, PairwiseModel):
        local = res.edge_beliefs
    else:
        local = res.factor_beliefs
    return belief_ratio_state_sum_from_beliefs(model, res.node_beliefs, local)


def belief_ratio_state_sum_from_beliefs(model, node_beliefs, local_beliefs) -> float:
    """belief_ratio_state_sum on raw belief tables; local_beliefs is per-edge 2x2 for
    pairwise models and per-factor flat tables for factor models."""
    if isinstance(model, PairwiseModel):
        n = model.node_count
        groups = [((a, b), np.asarray(local_beliefs[e]).reshape(4))
                  for e, (a, b) in enumerate(model.graph.edges)]
    else:
        n = model.variable_count
        groups = [(scope, np.asarray(local_beliefs[f]))
                  for f, (scope, _) in enumerate(model.factors)]
    nb = np.asarray(node_beliefs, dtype=float)
    if nb.min() <= 0.0:
        raise ValueError("beliefs must be strictly positive")
    for _, tab in groups:
        if tab.min() <= 0.0:
            raise ValueError("beliefs must be strictly positive")

    log_nb = np.log(nb)
    parts = []
    for bits in _state_chunks(n):
        logterm = np.zeros(bits.shape[0])
        deg = [0] * n
        for scope, tab in groups:
            idx = np.zeros(bits.shape[0], dtype=np.int64)
            for i in scope:
                idx = (idx << 1) | bits[:, i]
                deg[i] += 1
            logterm += np.log(tab)[idx]
        for i in range(n):
            logterm += (1 - deg[i]) * log_nb[i][bits[:, i]]
        parts.append(float(np.exp(logterm).sum()))
    return math.fsum(parts)


def loop_identity_state_sum(
    g: Multigraph,
    beta,
    xi,
    weight_node: int | None = None,
) -> float:
    """Direct 2^N evaluation of the edge-product state sum.

    Per state: prod_{ij in E} (1 + x_i x_j beta_ij xi_i^{-x_i} xi_j^{-x_j})
    times prod_i xi_i^{x_i} / (xi_i + 1/xi_i), optionally weighted by the
    spin of weight_node.  Terms may be negative, so accumulation uses fsum.
    """
    n = g.node_count
    if n > 20:
        raise SizeError("identity evaluation capped at 20 nodes")
    xi = [float(x) for x in xi]
    if any(x <= 0 for x in xi):
        raise ValueError("xi values must be positive")
    # node factor per spin: index 0 is spin -1
    node_fac = [
        (x ** -1 / (x + 1 / x), x / (x + 1 / x)) for x in xi
    ]
    spin = (-1.0, 1.0)
    # edge factor per (bit_i, bit_j)
    edge_fac = []
    for e, (a, b) in enumerate(g.edges):
        be = float(beta[e])
        tab = []
        for bi in (0, 1):
            for bj in (0, 1):
                si, sj = spin[bi], spin[bj]
                tab.append(1.0 + si * sj * be * xi[a] ** -si * xi[b] ** -sj)
        edge_fac.append(tab)
    terms = []
    for state in range(1 << n):
        bits = [(state >> i) & 1 for i in range(n)]
        v = 1.0
        for i in range(n):
            v *= node_fac[i][bits[i]]
        for e, (a, b) in enumerate(g.edges):
            v *= edge_fac[e][2 * bits[a] + bits[b]]
        if weight_node is not None:
            v *= spin[bits[weight_node]]
        terms.append(v)
    return math.fsum(terms)


def loop_identity_subset_sum(
    g: Multigraph,
    beta,
    xi,
    weight_node: int | None = None,
) -> float:
    """Subset-sum side of the same identity.

    Unweighted: sum over edge subsets of prod beta * prod_i f_{d_i}(gamma_i);
    weighted: the weight node contributes g_{d}(gamma)/(xi + 1/xi) instead
    of f_{d}(gamma).  Subsets whose excluded-node degrees hit 1 vanish and
    are pruned by the loop enumerator.
    """
    xi = [float(x) for x in xi]
    gamma = [x - 1 / x for x in xi]
    max_deg = [g.degree(i) for i in range(g.node_count)]
    f_tab = [f_values(gamma[i], max_deg[i]) for i in range(g.node_count)]
    if weight_node is not None:
        g_tab = g_values(gamma[weight_node], max_deg[weight_node])
    terms = []
    for s in enumerate_generalized_loops(g, free_node=weight_node):
        deg = [0] * g.node_count
        v = 1.0
        for e in s:
            a, b = g.edges[e]
            deg[a] += 1
            deg[b] += 1
            v *= float(beta[e])
        for i in range(g.node_count):
            if i == weight_node:
                continue
            v *= f_tab[i][deg[i]]
        if weight_node is not None:
            w = weight_node
            v *= g_tab[deg[w]] / (xi[w] + 1 / xi[w])
        terms.append(v)
    return math.fsum(terms)
