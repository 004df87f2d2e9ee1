"""Loopy belief propagation for pairwise and factor models.

Synchronous (Jacobi) sweeps with damping and sum-to-one message
normalization; a sequential schedule is available for the
fixed-points-are-schedule-independent checks.  Messages live in the linear
domain; if any unnormalized message leaves [1e-280, 1e280] the run restarts
in a log-domain twin that mirrors the linear semantics exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericError
from .model import (
    FactorModel,
    PairwiseModel,
    absorb_node_potentials,
)

_LINEAR_LO = 1e-280
_LINEAR_HI = 1e280


@dataclass
class LbpOptions:
    max_iters: int = 10_000
    tol: float = 1e-12
    damping: float = 0.5
    schedule: str = "sync"  # "sync" or "seq"

    def __post_init__(self):
        if not (0.0 <= self.damping < 1.0):
            raise ValueError("damping must be in [0, 1)")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.schedule not in ("sync", "seq"):
            raise ValueError("schedule must be 'sync' or 'seq'")


@dataclass
class LbpResult:
    """Converged (or not) messages, beliefs and the Bethe log partition value.

    For pairwise runs, messages[2e + 0] is the message to endpoint a of edge
    e (sent by b) and messages[2e + 1] the message to b (sent by a), each a
    normalized 2-vector over the recipient's spin.  node_beliefs[i] and
    edge_beliefs[e] (2x2, endpoint order) are normalized; model is the
    node-potential-absorbed model the run actually iterated on.
    """

    node_beliefs: np.ndarray
    log_z_b: float
    iterations: int
    converged: bool
    residual: float
    messages: list = field(default_factory=list)
    edge_beliefs: np.ndarray | None = None
    factor_beliefs: list = field(default_factory=list)
    model: object = None


class _RangeSignal(Exception):
    """Internal: a linear-domain message left the safe range."""


# ---------------------------------------------------------------------------
# Pairwise LBP
# ---------------------------------------------------------------------------

def _pairwise_structure(m: PairwiseModel):
    """Per-node list of incoming message slots.

    Message slot 2e+0 carries the message toward endpoint a of edge e,
    slot 2e+1 toward endpoint b.
    """
    incoming = [[] for _ in range(m.node_count)]
    for e, (a, b) in enumerate(m.graph.edges):
        incoming[a].append(2 * e + 0)
        incoming[b].append(2 * e + 1)
    return incoming


def _new_message_linear(m, incoming, msgs, e, direction):
    """Unnormalized updated message for slot 2e+direction."""
    a, b = m.graph.edges[e]
    psi = m.edge_potentials[e]
    source = b if direction == 0 else a
    reverse = 2 * e + (1 - direction)  # the message the source received over e
    p0 = p1 = 1.0
    for slot in incoming[source]:
        if slot == reverse:
            continue
        v = msgs[slot]
        p0 *= v[0]
        p1 *= v[1]
    if direction == 0:
        u0 = psi[0][0] * p0 + psi[0][1] * p1
        u1 = psi[1][0] * p0 + psi[1][1] * p1
    else:
        u0 = psi[0][0] * p0 + psi[1][0] * p1
        u1 = psi[0][1] * p0 + psi[1][1] * p1
    return u0, u1


def _normalize_pair(u0: float, u1: float) -> tuple[float, float]:
    for u in (u0, u1):
        if not (0.0 < u < _LINEAR_HI) or u < _LINEAR_LO:
            raise _RangeSignal
    s = u0 + u1
    return u0 / s, u1 / s


def _run_pairwise_linear(m: PairwiseModel, opts: LbpOptions):
    incoming = _pairwise_structure(m)
    n_slots = 2 * len(m.graph.edges)
    msgs = [[0.5, 0.5] for _ in range(n_slots)]
    d = opts.damping
    residual = math.inf
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        residual = 0.0
        if opts.schedule == "sync":
            new = []
            for e in range(len(m.graph.edges)):
                for direction in (0, 1):
                    u0, u1 = _new_message_linear(m, incoming, msgs, e, direction)
                    new.append(_normalize_pair(u0, u1))
            for slot in range(n_slots):
                old = msgs[slot]
                n0 = (1 - d) * new[slot][0] + d * old[0]
                n1 = (1 - d) * new[slot][1] + d * old[1]
                residual = max(residual, abs(n0 - old[0]), abs(n1 - old[1]))
                msgs[slot] = [n0, n1]
        else:
            for e in range(len(m.graph.edges)):
                for direction in (0, 1):
                    slot = 2 * e + direction
                    u0, u1 = _new_message_linear(m, incoming, msgs, e, direction)
                    v0, v1 = _normalize_pair(u0, u1)
                    old = msgs[slot]
                    n0 = (1 - d) * v0 + d * old[0]
                    n1 = (1 - d) * v1 + d * old[1]
                    residual = max(residual, abs(n0 - old[0]), abs(n1 - old[1]))
                    msgs[slot] = [n0, n1]
        if residual < opts.tol:
            return msgs, iterations, True, residual
    return msgs, iterations, False, residual


def _run_pairwise_log(m: PairwiseModel, opts: LbpOptions):
    """Log-domain twin of the linear sweep, for extreme potentials."""
    incoming = _pairwise_structure(m)
    edges = m.graph.edges
    log_psi = [
        [[math.log(v) for v in row] for row in m.edge_potentials[e]]
        for e in range(len(edges))
    ]
    n_slots = 2 * len(edges)
    lmsgs = [[math.log(0.5), math.log(0.5)] for _ in range(n_slots)]
    d = opts.damping
    log_d = math.log(d) if d > 0 else -math.inf
    log_1md = math.log(1 - d)

    def new_log_message(e, direction):
        a, b = edges[e]
        source = b if direction == 0 else a
        reverse = 2 * e + (1 - direction)
        q0 = q1 = 0.0
        for slot in incoming[source]:
            if slot == reverse:
                continue
            q0 += lmsgs[slot][0]
            q1 += lmsgs[slot][1]
        lp = log_psi[e]
        if direction == 0:
            u0 = np.logaddexp(lp[0][0] + q0, lp[0][1] + q1)
            u1 = np.logaddexp(lp[1][0] + q0, lp[1][1] + q1)
        else:
            u0 = np.logaddexp(lp[0][0] + q0, lp[1][0] + q1)
            u1 = np.logaddexp(lp[0][1] + q0, lp[1][1] + q1)
        s = np.logaddexp(u0, u1)
        if not math.isfinite(s):
            raise NumericError("log-domain message update produced a non-finite value")
        return u0 - s, u1 - s

    residual = math.inf
    iterations = 0
    for iterations in range(1, opts.max_iters + 1):
        residual = 0.0
        updates = []
        sequential = opts.schedule == "seq"
        for e in range(len(edges)):
            for direction in (0, 1):
                slot = 2 * e + direction
                v0, v1 = new_log_message(e, direction)
                old = lmsgs[slot]
                if d > 0:
                    n0 = np.logaddexp(log_1md + v0, log_d + old[0])
                    n1 = np.logaddexp(log_1md + v1, log_d + old[1])
                else:
                    n0, n1 = v0, v1
                if sequential:
                    residual = max(
                        residual,
                        abs(math.exp(n0) - math.exp(old[0])),
                        abs(math.exp(n1) - math.exp(old[1])),
                    )
                    lmsgs[slot] = [n0, n1]
                else:
                    updates.append((n0, n1))
        if not sequential:
            for slot, (n0, n1) in enumerate(updates):
                old = lmsgs[slot]
                residual = max(
                    residual,
                    abs(math.exp(n0) - math.exp(old[0])),
                    abs(math.exp(n1) - math.exp(old[1])),
                )
                lmsgs[slot] = [n0, n1]
        if residual < opts.tol:
            break
    else:
        iterations = opts.max_iters
    msgs = [[math.exp(v[0]), math.exp(v[1])] for v in lmsgs]
    return msgs, iterations, residual < opts.tol, residual


def _pairwise_beliefs(m: PairwiseModel, msgs, incoming):
    n = m.node_count
    node_beliefs = np.empty((n, 2))
    for i in range(n):
        p0 = p1 = 1.0
        for slot in incoming[i]:
            p0 *= msgs[slot][0]
            p1 *= msgs[slot][1]
        s = p0 + p1
        if not (s > 0.0 and math.isfinite(s)):
            raise NumericError("belief normalization failed")
        node_beliefs[i] = (p0 / s, p1 / s)
    edge_beliefs = np.empty((len(m.graph.edges), 2, 2))
    for e, (a, b) in enumerate(m.graph.edges):
        psi = m.edge_potentials[e]
        pa = [1.0, 1.0]
        for slot in incoming[a]:
            if slot == 2 * e + 0:
                continue
            pa[0] *= msgs[slot][0]
            pa[1] *= msgs[slot][1]
        pb = [1.0, 1.0]
        for slot in incoming[b]:
            if slot == 2 * e + 1:
                continue
            pb[0] *= msgs[slot][0]
            pb[1] *= msgs[slot][1]
        tab = np.array(
            [
                [psi[0][0] * pa[0] * pb[0], psi[0][1] * pa[0] * pb[1]],
                [psi[1][0] * pa[1] * pb[0], psi[1][1] * pa[1] * pb[1]],
            ]
        )
        total = tab.sum()
        if not (total > 0.0 and math.isfinite(total)):
            raise NumericError("edge belief normalization failed")
        edge_beliefs[e] = tab / total
    return node_beliefs, edge_beliefs


def bethe_log_z(m: PairwiseModel, node_beliefs, edge_beliefs) -> float:
    """The three-term Bethe expression at arbitrary normalized beliefs.

    Expects a model whose node potentials are uniform (run_lbp absorbs them
    before iterating).  Exposed separately so it can be evaluated away from
    fixed points in tests.
    """
    node_beliefs = np.asarray(node_beliefs, dtype=float)
    edge_beliefs = np.asarray(edge_beliefs, dtype=float)
    if node_beliefs.min() <= 0.0 or edge_beliefs.min() <= 0.0:
        raise ValueError("Bethe expression needs strictly positive beliefs")
    total = 0.0
    for e in range(len(m.graph.edges)):
        psi = np.asarray(m.edge_potentials[e])
        be = edge_beliefs[e]
        total += float((be * np.log(psi)).sum())
        total -= float((be * np.log(be)).sum())
    degrees = [m.graph.degree(i) for i in range(m.node_count)]
    for i in range(m.node_count):
        bi = node_beliefs[i]
        total += (degrees[i] - 1) * float((bi * np.log(bi)).sum())
    return total


def run_lbp(m: PairwiseModel, opts: LbpOptions | None = None) -> LbpResult:
    """Run pairwise LBP to a message fixed point.

    Node potentials are absorbed into edge tables first (the joint is
    unchanged), so beliefs and the Bethe value refer to the absorbed model,
    which is also what the loop-series operations expect.  Non-convergence
    is reported via the converged flag, not raised.
    """
    opts = opts or LbpOptions()
    absorbed = absorb_node_potentials(m)
    try:
        msgs, iterations, converged, residual = _run_pairwise_linear(absorbed, opts)
    except _RangeSignal:
        msgs, iterations, converged, residual = _run_pairwise_log(absorbed, opts)
    incoming = _pairwise_structure(absorbed)
    node_beliefs, edge_beliefs = _pairwise_beliefs(absorbed, msgs, incoming)
    log_zb = bethe_log_z(absorbed, node_beliefs, edge_beliefs)
    return LbpResult(
        node_beliefs=node_beliefs,
        log_z_b=log_zb,
        iterations=iterations,
        converged=converged,
        residual=residual,
        messages=msgs,
        edge_beliefs=edge_beliefs,
        model=absorbed,
    )


# ---------------------------------------------------------------------------
# Factor-graph LBP
# ---------------------------------------------------------------------------

def _factor_structure(fm: FactorModel):
    """incidences[i] = list of (factor index, position of i in its scope)."""
    incidences = [[] for _ in range(fm.variable_count)]
    for f, (scope, _) in enumerate(fm.factors):
        for pos, i in enumerate(scope):
            incidences[i].append((f, pos))
    return incidences


def _run_factor_linear(fm: FactorModel, opts: LbpOptions):
    incidences = _factor_structure(fm)
    # var_to_fac[(f, pos)] and fac_to_var[(f, pos)], both over the variable's spin
    keys = [(f, pos) for f, (scope, _) in enumerate(fm.factors) for pos in range(len(scope))]
    v2f = {k: [0.5, 0.5] for k in keys}
    f2v = {k: [0.5, 0.5] for k in keys}
    d = opts.damping

    def new_v2f(f, pos):
        i = fm.factors[f][0][pos]
        p0 = p1 = 1.0
        for f2, pos2 in incidences[i]:
            if f2 == f:
                continue
            v = f2v[(f2, pos2)]
            p0 *= v[0]
            p1 *= v[1]
        return p0, p1

    def new_f2v(f, pos):
        scope, table = fm.factors[f]
        k = len(scope)
        acc = [0.0, 0.0]
        for idx, w in enumerate(table):
            v = w
            for q in range(k):
                if q == pos:
                    continue
                bit_q = (idx >> (k - 1 - q)) & 1
                v *= v2f[(f, q)][bit_q]
            acc[(idx >> (k - 1 - pos)) & 1] += v
        return acc[0], acc[1]

    residual = math.inf
    iterations = 0
    sequential = opts.schedule == "seq"
    for iterations in range(1, opts.max_iters + 1):
        residual = 0.0
        if sequential:
            for k in keys:
                for table_, updater in ((v2f, new_v2f), (f2v, new_f2v)):
                    u0, u1 = updater(*k)
                    n0, n1 = _normalize_pair(u0, u1)
                    old = table_[k]
                    m0 = (1 - d) * n0 + d * old[0]
                    m1 = (1 - d) * n1 + d * old[1]
                    residual = max(residual, abs(m0 - old[0]), abs(m1 - old[1]))
                    table_[k] = [m0, m1]
        else:
            new_v = {k: _normalize_pair(*new_v2f(*k)) for k in keys}
            new_f = {k: _normalize_pair(*new_f2v(*k)) for k in keys}
            for k in keys:
                for table_, fresh in ((v2f, new_v), (f2v, new_f)):
                    old = table_[k]
                    m0 = (1 - d) * fresh[k][0] + d * old[0]
                    m1 = (1 - d) * fresh[k][1] + d * old[1]
                    residual = max(residual, abs(m0 - old[0]), abs(m1 - old[1]))
                    table_[k] = [m0, m1]
        if residual < opts.tol:
            return v2f, f2v, iterations, True, residual
    return v2f, f2v, iterations, False, residual


def _run_factor_log(fm: FactorModel, opts: LbpOptions):
    """Log-domain twin of the factor sweep, for extreme tables."""
    incidences = _factor_structure(fm)
    keys = [(f, pos) for f, (scope, _) in enumerate(fm.factors) for pos in range(len(scope))]
    log_half = math.log(0.5)
    v2f = {k: [log_half, log_half] for k in keys}
    f2v = {k: [log_half, log_half] for k in keys}
    log_tables = [tuple(math.log(v) for v in table) for _, table in fm.factors]
    d = opts.damping
    log_d = math.log(d) if d > 0 else -math.inf
    log_1md = math.log(1 - d)

    def new_v2f(f, pos):
        i = fm.factors[f][0][pos]
        q0 = q1 = 0.0
        for f2, pos2 in incidences[i]:
            if f2 == f:
                continue
            v = f2v[(f2, pos2)]
            q0 += v[0]
            q1 += v[1]
        return q0, q1

    def new_f2v(f, pos):
        scope, _ = fm.factors[f]
        k = len(scope)
        acc = [[], []]
        for idx, lw in enumerate(log_tables[f]):
            v = lw
            for q in range(k):
                if q == pos:
                    continue
                v += v2f[(f, q)][(idx >> (k - 1 - q)) & 1]
            acc[(idx >> (k - 1 - pos)) & 1].append(v)
        return _logsumexp(acc[0]), _logsumexp(acc[1])

    def normalize(u0, u1):
        s = np.logaddexp(u0, u1)
        if not math.isfinite(s):
            raise NumericError("log-domain message update produced a non-finite value")
        return u0 - s, u1 - s

    def damp(new, old):
        if d == 0:
            return new
        return (
            np.logaddexp(log_1md + new[0], log_d + old[0]),
            np.logaddexp(log_1md + new[1], log_d + old[1]),
        )

    residual = math.inf
    iterations = 0
    sequential = opts.schedule == "seq"
    for iterations in range(1, opts.max_iters + 1):
        residual = 0.0
        if sequential:
            for k in keys:
                for table_, updater in ((v2f, new_v2f), (f2v, new_f2v)):
                    fresh = damp(normalize(*updater(*k)), table_[k])
                    old = table_[k]
                    residual = max(
                        residual,
                        abs(math.exp(fresh[0]) - math.exp(old[0])),
                        abs(math.exp(fresh[1]) - math.exp(old[1])),
                    )
                    table_[k] = list(fresh)
        else:
            new_v = {k: normalize(*new_v2f(*k)) for k in keys}
            new_f = {k: normalize(*new_f2v(*k)) for k in keys}
            for k in keys:
                for table_, fresh_tab in ((v2f, new_v), (f2v, new_f)):
                    fresh = damp(fresh_tab[k], table_[k])
                    old = table_[k]
                    residual = max(
                        residual,
                        abs(math.exp(fresh[0]) - math.exp(old[0])),
                        abs(math.exp(fresh[1]) - math.exp(old[1])),
                    )
                    table_[k] = list(fresh)
        if residual < opts.tol:
            break
    converged = residual < opts.tol
    lin_v2f = {k: [math.exp(v[0]), math.exp(v[1])] for k, v in v2f.items()}
    lin_f2v = {k: [math.exp(v[0]), math.exp(v[1])] for k, v in f2v.items()}
    return lin_v2f, lin_f2v, iterations, converged, residual


def _logsumexp(values):
    best = max(values)
    if best == -math.inf:
        return -math.inf
    return best + math.log(math.fsum(math.exp(v - best) for v in values))


def bethe_log_z_factor(fm: FactorModel, node_beliefs, factor_beliefs) -> float:
    """Factor-graph Bethe expression; d_i is the number of factors
    containing variable i."""
    node_beliefs = np.asarray(node_beliefs, dtype=float)
    total = 0.0
    for f, (scope, table) in enumerate(fm.factors):
        bf = np.asarray(factor_beliefs[f], dtype=float)
        if bf.min() <= 0.0:
            raise ValueError("Bethe expression needs strictly positive beliefs")
        total += float((bf * np.log(np.asarray(table))).sum())
        total -= float((bf * np.log(bf)).sum())
    if node_beliefs.min() <= 0.0:
        raise ValueError("Bethe expression needs strictly positive beliefs")
    for i in range(fm.variable_count):
        bi = node_beliefs[i]
        total += (fm.factor_degree(i) - 1) * float((bi * np.log(bi)).sum())
    return total


def run_lbp_factor(fm: FactorModel, opts: LbpOptions | None = None) -> LbpResult:
    """Factor-graph LBP; beliefs per variable and per factor (flat tables)."""
    opts = opts or LbpOptions()
    try:
        v2f, f2v, iterations, converged, residual = _run_factor_linear(fm, opts)
    except _RangeSignal:
        v2f, f2v, iterations, converged, residual = _run_factor_log(fm, opts)
    incidences = _factor_structure(fm)
    n = fm.variable_count
    node_beliefs = np.empty((n, 2))
    for i in range(n):
        p0 = p1 = 1.0
        for f, pos in incidences[i]:
            v = f2v[(f, pos)]
            p0 *= v[0]
            p1 *= v[1]
        s = p0 + p1
        if not (s > 0.0 and math.isfinite(s)):
            raise NumericError("belief normalization failed")
        node_beliefs[i] = (p0 / s, p1 / s)
    factor_beliefs = []
    for f, (scope, table) in enumerate(fm.factors):
        k = len(scope)
        tab = np.empty(len(table))
        for idx, w in enumerate(table):
            v = w
            for q in range(k):
                bit_q = (idx >> (k - 1 - q)) & 1
                v *= v2f[(f, q)][bit_q]
            tab[idx] = v
        total = tab.sum()
        if not (total > 0.0 and math.isfinite(total)):
            raise NumericError("factor belief normalization failed")
        factor_beliefs.append(tab / total)
    log_zb = bethe_log_z_factor(fm, node_beliefs, factor_beliefs)
    return LbpResult(
        node_beliefs=node_beliefs,
        log_z_b=log_zb,
        iterations=iterations,
        converged=converged,
        residual=residual,
        messages=[v2f, f2v],
        factor_beliefs=factor_beliefs,
        model=fm,
    )
