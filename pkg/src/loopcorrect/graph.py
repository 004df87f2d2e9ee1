"""Multigraphs and the combinatorial enumeration the series and the graph
polynomials are built on: generalized loops, node-disjoint cycle sets,
matchings, contraction and deletion.

Self-loops and parallel edges are first-class here because contraction
produces them; the inference modules reject them at model validation.
Everything is a pure function of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import SizeError

# An edge subset is a frozenset of edge ids of its host multigraph.
EdgeSubset = frozenset


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph: edges are an ordered list of endpoint pairs.

    Edge ids are list indices and survive deletion/contraction in relative
    order, so derived polynomials are reproducible.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.node_count <= 0:
            raise ValueError("node_count must be positive")
        object.__setattr__(
            self, "edges", tuple((int(a), int(b)) for a, b in self.edges)
        )
        for a, b in self.edges:
            if not (0 <= a < self.node_count and 0 <= b < self.node_count):
                raise ValueError(f"edge ({a},{b}) out of range")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        """Degree in the full graph; a self-loop counts twice."""
        return degree_in_subset(self, range(len(self.edges)), i)

    def incident_edges(self, i: int) -> list[int]:
        out = []
        for e, (a, b) in enumerate(self.edges):
            if a == i or b == i:
                out.append(e)
        return out

    def has_self_loop(self) -> bool:
        return any(a == b for a, b in self.edges)

    def is_simple(self) -> bool:
        seen = set()
        for a, b in self.edges:
            if a == b:
                return False
            key = (min(a, b), max(a, b))
            if key in seen:
                return False
            seen.add(key)
        return True


def degree_in_subset(g: Multigraph, s, i: int) -> int:
    """Number of endpoint incidences of node i among edges in s."""
    if not (0 <= i < g.node_count):
        raise ValueError(f"node id {i} out of range")
    d = 0
    for e in s:
        a, b = g.edges[e]
        if a == i:
            d += 1
        if b == i:
            d += 1
    return d


def is_connected(g: Multigraph) -> tuple[bool, int]:
    """(connected?, number of connected components); isolated nodes count."""
    adj = [[] for _ in range(g.node_count)]
    for a, b in g.edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * g.node_count
    comps = 0
    for start in range(g.node_count):
        if seen[start]:
            continue
        comps += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps == 1, comps


def cycle_rank(g: Multigraph) -> int:
    """|E| - |V| + 1 for a connected multigraph."""
    ok, comps = is_connected(g)
    if not ok:
        raise ValueError(f"cycle rank needs a connected graph (got {comps} components)")
    return len(g.edges) - g.node_count + 1


def contract(g: Multigraph, e: int) -> Multigraph:
    """Merge the endpoints of a non-loop edge e; the merged node takes the
    smaller id and higher ids shift down by one."""
    a, b = g.edges[e]
    if a == b:
        raise ValueError("cannot contract a self-loop")
    lo, hi = min(a, b), max(a, b)

    def remap(v: int) -> int:
        if v == hi:
            return lo
        return v - 1 if v > hi else v

    edges = tuple(
        (remap(x), remap(y)) for i, (x, y) in enumerate(g.edges) if i != e
    )
    return Multigraph(g.node_count - 1, edges)


def delete(g: Multigraph, e: int) -> Multigraph:
    """Remove edge e, keeping all nodes."""
    if not (0 <= e < len(g.edges)):
        raise ValueError(f"edge id {e} out of range")
    return Multigraph(g.node_count, tuple(p for i, p in enumerate(g.edges) if i != e))


def enumerate_generalized_loops(g: Multigraph, free_node: int | None = None):
    """All edge subsets (including the empty one) in which no node has
    degree exactly one.

    free_node, when given, is exempt from the degree-one constraint; the
    marginal series needs that variant because the target node's weight is
    a g value and g_1 != 0.

    Branch-and-prune over edges in id order; subsets come out in
    lexicographic order on the edge-id bitmask (empty set first).
    """
    m = len(g.edges)
    last_touch = [-1] * g.node_count
    for e, (a, b) in enumerate(g.edges):
        last_touch[a] = e
        last_touch[b] = e
    deg = [0] * g.node_count
    chosen: list[int] = []
    out: list[EdgeSubset] = []

    def ok_after(e: int) -> bool:
        a, b = g.edges[e]
        for v in (a, b) if a != b else (a,):
            if v != free_node and last_touch[v] == e and deg[v] == 1:
                return False
        return True

    def rec(e: int) -> None:
        if e == m:
            out.append(frozenset(chosen))
            return
        a, b = g.edges[e]
        # exclude e
        if ok_after(e):
            rec(e + 1)
        # include e
        deg[a] += 1
        deg[b] += 1
        if ok_after(e):
            chosen.append(e)
            rec(e + 1)
            chosen.pop()
        deg[a] -= 1
        deg[b] -= 1

    rec(0)
    return out


def enumerate_generalized_loops_naive(g: Multigraph, free_node: int | None = None):
    """Test oracle: filter all 2^|E| subsets directly (|E| <= 16 enforced)."""
    m = len(g.edges)
    if m > 16:
        raise SizeError("naive loop enumeration capped at 16 edges")
    out = []
    for mask in range(1 << m):
        s = [e for e in range(m) if (mask >> e) & 1]
        deg = [0] * g.node_count
        for e in s:
            a, b = g.edges[e]
            deg[a] += 1
            deg[b] += 1
        if all(d != 1 for i, d in enumerate(deg) if i != free_node):
            out.append(frozenset(s))
    # bitmask-lex order: membership string with edge 0 most significant
    out.sort(key=lambda s: tuple(e in s for e in range(m)))
    return out


def enumerate_disjoint_cycles(g: Multigraph):
    """All edge subsets C in which every touched node has degree exactly 2,
    paired with k(C), the number of connected components of C.

    The empty set is included with k = 0.
    """
    m = len(g.edges)
    last_touch = [-1] * g.node_count
    for e, (a, b) in enumerate(g.edges):
        last_touch[a] = e
        last_touch[b] = e
    deg = [0] * g.node_count
    chosen: list[int] = []
    out: list[tuple[EdgeSubset, int]] = []

    def ok_after(e: int) -> bool:
        a, b = g.edges[e]
        for v in (a, b) if a != b else (a,):
            if deg[v] > 2:
                return False
            if last_touch[v] == e and deg[v] == 1:
                return False
        return True

    def rec(e: int) -> None:
        if e == m:
            out.append((frozenset(chosen), _component_count(g, chosen)))
            return
        a, b = g.edges[e]
        if ok_after(e):
            rec(e + 1)
        deg[a] += 1
        deg[b] += 1
        if ok_after(e):
            chosen.append(e)
            rec(e + 1)
            chosen.pop()
        deg[a] -= 1
        deg[b] -= 1

    rec(0)
    return out


def _component_count(g: Multigraph, edge_ids) -> int:
    """Connected components of the subgraph induced by edge_ids."""
    parent: dict[int, int] = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in edge_ids:
        a, b = g.edges[e]
        parent.setdefault(a, a)
        parent.setdefault(b, b)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(v) for v in parent})


def enumerate_matchings(g: Multigraph) -> list[int]:
    """k-matching counts p(k) for k = 0..floor(n/2); p(0) = 1."""
    if g.has_self_loop():
        raise ValueError("matchings are undefined on graphs with self-loops")
    counts = [0] * (g.node_count // 2 + 1)
    used = [False] * g.node_count
    m = len(g.edges)

    def rec(e: int, k: int) -> None:
        if e == m:
            counts[k] += 1
            return
        rec(e + 1, k)
        a, b = g.edges[e]
        if not used[a] and not used[b]:
            used[a] = used[b] = True
            rec(e + 1, k + 1)
            used[a] = used[b] = False

    rec(0, 0)
    return counts


# ---------------------------------------------------------------------------
# Edge-list text format: first line "N M", then M lines "a b".
# ---------------------------------------------------------------------------

def parse_edge_list(text: str) -> Multigraph:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty edge-list input")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'N M'")
    n, m = int(head[0]), int(head[1])
    if len(lines) - 1 != m:
        raise ValueError(f"expected {m} edge lines, got {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        a, b = ln.split()
        edges.append((int(a), int(b)))
    return Multigraph(n, tuple(edges))


def render_edge_list(g: Multigraph) -> str:
    out = [f"{g.node_count} {len(g.edges)}"]
    out.extend(f"{a} {b}" for a, b in g.edges)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Stock constructions used by tests and the CLI generator.
# ---------------------------------------------------------------------------

def path_graph(n: int) -> Multigraph:
    return Multigraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Multigraph:
    if n < 3:
        raise ValueError("cycle needs at least 3 nodes")
    return Multigraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Multigraph:
    return Multigraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(n: int) -> Multigraph:
    """Node 0 joined to each of the other n-1 nodes."""
    return Multigraph(n, tuple((0, i) for i in range(1, n)))


def grid_graph(rows: int, cols: int) -> Multigraph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Multigraph(rows * cols, tuple(edges))


def bouquet_graph(loops: int) -> Multigraph:
    """A single node with the given number of self-loops."""
    return Multigraph(1, tuple((0, 0) for _ in range(loops)))


def parallel_edges_graph(count: int = 2) -> Multigraph:
    """Two nodes joined by `count` parallel edges."""
    return Multigraph(2, tuple((0, 1) for _ in range(count)))


def two_triangles_graph() -> Multigraph:
    """Two triangles joined by a bridge: 6 nodes, 7 edges.

    The canonical small graph with cycle rank 2 and exactly five
    generalized loops.
    """
    return Multigraph(6, ((0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)))
