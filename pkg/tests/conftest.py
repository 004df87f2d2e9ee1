"""Shared fixtures: the fixed graph corpus and model helpers."""

import numpy as np
import pytest

from loopcorrect.graph import (
    Multigraph,
    bouquet_graph,
    complete_graph,
    cycle_graph,
    grid_graph,
    parallel_edges_graph,
    path_graph,
    star_graph,
    two_triangles_graph,
)


def corpus_trees():
    """Fixed trees up to 8 nodes."""
    return [
        path_graph(2),
        path_graph(3),
        path_graph(5),
        star_graph(5),
        Multigraph(7, ((0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6))),
        Multigraph(8, ((0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (5, 6), (5, 7))),
    ]


def corpus_graphs():
    """The fixed identity-check corpus: trees, small cycles, K4, a 2x3
    grid, the two-triangles graph, bouquets, and parallel-edge graphs."""
    return (
        corpus_trees()
        + [cycle_graph(n) for n in (3, 4, 5, 6)]
        + [
            complete_graph(4),
            grid_graph(2, 3),
            two_triangles_graph(),
            bouquet_graph(1),
            bouquet_graph(2),
            bouquet_graph(3),
            parallel_edges_graph(2),
            parallel_edges_graph(3),
        ]
    )


def corpus_simple_connected():
    """The subset valid for the determinant-sum identity."""
    return [g for g in corpus_graphs() if g.is_simple()]


def corpus_loop_free():
    """The subset valid for the counting interpretation of omega(1)."""
    return [g for g in corpus_graphs() if not g.has_self_loop()]


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
