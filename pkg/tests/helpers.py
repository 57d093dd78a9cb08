"""
Test helpers
Brute-force d-separation by path enumeration, hypothesis DAG and intervention strategies
"""

import sys
from itertools import combinations
from pathlib import Path

import networkx as nx
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.graph_core import Dag, Intervention

PROPERTY_SETTINGS = settings(
    max_examples=120,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)


def to_digraph(g: Dag) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(g.n))
    graph.add_edges_from(g.edges)
    return graph


def path_active(graph: nx.DiGraph, path, cond) -> bool:
    """Every collider has itself or a descendant in cond, every other inner vertex is outside cond"""
    for k in range(1, len(path) - 1):
        prev, node, nxt = path[k - 1], path[k], path[k + 1]
        collider = graph.has_edge(prev, node) and graph.has_edge(nxt, node)
        if collider:
            if not (({node} | nx.descendants(graph, node)) & cond):
                return False
        elif node in cond:
            return False
    return True


def brute_d_separated(g: Dag, a_set, b_set, cond=()) -> bool:
    """A ⫫ B | C \\ (A ∪ B) by enumerating every simple skeleton path"""
    a_set, b_set = set(a_set), set(b_set)
    cond = set(cond) - a_set - b_set
    graph = to_digraph(g)
    skeleton = graph.to_undirected()
    for a in a_set:
        for b in b_set:
            for path in nx.all_simple_paths(skeleton, a, b):
                if path_active(graph, path, cond):
                    return False
    return True


def all_subsets(vertices):
    vertices = sorted(vertices)
    for size in range(len(vertices) + 1):
        for combo in combinations(vertices, size):
            yield frozenset(combo)


@st.composite
def dags(draw, min_n: int = 1, max_n: int = 7) -> Dag:
    """DAG over a drawn vertex order, each forward pair drawn independently"""
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    order = draw(st.permutations(list(range(n))))
    edges = [
        (order[i], order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if draw(st.booleans())
    ]
    return Dag(n, edges)


@st.composite
def intervention_lists(draw, n: int, max_size: int = 3):
    """Up to max_size interventions, each over an arbitrary non-empty target set"""
    target_sets = draw(
        st.lists(st.frozensets(st.integers(min_value=0, max_value=n - 1), min_size=1), max_size=max_size)
    )
    return [Intervention(f"I{k}", targets) for k, targets in enumerate(target_sets)]
