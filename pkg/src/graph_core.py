"""
Graph Core Module
Immutable DAG with ancestral queries, source sets, covered edges,
d-separation and hard-intervention mutilation
"""

import json
import operator
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from .errors import CyclicGraphError, GraphArgumentError, GraphFormatError

VertexSet = FrozenSet[int]
Edge = Tuple[int, int]

EMPTY: VertexSet = frozenset()

# Regime id of the unintervened distribution
OBSERVATIONAL = "obs"

# Bayes-ball traversal directions
_FROM_CHILD = 0
_FROM_PARENT = 1


class Dag:
    """Immutable directed acyclic graph over vertices 0..n-1"""

    def __init__(
        self,
        n: int,
        edges: Iterable[Sequence[int]] = (),
        labels: Optional[Sequence[str]] = None,
    ):
        """
        Build and validate a DAG

        Args:
            n: Vertex count
            edges: Pairs (u, v) meaning u -> v
            labels: Optional display names, one per vertex

        Raises:
            GraphArgumentError: negative n or out-of-range endpoint
            GraphFormatError: self-loop, duplicate edge or bad labels
            CyclicGraphError: edges contain a directed cycle
        """
        if n < 0:
            raise GraphArgumentError(f"vertex count must be non-negative, got {n}")

        edge_list: List[Edge] = []
        seen = set()
        for edge in edges:
            if len(edge) != 2:
                raise GraphFormatError(f"edge must be a pair, got {edge!r}")
            u, v = int(edge[0]), int(edge[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphArgumentError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphFormatError(f"self-loop on vertex {u}")
            if (u, v) in seen:
                raise GraphFormatError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            edge_list.append((u, v))

        if labels is not None:
            labels = tuple(str(label) for label in labels)
            if len(labels) != n:
                raise GraphFormatError(f"expected {n} labels, got {len(labels)}")

        graph = nx.DiGraph()
        graph.add_nodes_from(range(n))
        graph.add_edges_from(edge_list)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise CyclicGraphError(f"edges contain a cycle: {cycle}")

        self._n = n
        self._edges: Tuple[Edge, ...] = tuple(sorted(edge_list))
        self._edge_set: FrozenSet[Edge] = frozenset(edge_list)
        self._labels = labels
        self._order: Tuple[int, ...] = tuple(nx.lexicographical_topological_sort(graph))

        parents: List[set] = [set() for _ in range(n)]
        children: List[set] = [set() for _ in range(n)]
        for u, v in edge_list:
            parents[v].add(u)
            children[u].add(v)
        self._parents: Tuple[VertexSet, ...] = tuple(frozenset(p) for p in parents)
        self._children: Tuple[VertexSet, ...] = tuple(frozenset(c) for c in children)

        # Strict ancestor / descendant tables, filled along the topological order
        anc: List[VertexSet] = [EMPTY] * n
        for v in self._order:
            acc = set(self._parents[v])
            for p in self._parents[v]:
                acc |= anc[p]
            anc[v] = frozenset(acc)
        des: List[VertexSet] = [EMPTY] * n
        for v in reversed(self._order):
            acc = set(self._children[v])
            for c in self._children[v]:
                acc |= des[c]
            des[v] = frozenset(acc)
        self._anc: Tuple[VertexSet, ...] = tuple(anc)
        self._des: Tuple[VertexSet, ...] = tuple(des)

    @property
    def n(self) -> int:
        return self._n

    @property
    def edges(self) -> Tuple[Edge, ...]:
        """Edges in ascending (u, v) order"""
        return self._edges

    @property
    def edge_set(self) -> FrozenSet[Edge]:
        return self._edge_set

    @property
    def labels(self) -> Optional[Tuple[str, ...]]:
        return self._labels

    @property
    def vertices(self) -> VertexSet:
        return frozenset(range(self._n))

    @property
    def order(self) -> Tuple[int, ...]:
        """Smallest-label-first topological order"""
        return self._order

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_set

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self._n == other._n and self._edge_set == other._edge_set

    def __hash__(self) -> int:
        return hash((self._n, self._edge_set))

    def __repr__(self) -> str:
        return f"Dag(n={self._n}, edges={list(self._edges)})"


@dataclass(frozen=True)
class Intervention:
    """Hard intervention: regime id plus target set"""

    id: str
    targets: VertexSet

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(int(t) for t in self.targets))


def check_vertex(g: Dag, v: int) -> int:
    """Validate a single vertex index"""
    try:
        index = operator.index(v)
    except TypeError:
        raise GraphArgumentError(f"vertex must be an integer, got {v!r}") from None
    if isinstance(v, bool) or not 0 <= index < g.n:
        raise GraphArgumentError(f"vertex {v!r} out of range for n={g.n}")
    return index


def as_vertex_set(g: Dag, vertices: Union[int, Iterable[int]]) -> VertexSet:
    """Coerce an int or iterable into a range-checked VertexSet"""
    try:
        vertices = (operator.index(vertices),)
    except TypeError:
        pass
    return frozenset(check_vertex(g, v) for v in vertices)


def check_targets(g: Dag, intervention: Intervention) -> Intervention:
    """Validate intervention targets against g"""
    as_vertex_set(g, intervention.targets)
    return intervention


def complement(g: Dag, vertices: Iterable[int]) -> VertexSet:
    """S̄ = V \\ S"""
    return g.vertices - as_vertex_set(g, vertices)


def parents(g: Dag, v: int) -> VertexSet:
    return g._parents[check_vertex(g, v)]


def children(g: Dag, v: int) -> VertexSet:
    return g._children[check_vertex(g, v)]


def ancestors(g: Dag, vertices: Union[int, Iterable[int]]) -> VertexSet:
    """Anc(S): union of strict ancestors"""
    result: set = set()
    for v in as_vertex_set(g, vertices):
        result |= g._anc[v]
    return frozenset(result)


def descendants(g: Dag, vertices: Union[int, Iterable[int]]) -> VertexSet:
    """Des(S): union of strict descendants"""
    result: set = set()
    for v in as_vertex_set(g, vertices):
        result |= g._des[v]
    return frozenset(result)


def anc_closed(g: Dag, vertices: Union[int, Iterable[int]]) -> VertexSet:
    """Anc[S] = Anc(S) ∪ S"""
    return ancestors(g, vertices) | as_vertex_set(g, vertices)


def des_closed(g: Dag, vertices: Union[int, Iterable[int]]) -> VertexSet:
    """Des[S] = Des(S) ∪ S"""
    return descendants(g, vertices) | as_vertex_set(g, vertices)


def src_of(g: Dag, vertices: Iterable[int]) -> VertexSet:
    """Vertices of S with no ancestor inside S"""
    members = as_vertex_set(g, vertices)
    return frozenset(v for v in members if not (g._anc[v] & members))


def is_prefix_set(g: Dag, vertices: Iterable[int]) -> bool:
    """True iff S is closed under ancestors"""
    members = as_vertex_set(g, vertices)
    return all(g._anc[w] <= members for w in members)


def covered_edges(g: Dag) -> List[Edge]:
    """Edges u -> v with Pa(u) ∪ {u} = Pa(v), ascending"""
    return [(u, v) for u, v in g.edges if g._parents[u] | {u} == g._parents[v]]


def d_separated(
    g: Dag,
    a_set: Union[int, Iterable[int]],
    b_set: Union[int, Iterable[int]],
    cond: Union[int, Iterable[int]] = (),
) -> bool:
    """
    Decide A ⫫ B | C by reachability (Bayes-ball)

    C is first reduced to C \\ (A ∪ B).

    Raises:
        GraphArgumentError: A or B empty, or A and B overlap
    """
    a = as_vertex_set(g, a_set)
    b = as_vertex_set(g, b_set)
    if not a or not b:
        raise GraphArgumentError("d-separation needs nonempty A and B")
    if a & b:
        raise GraphArgumentError(f"A and B overlap on {sorted(a & b)}")
    c = as_vertex_set(g, cond) - (a | b)
    return not (active_reachable(g, a, c) & b)


def active_reachable(g: Dag, sources: VertexSet, cond: VertexSet) -> VertexSet:
    """Vertices joined to some source by a path active given cond"""
    cond_anc = anc_closed(g, cond)
    stack = [(s, _FROM_CHILD) for s in sources]
    visited = set()
    reachable = set()

    while stack:
        v, direction = stack.pop()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))

        if v not in cond:
            reachable.add(v)

        if direction == _FROM_CHILD:
            if v not in cond:
                stack.extend((p, _FROM_CHILD) for p in g._parents[v])
                stack.extend((c, _FROM_PARENT) for c in g._children[v])
        else:
            if v not in cond:
                stack.extend((c, _FROM_PARENT) for c in g._children[v])
            # Collider opens when it or a descendant is conditioned on
            if v in cond_anc:
                stack.extend((p, _FROM_CHILD) for p in g._parents[v])

    return frozenset(reachable)


def mutilate(g: Dag, intervention: Union[Intervention, Iterable[int]]) -> Dag:
    """𝒢^I: delete every edge into a target"""
    targets = intervention.targets if isinstance(intervention, Intervention) else intervention
    targets = as_vertex_set(g, targets)
    if not targets:
        return g
    return Dag(g.n, [(u, v) for u, v in g.edges if v not in targets], labels=g.labels)


# === DAG JSON ===

def dag_to_dict(g: Dag) -> Dict[str, Any]:
    data: Dict[str, Any] = {"n": g.n, "edges": [[u, v] for u, v in g.edges]}
    if g.labels is not None:
        data["labels"] = list(g.labels)
    return data


def dag_from_dict(data: Dict[str, Any]) -> Dag:
    """Parse {"n": int, "edges": [[u, v], ...], "labels": [...]}"""
    if not isinstance(data, dict) or "n" not in data:
        raise GraphFormatError("DAG JSON needs an 'n' field")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise GraphFormatError(f"'n' must be an integer, got {n!r}")
    edges = data.get("edges", [])
    if not isinstance(edges, list):
        raise GraphFormatError("'edges' must be a list")
    for edge in edges:
        if not isinstance(edge, (list, tuple)) or not all(isinstance(x, int) for x in edge):
            raise GraphFormatError(f"edge must be a pair of integers, got {edge!r}")
    labels = data.get("labels")
    if labels is not None and not isinstance(labels, list):
        raise GraphFormatError(f"'labels' must be a list, got {type(labels).__name__}")
    return Dag(n, edges, labels=labels)


def read_dag_json(path: Union[str, Path]) -> Dag:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphFormatError(f"{path}: invalid JSON ({e})") from e
    return dag_from_dict(data)


def write_dag_json(g: Dag, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(dag_to_dict(g), f, indent=2)
        f.write("\n")
