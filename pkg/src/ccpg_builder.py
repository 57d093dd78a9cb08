"""
CCPG Builder Module
Prefix chain, per-layer component split and inter-component DAG
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
from tqdm import tqdm

from .ci_engine import CiCounter, CiOracle
from .errors import GraphArgumentError, GraphFormatError
from .graph_core import EMPTY, Edge, Intervention, VertexSet
from .prefix_learner import PrefixStepTrace, learn_prefix, learn_prefix_int

PHASES = ("prefix", "split", "dag")


@dataclass
class CcpgOutput:
    """Ordered components, component DAG and CI counters"""

    components: List[VertexSet]
    edges: List[Edge]
    layer_of: List[int]
    ci_total: int = 0
    ci_unique: int = 0
    phases: Dict[str, CiCounter] = field(default_factory=dict)
    traces: List[PrefixStepTrace] = field(default_factory=list)

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.components)

    def component_of(self) -> Dict[int, int]:
        """Vertex -> component index"""
        return {v: i for i, comp in enumerate(self.components) for v in comp}

    def layers(self) -> List[VertexSet]:
        """S_1, S_2, ... recovered from layer_of"""
        grouped: Dict[int, set] = {}
        for comp, layer in zip(self.components, self.layer_of):
            grouped.setdefault(layer, set()).update(comp)
        return [frozenset(grouped[t]) for t in sorted(grouped)]

    def to_dict(self, include_trace: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "components": [sorted(c) for c in self.components],
            "edges": [[i, j] for i, j in sorted(self.edges)],
            "layers": list(self.layer_of),
            "ci_total": self.ci_total,
            "ci_unique": self.ci_unique,
            "phases": {name: self.phases[name].to_dict() for name in PHASES if name in self.phases},
        }
        if include_trace:
            data["trace"] = [t.to_dict() for t in self.traces]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CcpgOutput":
        """Parse CCPG JSON, traces are not restored"""
        try:
            components = [frozenset(int(v) for v in comp) for comp in data["components"]]
            edges = [(int(i), int(j)) for i, j in data.get("edges", [])]
            layer_of = [int(t) for t in data.get("layers", range(len(components)))]
            phases = {
                name: CiCounter(int(c["total"]), int(c["unique"]))
                for name, c in (data.get("phases") or {}).items()
            }
            ci_total = int(data.get("ci_total", 0))
            ci_unique = int(data.get("ci_unique", 0))
        except (KeyError, TypeError, ValueError) as e:
            raise GraphFormatError(f"malformed CCPG JSON: {e}") from e
        if len(layer_of) != len(components):
            raise GraphFormatError("'layers' must have one entry per component")
        return cls(components, edges, layer_of, ci_total, ci_unique, phases)

    def write_json(self, path: Union[str, Path], include_trace: bool = False) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(include_trace), f, indent=2)
            f.write("\n")

    @classmethod
    def read_json(cls, path: Union[str, Path]) -> "CcpgOutput":
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise GraphFormatError(f"{path}: invalid JSON ({e})") from e
        return cls.from_dict(data)


class CcpgBuilder:
    """Learns a CCPG (or I-CCPG) from a CI oracle"""

    def __init__(
        self,
        oracle: CiOracle,
        interventions: Optional[Sequence[Intervention]] = None,
        verbose: bool = False,
        show_progress: bool = False,
    ):
        """
        Initialize builder

        Args:
            oracle: CI oracle; it must answer every intervention's regime
            interventions: Known-target interventions, None for observational
            verbose: Print per-layer progress lines
            show_progress: Show a progress bar over the prefix chain
        """
        if oracle.n < 1:
            raise GraphArgumentError("CCPG learning needs at least one vertex")
        self.oracle = oracle
        self.interventions = list(interventions or [])
        self.verbose = verbose
        self.show_progress = show_progress
        self.traces: List[PrefixStepTrace] = []

    def prefix_chain(self) -> List[VertexSet]:
        """
        Successive differences S_1, S_2 \\ S_1, ... of the prefix chain

        Returns:
            Layers whose union is V
        """
        vertices = self.oracle.vertices
        prefix = EMPTY
        layers: List[VertexSet] = []
        self.traces = []

        pbar = tqdm(total=len(vertices), desc="Prefix chain", disable=not self.show_progress)
        while prefix != vertices:
            if self.interventions:
                trace = learn_prefix_int(self.oracle, prefix, self.interventions)
            else:
                trace = learn_prefix(self.oracle, prefix)
            self.traces.append(trace)
            layer = trace.output_prefix - prefix
            layers.append(layer)
            prefix = trace.output_prefix
            pbar.update(len(layer))

            if self.verbose:
                print(f"[Builder] Layer {len(layers)}: {sorted(layer)} "
                      f"({trace.queries_used.unique} new CI tests)")
        pbar.close()
        return layers

    def split_layer(self, layer: VertexSet, before: VertexSet) -> List[VertexSet]:
        """
        Components of the layer's dependence graph given earlier layers

        Args:
            layer: S_i \\ S_{i-1}
            before: S_{i-1}

        Returns:
            Components in ascending order of their smallest vertex
        """
        members = sorted(layer)
        graph = nx.Graph()
        graph.add_nodes_from(members)
        for k, v in enumerate(members):
            for w in members[k + 1:]:
                if self.oracle.dependent(v, w, before):
                    graph.add_edge(v, w)

        components = [frozenset(c) for c in nx.connected_components(graph)]
        return sorted(components, key=min)

    def component_dag(self, components: Sequence[VertexSet]) -> List[Edge]:
        """Edge i -> j iff V_i ⫫̸ V_j | V_1 ∪ ... ∪ V_{j-1}"""
        edges: List[Edge] = []
        earlier: set = set()
        for j, comp_j in enumerate(components):
            for i in range(j):
                if self.oracle.dependent(components[i], comp_j, earlier):
                    edges.append((i, j))
            earlier |= comp_j
        return sorted(edges)

    def build(self) -> CcpgOutput:
        """Run the three phases and collect counters"""
        phases: Dict[str, CiCounter] = {}
        start = self.oracle.counter.snapshot()

        mark = self.oracle.counter.snapshot()
        layers = self.prefix_chain()
        phases["prefix"] = self.oracle.counter.snapshot() - mark

        mark = self.oracle.counter.snapshot()
        components: List[VertexSet] = []
        layer_of: List[int] = []
        before: VertexSet = EMPTY
        for t, layer in enumerate(layers):
            for comp in self.split_layer(layer, before):
                components.append(comp)
                layer_of.append(t)
            before = before | layer
        phases["split"] = self.oracle.counter.snapshot() - mark

        mark = self.oracle.counter.snapshot()
        edges = self.component_dag(components)
        phases["dag"] = self.oracle.counter.snapshot() - mark

        used = self.oracle.counter.snapshot() - start
        if self.verbose:
            print(f"[Builder] {len(components)} components, {len(edges)} edges, "
                  f"{used.unique} unique / {used.total} total CI tests")

        return CcpgOutput(
            components=components,
            edges=edges,
            layer_of=layer_of,
            ci_total=used.total,
            ci_unique=used.unique,
            phases=phases,
            traces=list(self.traces),
        )


def build(oracle: CiOracle, verbose: bool = False, show_progress: bool = False) -> CcpgOutput:
    """Observational CCPG"""
    return CcpgBuilder(oracle, None, verbose, show_progress).build()


def build_int(
    oracle: CiOracle,
    interventions: Sequence[Intervention],
    verbose: bool = False,
    show_progress: bool = False,
) -> CcpgOutput:
    """I-CCPG from observational plus interventional regimes"""
    return CcpgBuilder(oracle, interventions, verbose, show_progress).build()


def query_budget(n: int, num_interventions: int = 0) -> int:
    """Declared bound on unique CI queries of a whole run: 5 n^5 + 3 |I| n^3"""
    return 5 * n ** 5 + 3 * num_interventions * n ** 3
