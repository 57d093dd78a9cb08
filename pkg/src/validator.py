"""
Validator Module
Ground-truth checks for CCPGs, prefix steps and verifying intervention sets
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .ccpg_builder import CcpgOutput
from .ci_engine import CiOracle
from .errors import PartitionError
from .graph_core import (
    Dag,
    Intervention,
    VertexSet,
    anc_closed,
    children,
    covered_edges,
    descendants,
    des_closed,
    is_prefix_set,
    parents,
    src_of,
)
from .prefix_learner import PrefixStepTrace

CCPG_CLAUSES = (
    "single_source",
    "covered_edge",
    "no_missing_edges",
    "edge_to_source_parent",
    "topological",
    "prefix_chain",
)

STEP_CLAUSES = (
    "prefix",
    "grows",
    "sources_included",
    "sources_not_excluded",
    "d_closed",
    "exclusion_closed",
    "cut_covered_edges",
)


@dataclass
class ValidationReport:
    """Pass/fail per clause with witnesses for failures"""

    clauses: Dict[str, bool] = field(default_factory=dict)
    witnesses: Dict[str, List[str]] = field(default_factory=dict)

    def fail(self, clause: str, witness: str) -> None:
        self.clauses[clause] = False
        self.witnesses.setdefault(clause, []).append(witness)

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, ok in self.clauses.items() if not ok]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "clauses": dict(self.clauses),
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
        }

    def lines(self) -> List[str]:
        """Human-readable report, one line per clause"""
        out = []
        for name, ok in self.clauses.items():
            out.append(f"  {'PASS' if ok else 'FAIL'}  {name}")
            for witness in self.witnesses.get(name, []):
                out.append(f"        {witness}")
        return out


def _check_partition(g: Dag, out: CcpgOutput) -> None:
    seen: set = set()
    for i, comp in enumerate(out.components):
        if not comp:
            raise PartitionError(f"component {i} is empty")
        if comp & seen:
            raise PartitionError(f"component {i} overlaps earlier components on {sorted(comp & seen)}")
        seen |= comp
    if seen != g.vertices:
        raise PartitionError(
            f"components cover {sorted(seen)}, expected vertices 0..{g.n - 1}"
        )
    k = len(out.components)
    for i, j in out.edges:
        if not (0 <= i < k and 0 <= j < k):
            raise PartitionError(f"edge ({i}, {j}) names a missing component")


def _is_cut(edge, interventions: Sequence[Intervention]) -> bool:
    """An edge is intervened when exactly one endpoint is a target"""
    return any(len(I.targets & set(edge)) == 1 for I in interventions)


def check_ccpg(
    g: Dag,
    out: CcpgOutput,
    interventions: Optional[Sequence[Intervention]] = None,
) -> ValidationReport:
    """
    Check every clause of the CCPG (or I-CCPG) definition against g

    Args:
        g: Ground-truth DAG
        out: Learned components and component DAG
        interventions: When given, multi-vertex components need an
            unintervened covered edge

    Returns:
        ValidationReport over CCPG_CLAUSES

    Raises:
        PartitionError: components do not partition g's vertices
    """
    _check_partition(g, out)
    interventions = list(interventions or [])
    report = ValidationReport({name: True for name in CCPG_CLAUSES})
    comp_of = out.component_of()
    dag_edges = set(out.edges)
    covered = covered_edges(g)

    for i, comp in enumerate(out.components):
        sources = src_of(g, comp)
        if len(sources) != 1:
            report.fail("single_source", f"component {i} has sources {sorted(sources)}")

        if len(comp) > 1:
            inside = [e for e in covered if e[0] in comp and e[1] in comp]
            if interventions:
                inside = [e for e in inside if not _is_cut(e, interventions)]
            if not inside:
                report.fail("covered_edge", f"component {i} {sorted(comp)} has no usable covered edge")

    for u, v in g.edges:
        i, j = comp_of[u], comp_of[v]
        if i == j:
            continue
        if i > j:
            report.fail("topological", f"edge {u}->{v} runs from component {i} back to {j}")
        elif (i, j) not in dag_edges:
            report.fail("no_missing_edges", f"edge {u}->{v} but no component edge {i}->{j}")

    for i, j in sorted(dag_edges):
        if i >= j:
            report.fail("topological", f"component edge {i}->{j} is not increasing")
            continue
        source_parents = set()
        for s in src_of(g, out.components[j]):
            source_parents |= parents(g, s)
        if not source_parents & out.components[i]:
            report.fail("edge_to_source_parent",
                        f"component edge {i}->{j}: no vertex of {i} is a parent of a source of {j}")

    cumulative: set = set()
    for t, layer in enumerate(out.layers()):
        cumulative |= layer
        if not is_prefix_set(g, cumulative):
            report.fail("prefix_chain", f"layers up to {t} give a non-prefix set {sorted(cumulative)}")
    if any(b < a for a, b in zip(out.layer_of, out.layer_of[1:])):
        report.fail("prefix_chain", f"layer indices {out.layer_of} are not non-decreasing")

    return report


def is_verifying_set(g: Dag, interventions: Sequence[Intervention]) -> bool:
    """True iff every covered edge has an intervention hitting exactly one endpoint"""
    return all(_is_cut(edge, interventions) for edge in covered_edges(g))


def matches_dag(g: Dag, out: CcpgOutput) -> bool:
    """True iff the CCPG is g itself: singleton components and identical edges"""
    if len(out.components) != g.n or any(len(c) != 1 for c in out.components):
        return False
    vertex = [next(iter(c)) for c in out.components]
    return {(vertex[i], vertex[j]) for i, j in out.edges} == set(g.edge_set)


def lower_bound_verification_number(out: CcpgOutput) -> int:
    """Components with more than one vertex each need an intervention"""
    return sum(1 for comp in out.components if len(comp) > 1)


def check_source_grouping(g: Dag, out: CcpgOutput) -> ValidationReport:
    """
    Each layer's components group vertices by their unique source ancestor

    For the prefix S before a layer, every layer vertex has exactly one
    ancestor-or-self in src(S̄), and components coincide with those groups.
    """
    report = ValidationReport({"one_source": True, "grouping": True})
    before: set = set()
    for t, layer in enumerate(out.layers()):
        sources = src_of(g, g.vertices - before)
        groups: Dict[int, set] = {}
        for v in sorted(layer):
            owners = sources & anc_closed(g, v)
            if len(owners) != 1:
                report.fail("one_source", f"layer {t} vertex {v} reaches sources {sorted(owners)}")
                continue
            groups.setdefault(next(iter(owners)), set()).add(v)

        expected = sorted((frozenset(s) for s in groups.values()), key=min)
        actual = sorted((c for c, l in zip(out.components, out.layer_of) if l == t), key=min)
        if expected != actual:
            report.fail("grouping", f"layer {t}: components {[sorted(c) for c in actual]}, "
                                    f"source groups {[sorted(c) for c in expected]}")
        before |= layer
    return report


def check_prefix_step(
    g: Dag,
    trace: PrefixStepTrace,
    interventions: Optional[Sequence[Intervention]] = None,
) -> ValidationReport:
    """
    Ground-truth guarantees of one prefix step

    S' is a prefix set strictly containing S and src(S̄); no exclusion set
    touches src(S̄); D and the union of all exclusions are closed under
    descendants; a covered edge out of src(S̄) cut by some intervention
    leaves its head excluded.
    """
    interventions = list(interventions or [])
    report = ValidationReport({name: True for name in STEP_CLAUSES})
    s, out = trace.input_prefix, trace.output_prefix
    sources = src_of(g, g.vertices - s)
    excluded = trace.excluded

    if not is_prefix_set(g, out):
        report.fail("prefix", f"S'={sorted(out)} is not closed under ancestors")
    if not (s < out):
        report.fail("grows", f"S'={sorted(out)} does not strictly contain S={sorted(s)}")
    if not sources <= out:
        report.fail("sources_included", f"sources {sorted(sources - out)} missing from S'")
    if excluded & sources:
        report.fail("sources_not_excluded", f"sources {sorted(excluded & sources)} were excluded")

    for w in sorted(trace.d_set):
        missing = descendants(g, w) - trace.d_set
        if missing:
            report.fail("d_closed", f"D holds {w} but not its descendants {sorted(missing)}")
    for w in sorted(excluded):
        missing = descendants(g, w) - excluded
        if missing:
            report.fail("exclusion_closed", f"{w} excluded but not its descendants {sorted(missing)}")

    for v, w in covered_edges(g):
        if v in sources and _is_cut((v, w), interventions) and w in out:
            report.fail("cut_covered_edges", f"cut covered edge {v}->{w} kept {w} in S'")

    return report


# === Proxy-rule probes ===

@dataclass
class ProbeResult:
    premises_met: int = 0
    violations: int = 0


def random_topological_order(g: Dag, rng: np.random.Generator) -> List[int]:
    """Topological order picking uniformly among the current sources"""
    indegree = [len(parents(g, v)) for v in range(g.n)]
    ready = sorted(v for v in range(g.n) if indegree[v] == 0)
    order = []
    while ready:
        v = ready.pop(int(rng.integers(len(ready))))
        order.append(v)
        for c in sorted(children(g, v)):
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
    return order


def random_prefix(g: Dag, rng: np.random.Generator) -> VertexSet:
    """Uniformly sized prefix of a random topological order"""
    order = random_topological_order(g, rng)
    return frozenset(order[: int(rng.integers(g.n + 1))])


def proxy_vstructure_probe(g: Dag, oracle: CiOracle, trials: int, seed: Optional[int] = None) -> ProbeResult:
    """
    u ⫫ v | S and u ⫫̸ v | S ∪ {z} must imply u, v ∉ Des[z]

    S is a uniformly random subset; u, v, z are distinct vertices outside it.
    """
    rng = np.random.default_rng(seed)
    result = ProbeResult()
    for _ in range(trials):
        s = frozenset(int(v) for v in np.flatnonzero(rng.random(g.n) < 0.5))
        rest = sorted(g.vertices - s)
        if len(rest) < 3:
            continue
        u, v, z = (int(x) for x in rng.choice(rest, size=3, replace=False))
        if oracle.independent(u, v, s) and oracle.dependent(u, v, s | {z}):
            result.premises_met += 1
            if {u, v} & des_closed(g, z):
                result.violations += 1
    return result


def proxy_meek1_probe(g: Dag, oracle: CiOracle, trials: int, seed: Optional[int] = None) -> ProbeResult:
    """
    For prefix S, u ∈ S, v, w ∉ S: u ⫫̸ v | S and u ⫫ w | S ∪ {v} must imply v ∉ Des[w]
    """
    rng = np.random.default_rng(seed)
    result = ProbeResult()
    for _ in range(trials):
        s = random_prefix(g, rng)
        rest = sorted(g.vertices - s)
        if not s or len(rest) < 2:
            continue
        u = int(rng.choice(sorted(s)))
        v, w = (int(x) for x in rng.choice(rest, size=2, replace=False))
        if oracle.dependent(u, v, s) and oracle.independent(u, w, s | {v}):
            result.premises_met += 1
            if v in des_closed(g, w):
                result.violations += 1
    return result
