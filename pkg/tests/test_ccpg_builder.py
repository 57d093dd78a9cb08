"""
CCPG builder tests
Prefix chain, layer split, component DAG and CCPG JSON
"""

import json
import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.ccpg_builder import CcpgBuilder, CcpgOutput, build, build_int, query_budget
from src.ci_engine import DSeparationOracle
from src.errors import GraphArgumentError, GraphFormatError
from src.graph_core import Dag, Intervention
from src.synth import chain, in_star
from src.validator import check_ccpg, check_source_grouping, matches_dag
from tests.helpers import PROPERTY_SETTINGS, dags, intervention_lists


def test_prefix_chain_examples():
    """Layers of the in-star, the chain and a single vertex"""
    assert CcpgBuilder(DSeparationOracle(in_star(4))).prefix_chain() == [{0, 1, 2}, {3}]
    assert CcpgBuilder(DSeparationOracle(chain(3))).prefix_chain() == [{0, 1, 2}]
    assert CcpgBuilder(DSeparationOracle(Dag(1))).prefix_chain() == [{0}]


def test_split_layer_examples():
    """Independent leaves split, a chain stays whole"""
    star = CcpgBuilder(DSeparationOracle(in_star(4)))
    assert star.split_layer(frozenset({0, 1, 2}), frozenset()) == [{0}, {1}, {2}]
    line = CcpgBuilder(DSeparationOracle(chain(3)))
    assert line.split_layer(frozenset({0, 1, 2}), frozenset()) == [{0, 1, 2}]
    assert line.split_layer(frozenset({2}), frozenset({0, 1})) == [{2}]


def test_component_dag_examples():
    """Star edges, no edges for one component or isolated vertices"""
    star = CcpgBuilder(DSeparationOracle(in_star(4)))
    comps = [frozenset({v}) for v in range(4)]
    assert star.component_dag(comps) == [(0, 3), (1, 3), (2, 3)]
    assert star.component_dag([frozenset(range(4))]) == []
    isolated = CcpgBuilder(DSeparationOracle(Dag(2)))
    assert isolated.component_dag([frozenset({0}), frozenset({1})]) == []


def test_build_chain_is_one_component():
    """Covered edge 0->1 keeps the chain together"""
    out = build(DSeparationOracle(chain(3)))
    assert out.components == [{0, 1, 2}]
    assert out.edges == []
    assert out.layer_of == [0]
    assert check_ccpg(chain(3), out).passed


def test_build_in_star_recovers_graph():
    """No covered edges: exact recovery"""
    out = build(DSeparationOracle(in_star(4)))
    assert out.components == [{0}, {1}, {2}, {3}]
    assert out.edges == [(0, 3), (1, 3), (2, 3)]
    assert matches_dag(in_star(4), out)


def test_build_int_single_edge():
    """A verifying intervention splits the covered edge"""
    g = Dag(2, [(0, 1)])
    I = Intervention("I0", {0})
    out = build_int(DSeparationOracle(g, [I]), [I])
    assert out.components == [{0}, {1}]
    assert out.edges == [(0, 1)]
    assert check_ccpg(g, out, [I]).passed


def test_build_rejects_empty_graph():
    """Zero vertices"""
    with pytest.raises(GraphArgumentError):
        build(DSeparationOracle(Dag(0)))


def test_phase_counters_add_up():
    """Per-phase counters sum to the run totals"""
    out = build(DSeparationOracle(in_star(6)))
    assert sum(c.total for c in out.phases.values()) == out.ci_total
    assert sum(c.unique for c in out.phases.values()) == out.ci_unique
    assert set(out.phases) == {"prefix", "split", "dag"}


def test_json_shape_and_round_trip(tmp_path):
    """CCPG JSON fields survive a write/read cycle"""
    out = build(DSeparationOracle(in_star(5)))
    path = tmp_path / "ccpg.json"
    out.write_json(path, include_trace=True)
    data = json.loads(path.read_text())
    assert set(data) == {"components", "edges", "layers", "ci_total", "ci_unique", "phases", "trace"}
    loaded = CcpgOutput.read_json(path)
    assert loaded.components == out.components
    assert loaded.edges == out.edges
    assert loaded.ci_unique == out.ci_unique
    assert loaded.to_dict() == out.to_dict()


def test_from_dict_rejects_malformed():
    """Missing components or mismatched layers"""
    with pytest.raises(GraphFormatError):
        CcpgOutput.from_dict({"edges": []})
    with pytest.raises(GraphFormatError):
        CcpgOutput.from_dict({"components": [[0], [1]], "layers": [0]})


def test_output_is_deterministic():
    """Identical inputs give identical JSON"""
    g = Dag(6, [(0, 2), (1, 2), (2, 3), (3, 4), (1, 5)])
    first = build(DSeparationOracle(g)).to_dict()
    second = build(DSeparationOracle(g)).to_dict()
    assert json.dumps(first) == json.dumps(second)


@PROPERTY_SETTINGS
@given(dags(max_n=7))
def test_build_output_is_valid(g):
    """Every run yields a valid CCPG with ordered, layered components"""
    out = build(DSeparationOracle(g))
    report = check_ccpg(g, out)
    assert report.passed, report.witnesses
    assert all(i < j for i, j in out.edges)
    assert out.layer_of == sorted(out.layer_of)
    assert out.ci_unique <= query_budget(g.n)


@PROPERTY_SETTINGS
@given(dags(max_n=7))
def test_components_follow_source_groups(g):
    """Components of a layer group vertices by their unique source"""
    report = check_source_grouping(g, build(DSeparationOracle(g)))
    assert report.passed, report.witnesses


def test_build_int_keeps_target_below_non_target_out():
    """Chain with both ends intervened: three singletons in order"""
    g = chain(3)
    interventions = [Intervention("I0", {0, 2})]
    out = build_int(DSeparationOracle(g, interventions), interventions)
    assert [sorted(c) for c in out.components] == [[0], [1], [2]]
    assert check_ccpg(g, out, interventions).passed


@PROPERTY_SETTINGS
@given(st.data())
def test_build_int_valid_for_arbitrary_targets(data):
    """Random multi-target intervention lists still give a valid I-CCPG"""
    g = data.draw(dags(max_n=7))
    interventions = data.draw(intervention_lists(g.n))
    out = build_int(DSeparationOracle(g, interventions), interventions)
    report = check_ccpg(g, out, interventions)
    assert report.passed, (interventions, report.witnesses)
    assert out.ci_unique <= query_budget(g.n, len(interventions))
