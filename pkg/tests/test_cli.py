"""
Command line tests
synth, learn, validate and bench through main() and their exit codes
"""

import json
import sys
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from main import EXIT_INPUT, EXIT_INVALID, EXIT_OK, EXIT_STALL, main
import src.benchmark as benchmark
from src.benchmark import COLUMNS, run_one
from src.ccpg_builder import CcpgBuilder, CcpgOutput
from src.errors import PrefixStallError


def _synth(out_dir, *extra):
    return main(["synth", "--out", str(out_dir), *extra])


def test_synth_is_deterministic(tmp_path):
    """Same arguments write byte-identical files"""
    args = ["--kind", "er", "--n", "6", "--p", "0.5", "--seed", "3", "--samples", "40",
            "--interventions", "covered"]
    assert _synth(tmp_path / "a", *args) == EXIT_OK
    assert _synth(tmp_path / "b", *args) == EXIT_OK
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert {"dag.json", "sem.json", "obs.csv", "manifest.json"} <= set(names)
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_rejects_empty_graph(tmp_path):
    """n = 0 is an input error"""
    assert _synth(tmp_path, "--n", "0") == EXIT_INPUT


def test_learn_and_validate_in_star(tmp_path, capsys):
    """10-vertex in-star: 10 singletons, 9 edges, validation passes"""
    assert _synth(tmp_path, "--kind", "instar", "--n", "10", "--samples", "20") == EXIT_OK
    ccpg = tmp_path / "ccpg.json"
    assert main(["learn", "--dag", str(tmp_path / "dag.json"), "--out", str(ccpg)]) == EXIT_OK
    assert "[Learn] 10 components, 9 component edges" in capsys.readouterr().out

    out = CcpgOutput.read_json(ccpg)
    assert all(len(c) == 1 for c in out.components)
    assert len(out.edges) == 9

    report = tmp_path / "report.json"
    code = main(["validate", "--dag", str(tmp_path / "dag.json"), "--ccpg", str(ccpg),
                 "--report", str(report)])
    assert code == EXIT_OK
    assert json.loads(report.read_text())["passed"] is True


def test_learn_stall_exits_2(tmp_path, monkeypatch, capsys):
    """A stalled prefix step is exit code 2 with the stall on stderr"""
    assert _synth(tmp_path, "--kind", "chain", "--n", "3", "--samples", "20") == EXIT_OK

    def stall(self):
        raise PrefixStallError({0})

    monkeypatch.setattr(CcpgBuilder, "build", stall)
    ccpg = tmp_path / "ccpg.json"
    code = main(["learn", "--dag", str(tmp_path / "dag.json"), "--out", str(ccpg)])
    assert code == EXIT_STALL
    err = capsys.readouterr().err
    assert "[Learn] Stalled: prefix learning stalled at S=[0]" in err
    assert not ccpg.exists()


def test_validate_flags_bad_ccpg(tmp_path):
    """All vertices of the in-star in one component has three sources"""
    assert _synth(tmp_path, "--kind", "instar", "--n", "4", "--samples", "20") == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"components": [[0, 1, 2, 3]], "edges": [], "layers": [0]}))
    report = tmp_path / "report.json"
    code = main(["validate", "--dag", str(tmp_path / "dag.json"), "--ccpg", str(bad),
                 "--report", str(report)])
    assert code == EXIT_INVALID
    data = json.loads(report.read_text())
    assert data["clauses"]["single_source"] is False


def test_learn_with_interventions_gives_valid_i_ccpg(tmp_path):
    """Covered-edge interventions from the manifest split the chain"""
    assert _synth(tmp_path, "--kind", "chain", "--n", "4", "--samples", "20",
                  "--interventions", "covered") == EXIT_OK
    manifest = tmp_path / "manifest.json"
    ccpg = tmp_path / "ccpg.json"
    code = main(["learn", "--dag", str(tmp_path / "dag.json"), "--interventions", str(manifest),
                 "--trace", "--out", str(ccpg)])
    assert code == EXIT_OK
    assert "trace" in json.loads(ccpg.read_text())
    code = main(["validate", "--dag", str(tmp_path / "dag.json"), "--ccpg", str(ccpg),
                 "--interventions", str(manifest)])
    assert code == EXIT_OK


def test_learn_data_too_few_samples(tmp_path):
    """Regimes below min_samples are an input error"""
    assert _synth(tmp_path, "--kind", "instar", "--n", "3", "--samples", "5") == EXIT_OK
    code = main(["learn", "--data", str(tmp_path / "manifest.json"), "--out", str(tmp_path / "c.json")])
    assert code == EXIT_INPUT


def test_learn_data_rejects_interventions_flag(tmp_path):
    """A manifest lists its own regimes"""
    assert _synth(tmp_path, "--kind", "instar", "--n", "3", "--samples", "50") == EXIT_OK
    manifest = str(tmp_path / "manifest.json")
    code = main(["learn", "--data", manifest, "--interventions", manifest, "--out", str(tmp_path / "c.json")])
    assert code == EXIT_INPUT


def test_missing_input_file(tmp_path):
    """Unreadable DAG path"""
    code = main(["learn", "--dag", str(tmp_path / "absent.json"), "--out", str(tmp_path / "c.json")])
    assert code == EXIT_INPUT


def test_usage_error_exit_code():
    """learn needs --dag or --data"""
    with pytest.raises(SystemExit) as info:
        main(["learn"])
    assert info.value.code == EXIT_INPUT


def test_bench_counts_csv(tmp_path):
    """One row per (n, seed), in the documented column order"""
    out = tmp_path / "bench.csv"
    code = main(["bench", "--suite", "counts", "--sizes", "5", "4", "--seeds", "2",
                 "--threads", "1", "--out", str(out)])
    assert code == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == COLUMNS
    assert list(zip(frame["n"], frame["seed"])) == [(4, 0), (4, 1), (5, 0), (5, 1)]
    assert (frame["ci_unique"] <= frame["ci_total"]).all()


def test_samples_suite_separates_weight_and_noise_seeds(monkeypatch):
    """SEM weights use the run seed, sampled noise the next one"""
    seen = {}
    real_sem, real_sample = benchmark.random_sem, benchmark.sample

    def spy_sem(g, seed=None, **kwargs):
        seen["weights"] = seed
        return real_sem(g, seed=seed, **kwargs)

    def spy_sample(model, m, seed=None):
        seen["noise"] = seed
        return real_sample(model, m, seed)

    monkeypatch.setattr(benchmark, "random_sem", spy_sem)
    monkeypatch.setattr(benchmark, "sample", spy_sample)
    row = run_one("samples", 4, 7, samples=200)
    assert seen == {"weights": 7, "noise": 8}
    assert row.seed == 7
