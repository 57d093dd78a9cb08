"""
Configuration tests
Defaults, YAML values and environment overrides
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import src.config as config_module
from src.config import Config, get_config, reload_config


def test_defaults_without_file(tmp_path, monkeypatch):
    """A missing config file leaves every default in place"""
    monkeypatch.delenv("CCPG_ALPHA", raising=False)
    monkeypatch.delenv("CCPG_THREADS", raising=False)
    config = Config(str(tmp_path / "absent.yaml"))
    assert config.alpha == 0.01
    assert config.min_samples == 10
    assert config.bonferroni is False
    assert config.cache_enabled is True
    assert config.edge_prob == 0.3
    assert config.samples == 100000
    assert config.threads == 1


def test_yaml_values(tmp_path, monkeypatch):
    """Sections override defaults"""
    monkeypatch.delenv("CCPG_ALPHA", raising=False)
    path = tmp_path / "config.yaml"
    path.write_text("ci:\n  alpha: 0.05\n  bonferroni: true\nsynth:\n  samples: 500\nbench:\n  seeds: 3\n")
    config = Config(str(path))
    assert config.alpha == 0.05
    assert config.bonferroni is True
    assert config.samples == 500
    assert config.bench_seeds == 3
    assert config.weight_low == 0.5


def test_environment_overrides(tmp_path, monkeypatch):
    """CCPG_ALPHA and CCPG_THREADS win over the file"""
    path = tmp_path / "config.yaml"
    path.write_text("ci:\n  alpha: 0.05\nbench:\n  threads: 2\n")
    monkeypatch.setenv("CCPG_ALPHA", "0.001")
    monkeypatch.setenv("CCPG_THREADS", "0")
    config = Config(str(path))
    assert config.alpha == 0.001
    assert config.threads == 1


def test_variable_substitution(tmp_path, monkeypatch):
    """${VAR} references resolve from the environment"""
    monkeypatch.delenv("CCPG_ALPHA", raising=False)
    monkeypatch.setenv("CCPG_TEST_SAMPLES", "2500")
    path = tmp_path / "config.yaml"
    path.write_text("synth:\n  samples: ${CCPG_TEST_SAMPLES}\n")
    config = Config(str(path))
    assert config.samples == 2500

    path.write_text("synth:\n  samples: 42\n")
    config.reload()
    assert config.samples == 42


def test_reload_picks_up_file_changes(tmp_path, monkeypatch):
    """The singleton keeps its path and rereads it on reload"""
    monkeypatch.delenv("CCPG_ALPHA", raising=False)
    monkeypatch.setattr(config_module, "_config", None)
    path = tmp_path / "config.yaml"
    path.write_text("ci:\n  alpha: 0.05\n")
    config = get_config(str(path))
    assert config.alpha == 0.05
    assert get_config() is config

    path.write_text("ci:\n  alpha: 0.2\n")
    reload_config()
    assert get_config().alpha == 0.2
