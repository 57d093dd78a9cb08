"""
Configuration Management Module
Loads settings from config.yaml with environment overrides
"""

import os
import re
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv


class Config:
    """Configuration management class"""

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration

        Args:
            config_path: config.yaml path, defaults to cwd or project root.
                A missing file leaves every setting at its default.
        """
        # Load .env file
        env_path = Path(__file__).parent.parent / ".env"
        if env_path.exists():
            load_dotenv(str(env_path))

        if config_path is None:
            config_path = self._find_file("config.yaml")

        self.config_path = config_path
        self._config: Dict[str, Any] = {}

        self.load()

    def _find_file(self, filename: str) -> Optional[str]:
        """Find file path, None when absent"""
        possible_paths = [
            Path.cwd() / filename,
            Path(__file__).parent.parent / filename,
        ]

        for path in possible_paths:
            if path.exists():
                return str(path)

        return None

    def _load_yaml(self, path: str) -> Dict[str, Any]:
        """Load YAML file and resolve environment variables"""
        with open(path, "r", encoding="utf-8") as f:
            content = f.read()

        # Resolve ${VAR} references
        for match in re.finditer(r"\$\{(\w+)\}", content):
            env_value = os.environ.get(match.group(1), "")
            content = content.replace(match.group(0), env_value)

        return yaml.safe_load(content) or {}

    def load(self) -> None:
        """Load configuration file"""
        if self.config_path and Path(self.config_path).exists():
            self._config = self._load_yaml(self.config_path)

    # === CI Test Configuration ===
    @property
    def ci(self) -> Dict[str, Any]:
        return self._config.get("ci", {}) or {}

    @property
    def alpha(self) -> float:
        value = os.environ.get("CCPG_ALPHA", "")
        if value:
            return float(value)
        return float(self.ci.get("alpha", 0.01))

    @property
    def min_samples(self) -> int:
        return int(self.ci.get("min_samples", 10))

    @property
    def bonferroni(self) -> bool:
        return bool(self.ci.get("bonferroni", False))

    @property
    def ridge(self) -> float:
        return float(self.ci.get("ridge", 1e-10))

    @property
    def cache_enabled(self) -> bool:
        return bool(self.ci.get("cache", True))

    # === Synthetic Data Configuration ===
    @property
    def synth(self) -> Dict[str, Any]:
        return self._config.get("synth", {}) or {}

    @property
    def edge_prob(self) -> float:
        return float(self.synth.get("edge_prob", 0.3))

    @property
    def weight_low(self) -> float:
        return float(self.synth.get("weight_low", 0.5))

    @property
    def weight_high(self) -> float:
        return float(self.synth.get("weight_high", 1.5))

    @property
    def samples(self) -> int:
        return int(self.synth.get("samples", 100000))

    # === Benchmark Configuration ===
    @property
    def bench(self) -> Dict[str, Any]:
        return self._config.get("bench", {}) or {}

    @property
    def threads(self) -> int:
        # Read from environment first, fallback to config
        value = os.environ.get("CCPG_THREADS", "")
        if value:
            return max(1, int(value))
        return max(1, int(self.bench.get("threads", 1)))

    @property
    def bench_seeds(self) -> int:
        return int(self.bench.get("seeds", 5))

    def reload(self) -> None:
        """Reload configuration"""
        self.load()


# Global configuration instance
_config: Optional[Config] = None


def get_config(config_path: Optional[str] = None) -> Config:
    """Get configuration singleton"""
    global _config
    if _config is None:
        _config = Config(config_path)
    return _config


def reload_config() -> None:
    """Reload configuration"""
    global _config
    if _config is not None:
        _config.reload()
