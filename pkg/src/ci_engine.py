"""
CI Engine Module
Canonical CI queries, exact d-separation oracle and Gaussian Fisher-z tester
"""

import json
import math
import operator
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np
from scipy.stats import norm

from .errors import (
    ConfigError,
    GraphArgumentError,
    GraphFormatError,
    NumericalError,
    RegimeError,
    SampleSizeError,
)
from .graph_core import OBSERVATIONAL, Dag, Intervention, check_targets, d_separated, mutilate
from .synth import Dataset, read_dataset_csv

VertexArg = Union[int, Iterable[int]]

# |r| is clamped just inside (-1, 1) before atanh
_R_LIMIT = 1.0 - 1e-12


def _as_ints(vertices: VertexArg) -> frozenset:
    try:
        return frozenset((operator.index(vertices),))
    except TypeError:
        pass
    try:
        return frozenset(operator.index(v) for v in vertices)
    except TypeError:
        raise GraphArgumentError(f"vertices must be integers, got {vertices!r}") from None


@dataclass(frozen=True)
class CiQuery:
    """Canonical CI query A ⫫ B | C in one regime"""

    a_set: Tuple[int, ...]
    b_set: Tuple[int, ...]
    cond: Tuple[int, ...]
    regime: str = OBSERVATIONAL

    @classmethod
    def make(
        cls,
        a_set: VertexArg,
        b_set: VertexArg,
        cond: VertexArg = (),
        regime: str = OBSERVATIONAL,
    ) -> "CiQuery":
        """
        Build the canonical form

        C is reduced to C \\ (A ∪ B) and the lexicographically smaller
        of A, B is stored first.

        Raises:
            GraphArgumentError: A or B empty, or A and B overlap
        """
        a, b = _as_ints(a_set), _as_ints(b_set)
        if not a or not b:
            raise GraphArgumentError("CI query needs nonempty A and B")
        if a & b:
            raise GraphArgumentError(f"A and B overlap on {sorted(a & b)}")
        c = _as_ints(cond) - (a | b)

        first, second = tuple(sorted(a)), tuple(sorted(b))
        if second < first:
            first, second = second, first
        return cls(first, second, tuple(sorted(c)), str(regime))

    def vertices(self) -> frozenset:
        return frozenset(self.a_set) | frozenset(self.b_set) | frozenset(self.cond)


@dataclass
class CiCounter:
    """Total and distinct CI queries issued"""

    total: int = 0
    unique: int = 0

    def snapshot(self) -> "CiCounter":
        return CiCounter(self.total, self.unique)

    def __sub__(self, other: "CiCounter") -> "CiCounter":
        return CiCounter(self.total - other.total, self.unique - other.unique)

    def to_dict(self) -> Dict[str, int]:
        return {"total": self.total, "unique": self.unique}


class CiOracle:
    """
    Base CI oracle: canonicalization, caching and counting

    Subclasses implement _test for one canonical query. Instances own a
    cache and counters, so one instance serves one run at a time.
    """

    def __init__(
        self,
        n: int,
        regimes: Iterable[str],
        use_cache: bool = True,
        verbose: bool = False,
    ):
        self.n = n
        self.regimes = frozenset(regimes)
        self.use_cache = use_cache
        self.verbose = verbose
        self.counter = CiCounter()
        self._cache: Dict[CiQuery, bool] = {}
        self._seen: Set[CiQuery] = set()

    @property
    def vertices(self) -> frozenset:
        return frozenset(range(self.n))

    def dependent(
        self,
        a_set: VertexArg,
        b_set: VertexArg,
        cond: VertexArg = (),
        regime: str = OBSERVATIONAL,
    ) -> bool:
        """True iff A and B are dependent given C in the regime"""
        return self.query(CiQuery.make(a_set, b_set, cond, regime))

    def independent(
        self,
        a_set: VertexArg,
        b_set: VertexArg,
        cond: VertexArg = (),
        regime: str = OBSERVATIONAL,
    ) -> bool:
        return not self.dependent(a_set, b_set, cond, regime)

    def query(self, q: CiQuery) -> bool:
        """Answer a canonical query, counting it"""
        if q.regime not in self.regimes:
            raise RegimeError(f"unknown regime {q.regime!r}, known: {sorted(self.regimes)}")
        out_of_range = [v for v in q.vertices() if not 0 <= v < self.n]
        if out_of_range:
            raise GraphArgumentError(f"vertices {sorted(out_of_range)} out of range for n={self.n}")

        self.counter.total += 1
        if q not in self._seen:
            self._seen.add(q)
            self.counter.unique += 1

        if self.use_cache:
            cached = self._cache.get(q)
            if cached is not None:
                return cached

        result = bool(self._test(q))
        if self.use_cache:
            self._cache[q] = result
        return result

    def reset(self) -> None:
        """Clear cache and counters"""
        self.counter = CiCounter()
        self._cache.clear()
        self._seen.clear()

    def _test(self, q: CiQuery) -> bool:
        raise NotImplementedError


class DSeparationOracle(CiOracle):
    """Exact oracle under faithfulness: dependence = d-connection"""

    def __init__(
        self,
        g: Dag,
        interventions: Sequence[Intervention] = (),
        use_cache: bool = True,
        verbose: bool = False,
    ):
        """
        Args:
            g: Ground-truth DAG
            interventions: Regimes answered on the mutilated graph
            use_cache: Reuse answers of repeated queries
            verbose: Print a summary line
        """
        self.g = g
        self._graphs: Dict[str, Dag] = {OBSERVATIONAL: g}
        for intervention in interventions:
            check_targets(g, intervention)
            if intervention.id in self._graphs:
                raise GraphArgumentError(f"duplicate regime id {intervention.id!r}")
            self._graphs[intervention.id] = mutilate(g, intervention)

        super().__init__(g.n, self._graphs, use_cache, verbose)
        if verbose:
            print(f"[Oracle] d-separation oracle: n={g.n}, regimes={len(self._graphs)}")

    def _test(self, q: CiQuery) -> bool:
        return not d_separated(self._graphs[q.regime], q.a_set, q.b_set, q.cond)


# === Gaussian tester ===

@dataclass(frozen=True)
class GaussianTesterConfig:
    """Fisher-z tester settings"""

    alpha: float = 0.01
    min_samples: int = 10
    bonferroni: bool = False
    ridge: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.min_samples < 1:
            raise ConfigError(f"min_samples must be positive, got {self.min_samples}")
        if self.ridge < 0:
            raise ConfigError(f"ridge must be non-negative, got {self.ridge}")

    @classmethod
    def from_config(cls, config, alpha: Optional[float] = None) -> "GaussianTesterConfig":
        """Build from a Config; an explicit alpha wins over the file"""
        return cls(
            alpha=config.alpha if alpha is None else alpha,
            min_samples=config.min_samples,
            bonferroni=config.bonferroni,
            ridge=config.ridge,
        )


@dataclass(frozen=True)
class FisherZResult:
    statistic: float
    threshold: float
    dependent: bool
    clamped: bool


def fisher_z_test(r: float, m: int, c: int, alpha: float) -> FisherZResult:
    """
    Fisher-z test of zero partial correlation

    Args:
        r: Partial correlation
        m: Sample count
        c: Conditioning-set size
        alpha: Significance level

    Returns:
        FisherZResult; dependent iff sqrt(m - c - 3) * |atanh(r)| exceeds
        the two-sided normal quantile
    """
    dof = m - c - 3
    if dof < 1:
        raise SampleSizeError(f"Fisher-z needs m - |C| - 3 >= 1, got m={m}, |C|={c}")
    if math.isnan(r):
        raise NumericalError("partial correlation is NaN")

    clamped = abs(r) >= 1.0
    if clamped:
        warnings.warn(f"partial correlation {r} clamped into (-1, 1)", RuntimeWarning, stacklevel=2)
        r = math.copysign(_R_LIMIT, r)

    statistic = math.sqrt(dof) * abs(math.atanh(r))
    threshold = float(norm.ppf(1.0 - alpha / 2.0))
    return FisherZResult(statistic, threshold, statistic > threshold, clamped)


def fisher_z_decision(r: float, m: int, c: int, alpha: float) -> bool:
    """True = dependent"""
    return fisher_z_test(r, m, c, alpha).dependent


def partial_correlation(
    data: Union[Dataset, np.ndarray],
    a: int,
    b: int,
    cond: Iterable[int] = (),
    ridge: float = 1e-10,
    cov: Optional[np.ndarray] = None,
) -> float:
    """
    Partial correlation of a and b given cond

    Args:
        data: Samples of one regime (m x n)
        a: First vertex
        b: Second vertex
        cond: Conditioning set
        ridge: Diagonal load used when the submatrix is singular
        cov: Precomputed covariance of data

    Returns:
        r = -P_ab / sqrt(P_aa * P_bb) where P is the inverse covariance
        submatrix over {a, b} ∪ cond
    """
    matrix = data.data if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    cond = sorted(set(cond) - {a, b})
    if matrix.shape[0] < len(cond) + 4:
        raise SampleSizeError(f"need at least {len(cond) + 4} samples, got {matrix.shape[0]}")
    if cov is None:
        cov = np.cov(matrix, rowvar=False)

    idx = [a, b] + cond
    sub = np.atleast_2d(cov)[np.ix_(idx, idx)]
    precision = _invert(sub)
    if precision is None:
        precision = _invert(sub + ridge * np.eye(len(idx)))
        if precision is None:
            raise NumericalError(f"covariance over {idx} is singular after ridge {ridge}")

    return float(-precision[0, 1] / math.sqrt(precision[0, 0] * precision[1, 1]))


def _invert(matrix: np.ndarray) -> Optional[np.ndarray]:
    try:
        inverse = np.linalg.inv(matrix)
    except np.linalg.LinAlgError:
        return None
    # A precision matrix has a positive diagonal; anything else is round-off
    if not np.all(np.isfinite(inverse)) or np.any(np.diag(inverse) <= 0):
        return None
    return inverse


def set_dependent_sampled(
    data: Union[Dataset, np.ndarray],
    a_set: Iterable[int],
    b_set: Iterable[int],
    cond: Iterable[int],
    cfg: GaussianTesterConfig,
    cov: Optional[np.ndarray] = None,
) -> bool:
    """
    Set-level dependence: any pair (a, b) in A x B tests dependent

    Pairs are tried in ascending order and the loop stops at the first
    dependent pair. With cfg.bonferroni the level becomes alpha / (|A||B|).
    """
    a_set, b_set = sorted(set(a_set)), sorted(set(b_set))
    if not a_set or not b_set:
        raise GraphArgumentError("set-level test needs nonempty A and B")
    if set(a_set) & set(b_set):
        raise GraphArgumentError(f"A and B overlap on {sorted(set(a_set) & set(b_set))}")
    cond = sorted(set(cond) - set(a_set) - set(b_set))

    matrix = data.data if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if cov is None:
        cov = np.cov(matrix, rowvar=False)
    alpha = cfg.alpha / (len(a_set) * len(b_set)) if cfg.bonferroni else cfg.alpha

    for a in a_set:
        for b in b_set:
            r = partial_correlation(matrix, a, b, cond, ridge=cfg.ridge, cov=cov)
            if fisher_z_decision(r, matrix.shape[0], len(cond), alpha):
                return True
    return False


class GaussianCiTester(CiOracle):
    """Sample oracle: Fisher-z partial-correlation tests on per-regime data"""

    def __init__(
        self,
        datasets: Union[Mapping[str, Dataset], Sequence[Dataset]],
        config: Optional[GaussianTesterConfig] = None,
        use_cache: bool = True,
        verbose: bool = False,
    ):
        """
        Args:
            datasets: One Dataset per regime, the observational one included
            config: Tester settings
            use_cache: Reuse answers of repeated queries
            verbose: Print a summary line
        """
        if not isinstance(datasets, Mapping):
            datasets = {ds.regime: ds for ds in datasets}
        if OBSERVATIONAL not in datasets:
            raise RegimeError(f"no observational dataset (regime {OBSERVATIONAL!r})")
        self.config = config or GaussianTesterConfig()

        widths = {ds.n for ds in datasets.values()}
        if len(widths) != 1:
            raise GraphFormatError(f"regimes disagree on the variable count: {sorted(widths)}")
        for regime, ds in datasets.items():
            if ds.m < self.config.min_samples:
                raise SampleSizeError(
                    f"regime {regime!r} has {ds.m} samples, need at least {self.config.min_samples}"
                )

        self.datasets: Dict[str, Dataset] = dict(datasets)
        self._cov: Dict[str, np.ndarray] = {}
        super().__init__(widths.pop(), self.datasets, use_cache, verbose)

        if verbose:
            sizes = ", ".join(f"{r}={ds.m}" for r, ds in sorted(self.datasets.items()))
            print(f"[Oracle] Fisher-z tester: n={self.n}, alpha={self.config.alpha}, samples: {sizes}")

    def covariance(self, regime: str) -> np.ndarray:
        """Sample covariance of one regime, computed once"""
        if regime not in self._cov:
            self._cov[regime] = np.atleast_2d(np.cov(self.datasets[regime].data, rowvar=False))
        return self._cov[regime]

    def _test(self, q: CiQuery) -> bool:
        return set_dependent_sampled(
            self.datasets[q.regime].data,
            q.a_set,
            q.b_set,
            q.cond,
            self.config,
            cov=self.covariance(q.regime),
        )


# === Regime manifest ===

def load_manifest(
    path: Union[str, Path],
    labels: Optional[Sequence[str]] = None,
) -> Tuple[Dict[str, Dataset], List[Intervention]]:
    """
    Load a regime manifest

    {"observational": "<csv>", "interventions": [{"targets": [...], "path": "<csv>"}]}
    Paths are relative to the manifest's directory. Entries may carry an
    "id"; otherwise regimes are named I0, I1, ... in list order.

    Returns:
        (datasets by regime id, interventions)
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphFormatError(f"{path}: invalid JSON ({e})") from e

    if not isinstance(manifest, dict) or "observational" not in manifest:
        raise GraphFormatError(f"{path}: manifest needs an 'observational' entry")
    base = path.parent

    datasets = {OBSERVATIONAL: read_dataset_csv(base / manifest["observational"], OBSERVATIONAL, labels)}
    interventions: List[Intervention] = []
    for k, entry in enumerate(manifest.get("interventions", []) or []):
        if not isinstance(entry, dict) or "targets" not in entry or "path" not in entry:
            raise GraphFormatError(f"{path}: intervention entry {k} needs 'targets' and 'path'")
        regime = str(entry.get("id", f"I{k}"))
        if regime in datasets:
            raise GraphFormatError(f"{path}: duplicate regime id {regime!r}")
        interventions.append(Intervention(regime, frozenset(entry["targets"])))
        datasets[regime] = read_dataset_csv(base / entry["path"], regime, labels)

    return datasets, interventions


def write_manifest(
    path: Union[str, Path],
    observational: str,
    interventions: Sequence[Tuple[Intervention, str]] = (),
) -> None:
    """Write a manifest naming CSV files relative to its own directory"""
    manifest: Dict[str, Any] = {
        "observational": observational,
        "interventions": [
            {"id": intervention.id, "targets": sorted(intervention.targets), "path": csv_path}
            for intervention, csv_path in interventions
        ],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def read_interventions(path: Union[str, Path]) -> List[Intervention]:
    """
    Intervention list for the exact oracle

    Accepts a full regime manifest (CSV paths ignored) or a bare list of
    target lists.
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphFormatError(f"{path}: invalid JSON ({e})") from e

    entries = data.get("interventions", []) if isinstance(data, dict) else data
    if not isinstance(entries, list):
        raise GraphFormatError(f"{path}: expected a list of interventions")

    interventions = []
    for k, entry in enumerate(entries):
        if isinstance(entry, dict):
            if "targets" not in entry:
                raise GraphFormatError(f"{path}: intervention entry {k} needs 'targets'")
            interventions.append(Intervention(str(entry.get("id", f"I{k}")), frozenset(entry["targets"])))
        elif isinstance(entry, list):
            interventions.append(Intervention(f"I{k}", frozenset(entry)))
        else:
            raise GraphFormatError(f"{path}: bad intervention entry {entry!r}")
    return interventions
