"""
Synthetic Data Module
Ground-truth DAGs, linear-Gaussian SEMs, regime samples and verifying intervention sets
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import GraphArgumentError, GraphFormatError
from .graph_core import (
    OBSERVATIONAL,
    Dag,
    Edge,
    Intervention,
    as_vertex_set,
    check_targets,
    covered_edges,
    dag_to_dict,
    parents,
)


@dataclass(frozen=True)
class SemModel:
    """Linear SEM x_v = sum(w_uv * x_u) + e_v with Gaussian noise"""

    g: Dag
    weights: Dict[Edge, float]
    noise_std: Tuple[float, ...]

    def __post_init__(self):
        if set(self.weights) != set(self.g.edge_set):
            raise GraphArgumentError("weights must be defined exactly on the graph's edges")
        if len(self.noise_std) != self.g.n:
            raise GraphArgumentError(f"expected {self.g.n} noise scales, got {len(self.noise_std)}")
        if any(not s > 0 for s in self.noise_std):
            raise GraphArgumentError("noise_std must be positive")

    def weight_matrix(self) -> np.ndarray:
        """W with W[u, v] = weight of u -> v"""
        w = np.zeros((self.g.n, self.g.n))
        for (u, v), weight in self.weights.items():
            w[u, v] = weight
        return w


@dataclass(eq=False)
class Dataset:
    """m x n sample matrix drawn under one regime"""

    regime: str
    data: np.ndarray
    seed: Optional[int] = None
    labels: Optional[Tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise GraphFormatError(f"dataset must be a 2-D matrix, got {self.data.ndim} dims")
        if self.data.shape[0] < 1:
            raise GraphFormatError(f"regime {self.regime!r} has no samples")
        if self.labels is not None and len(self.labels) != self.data.shape[1]:
            raise GraphFormatError("label count does not match column count")

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]


# === Graph generators ===

def random_dag(n: int, edge_prob: float, seed: Optional[int] = None) -> Dag:
    """
    Erdős-Rényi DAG over a uniformly random vertex order

    Args:
        n: Vertex count, at least 1
        edge_prob: Inclusion probability of each forward pair
        seed: RNG seed

    Returns:
        Random DAG
    """
    _check_size(n)
    if not 0.0 <= edge_prob <= 1.0:
        raise GraphArgumentError(f"edge_prob must lie in [0, 1], got {edge_prob}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < edge_prob
    edges = [(int(order[i]), int(order[j])) for i, j in zip(rows[keep], cols[keep])]
    return Dag(n, edges)


def in_star(n: int) -> Dag:
    """Leaves 0..n-2 all pointing to n-1"""
    _check_size(n)
    return Dag(n, [(leaf, n - 1) for leaf in range(n - 1)])


def chain(n: int) -> Dag:
    """0 -> 1 -> ... -> n-1"""
    _check_size(n)
    return Dag(n, [(v, v + 1) for v in range(n - 1)])


def _check_size(n: int) -> None:
    if n < 1:
        raise GraphArgumentError(f"graph needs at least one vertex, got n={n}")


# === SEM ===

def random_sem(
    g: Dag,
    weight_low: float = 0.5,
    weight_high: float = 1.5,
    seed: Optional[int] = None,
) -> SemModel:
    """
    Draw edge weights uniformly from ±[weight_low, weight_high], unit noise

    Args:
        g: Ground-truth DAG
        weight_low: Smallest weight magnitude, positive
        weight_high: Largest weight magnitude
        seed: RNG seed

    Returns:
        SemModel on g
    """
    if not 0 < weight_low <= weight_high:
        raise GraphArgumentError(
            f"need 0 < weight_low <= weight_high, got [{weight_low}, {weight_high}]"
        )
    rng = np.random.default_rng(seed)
    magnitudes = rng.uniform(weight_low, weight_high, size=len(g.edges))
    signs = rng.choice([-1.0, 1.0], size=len(g.edges))
    weights = {edge: float(s * w) for edge, s, w in zip(g.edges, signs, magnitudes)}
    return SemModel(g, weights, tuple(1.0 for _ in range(g.n)))


def sample(model: SemModel, m: int, seed: Optional[int] = None) -> Dataset:
    """Observational samples by ancestral sampling"""
    data = _ancestral_sample(model, m, seed, frozenset())
    return Dataset(OBSERVATIONAL, data, seed, model.g.labels)


def sample_intervened(
    model: SemModel,
    intervention: Intervention,
    m: int,
    seed: Optional[int] = None,
) -> Dataset:
    """Samples under a hard intervention; targets become standard normal"""
    check_targets(model.g, intervention)
    data = _ancestral_sample(model, m, seed, intervention.targets)
    return Dataset(intervention.id, data, seed, model.g.labels)


def _ancestral_sample(model: SemModel, m: int, seed: Optional[int], targets) -> np.ndarray:
    if m < 1:
        raise GraphArgumentError(f"sample count must be at least 1, got {m}")
    g = model.g
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((m, g.n))
    w = model.weight_matrix()
    x = np.zeros((m, g.n))

    for v in g.order:
        if v in targets:
            x[:, v] = noise[:, v]
            continue
        pa = sorted(parents(g, v))
        x[:, v] = noise[:, v] * model.noise_std[v]
        if pa:
            x[:, v] += x[:, pa] @ w[pa, v]
    return x


def sem_covariance(model: SemModel, intervention: Optional[Intervention] = None) -> np.ndarray:
    """
    Analytic covariance of the (optionally hard-intervened) SEM

    x = W^T x + e gives Cov(x) = B D B^T with B = (I - W^T)^-1.
    """
    w = model.weight_matrix()
    variances = np.square(np.asarray(model.noise_std, dtype=float))
    if intervention is not None:
        targets = sorted(as_vertex_set(model.g, intervention.targets))
        w[:, targets] = 0.0
        variances[targets] = 1.0
    b = np.linalg.inv(np.eye(model.g.n) - w.T)
    return b @ np.diag(variances) @ b.T


# === Intervention sets ===

def covered_edge_verifying_set(g: Dag) -> List[Intervention]:
    """One singleton intervention on the tail of every covered edge"""
    tails = sorted({u for u, _ in covered_edges(g)})
    return [Intervention(f"I{k}", frozenset({u})) for k, u in enumerate(tails)]


def log2_intervention_set(n: int) -> List[Intervention]:
    """I_b = {v : bit b of v is 1}, ceil(log2 n) interventions"""
    _check_size(n)
    bits = (n - 1).bit_length()
    return [
        Intervention(f"I{b}", frozenset(v for v in range(n) if (v >> b) & 1))
        for b in range(bits)
    ]


# === File formats ===

def write_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    """CSV with a header row of vertex labels"""
    columns = list(dataset.labels) if dataset.labels else [str(i) for i in range(dataset.n)]
    pd.DataFrame(dataset.data, columns=columns).to_csv(path, index=False)


def read_dataset_csv(
    path: Union[str, Path],
    regime: str,
    labels: Optional[Sequence[str]] = None,
) -> Dataset:
    """
    Load one regime's CSV

    Args:
        path: CSV file path
        regime: Regime id to attach
        labels: Vertex labels in vertex order; columns are reordered to match.
            Without labels the file's column order is the vertex order.

    Returns:
        Dataset
    """
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise GraphFormatError(f"{path}: unreadable CSV ({e})") from e

    if labels is not None:
        labels = [str(label) for label in labels]
        missing = [label for label in labels if label not in frame.columns]
        if missing:
            raise GraphFormatError(f"{path}: missing columns {missing}")
        frame = frame[labels]

    try:
        data = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise GraphFormatError(f"{path}: non-numeric values ({e})") from e
    return Dataset(regime, data, labels=tuple(str(c) for c in frame.columns))


def sem_to_dict(model: SemModel) -> Dict[str, Any]:
    return {
        "dag": dag_to_dict(model.g),
        "weights": [[u, v, model.weights[(u, v)]] for u, v in model.g.edges],
        "noise_std": list(model.noise_std),
    }


def write_sem_json(model: SemModel, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(sem_to_dict(model), f, indent=2)
        f.write("\n")
