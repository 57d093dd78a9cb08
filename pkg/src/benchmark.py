"""
Benchmark Module
CI-count, recovery and sample-size suites written as CSV rows
"""

import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from .ccpg_builder import build, build_int
from .ci_engine import DSeparationOracle, GaussianCiTester, GaussianTesterConfig
from .errors import ConfigError, NumericalError, PrefixStallError
from .synth import covered_edge_verifying_set, in_star, random_dag, random_sem, sample
from .validator import matches_dag

SUITES = ("counts", "recovery", "samples")
COLUMNS = ["n", "seed", "ci_unique", "ci_total", "recovered", "wall_ms"]


@dataclass
class BenchRow:
    n: int
    seed: int
    ci_unique: int
    ci_total: int
    recovered: int
    wall_ms: float


def run_one(
    suite: str,
    n: int,
    seed: int,
    edge_prob: float = 0.3,
    samples: int = 100000,
    tester: Optional[GaussianTesterConfig] = None,
) -> BenchRow:
    """
    One seeded run of a suite

    counts: observational CCPG on an ER DAG with the exact oracle.
    recovery: I-CCPG on an ER DAG with a covered-edge verifying set.
    samples: CCPG of an in-star from linear-Gaussian data.
    """
    start = time.perf_counter()

    if suite == "counts":
        g = random_dag(n, edge_prob, seed)
        out = build(DSeparationOracle(g))
    elif suite == "recovery":
        g = random_dag(n, edge_prob, seed)
        interventions = covered_edge_verifying_set(g)
        out = build_int(DSeparationOracle(g, interventions), interventions)
    elif suite == "samples":
        g = in_star(n)
        model = random_sem(g, seed=seed)
        oracle = GaussianCiTester([sample(model, samples, seed + 1)], tester or GaussianTesterConfig())
        try:
            out = build(oracle)
        except (PrefixStallError, NumericalError):
            elapsed = (time.perf_counter() - start) * 1000.0
            used = oracle.counter
            return BenchRow(n, seed, used.unique, used.total, 0, round(elapsed, 3))
    else:
        raise ConfigError(f"unknown suite {suite!r}, expected one of {SUITES}")

    elapsed = (time.perf_counter() - start) * 1000.0
    return BenchRow(n, seed, out.ci_unique, out.ci_total, int(matches_dag(g, out)), round(elapsed, 3))


def run_suite(
    suite: str,
    sizes: Sequence[int],
    seeds: Sequence[int],
    edge_prob: float = 0.3,
    samples: int = 100000,
    tester: Optional[GaussianTesterConfig] = None,
    threads: int = 1,
    show_progress: bool = False,
) -> List[BenchRow]:
    """
    Run every (n, seed) pair of a suite

    Args:
        suite: counts, recovery or samples
        sizes: Vertex counts
        seeds: RNG seeds
        edge_prob: ER edge probability
        samples: Sample count for the samples suite
        tester: Fisher-z settings for the samples suite
        threads: joblib worker count, each worker owns its oracle
        show_progress: Show progress bar

    Returns:
        Rows sorted by (n, seed)
    """
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}, expected one of {SUITES}")
    jobs = [(n, seed) for n in sizes for seed in seeds]

    rows = Parallel(n_jobs=max(1, threads))(
        delayed(run_one)(suite, n, seed, edge_prob, samples, tester)
        for n, seed in tqdm(jobs, desc=f"Bench {suite}", disable=not show_progress)
    )
    return sorted(rows, key=lambda row: (row.n, row.seed))


def rows_to_frame(rows: Sequence[BenchRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows], columns=COLUMNS)


def write_rows_csv(rows: Sequence[BenchRow], path: Union[str, Path]) -> None:
    rows_to_frame(rows).to_csv(path, index=False)
