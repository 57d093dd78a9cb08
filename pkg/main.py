"""
CCPG - Learning causally consistent partition graphs with few CI tests
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

# Add src directory to path
sys.path.insert(0, str(Path(__file__).parent))

from src.benchmark import SUITES, run_suite, write_rows_csv
from src.ccpg_builder import CcpgBuilder, CcpgOutput
from src.ci_engine import (
    DSeparationOracle,
    GaussianCiTester,
    GaussianTesterConfig,
    load_manifest,
    read_interventions,
    write_manifest,
)
from src.config import get_config
from src.errors import CcpgError, PrefixStallError
from src.graph_core import read_dag_json, write_dag_json
from src.synth import (
    chain,
    covered_edge_verifying_set,
    in_star,
    log2_intervention_set,
    random_dag,
    random_sem,
    sample,
    sample_intervened,
    write_dataset_csv,
    write_sem_json,
)
from src.validator import check_ccpg, lower_bound_verification_number

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_STALL = 2
EXIT_INPUT = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def run_synth(args, config) -> int:
    """Write dag.json, sem.json, regime CSVs and manifest.json"""
    edge_prob = config.edge_prob if args.p is None else args.p
    samples = config.samples if args.samples is None else args.samples

    if args.kind == "er":
        g = random_dag(args.n, edge_prob, args.seed)
    elif args.kind == "instar":
        g = in_star(args.n)
    else:
        g = chain(args.n)

    if args.interventions == "covered":
        interventions = covered_edge_verifying_set(g)
    elif args.interventions == "log2":
        interventions = log2_intervention_set(g.n)
    else:
        interventions = []

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = random_sem(g, config.weight_low, config.weight_high, seed=args.seed)

    write_dag_json(g, out_dir / "dag.json")
    write_sem_json(model, out_dir / "sem.json")
    write_dataset_csv(sample(model, samples, seed=args.seed + 1), out_dir / "obs.csv")

    regime_files = []
    for k, intervention in enumerate(interventions):
        csv_name = f"{intervention.id}.csv"
        dataset = sample_intervened(model, intervention, samples, seed=args.seed + 2 + k)
        write_dataset_csv(dataset, out_dir / csv_name)
        regime_files.append((intervention, csv_name))
    write_manifest(out_dir / "manifest.json", "obs.csv", regime_files)

    print(f"[Synth] {args.kind} DAG: n={g.n}, {len(g.edges)} edges, seed={args.seed}")
    print(f"[Synth] {len(interventions)} interventions, {samples} samples per regime")
    print(f"[Synth] Files written to {out_dir}")
    return EXIT_OK


def run_learn(args, config) -> int:
    """Learn a CCPG from a DAG (exact oracle) or from data (Fisher-z tester)"""
    if args.data and args.interventions:
        raise CcpgError("--interventions applies to --dag; a data manifest lists its own regimes")

    if args.dag:
        g = read_dag_json(args.dag)
        interventions = read_interventions(args.interventions) if args.interventions else []
        oracle = DSeparationOracle(g, interventions, use_cache=config.cache_enabled, verbose=args.verbose)
        print(f"[Learn] Exact oracle on {args.dag}: n={g.n}, {len(interventions)} interventions")
    else:
        datasets, interventions = load_manifest(args.data)
        tester = GaussianTesterConfig.from_config(config, alpha=args.alpha)
        oracle = GaussianCiTester(datasets, tester, use_cache=config.cache_enabled, verbose=args.verbose)
        print(f"[Learn] Fisher-z tester on {args.data}: n={oracle.n}, alpha={tester.alpha}, "
              f"{len(interventions)} interventions")

    builder = CcpgBuilder(oracle, interventions, verbose=args.verbose, show_progress=args.progress)
    try:
        out = builder.build()
    except PrefixStallError as e:
        print(f"[Learn] Stalled: {e}", file=sys.stderr)
        print("[Learn] CI answers are inconsistent with any DAG; try more samples or another alpha",
              file=sys.stderr)
        return EXIT_STALL

    out.write_json(args.out, include_trace=args.trace)
    print(f"[Learn] {len(out.components)} components, {len(out.edges)} component edges")
    print(f"[Learn] CI tests: {out.ci_unique} unique, {out.ci_total} total")
    print(f"[Learn] Verification number >= {lower_bound_verification_number(out)}")
    print(f"[Learn] Written to {args.out}")
    return EXIT_OK


def run_validate(args, config) -> int:
    """Check a CCPG file against a ground-truth DAG"""
    g = read_dag_json(args.dag)
    out = CcpgOutput.read_json(args.ccpg)
    interventions = read_interventions(args.interventions) if args.interventions else None

    report = check_ccpg(g, out, interventions)
    print(f"[Validate] {args.ccpg} against {args.dag}")
    for line in report.lines():
        print(line)

    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")

    print(f"[Validate] {'PASSED' if report.passed else 'FAILED'}")
    return EXIT_OK if report.passed else EXIT_INVALID


def run_bench(args, config) -> int:
    """Run a benchmark suite and write its CSV"""
    edge_prob = config.edge_prob if args.p is None else args.p
    samples = config.samples if args.samples is None else args.samples
    num_seeds = config.bench_seeds if args.seeds is None else args.seeds
    threads = config.threads if args.threads is None else max(1, args.threads)
    tester = GaussianTesterConfig.from_config(config, alpha=args.alpha)

    seeds = list(range(args.seed_start, args.seed_start + num_seeds))
    print(f"[Bench] Suite {args.suite}: sizes={args.sizes}, {len(seeds)} seeds, {threads} workers")

    rows = run_suite(
        args.suite,
        sorted(args.sizes),
        seeds,
        edge_prob=edge_prob,
        samples=samples,
        tester=tester,
        threads=threads,
        show_progress=args.progress,
    )
    write_rows_csv(rows, args.out)

    recovered = sum(row.recovered for row in rows)
    print(f"[Bench] {len(rows)} runs, recovered {recovered}/{len(rows)}")
    print(f"[Bench] Written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(description="CCPG - causal structure up to a partition, with few CI tests")
    parser.add_argument("--config", type=str, help="Config file path")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    synth = sub.add_parser("synth", help="Generate a DAG, SEM and regime samples")
    synth.add_argument("--kind", choices=["er", "instar", "chain"], default="er")
    synth.add_argument("--n", type=int, required=True, help="Vertex count")
    synth.add_argument("--p", type=float, help="ER edge probability")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--samples", type=int, help="Samples per regime")
    synth.add_argument("--interventions", choices=["covered", "log2", "none"], default="none")
    synth.add_argument("--out", type=str, required=True, help="Output directory")

    learn = sub.add_parser("learn", help="Learn a CCPG")
    source = learn.add_mutually_exclusive_group(required=True)
    source.add_argument("--dag", type=str, help="Ground-truth DAG JSON (exact oracle)")
    source.add_argument("--data", type=str, help="Regime manifest JSON (Fisher-z tester)")
    learn.add_argument("--alpha", type=float, help="Significance level")
    learn.add_argument("--interventions", type=str, help="Intervention list or manifest JSON")
    learn.add_argument("--trace", action="store_true", help="Include per-step prefix traces")
    learn.add_argument("--out", type=str, default="ccpg.json")
    learn.add_argument("--verbose", action="store_true")
    learn.add_argument("--progress", action="store_true", help="Show progress bar")

    validate = sub.add_parser("validate", help="Check a CCPG against a DAG")
    validate.add_argument("--dag", type=str, required=True)
    validate.add_argument("--ccpg", type=str, required=True)
    validate.add_argument("--interventions", type=str, help="Check the I-CCPG condition")
    validate.add_argument("--report", type=str, help="Write the clause report as JSON")

    bench = sub.add_parser("bench", help="Run a benchmark suite")
    bench.add_argument("--suite", choices=SUITES, required=True)
    bench.add_argument("--sizes", type=int, nargs="+", required=True)
    bench.add_argument("--seeds", type=int, help="Number of seeds")
    bench.add_argument("--seed-start", type=int, default=0)
    bench.add_argument("--p", type=float, help="ER edge probability")
    bench.add_argument("--samples", type=int, help="Samples for the samples suite")
    bench.add_argument("--alpha", type=float, help="Significance level for the samples suite")
    bench.add_argument("--threads", type=int, help="Worker count (default CCPG_THREADS)")
    bench.add_argument("--out", type=str, default="bench.csv")
    bench.add_argument("--progress", action="store_true", help="Show progress bar")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point, returns the process exit code"""
    args = build_parser().parse_args(argv)
    config = get_config(args.config)

    commands = {
        "synth": run_synth,
        "learn": run_learn,
        "validate": run_validate,
        "bench": run_bench,
    }
    try:
        return commands[args.command](args, config)
    except PrefixStallError as e:
        print(f"[CCPG] Stalled: {e}", file=sys.stderr)
        return EXIT_STALL
    except (CcpgError, OSError) as e:
        print(f"[CCPG] Error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
