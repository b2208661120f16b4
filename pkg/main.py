import os

# Timed sections run single-threaded; the BLAS pools must be pinned before numpy loads.
for _variable in ('OMP_NUM_THREADS', 'OPENBLAS_NUM_THREADS', 'MKL_NUM_THREADS'):
    os.environ.setdefault(_variable, '1')

import argparse
import logging
import sys

import numpy as np

from benchmark.config import ExperimentConfig
from benchmark.exceptions import ConfigException, OutputDirectoryException
from benchmark.campaign import run_campaign
from custom_logging import logging_setup
from separation.exceptions import InputException, DegenerateDataException, IterationException
from separation.fastica import FasticaConfig, run_fastica
from separation.metrics import gain_matrix, amari_error
from separation.nonlinearity import Nonlinearity, NonlinearityKind
from separation.preprocess import DataMatrix, center_and_whiten
from separation.score import ScoreParams, tabulate_score, stability_check
from separation.synth import SourceFamily, Scenario, make_dataset

log = logging_setup(__name__)


def add_data_args(parser: argparse.ArgumentParser):
    parser.add_argument('--input', type=str, required=False,
                        help='Delimited numeric file, one channel per row. Synthesised when omitted')
    parser.add_argument('--family', choices=['ggd', 'poisson'], default='ggd', help='Source family to synthesise')
    parser.add_argument('--beta', type=float, default=1.6, help='GGD shape')
    parser.add_argument('--lam', type=float, default=0.5, help='Poisson rate')
    parser.add_argument('--m', type=int, default=8, help='Number of sources')
    parser.add_argument('--n', type=int, default=1000, help='Number of samples')
    parser.add_argument('--seed', type=int, default=0, help='Dataset seed')
    parser.add_argument('--config', type=str, required=False, help='Experiment YAML whose pbecf section is used')


def prepare_args(argv=None):
    parser = argparse.ArgumentParser(description='FastICA with fixed or learned (P-bECF) nonlinearities')
    parser.add_argument('--debug', action='store_true', help='Extra debug information on the console')
    commands = parser.add_subparsers(dest='command', required=True)

    separate = commands.add_parser('separate', help='Separate one dataset and print the demixing matrix')
    add_data_args(separate)
    separate.add_argument('--nonlinearity', choices=[k.value for k in NonlinearityKind], default='pbecf')
    separate.add_argument('--k-max', type=int, default=300, help='Maximum number of iterations')
    separate.add_argument('--tau', type=float, default=1e-6, help='Convergence tolerance')
    separate.add_argument('--init-seed', type=int, default=0, help='Seed of the initial demixing matrix')

    bench = commands.add_parser('bench', help='Run a Monte-Carlo campaign')
    bench.add_argument('--config', type=str, required=False, help='Experiment YAML, both default experiments when omitted')
    bench.add_argument('--trials', type=int, required=False, help='Override n_trials')
    bench.add_argument('--seed', type=int, required=False, help='Override master_seed')
    bench.add_argument('--output', type=str, required=False, help='Override output_dir')
    bench.add_argument('--workers', type=int, required=False, help='Override the number of worker threads')

    dump = commands.add_parser('score-dump', help='Write the learned score table of a dataset as CSV')
    add_data_args(dump)
    dump.add_argument('--output', type=str, required=True, help='CSV file to write')
    dump.add_argument('--score-seed', type=int, default=0, help='Seed of the directions and dither')

    stability = commands.add_parser('stability', help='Change of the learned g when R, B, L or J is doubled')
    add_data_args(stability)
    stability.add_argument('--score-seed', type=int, default=0, help='Seed of the directions and dither')

    return parser.parse_args(argv)


def load_data(args):
    """
    The raw data and, when synthesised, the true mixing matrix.
    """
    if args.input:
        return DataMatrix(np.loadtxt(args.input, delimiter=',', ndmin=2)), None
    family = SourceFamily.ggd(args.beta) if args.family == 'ggd' else SourceFamily.poisson(args.lam)
    dataset = make_dataset(Scenario(family=family, m=args.m, N=args.n, seed=args.seed))
    log.info(f"Synthesised {args.m} {family} sources with {args.n} samples")
    return dataset.X, dataset.A


def score_params(args) -> ScoreParams:
    if getattr(args, 'config', None):
        return ExperimentConfig.from_yaml(args.config).pbecf
    return ScoreParams()


def run_separate(args):
    X, A = load_data(args)
    Xw, whitening = center_and_whiten(X)
    kind = NonlinearityKind(args.nonlinearity)
    if kind.is_learned:
        nl = Nonlinearity.learned(tabulate_score(Xw, score_params(args), args.seed))
    else:
        nl = Nonlinearity(kind)
    result = run_fastica(Xw, nl, FasticaConfig(k_max=args.k_max, tau=args.tau, seed=args.init_seed))

    np.set_printoptions(precision=5, suppress=True, linewidth=140)
    print(f"nonlinearity: {nl.name}")
    print(f"iterations: {result.iterations}, converged: {result.converged}, elapsed: {result.elapsed:.4f} s")
    print('W (on whitened data):')
    print(result.W)
    print('W V (on centered data):')
    print(whitening.total_demixing(result.W))
    if A is not None:
        print(f"Amari error: {amari_error(gain_matrix(result.W, whitening.V, A)):.6f}")


def run_bench(args):
    config = ExperimentConfig.from_yaml(args.config) if args.config else ExperimentConfig()
    config = config.override(n_trials=args.trials, master_seed=args.seed, output_dir=args.output,
                             workers=args.workers)
    result = run_campaign(config)
    print(f"trials: {result.trials_path}")
    print(f"summary: {result.summary_path}")
    for row in result.summary:
        print(f"{row['scenario']:>10} {row['nonlinearity']:>6}  median {row['median']:.4f}  "
              f"q1 {row['q1']:.4f}  q3 {row['q3']:.4f}  failures {row['failures']}  "
              f"iterations {row['median_iterations']:.0f}  time {row['median_total_seconds'] * 1e3:.2f} ms")


def run_score_dump(args):
    X, _ = load_data(args)
    Xw, _ = center_and_whiten(X)
    table = tabulate_score(Xw, score_params(args), args.score_seed)
    print(f"score table: {table.to_csv(args.output)} ({table.J} knots, z_max={table.z_max:.4f})")


def run_stability(args):
    X, _ = load_data(args)
    Xw, _ = center_and_whiten(X)
    for name, change in stability_check(Xw, score_params(args), args.score_seed).items():
        shown = 'not applicable' if change is None else f"{change:.5f}"
        print(f"doubling {name}: max |delta g| = {shown}")


COMMANDS = {
    'separate': run_separate,
    'bench': run_bench,
    'score-dump': run_score_dump,
    'stability': run_stability,
}


def main(argv=None) -> int:
    args = prepare_args(argv)
    if args.debug:
        for handler in logging.getLogger().handlers:
            if not isinstance(handler, logging.FileHandler):
                handler.setLevel(logging.DEBUG)
    try:
        COMMANDS[args.command](args)
    except (ConfigException, OutputDirectoryException, InputException, DegenerateDataException,
            IterationException, OSError) as e:
        log.error(f"{args.command} failed: {e}")
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
