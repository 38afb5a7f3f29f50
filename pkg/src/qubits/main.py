#!/usr/bin/env python3
"""
qubits - balanced time-series clustering
Main Application Module

Subcommands:
- cluster      QUBO clustering (simulated annealing or brute force)
- baseline     k-means++ on the same data, same report layout
- synth        synthetic periodic frame stack generator
- mds          classical MDS of angular distances
- eval         side-by-side comparison of two reports
- qubo-export  write the QUBO for an external solver
"""

import argparse
import json
import sys
from typing import List, Optional

from . import __version__
from .cli.interface import ReportRenderer
from .cli.pipeline import run_baseline, run_cluster, run_eval_files, run_mds, run_qubo_export, run_synth
from .cli.run_config import RunConfig
from .data.dataset_io import parse_roi
from .utils.config import Config
from .utils.errors import ConfigError, QubitsError
from .utils.helpers import dumps_report
from .utils.logger import get_logger, setup_logging

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_USAGE = 2


def _add_input_args(parser: argparse.ArgumentParser):
    parser.add_argument('input', help='CSV file or FSK1 frame stack')
    parser.add_argument('--labels', action='store_true',
                        help='First CSV column holds integer class labels')
    parser.add_argument('--header', action='store_true', help='Skip one CSV header line')
    parser.add_argument('--metric', choices=['cosine', 'inv-euclid'],
                        help='Similarity (default: cosine for frames, inv-euclid for CSV)')
    parser.add_argument('--standardize', choices=['row', 'global', 'none'],
                        help='Standardization (default: row for CSV, none for frames)')
    parser.add_argument('--center', action='store_true', default=None,
                        help='Remove each row mean before computing similarities')
    parser.add_argument('--no-center', dest='center', action='store_false', default=None)
    parser.add_argument('--svd-rank', type=int,
                        help='Truncated-SVD denoising rank, 0 disables (default: 5 for frames)')
    parser.add_argument('--roi', type=parse_roi, help='Frame crop x0,y0,x1,y1 for similarities')
    parser.add_argument('--dump-spectrum', help='CSV of singular values')


def _add_model_args(parser: argparse.ArgumentParser):
    parser.add_argument('--k', type=int, required=True, help='Number of clusters')
    parser.add_argument('--lambda-regime', choices=['strict', 'outlier-permitting'], default='strict',
                        help='Automatic penalty ratio (lambda1 = 100 or 30 x lambda2)')
    parser.add_argument('--lambda1', type=float, help='Explicit one-hot penalty weight')
    parser.add_argument('--lambda2', type=float, help='Explicit cluster-size balance weight')
    parser.add_argument('--no-balance', action='store_true',
                        help='Drop the balance term (lambda2 = 0)')


def _add_output_args(parser: argparse.ArgumentParser):
    parser.add_argument('--output', '-o', help='Write the JSON report here (default: stdout)')
    parser.add_argument('--dump-mds', help='CSV of MDS coordinates and clusters')
    parser.add_argument('--dump-means',
                        help='Means of non-empty clusters: CSV with a leading cluster id column, '
                             'or FSK1 frames in cluster order with a .fsk suffix')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qubits',
        description="qubits - balanced time-series clustering as a QUBO problem",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  qubits synth frames.fsk --seed 3 --phases phases.csv
  qubits cluster frames.fsk --k 9 --lambda-regime outlier-permitting -o qubo.json
  qubits baseline frames.fsk --k 9 --n-init 10 -o kmeans.json
  qubits eval qubo.json kmeans.json
  qubits cluster crop.csv --labels --k 24 --metric inv-euclid
        """
    )

    parser.add_argument('--version', action='version', version=f'qubits {__version__}')
    parser.add_argument('--config', default='config/config.json', help='Configuration file path')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Set logging level')
    parser.add_argument('--log-file', help='Also log to this file')
    parser.add_argument('--debug', action='store_true',
                        help='Debug logging and solver energy self-checks')
    parser.add_argument('--quiet', '-q', action='store_true', help='No console summary')

    subparsers = parser.add_subparsers(dest='command', required=True)

    cluster = subparsers.add_parser('cluster', help='QUBO clustering')
    _add_input_args(cluster)
    _add_model_args(cluster)
    cluster.add_argument('--solver', choices=['anneal', 'brute-force'], default='anneal')
    cluster.add_argument('--move-set', choices=['reassign', 'flip'], default='reassign',
                         help='Annealer moves: single flips plus point reassignments and swaps, '
                              'or single flips only')
    cluster.add_argument('--sweeps', type=int, help='Sweeps per restart')
    cluster.add_argument('--restarts', type=int, help='Independent annealing restarts')
    cluster.add_argument('--t-initial', type=float, help='Starting temperature')
    cluster.add_argument('--t-final', type=float, help='Final temperature')
    cluster.add_argument('--seed', type=int, default=0)
    cluster.add_argument('--threads', type=int, help='Worker threads (capped by QUBITS_THREADS)')
    cluster.add_argument('--solution', help='Decode this bitstring file instead of solving')
    cluster.add_argument('--dump-similarity', help='CSV of the similarity matrix')
    _add_output_args(cluster)

    baseline = subparsers.add_parser('baseline', help='k-means++ baseline')
    _add_input_args(baseline)
    baseline.add_argument('--k', type=int, required=True, help='Number of clusters')
    baseline.add_argument('--seed', type=int, default=0)
    baseline.add_argument('--n-init', type=int, help='Best of this many seeds')
    baseline.add_argument('--max-iter', type=int, help='Lloyd iteration cap')
    _add_output_args(baseline)

    synth = subparsers.add_parser('synth', help='Generate a synthetic frame stack')
    synth.add_argument('output', help='FSK1 file to write')
    synth.add_argument('--n-frames', type=int, default=270)
    synth.add_argument('--height', type=int, default=64)
    synth.add_argument('--width', type=int, default=64)
    synth.add_argument('--periods', dest='n_periods', type=float, default=12.7,
                       help='Oscillation periods over the whole stack')
    synth.add_argument('--amplitude', type=float, default=0.02)
    synth.add_argument('--noise-sigma', type=float, help='Noise std (default: amplitude)')
    synth.add_argument('--wavenumber', type=int, default=2)
    synth.add_argument('--seed', type=int, default=0)
    synth.add_argument('--phases', dest='phases_path', help='CSV of true phases')
    synth.add_argument('--clean', dest='clean_path', help='FSK1 of noiseless frames')

    mds = subparsers.add_parser('mds', help='Classical MDS of angular distances')
    _add_input_args(mds)
    mds.add_argument('--output', '-o', help='Write the JSON result here (default: stdout)')
    mds.add_argument('--dump-mds', help='CSV of MDS coordinates')

    evaluate = subparsers.add_parser('eval', help='Compare two reports')
    evaluate.add_argument('report_a')
    evaluate.add_argument('report_b')
    evaluate.add_argument('--output', '-o', help='Write the comparison JSON here')

    export = subparsers.add_parser('qubo-export', help='Write the QUBO as JSON')
    _add_input_args(export)
    _add_model_args(export)
    export.add_argument('--output', '-o', required=True, help='QUBO JSON file')

    return parser


_NON_CONFIG_ARGS = {'command', 'config', 'log_level', 'log_file', 'quiet', 'input',
                    'report_a', 'report_b'}


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {key: value for key, value in vars(args).items()
              if key not in _NON_CONFIG_ARGS and value is not None}
    if args.command == 'eval':
        inputs = [args.report_a, args.report_b]
    elif args.command == 'synth':
        inputs = []
    else:
        inputs = [args.input]
    if values.get('roi') is not None:
        values['roi'] = tuple(values['roi'])
    return RunConfig.create(subcommand=args.command, inputs=inputs, **values)


def dispatch(cfg: RunConfig, config: Config, renderer: Optional[ReportRenderer]) -> dict:
    if cfg.subcommand == 'cluster':
        document, _ = run_cluster(cfg, config)
    elif cfg.subcommand == 'baseline':
        document, _ = run_baseline(cfg, config)
    elif cfg.subcommand == 'synth':
        document = run_synth(cfg)
        if renderer:
            renderer.show_synth(document)
        return document
    elif cfg.subcommand == 'mds':
        document = run_mds(cfg, config)
    elif cfg.subcommand == 'eval':
        document = run_eval_files(cfg)
        if renderer:
            renderer.show_comparison(document)
        return document
    else:
        document = run_qubo_export(cfg, config)

    if renderer and cfg.subcommand in ('cluster', 'baseline'):
        renderer.show_run(document)
    return document


def _given_path(args: argparse.Namespace) -> str:
    """Input path(s) named on the command line, for errors that carry no filename"""
    if args.command == 'eval':
        return f"{args.report_a}, {args.report_b}"
    return str(getattr(args, 'input', None) or getattr(args, 'output', None) or "")


def _emit_error(error: dict):
    print(json.dumps({"error": error}, default=str))


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    config = Config(args.config)
    log_level = 'DEBUG' if args.debug else (args.log_level or config.log_level)
    setup_logging(
        log_level=log_level,
        log_file=args.log_file or config.log_file,
        max_size=config.get('logging.max_size', '10MB'),
        backup_count=config.get('logging.backup_count', 5),
        quiet=args.quiet,
    )
    logger = get_logger(__name__)
    logger.debug(f"qubits {__version__} {args.command}")

    try:
        if not config.validate():
            raise ConfigError("configuration file has invalid values",
                              path=str(config.source or args.config))
        cfg = run_config_from_args(args)
        renderer = None if args.quiet else ReportRenderer()
        document = dispatch(cfg, config, renderer)
        if not getattr(cfg, 'output', None) or cfg.subcommand in ('synth', 'qubo-export'):
            print(dumps_report(document))
        return EXIT_OK
    except QubitsError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        _emit_error(e.to_dict())
        return e.exit_code
    except FileNotFoundError as e:
        logger.error(str(e))
        path = e.filename if e.filename else _given_path(args)
        _emit_error({"type": "FileNotFoundError", "message": str(e), "details": {"path": str(path)}})
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return EXIT_COMPUTATION
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        _emit_error({"type": type(e).__name__, "message": str(e), "details": {}})
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
