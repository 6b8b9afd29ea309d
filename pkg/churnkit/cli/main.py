"""
The churnkit command line tool
"""
import argparse
import logging
import os
import sys
from urllib.parse import urlparse

from ZConfig import ConfigurationError

import churnkit
from churnkit.cli import config_parser
from churnkit.cli.config_elements import MainConfig
from churnkit.cli.curves import CURVES, CURVE_HEADERS, DEFAULT_ETA_GRID, REJECT_MAP_HEADER, loss_curve, reject_map
from churnkit.cli.output import prepare_directory, results_bundle, slug, write_csv, write_json
from churnkit.cli.suites import run_suite
from churnkit.common.config_datatypes import seed as seed_datatype
from churnkit.common.logging.verbosity import set_verbosity_logger
from churnkit.exceptions import BoundViolation
from churnkit.grid import GridSpec
from churnkit.training.experiments import VARY, churn_experiment, retrieval_experiment
from churnkit.utils import parse_float_list

from typing import Iterable, Optional

logger = logging.getLogger()

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2

CHURN_HEADER = ('alpha', 'pair_id', 'hard_churn', 'soft_churn', 'l1_mean', 'l1norm_mean', 'l4_mean', 'l05norm_mean',
                'err1', 'err2')

STABILITY_HEADER = ('alpha', 'pair_id', 'correct_stable', 'correct_unstable', 'incorrect_stable', 'incorrect_unstable')

HISTOGRAM_HEADER = ('bin_start', 'bin_end', 'count')

RETRIEVAL_HEADER = ('loss', 'seed', 'recall@1', 'recall@5', 'recall@10', 'pr_auc')

CALIBRATION_HEADER = ('loss', 'seed', 'envelope_width', 'high_score_fraction', 'final_loss')

ENVELOPE_HEADER = ('rank', 'lower', 'upper')


def grid_spec(value: str) -> GridSpec:
    """
    Parse a grid given as start:stop:points.

    :param value: The textual grid
    :return: The grid
    """
    parts = value.split(':')
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("Grids are written as start:stop:points, like -3:3:601")
    try:
        return GridSpec(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def float_list(value: str) -> list:
    """
    Parse a list of numbers for argparse.

    :param value: The textual list
    :return: The numbers
    """
    try:
        return parse_float_list(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def seed(value: str) -> int:
    """
    Parse an explicit seed for argparse.

    :param value: The textual seed
    :return: The seed
    """
    try:
        return seed_datatype(value)
    except ValueError:
        raise argparse.ArgumentTypeError("{} is not an unsigned 64-bit integer".format(value))


def handle_args(args: Iterable[str]):
    """
    Handle the command line arguments.

    :param args: Command line arguments
    :return: The arguments object
    """
    parser = argparse.ArgumentParser(
        description="Measure, bound and reduce prediction churn.",
    )
    parser.add_argument("-v", "--verbosity", action="count", default=0, help="increase output verbosity")
    parser.add_argument("--version", action="version", version="%(prog)s {}".format(churnkit.__version__))

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    losscurve = subparsers.add_parser("losscurve", help="tabulate a loss or link function over a grid")
    losscurve.add_argument("--loss", required=True, choices=CURVES, help="the function to tabulate")
    losscurve.add_argument("--alphas", type=float_list,
                           help="the regulariser strengths, sharpness values or mining fractions")
    losscurve.add_argument("-d", "--cost", type=float, default=0.3, help="the rejection cost (default: 0.3)")
    losscurve.add_argument("--grid", type=grid_spec, help="the grid as start:stop:points")
    losscurve.add_argument("--out", default='.', help="the output directory")

    bounds = subparsers.add_parser("bounds", help="check the churn inequalities and gradients on random instances")
    bounds.add_argument("--samples", type=int, default=100000, help="random instances per number of classes")
    bounds.add_argument("--seed", type=seed, default=7, help="the seed of the random instances")
    bounds.add_argument("--out", default='.', help="the output directory")

    churn = subparsers.add_parser("churn", help="run a churn experiment")
    churn.add_argument("--config", required=True, help="the experiment configuration file")
    churn.add_argument("--out", help="the output directory, overrides the configuration")
    churn.add_argument("--seed", type=seed, help="the base seed of the models, overrides the configuration")
    churn.add_argument("--vary", choices=VARY, help="which seeds differ within a pair, overrides the configuration")

    retrieval = subparsers.add_parser("retrieval", help="run a retrieval experiment")
    retrieval.add_argument("--config", required=True, help="the experiment configuration file")
    retrieval.add_argument("--out", help="the output directory, overrides the configuration")
    retrieval.add_argument("--seed", type=seed, help="run with only this seed instead of the configured seeds")

    rejectmap = subparsers.add_parser("rejectmap", help="tabulate the optimal score of the smooth reject surrogate")
    rejectmap.add_argument("--alphas", type=float_list, help="the sharpness values (default: 1, 2, 4, 8, 32)")
    rejectmap.add_argument("-d", "--cost", type=float, default=0.3, help="the rejection cost (default: 0.3)")
    rejectmap.add_argument("--grid", type=grid_spec, default=DEFAULT_ETA_GRID,
                           help="the probabilities as start:stop:points")
    rejectmap.add_argument("--out", default='.', help="the output directory")

    return parser.parse_args(args)


def load_experiment_config(config_file: str, verbosity: int):
    """
    Read the configuration and set up logging as it describes.

    :param config_file: The configuration file
    :param verbosity: The verbosity given on the command line
    :return: The configuration and its text
    """
    config, config_text = config_parser.load_config(config_file)
    if config.logging:
        config.logging.configure(logger, verbosity=verbosity)
    return config, config_text


def output_directory(args, config: MainConfig) -> str:
    """
    The output directory from the command line or else from the configuration.

    :param args: The command line arguments
    :param config: The configuration
    :return: The created directory
    """
    directory = args.out or config.output_directory
    if not directory:
        raise ValueError("No output directory: use --out or configure output-directory")
    return prepare_directory(directory)


def cmd_losscurve(args) -> int:
    """
    Write the table of a loss curve.

    :param args: The command line arguments
    :return: The exit code
    """
    rows = loss_curve(args.loss, args.alphas, args.cost, args.grid)
    out = prepare_directory(args.out)
    write_csv(os.path.join(out, 'losscurve_{}.csv'.format(args.loss)), CURVE_HEADERS[args.loss], rows)
    return EXIT_OK


def cmd_rejectmap(args) -> int:
    """
    Write the table of optimal reject scores.

    :param args: The command line arguments
    :return: The exit code
    """
    rows = reject_map(args.alphas, args.cost, args.grid)
    out = prepare_directory(args.out)
    write_csv(os.path.join(out, 'rejectmap.csv'), REJECT_MAP_HEADER, rows)
    return EXIT_OK


def cmd_bounds(args) -> int:
    """
    Run the self-checks and write their report.

    :param args: The command line arguments
    :return: The exit code
    """
    result = run_suite(args.samples, args.seed)
    out = prepare_directory(args.out)
    write_json(os.path.join(out, 'bounds.json'), result)

    if result.violations:
        failing = [report.bound for report in result.reports if not report.holds]
        raise BoundViolation("Violations found by: {}".format(', '.join(failing)))

    return EXIT_OK


def cmd_churn(args) -> int:
    """
    Run a churn experiment and write its results.

    :param args: The command line arguments
    :return: The exit code
    """
    config, config_text = load_experiment_config(args.config, args.verbosity)
    section = config.experiment
    if section.kind != 'churn':
        raise ValueError("{} describes a {} experiment".format(args.config, section.kind))

    overrides = {}
    base_seed = section.base_seed
    vary = section.vary
    if args.seed is not None:
        base_seed = overrides['base_seed'] = args.seed
    if args.vary is not None:
        vary = overrides['vary'] = args.vary

    out = output_directory(args, config)
    reports = churn_experiment(section.train_config, section.alphas, section.pairs, section.dataset_spec, vary,
                               config.workers, section.histogram_bins, base_seed)

    stability_rows = []
    for report in reports:
        name = slug(report.alpha)
        write_csv(os.path.join(out, 'churn_alpha{}.csv'.format(name)), CHURN_HEADER,
                  [[run.alpha, run.pair] + [getattr(run, column) for column in CHURN_HEADER[2:]]
                   for run in report.runs])

        for kind, histogram in (('logits', report.logit_histogram), ('distances', report.distance_histogram)):
            if histogram is not None:
                write_csv(os.path.join(out, '{}_alpha{}.csv'.format(kind, name)), HISTOGRAM_HEADER,
                          zip(histogram.edges[:-1], histogram.edges[1:], histogram.counts))

        stability_rows.extend([run.alpha, run.pair, run.stability.correct_stable, run.stability.correct_unstable,
                               run.stability.incorrect_stable, run.stability.incorrect_unstable]
                              for run in report.runs)

    write_csv(os.path.join(out, 'stability.csv'), STABILITY_HEADER, stability_rows)

    runs = [{'alpha': report.alpha,
             'pairs': [run.metrics() for run in report.runs],
             'failures': report.failures} for report in reports]
    aggregates = [dict(report.aggregate(), alpha=report.alpha) for report in reports]
    write_json(os.path.join(out, 'results.json'), results_bundle('churn', config_text, overrides, runs, aggregates))

    failures = sum(len(report.failures) for report in reports)
    violations = sum(not run.bounds_hold for report in reports for run in report.runs)
    if failures or violations:
        logger.error("{} pairs failed to train and {} pairs violate a churn bound".format(failures, violations))
        return EXIT_VIOLATION

    return EXIT_OK


def cmd_retrieval(args) -> int:
    """
    Run a retrieval experiment and write its results.

    :param args: The command line arguments
    :return: The exit code
    """
    config, config_text = load_experiment_config(args.config, args.verbosity)
    section = config.experiment
    if section.kind != 'retrieval':
        raise ValueError("{} describes a {} experiment".format(args.config, section.kind))

    overrides = {}
    seeds = section.seeds
    if args.seed is not None:
        seeds = overrides['seeds'] = [args.seed]

    out = output_directory(args, config)
    reports = retrieval_experiment(section.train_config, section.losses, seeds, section.dataset_spec,
                                   config.workers, section.profile_queries)

    retrieval_rows = []
    calibration_rows = []
    for report in reports:
        for run in report.runs:
            retrieval_rows.append([run.loss, run.seed, run.recall_at_1, run.recall_at_5, run.recall_at_10,
                                   run.pr_auc])
            calibration_rows.append([run.loss, run.seed, run.envelope_width, run.high_score_fraction,
                                     run.final_loss])

            profile = run.profile
            write_csv(os.path.join(out, 'envelope_{}_seed{}.csv'.format(slug(run.loss), run.seed)), ENVELOPE_HEADER,
                      zip(range(1, len(profile.lower) + 1), profile.lower, profile.upper))

    write_csv(os.path.join(out, 'retrieval.csv'), RETRIEVAL_HEADER, retrieval_rows)
    write_csv(os.path.join(out, 'calibration.csv'), CALIBRATION_HEADER, calibration_rows)

    runs = [{'loss': report.loss,
             'runs': [run.metrics() for run in report.runs],
             'failures': report.failures} for report in reports]
    aggregates = [dict(report.aggregate(), loss=report.loss) for report in reports]
    write_json(os.path.join(out, 'results.json'),
               results_bundle('retrieval', config_text, overrides, runs, aggregates))

    failures = sum(len(report.failures) for report in reports)
    if failures:
        logger.error("{} runs failed".format(failures))
        return EXIT_VIOLATION

    return EXIT_OK


COMMANDS = {
    'losscurve': cmd_losscurve,
    'bounds': cmd_bounds,
    'churn': cmd_churn,
    'retrieval': cmd_retrieval,
    'rejectmap': cmd_rejectmap,
}


def describe_config_error(e: ConfigurationError) -> str:
    """
    Make configuration errors a bit more readable.

    :param e: The exception from ZConfig
    :return: The message with line number and file name when known
    """
    msg = str(e.message)
    lineno = getattr(e, 'lineno', None)
    url = getattr(e, 'url', None)
    if lineno and lineno != -1:
        msg += ' on line {}'.format(lineno)
    if url:
        msg += ' in {}'.format(urlparse(url).path)
    return msg


def main(args: Iterable[str]) -> int:
    """
    Run one command

    :param args: Command line arguments
    :return: The program exit code
    """
    args = handle_args(args)
    set_verbosity_logger(logger, args.verbosity)
    logger.info("churnkit v{}: {}".format(churnkit.__version__, args.command))

    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as e:
        logger.critical(describe_config_error(e))
        return EXIT_ERROR
    except BoundViolation as e:
        logger.error(str(e))
        return EXIT_VIOLATION


def run(argv: Optional[Iterable[str]] = None) -> int:
    """
    Run the main program and handle exceptions

    :param argv: Command line arguments, those of the process by default
    :return: The program exit code
    """
    try:
        return main(sys.argv[1:] if argv is None else argv)
    except Exception as e:
        logger.critical("Error: {}".format(e))
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(run())
