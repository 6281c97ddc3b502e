#!/usr/bin/env python3
import argparse
import dataclasses
import os
import signal
import sys
import warnings

import numpy as np
import pandas as pd

import langevin
from langevin import (
    bounds,
    config,
    constants,
    exceptions,
    harness,
    reporting,
    samplers,
    schedules,
    utilities,
    verification,
)


def main(argv):
    """Run Langevin.

    Parameters
    ----------
    argv : list
        List of arguments from the command line, including the executable.

    Returns
    -------
    int
        The exit status.

    """
    # Set handler for interrupt and termination signals.
    signal.signal(signal.SIGINT, _signal_handler)
    signal.signal(signal.SIGTERM, _signal_handler)

    # Parse the command line input.
    args = _parse_args(argv)

    # If any optional arguments conflict, print the errors and return a
    # non-zero exit status.
    argument_conflicts = _check_argument_conflicts(args)
    if argument_conflicts:
        _print_argument_conflict_errors(argument_conflicts)
        return 1

    # Print the langevin header.
    print()
    print("========")
    print("Langevin")
    print("========")
    print()

    # Create the output directory if one was given.
    if args.out is not None:
        utilities.ensure_directory(args.out)
        print(">> Output is written to", os.path.abspath(args.out))
        print()

    # Run the sub-command, printing warnings as notes and anticipated
    # failures as errors.
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", exceptions.LangevinWarning)
        try:
            status = _COMMANDS[args.command](args)
        except exceptions.LangevinError as error:
            _print_warnings(caught)
            print()
            print("ERROR:", error)
            return 1

    _print_warnings(caught)
    return status


def run():
    """Call main() to run Langevin.

    This is the console script entry point.

    Returns
    -------
    None

    """
    # Run Langevin, exiting with a status code when finished.
    sys.exit(main(sys.argv))


def _benchmark(args):
    """Run a benchmark grid from a configuration file."""
    experiment = config.build_experiment(config.load_config(args.config))

    utilities.print_header("Benchmark")
    print("Target:", experiment.target.kind)
    print("Samplers:", ", ".join(experiment.samplers))
    print("Replications:", experiment.replications)
    print()

    utilities.print_header("Progress")
    with utilities.hide_cursor():
        result = harness.run_experiment(
            experiment,
            out_dir=args.out,
            progress=not args.quiet,
        )
    print()
    print()

    utilities.print_header("Results")
    reporting.print_experiment_summary(result.summary)
    return 0


def _bound(args):
    """Evaluate a convergence bound from command line constants."""
    c = _problem_constants(args.set)
    plan = schedules.StepPlan(
        kind=args.schedule,
        gamma1=args.gamma1,
        alpha=args.alpha,
        switch_step=args.switch_step,
        gamma2=args.gamma2,
        weights=args.weights,
        lambda1=args.lambda1,
        burn_in=args.burn_in,
    )
    variances = None
    if args.variances is not None:
        variances = _read_variances(args.variances)
    report = bounds.bound_rhs(
        args.theorem,
        c,
        plan,
        args.horizon,
        variances=variances,
    )

    utilities.print_header("Bound")
    reporting.print_bound_report(report)
    _save_report(args, report)
    return 0


def _check_argument_conflicts(args):
    """Check whether any bound arguments conflict with each other.

    Parameters
    ----------
    args : instance of Namespace
        Parsed arguments from the command line.

    Returns
    -------
    list of str
        The list of argument conflict messages.

    """
    if args.command != constants.BOUND:
        return []

    # Match each schedule argument with the schedule kinds it applies to.
    compatibility = {
        constants.GAMMA2_ARG: ("gamma2", [constants.PIECEWISE]),
        constants.SWITCH_STEP_ARG: ("switch_step", [constants.PIECEWISE]),
    }

    error_messages = []
    for arg, (attribute, kinds) in sorted(compatibility.items()):
        supplied = getattr(args, attribute) not in (None, 0)
        if supplied and args.schedule not in kinds:
            error_messages.append(
                "{} cannot be passed with {} {}".format(
                    arg,
                    constants.SCHEDULE_ARG,
                    args.schedule,
                ),
            )
    if args.schedule == constants.PIECEWISE and args.gamma2 is None:
        error_messages.append(
            "{} {} needs {}".format(
                constants.SCHEDULE_ARG,
                constants.PIECEWISE,
                constants.GAMMA2_ARG,
            ),
        )
    if (
        args.variances is not None
        and args.theorem not in constants.VARIANCE_THEOREMS
    ):
        error_messages.append(
            "{} cannot be passed with {} {}".format(
                constants.VARIANCES_ARG,
                constants.THEOREM_ARG,
                args.theorem,
            ),
        )

    return error_messages


def _parse_args(argv):
    """Parse the command line input.

    Parameters
    ----------
    argv : list of str
        List of arguments from the command line, including the executable.

    Returns
    -------
    instance of Namespace
        Parsed arguments from the command line.

    """
    parser = argparse.ArgumentParser(
        description="Sample log-concave targets with Langevin algorithms.",
        usage="%(prog)s [options] command ...",
    )
    parser.add_argument(
        constants.VERSION_SHORT_ARG,
        constants.VERSION_ARG,
        action="version",
        version="{} {}".format(langevin.__title__, langevin.__version__),
    )

    # Options shared by every sub-command.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        constants.OUT_SHORT_ARG,
        constants.OUT_ARG,
        metavar="DIR",
        help="write output files to this directory",
    )
    common.add_argument(
        constants.QUIET_SHORT_ARG,
        constants.QUIET_ARG,
        action="store_true",
        help="do not show progress bars",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    subparsers.add_parser(
        constants.VALIDATE,
        parents=[common],
        help="verify the bounds on Gaussian targets",
    )

    tune = subparsers.add_parser(
        constants.TUNE,
        parents=[common],
        help="compute a step size and iteration count",
    )
    tune.add_argument(
        constants.RULE_ARG,
        choices=constants.TUNING_RULES,
        required=True,
        help="the tuning rule",
    )
    tune.add_argument(
        constants.EPS_ARG,
        type=float,
        required=True,
        help="the target accuracy",
    )
    _add_constant_argument(tune)

    bound = subparsers.add_parser(
        constants.BOUND,
        parents=[common],
        help="evaluate a convergence bound",
    )
    bound.add_argument(
        constants.THEOREM_ARG,
        choices=constants.THEOREMS,
        required=True,
        help="the bound to evaluate",
    )
    bound.add_argument(
        constants.HORIZON_ARG,
        type=int,
        required=True,
        help="the number of iterations",
    )
    bound.add_argument(
        constants.SCHEDULE_ARG,
        choices=constants.SCHEDULE_KINDS,
        default=constants.CONSTANT,
        help="the step size schedule (default: constant)",
    )
    bound.add_argument(
        constants.GAMMA1_ARG,
        type=float,
        required=True,
        help="the first step size",
    )
    bound.add_argument(
        constants.ALPHA_ARG,
        type=float,
        default=0.5,
        help="the decay exponent of a poly schedule (default: 0.5)",
    )
    bound.add_argument(
        constants.GAMMA2_ARG,
        type=float,
        help="the step size after the switch of a piecewise schedule",
    )
    bound.add_argument(
        constants.SWITCH_STEP_ARG,
        type=int,
        default=0,
        help="the last step of the first phase of a piecewise schedule",
    )
    bound.add_argument(
        constants.WEIGHTS_ARG,
        choices=constants.WEIGHT_KINDS,
        default=constants.GAMMA,
        help="the averaging weights (default: gamma)",
    )
    bound.add_argument(
        constants.LAMBDA1_ARG,
        type=float,
        help="the first weight (default: the first step size)",
    )
    bound.add_argument(
        constants.BURN_IN_ARG,
        type=int,
        default=0,
        help="the iterations before averaging starts (default: 0)",
    )
    bound.add_argument(
        constants.VARIANCES_ARG,
        metavar="FILE",
        help=(
            "a CSV file with a {} column of measured oracle variances, one "
            "row per iteration, for the {} bounds".format(
                constants.VARIANCE_COLUMN,
                ", ".join(constants.VARIANCE_THEOREMS),
            )
        ),
    )
    _add_constant_argument(bound)

    for name, text in (
        (constants.SAMPLE, "run a single chain"),
        (constants.BENCHMARK, "run a benchmark grid"),
    ):
        command = subparsers.add_parser(name, parents=[common], help=text)
        command.add_argument(
            constants.CONFIG_SHORT_ARG,
            constants.CONFIG_ARG,
            required=True,
            metavar="FILE",
            help="the TOML configuration file",
        )

    return parser.parse_args(argv[1:])


def _add_constant_argument(parser):
    """Add the repeatable name=value argument for problem constants."""
    parser.add_argument(
        constants.CONSTANT_SHORT_ARG,
        constants.CONSTANT_ARG,
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="a problem constant, such as d=10 or L=1 (repeatable)",
    )


def _print_argument_conflict_errors(conflicts):
    """Print the list of command line argument conflicts.

    Parameters
    ----------
    conflicts : list of str
        A list of argument conflict messages.

    Returns
    -------
    None

    """
    print()
    for conflict in conflicts:
        print("ERROR:", conflict)


def _print_warnings(caught):
    """Print the package warnings raised while running a command."""
    for warning in caught:
        if issubclass(warning.category, exceptions.LangevinWarning):
            print(">>", warning.message)


def _problem_constants(pairs):
    """Convert name=value pairs into ProblemConstants.

    Raises
    ------
    ConfigError
        If a pair is malformed, names an unknown constant or d is missing.

    """
    known = {field.name for field in dataclasses.fields(
        bounds.ProblemConstants,
    )}
    values = {}
    for pair in pairs:
        name, separator, text = pair.partition("=")
        name = name.strip()
        if not separator or name not in known:
            raise exceptions.ConfigError(
                "Cannot read the constant {!r}".format(pair),
            )
        try:
            if name == "d":
                values[name] = int(text)
            elif name == "heuristic":
                values[name] = text.strip().lower() in ("1", "true", "yes")
            else:
                values[name] = float(text)
        except ValueError:
            raise exceptions.ConfigError(
                "Cannot read the value of {}: {!r}".format(name, text),
            )
    if "d" not in values:
        raise exceptions.ConfigError(
            "The dimension is required, for example {} d=10".format(
                constants.CONSTANT_ARG,
            ),
        )
    return bounds.ProblemConstants(**values)


def _read_variances(path):
    """Read a measured oracle variance series from a CSV file.

    Raises
    ------
    ConfigError
        If the file cannot be read, lacks the variance column, or holds a
        value which is not a finite non-negative number.

    """
    try:
        table = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise exceptions.ConfigError(
            "Could not read {}: {}".format(path, error),
        )
    if constants.VARIANCE_COLUMN not in table.columns:
        raise exceptions.ConfigError(
            "{} has no {} column".format(path, constants.VARIANCE_COLUMN),
        )

    variances = pd.to_numeric(
        table[constants.VARIANCE_COLUMN],
        errors="coerce",
    ).to_numpy(dtype=float)
    if not np.all(np.isfinite(variances)) or np.any(variances < 0):
        raise exceptions.ConfigError(
            "Variances in {} must be finite and non-negative".format(path),
        )
    return variances


def _sample(args):
    """Run a single chain from a configuration file."""
    settings = config.load_config(args.config)
    target = config.build_target(settings)
    run_config = config.build_run(settings)
    oracle = config.build_oracle(settings, target, run_config.kind)

    utilities.print_header("Sample")
    print("Target:", target.kind)
    print("Sampler:", run_config.kind)
    print()

    utilities.print_header("Progress")
    with utilities.hide_cursor():
        result = samplers.run_chain(
            run_config,
            target.potential,
            oracle,
            progress=not args.quiet,
        )
    print()
    print()

    utilities.print_header("Results")
    reporting.print_sample_summary(result)

    if args.out is not None:
        reporting.write_estimates(
            os.path.join(args.out, constants.ESTIMATES_FILE),
            result,
        )
        if result.trace:
            reporting.write_trace(
                os.path.join(args.out, constants.TRACE_FILE),
                result.trace,
            )
        reporting.write_json(
            os.path.join(args.out, constants.RUN_FILE),
            {
                "config": settings,
                "fingerprint": target.fingerprint,
                "admissible": result.admissible,
                "effective_passes": constants.EFFECTIVE_PASSES_DEFINITION,
            },
        )
    return 0


def _save_report(args, report):
    """Append a report to the reports file when there is an output path."""
    if args.out is not None:
        reporting.append_reports(
            os.path.join(args.out, constants.REPORTS_FILE),
            [report],
        )


def _signal_handler(signum, frame):  # pylint: disable=unused-argument
    """Print an interrupt or termination message, then exit.

    Parameters
    ----------
    signum : int
        The signal number. Either 2 (SIGINT) or 15 (SIGTERM).
    frame : frame object
        Unused.

    Returns
    -------
    None

    """
    print()
    print()
    if signum == signal.SIGINT:
        print(">> Keyboard interrupt signal received. Exiting.")
    elif signum == signal.SIGTERM:
        print(">> Termination signal received. Exiting.")
    print()
    sys.exit(1)


def _tune(args):
    """Compute a tuning rule from command line constants."""
    c = _problem_constants(args.set)
    report = bounds.tune(args.rule, c, args.eps)

    utilities.print_header("Tuning")
    reporting.print_bound_report(report)
    _save_report(args, report)
    return 0


def _validate(args):
    """Run the Gaussian verification suite."""
    utilities.print_header("Progress")
    with utilities.hide_cursor():
        checks, _ = verification.run_validation(
            out_dir=args.out,
            progress=not args.quiet,
        )
    print()
    print()

    utilities.print_header("Checks")
    reporting.print_check_summary(checks)

    failed = [name for name, passed, _ in checks if not passed]
    if failed:
        print("ERROR: Failed checks:", ", ".join(failed))
        return 1
    return 0


_COMMANDS = {
    constants.BENCHMARK: _benchmark,
    constants.BOUND: _bound,
    constants.SAMPLE: _sample,
    constants.TUNE: _tune,
    constants.VALIDATE: _validate,
}
