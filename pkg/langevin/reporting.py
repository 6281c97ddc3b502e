import json
import math
import os

import numpy as np
import pandas as pd

from langevin import (
    constants,
    utilities,
)


def append_reports(path, reports):
    """Append bound reports to a JSON-lines file, one object per line.

    The whole file is rewritten atomically.

    Parameters
    ----------
    path : str
        The JSON-lines file.
    reports : list of BoundReport
        The reports.

    Returns
    -------
    None

    """
    existing = ""
    if os.path.exists(path):
        with open(path) as source:
            existing = source.read()
    lines = "".join(report.to_json() + "\n" for report in reports)
    utilities.atomic_write(path, existing + lines)


def print_bound_report(report):
    """Print a bound or tuning report as a table.

    Parameters
    ----------
    report : BoundReport
        The report.

    Returns
    -------
    None

    """
    _print_report_line(report.rule)
    for name, value in report.outputs.items():
        _print_report_line(name, _stringify_number(value))
    for name, met in report.flags.items():
        _print_report_line(name.replace("_", " "), "yes" if met else "NO")
    print()


def print_check_summary(checks):
    """Print a pass/fail table of verification checks.

    Parameters
    ----------
    checks : list of tuple
        (name, passed, worst margin) for each check.

    Returns
    -------
    None

    """
    _print_report_line("Check", "Margin / Result")
    for name, passed, margin in checks:
        result = "PASS" if passed else "FAIL"
        if margin is not None:
            result = "{}  {}".format(_stringify_number(margin), result)
        _print_report_line(name, result)
    print()


def print_experiment_summary(summary):
    """Print the final mean absolute error of every benchmark cell.

    Parameters
    ----------
    summary : pandas.DataFrame
        The summary table written to summary.csv.

    Returns
    -------
    None

    """
    keys = ["sampler", "tau", "batch", "functional"]
    final = summary.sort_values("n", kind="stable").groupby(keys).tail(1)
    final = final.sort_values(keys, kind="stable")

    _print_report_line("Final mean absolute error")
    for row in final.itertuples(index=False):
        label = "{} tau={} batch={} {}".format(
            row.sampler,
            row.tau,
            row.batch,
            row.functional,
        )
        _print_report_line(label, _stringify_number(row.mae))
    print()


def print_sample_summary(result):
    """Print a chain's estimates, passes and acceptance rate.

    Parameters
    ----------
    result : ChainResult
        The run's result.

    Returns
    -------
    None

    """
    _print_report_line("Estimates")
    for name, value in result.estimates.items():
        _print_report_line(name, _stringify_number(value))
    _print_report_line("Weight total", _stringify_number(result.weight_total))
    _print_report_line("Effective passes", _stringify_number(result.passes))
    if result.acceptance_rate is not None:
        _print_report_line(
            "Acceptance rate",
            _stringify_number(result.acceptance_rate),
        )
    print()


def write_estimates(path, result):
    """Write a chain's estimates as CSV.

    Columns are functional, estimate, weight_total and effective_passes.

    Returns
    -------
    None

    """
    table = pd.DataFrame(
        [
            (name, float(value), result.weight_total, result.passes)
            for name, value in result.estimates.items()
        ],
        columns=["functional", "estimate", "weight_total", "effective_passes"],
    )
    write_table(path, table)


def write_json(path, data):
    """Write an object as indented, key-sorted JSON.

    Returns
    -------
    None

    """
    text = json.dumps(data, indent=2, sort_keys=True, default=_jsonable)
    utilities.atomic_write(path, text + "\n")


def write_table(path, table):
    """Write a DataFrame as CSV without its index.

    Returns
    -------
    None

    """
    utilities.atomic_write(path, table.to_csv(index=False))


def write_trace(path, trace):
    """Write a thinned single-chain trace as CSV with columns k, x_1..x_d.

    Returns
    -------
    None

    """
    # Parameter check.
    assert trace

    d = len(trace[0][1])
    table = pd.DataFrame(
        [[k] + list(x) for k, x in trace],
        columns=["k"] + ["x_{}".format(i + 1) for i in range(d)],
    )
    write_table(path, table)


def _jsonable(value):
    """Convert numpy values for JSON serialization."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError("Cannot serialize {!r}".format(value))


def _print_report_line(label, value=None):
    """Print a line of a report table followed by a separator line.

    Parameters
    ----------
    label : str
        The label to print on the left.
    value : str, optional
        The value, if any, to print on the right.

    Returns
    -------
    None

    """
    if value is None:
        print(label)
    else:
        value_width = max(1, constants.TABLE_WIDTH - (len(label) + 1))
        print(label, value.rjust(value_width))
    print("-" * constants.TABLE_WIDTH)


def _stringify_number(number):
    """Format a number for a report table.

    Integers get thousand separators and floats six significant digits.

    """
    if isinstance(number, (bool, np.bool_)):
        return str(bool(number))
    if isinstance(number, (int, np.integer)):
        return "{:,}".format(int(number))
    number = float(number)
    if math.isinf(number) or math.isnan(number):
        return str(number)
    return "{:.6g}".format(number)
