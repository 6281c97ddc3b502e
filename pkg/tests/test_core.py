import argparse
import io
import json
import os
import signal
import unittest
import unittest.mock as mock

import pandas as pd

import langevin.bounds as bounds
import langevin.constants as langevin_constants
import langevin.core as core
import langevin.exceptions as exceptions
from tests import (
    constants,
    helpers,
)


EXECUTABLE = "langevin"
HEADER = [
    mock.call(),
    mock.call("========"),
    mock.call("Langevin"),
    mock.call("========"),
    mock.call(),
]
SEPARATOR = "-" * 48


def printed_text(mocked_print):
    """Join the arguments of every print call into one string per call."""
    return [
        " ".join(str(arg) for arg in call.args)
        for call in mocked_print.call_args_list
    ]


def report_line(label, value=None):
    """Return the print calls of one report table line."""
    if value is None:
        return [mock.call(label), mock.call(SEPARATOR)]
    width = max(1, 48 - len(label) - 1)
    return [mock.call(label, value.rjust(width)), mock.call(SEPARATOR)]


class TestCore(unittest.TestCase):
    """Tests for the core module.

    """

    def setUp(self):
        """Create temporary directories and files.

        """
        helpers.set_up()

    def test_main(self):
        """Test the main function.

        """
        # Test invoking with conflicting arguments.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "bound",
                "--theorem",
                "ula-bias",
                "--horizon",
                "10",
                "--gamma1",
                "0.1",
                "--gamma2",
                "0.01",
                "-s",
                "d=2",
            ])
        expected = [
            mock.call(),
            mock.call(
                "ERROR:",
                "--gamma2 cannot be passed with --schedule constant",
            ),
        ]
        self.assertEqual(mocked_print.mock_calls, expected)
        self.assertEqual(status, 1)

        # Test the tune command.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "tune",
                "--rule",
                "ula-convex",
                "--eps",
                "0.1",
                "-s",
                "d=2",
                "-s",
                "L=1",
                "-s",
                "W0_sq=1",
            ])
        expected = (
            HEADER
            + [mock.call("Tuning"), mock.call("------")]
            + report_line("ula-convex")
            + report_line("gamma", "0.025")
            + report_line("n", "400")
            + report_line("finite", "yes")
            + [mock.call()]
        )
        self.assertEqual(mocked_print.mock_calls, expected)
        self.assertEqual(status, 0)

        # Test the bound command, with an output directory.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "bound",
                "--theorem",
                "ula-bias",
                "--horizon",
                "10",
                "--gamma1",
                "0.1",
                "--set",
                "d=2",
                "--set",
                "L=1",
                "--set",
                "m=1",
                "--out",
                constants.OUT_PATH,
            ])
        expected = (
            HEADER
            + [
                mock.call(">> Output is written to", constants.OUT_PATH),
                mock.call(),
                mock.call("Bound"),
                mock.call("-----"),
            ]
            + report_line("ula-bias")
            + report_line("kl", "0.2")
            + report_line("tv", "0.632456")
            + report_line("w2_sq", "0.4")
            + report_line("constant step", "yes")
            + report_line("step within 1 over L", "yes")
            + [mock.call()]
        )
        self.assertEqual(mocked_print.mock_calls, expected)
        self.assertEqual(status, 0)
        path = os.path.join(
            constants.OUT_PATH,
            langevin_constants.REPORTS_FILE,
        )
        with open(path) as f:
            record = json.loads(f.readline())
        self.assertEqual(record["rule"], "ula-bias")
        self.assertTrue(record["valid"])

        # Test the bound command with measured variances.
        variances_path = os.path.join(
            constants.DIRECTORY_PATH,
            "variances.csv",
        )
        helpers.write_file(variances_path, "variance\n0.0\n2.0\n")
        with mock.patch("builtins.print") as _:
            status = core.main([
                EXECUTABLE,
                "bound",
                "--theorem",
                "ssgld-kl",
                "--horizon",
                "2",
                "--gamma1",
                "0.1",
                "--variances",
                variances_path,
                "-s",
                "d=2",
                "-s",
                "M=1",
                "-s",
                "W0_sq=1",
                "--out",
                constants.OUT_PATH,
            ])
        self.assertEqual(status, 0)
        with open(path) as f:
            record = json.loads(f.readlines()[-1])
        self.assertEqual(record["rule"], "ssgld-kl")
        self.assertTrue(record["inputs"]["measured_variances"])
        self.assertAlmostEqual(record["outputs"]["kl"], 2.6)

        # Test a variance series of the wrong length.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "bound",
                "--theorem",
                "ssgld-kl",
                "--horizon",
                "3",
                "--gamma1",
                "0.1",
                "--variances",
                variances_path,
                "-s",
                "d=2",
                "-s",
                "M=1",
                "-s",
                "W0_sq=1",
            ])
        self.assertEqual(status, 1)
        self.assertEqual(
            printed_text(mocked_print)[-1],
            "ERROR: Expected 3 variances, got shape (2,)",
        )

        # Test that a broken precondition is printed as a note.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "bound",
                "--theorem",
                "ula-bias",
                "--horizon",
                "10",
                "--schedule",
                "poly",
                "--gamma1",
                "0.1",
                "-s",
                "d=2",
                "-s",
                "L=1",
            ])
        self.assertEqual(status, 0)
        self.assertEqual(
            printed_text(mocked_print)[-1],
            ">> Precondition constant_step of ula-bias is not met",
        )

        # Test an anticipated failure.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "tune",
                "--rule",
                "ula-convex",
                "--eps",
                "0.1",
                "-s",
                "d=2",
            ])
        self.assertEqual(status, 1)
        self.assertEqual(mocked_print.mock_calls[:5], HEADER)
        self.assertEqual(mocked_print.mock_calls[5], mock.call())
        self.assertEqual(
            printed_text(mocked_print)[-1],
            "ERROR: Rule ula-convex needs the constant L",
        )

        # Test a configuration file which does not exist.
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "sample",
                "-c",
                constants.NON_EXISTENT_PATH,
            ])
        self.assertEqual(status, 1)
        self.assertTrue(
            printed_text(mocked_print)[-1].startswith("ERROR: Could not read"),
        )

    def test_main_benchmark(self):
        """Test the main function with the benchmark command.

        """
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "benchmark",
                "-c",
                constants.BENCHMARK_CONFIG_PATH,
                "-o",
                constants.OUT_PATH,
                "-q",
            ])
        self.assertEqual(status, 0)
        text = printed_text(mocked_print)
        self.assertIn("Target: quadratic", text)
        self.assertIn("Samplers: ULA, SPGLD", text)
        self.assertIn("Final mean absolute error", text)

        summary = pd.read_csv(os.path.join(
            constants.OUT_PATH,
            langevin_constants.SUMMARY_FILE,
        ))
        self.assertEqual(set(summary["sampler"]), {"ULA", "SPGLD"})
        self.assertEqual(summary["n"].max(), 200)

    def test_main_sample(self):
        """Test the main function with the sample command.

        """
        with mock.patch("builtins.print") as mocked_print:
            status = core.main([
                EXECUTABLE,
                "sample",
                "--config",
                constants.SAMPLE_CONFIG_PATH,
                "--out",
                constants.OUT_PATH,
                "--quiet",
            ])
        self.assertEqual(status, 0)
        text = printed_text(mocked_print)
        self.assertIn("Sampler: ULA", text)
        self.assertIn("Estimates", text)

        # Test the written files.
        estimates = pd.read_csv(os.path.join(
            constants.OUT_PATH,
            langevin_constants.ESTIMATES_FILE,
        ))
        self.assertEqual(
            list(estimates["functional"]),
            list(langevin_constants.DEFAULT_FUNCTIONALS),
        )
        trace = pd.read_csv(os.path.join(
            constants.OUT_PATH,
            langevin_constants.TRACE_FILE,
        ))
        self.assertEqual(list(trace.columns), ["k", "x_1", "x_2"])
        self.assertEqual(list(trace["k"]), [25, 50, 75, 100])
        with open(os.path.join(
            constants.OUT_PATH,
            langevin_constants.RUN_FILE,
        )) as f:
            run = json.load(f)
        self.assertEqual(run["config"]["sampler"]["seed"], 3)
        self.assertTrue(run["admissible"])

    def test_main_validate(self):
        """Test the main function with the validate command.

        """
        table = pd.DataFrame()

        # Test checks which all pass.
        checks = [("one-step", True, 0.5), ("bias", True, 0.25)]
        with mock.patch("builtins.print") as mocked_print:
            with mock.patch(
                "langevin.verification.run_validation",
            ) as mocked_run:
                mocked_run.return_value = (checks, table)
                status = core.main([EXECUTABLE, "validate", "-q"])
        self.assertEqual(status, 0)
        mocked_run.assert_called_once_with(out_dir=None, progress=False)
        self.assertIn("one-step 0.5 PASS", [
            " ".join(line.split()) for line in printed_text(mocked_print)
        ])

        # Test a failing check.
        checks = [("one-step", True, 0.5), ("tuning", False, -0.1)]
        with mock.patch("builtins.print") as mocked_print:
            with mock.patch(
                "langevin.verification.run_validation",
            ) as mocked_run:
                mocked_run.return_value = (checks, table)
                status = core.main([EXECUTABLE, "validate"])
        self.assertEqual(status, 1)
        self.assertEqual(
            mocked_print.mock_calls[-1],
            mock.call("ERROR: Failed checks:", "tuning"),
        )

    def test_run(self):
        """Test the run function.

        """
        with mock.patch("sys.argv", [EXECUTABLE, "tune", "--rule",
                                     "ula-convex", "--eps", "0.1", "-s",
                                     "d=1", "-s", "L=1", "-s", "W0_sq=1"]):
            with mock.patch("builtins.print"):
                with self.assertRaises(SystemExit) as context:
                    core.run()
        self.assertEqual(context.exception.code, 0)

    def test__check_argument_conflicts(self):
        """Test the _check_argument_conflicts function.

        """
        base = [
            EXECUTABLE,
            "bound",
            "--theorem",
            "ula-w2",
            "--horizon",
            "10",
            "--gamma1",
            "0.1",
        ]

        # Test no conflicts.
        args = core._parse_args(base)
        self.assertEqual(core._check_argument_conflicts(args), [])

        # Test two arguments which need a piecewise schedule.
        args = core._parse_args(
            base + ["--gamma2", "0.01", "--switch-step", "5"],
        )
        expected = [
            "--gamma2 cannot be passed with --schedule constant",
            "--switch-step cannot be passed with --schedule constant",
        ]
        self.assertEqual(core._check_argument_conflicts(args), expected)

        # Test a piecewise schedule without its second step size.
        args = core._parse_args(base + ["--schedule", "piecewise"])
        expected = ["--schedule piecewise needs --gamma2"]
        self.assertEqual(core._check_argument_conflicts(args), expected)

        # Test a complete piecewise schedule.
        args = core._parse_args(base + [
            "--schedule",
            "piecewise",
            "--gamma2",
            "0.01",
            "--switch-step",
            "5",
        ])
        self.assertEqual(core._check_argument_conflicts(args), [])

        # Test measured variances with a bound which takes none.
        args = core._parse_args(base + ["--variances", "variances.csv"])
        expected = ["--variances cannot be passed with --theorem ula-w2"]
        self.assertEqual(core._check_argument_conflicts(args), expected)

        # Test a command without schedule arguments.
        args = core._parse_args([EXECUTABLE, "validate"])
        self.assertEqual(core._check_argument_conflicts(args), [])

    def test__parse_args(self):
        """Test the _parse_args function.

        """
        # Test the tune command.
        actual = core._parse_args([
            EXECUTABLE,
            "tune",
            "--rule",
            "ula-convex",
            "--eps",
            "0.1",
            "-s",
            "d=2",
        ])
        expected = argparse.Namespace(
            command="tune",
            eps=0.1,
            out=None,
            quiet=False,
            rule="ula-convex",
            set=["d=2"],
        )
        self.assertEqual(actual, expected)

        # Test the sample command with shared options.
        actual = core._parse_args([
            EXECUTABLE,
            "sample",
            "-c",
            constants.SAMPLE_CONFIG_PATH,
            "-o",
            constants.OUT_PATH,
            "-q",
        ])
        expected = argparse.Namespace(
            command="sample",
            config=constants.SAMPLE_CONFIG_PATH,
            out=constants.OUT_PATH,
            quiet=True,
        )
        self.assertEqual(actual, expected)

        # Test --version without a command.
        output = io.StringIO
        with mock.patch("sys.stdout", new_callable=output) as mocked_stdout:
            # Stop stderr being displayed.
            with mock.patch("sys.stderr") as _:
                # Stop the test exiting before it can complete.
                with mock.patch("sys.exit") as _:
                    core._parse_args([EXECUTABLE, "--version"])
        actual = mocked_stdout.getvalue()
        self.assertRegex(actual, r"^Langevin \d+\.\d+\.\d+\n$")

        # Test an unknown rule.
        with mock.patch("sys.stderr") as _:
            with self.assertRaises(SystemExit):
                core._parse_args([
                    EXECUTABLE,
                    "tune",
                    "--rule",
                    "ula-fast",
                    "--eps",
                    "0.1",
                ])

    def test__print_argument_conflict_errors(self):
        """Test the _print_argument_conflict_errors function.

        """
        # Test a list with two error messages.
        with mock.patch("builtins.print") as mocked_print:
            core._print_argument_conflict_errors(
                ["Message one", "Message two"],
            )
        expected = [
            mock.call(),
            mock.call("ERROR:", "Message one"),
            mock.call("ERROR:", "Message two"),
        ]
        self.assertEqual(mocked_print.mock_calls, expected)

        # Test a list with no error messages.
        with mock.patch("builtins.print") as mocked_print:
            core._print_argument_conflict_errors([])
        expected = [
            mock.call(),
        ]
        self.assertEqual(mocked_print.mock_calls, expected)

    def test__problem_constants(self):
        """Test the _problem_constants function.

        """
        actual = core._problem_constants(["d=2", "L=1.5", "heuristic=yes"])
        expected = bounds.ProblemConstants(d=2, L=1.5, heuristic=True)
        self.assertEqual(actual, expected)

        # Test pairs which cannot be read.
        for pairs in (["d"], ["d=2", "x=1"], ["d=two"], ["L=1"]):
            with self.assertRaises(exceptions.ConfigError):
                core._problem_constants(pairs)

    def test__read_variances(self):
        """Test the _read_variances function.

        """
        path = os.path.join(constants.DIRECTORY_PATH, "variances.csv")
        helpers.write_file(path, "k,variance\n1,0.5\n2,0.25\n")
        actual = core._read_variances(path)
        self.assertEqual(actual.tolist(), [0.5, 0.25])

        # Test files which cannot be read.
        cases = [
            "k\n1\n",
            "variance\n0.5\n-1.0\n",
            "variance\n0.5\nabc\n",
            "",
        ]
        for text in cases:
            helpers.write_file(path, text)
            with self.assertRaises(exceptions.ConfigError):
                core._read_variances(path)
        with self.assertRaises(exceptions.ConfigError):
            core._read_variances(constants.NON_EXISTENT_PATH)

    def test__signal_handler(self):
        """Test the _signal_handler function.

        """
        # Test a keyboard interrupt signal.
        with mock.patch("builtins.print") as mocked_print:
            with mock.patch("sys.exit") as mocked_exit:
                mocked_exit.side_effect = print
                core._signal_handler(signal.SIGINT, None)
        expected = [
            mock.call(),
            mock.call(),
            mock.call(">> Keyboard interrupt signal received. Exiting."),
            mock.call(),
            mock.call(1),
        ]
        self.assertEqual(mocked_print.mock_calls, expected)

        # Test a termination signal.
        with mock.patch("builtins.print") as mocked_print:
            with mock.patch("sys.exit") as mocked_exit:
                mocked_exit.side_effect = print
                core._signal_handler(signal.SIGTERM, None)
        expected = [
            mock.call(),
            mock.call(),
            mock.call(">> Termination signal received. Exiting."),
            mock.call(),
            mock.call(1),
        ]
        self.assertEqual(mocked_print.mock_calls, expected)

    def tearDown(self):
        """Delete temporary directories and files.

        """
        helpers.tear_down()
