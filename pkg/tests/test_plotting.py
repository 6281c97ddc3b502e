import os
import unittest

import langevin.constants as langevin_constants
import langevin.harness as harness
import langevin.plotting as plotting
from tests import (
    constants,
    helpers,
)


class TestPlotting(unittest.TestCase):
    """Tests for the plotting module.

    """

    def setUp(self):
        """Create temporary directories and files.

        """
        helpers.set_up()

    def test_figure_size(self):
        """Test the figure_size function.

        """
        width, height = plotting.figure_size()
        self.assertEqual(width, plotting.FIGURE_WIDTH)
        self.assertAlmostEqual(height / width, 0.6180339887)
        self.assertEqual(plotting.figure_size(0.5)[0], width / 2)

    def test_plot_benchmark(self):
        """Test the plot_benchmark function.

        """
        config = harness.ExperimentConfig(
            target=harness.quadratic_target([1.0, 2.0]),
            samplers=(langevin_constants.ULA,),
            taus=(0.1, 0.5),
            replications=3,
            iterations=50,
            checkpoints=3,
            plots=False,
        )
        result = harness.run_experiment(config)
        paths = plotting.plot_benchmark(
            result.summary,
            result.errors,
            constants.OUT_PATH,
        )

        # Test that three figures are written per functional.
        self.assertEqual(
            len(paths),
            3 * len(langevin_constants.DEFAULT_FUNCTIONALS),
        )
        for path in paths:
            self.assertTrue(path.endswith(".svg"))
            with open(path) as f:
                self.assertIn("<svg", f.read())
        self.assertEqual(
            sorted(os.listdir(constants.OUT_PATH)),
            sorted(os.path.basename(path) for path in paths),
        )

        # Test that a second run writes identical files.
        with open(paths[0]) as f:
            first = f.read()
        plotting.plot_benchmark(
            result.summary,
            result.errors,
            constants.OUT_PATH,
        )
        with open(paths[0]) as f:
            self.assertEqual(f.read(), first)

    def test__cell_label(self):
        """Test the _cell_label function.

        """
        self.assertEqual(
            plotting._cell_label("SPGLD", 0.1, 30),
            "SPGLD tau=0.1 batch=30",
        )

    def tearDown(self):
        """Delete temporary directories and files.

        """
        helpers.tear_down()
