import unittest

import numpy as np

import langevin.constants as constants
import langevin.exceptions as exceptions
import langevin.model as model
import langevin.oracles as oracles
from tests import helpers


class TestOracles(unittest.TestCase):
    """Tests for the oracles module.

    """

    def setUp(self):
        """Create a small logistic model and a random stream.

        """
        self.rng = np.random.default_rng(7)
        X = self.rng.standard_normal((6, 2))
        Y = np.array([0.0, 1.0, 1.0, 0.0, 1.0, 0.0])
        self.logistic = model.LogisticModel(X, Y, a1=0.5, a2=0.2)
        self.beta = np.array([0.3, -0.8])

    def test_cocoercivity_constant(self):
        """Test the cocoercivity_constant function.

        """
        o = oracles.MinibatchOracle(self.logistic, 2, constants.SMOOTH)
        L_tilde = oracles.cocoercivity_constant(o)

        # Test the worst-case subset formula.
        curvatures = np.sort(self.logistic.row_curvatures())
        expected = 3 * (curvatures[-1] + curvatures[-2]) + 0.4
        self.assertAlmostEqual(L_tilde, expected)

        # Test cocoercivity on sampled points and subsets.
        for _ in range(200):
            x = 2 * self.rng.standard_normal(2)
            y = 2 * self.rng.standard_normal(2)
            subset = oracles.draw_subset(o, self.rng)
            difference = oracles.oracle_at(o, x, subset) - oracles.oracle_at(
                o,
                y,
                subset,
            )
            self.assertGreaterEqual(
                difference @ (x - y) + 1e-12,
                difference @ difference / L_tilde,
            )

    def test_draw_oracle(self):
        """Test the draw_oracle function.

        """
        # Test that a full batch is the exact gradient.
        o = oracles.MinibatchOracle(self.logistic, 6)
        p = model.logistic_potential(self.logistic)
        _, _, sub_grad = model.eval_composite(p, self.beta)
        np.testing.assert_allclose(
            oracles.draw_oracle(o, self.beta, self.rng),
            sub_grad,
        )

        # Test that a single-row dataset ignores the stream.
        single = model.LogisticModel([[1.0, 2.0]], [1.0], a1=1.0)
        o = oracles.MinibatchOracle(single, 1)
        first = oracles.draw_oracle(o, self.beta, np.random.default_rng(1))
        second = oracles.draw_oracle(o, self.beta, np.random.default_rng(2))
        np.testing.assert_array_equal(first, second)

        # Test a subsample by replaying the seeded subset.
        o = oracles.MinibatchOracle(self.logistic, 2)
        stream = oracles.RngStream(11)
        subset = oracles.draw_subset(o, stream.generator())
        i, j = subset
        X, Y = self.logistic.X, self.logistic.Y
        row_gradient = [
            (1 / (1 + np.exp(-X[n] @ self.beta)) - Y[n]) * X[n]
            for n in (i, j)
        ]
        expected = (
            3 * (row_gradient[0] + row_gradient[1])
            + 0.4 * self.beta
            + 0.5 * np.sign(self.beta)
        )
        np.testing.assert_allclose(
            oracles.draw_oracle(o, self.beta, stream.generator()),
            expected,
        )

        # Test that a batch larger than N is rejected.
        with self.assertRaises(exceptions.OracleError):
            oracles.MinibatchOracle(self.logistic, 7)

        # Test that an unknown mode is rejected.
        with self.assertRaises(exceptions.OracleError):
            oracles.MinibatchOracle(self.logistic, 2, "exact")

    def test_exact_oracle(self):
        """Test the ExactOracle class.

        """
        p = model.logistic_potential(self.logistic)

        # Test both modes.
        smooth = oracles.ExactOracle(p, constants.SMOOTH)
        np.testing.assert_allclose(
            smooth.draw(self.beta, None),
            p.u1.grad(self.beta),
        )
        subgradient = oracles.ExactOracle(p, constants.SUBGRADIENT)
        np.testing.assert_allclose(
            subgradient.draw(self.beta, None),
            p.subgrad(self.beta),
        )
        self.assertEqual(smooth.passes_per_draw, 1.0)

    def test_oracle_at(self):
        """Test the oracle_at function.

        """
        o = oracles.MinibatchOracle(self.logistic, 2)

        # Test subsets that are not valid.
        for subset in ([0], [1, 1], [0, 6], [-1, 2]):
            with self.assertRaises(exceptions.OracleError):
                oracles.oracle_at(o, self.beta, subset)

        # Test that the full set is the full gradient.
        np.testing.assert_allclose(
            oracles.oracle_at(o, self.beta, None),
            oracles.full_gradient(o, self.beta),
        )

    def test_oracle_mean_bruteforce(self):
        """Test the oracle_mean_bruteforce function.

        """
        # Test unbiasedness for every batch size and both modes.
        for mode in (constants.SMOOTH, constants.SUBGRADIENT):
            for batch in range(1, 7):
                o = oracles.MinibatchOracle(self.logistic, batch, mode)
                np.testing.assert_allclose(
                    oracles.oracle_mean_bruteforce(o, self.beta),
                    oracles.full_gradient(o, self.beta),
                    rtol=0,
                    atol=1e-12,
                )

        # Test single-term estimates on quadratic data terms.
        quadratic = helpers.quadratic_sum_model(rows=4, dim=3)
        o = oracles.MinibatchOracle(quadratic, 1)
        beta = np.array([1.0, -1.0, 0.5])
        expected = 4 * beta - np.sum(quadratic.centers, axis=0)
        np.testing.assert_allclose(
            oracles.oracle_mean_bruteforce(o, beta),
            expected,
            rtol=0,
            atol=1e-12,
        )

        # Test the combinatorial guard.
        big = helpers.quadratic_sum_model(rows=40, dim=1)
        o = oracles.MinibatchOracle(big, 20)
        with self.assertRaises(exceptions.OracleError):
            oracles.oracle_mean_bruteforce(o, np.zeros(1))

    def test_rng_stream(self):
        """Test the RngStream class.

        """
        # Test that a stream replays.
        first = oracles.RngStream(5, 3).generator().standard_normal(10)
        second = oracles.RngStream(5, 3).generator().standard_normal(10)
        np.testing.assert_array_equal(first, second)

        # Test that distinct stream ids differ.
        other = oracles.RngStream(5, 4).generator().standard_normal(10)
        self.assertFalse(np.array_equal(first, other))

    def test_variance_at(self):
        """Test the variance_at function.

        """
        o = oracles.MinibatchOracle(self.logistic, 2)

        # Test agreement with the exact variance.
        exact = oracles.variance_bruteforce(o, self.beta)
        estimate, standard_error = oracles.variance_at(
            o,
            self.beta,
            4000,
            oracles.RngStream(0).generator(),
        )
        self.assertLess(abs(estimate - exact), 3 * standard_error)

        # Test a full batch.
        full = oracles.MinibatchOracle(self.logistic, 6)
        estimate, standard_error = oracles.variance_at(
            full,
            self.beta,
            10,
            self.rng,
        )
        self.assertEqual(estimate, 0.0)
        self.assertEqual(standard_error, 0.0)

        # Test too few samples.
        with self.assertRaises(exceptions.OracleError):
            oracles.variance_at(o, self.beta, 1, self.rng)

    def test_variance_bruteforce(self):
        """Test the variance_bruteforce function.

        """
        # Test that the variance vanishes for a full batch.
        o = oracles.MinibatchOracle(self.logistic, 6)
        self.assertAlmostEqual(oracles.variance_bruteforce(o, self.beta), 0.0)

        # Test identical rows.
        twins = model.LogisticModel([[1.0, 2.0], [1.0, 2.0]], [1.0, 1.0])
        o = oracles.MinibatchOracle(twins, 1)
        self.assertAlmostEqual(oracles.variance_bruteforce(o, self.beta), 0.0)

        # Test that the variance does not grow with the batch size.
        variances = [
            oracles.variance_bruteforce(
                oracles.MinibatchOracle(self.logistic, batch),
                self.beta,
            )
            for batch in range(1, 7)
        ]
        for larger, smaller in zip(variances[1:], variances[:-1]):
            self.assertLessEqual(larger, smaller + 1e-12)
