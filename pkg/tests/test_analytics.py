import math
import unittest

import numpy as np

import langevin.analytics as analytics
import langevin.exceptions as exceptions
from tests import helpers


def uniform_ppf(t):
    """Return the quantile function of the uniform law on (0, 1)."""
    return t


class TestAnalytics(unittest.TestCase):
    """Tests for the analytics module.

    """

    def setUp(self):
        """Create a seeded random stream.

        """
        self.rng = np.random.default_rng(31)

    def random_hessian(self, dim):
        """Draw a random positive definite Hessian."""
        A = self.rng.standard_normal((dim, dim))
        return A @ A.T / dim + 0.5 * np.eye(dim)

    def test_averaged_kl_lower_bound(self):
        """Test the averaged_kl_lower_bound function.

        """
        H = self.random_hessian(2)
        target = analytics.target_law(H)

        # Test a single component.
        law = helpers.random_law(self.rng, 2)
        self.assertAlmostEqual(
            analytics.averaged_kl_lower_bound([law], [3.0], H),
            analytics.kl_gaussian(law, target),
        )

        # Test that the bound is below the convex upper bound.
        for _ in range(20):
            laws = [helpers.random_law(self.rng, 2) for _ in range(4)]
            weights = self.rng.random(4)
            weights = weights / np.sum(weights)
            upper = sum(
                w * analytics.kl_gaussian(law, target)
                for w, law in zip(weights, laws)
            )
            lower = analytics.averaged_kl_lower_bound(laws, weights, H)
            self.assertGreaterEqual(lower, 0.0)
            self.assertLessEqual(lower, upper + 1e-9)

    def test_empirical_sample(self):
        """Test the EmpiricalSample class.

        """
        # Test the shapes and uniform probabilities.
        sample = analytics.EmpiricalSample([1.0, 2.0, 3.0, 4.0])
        self.assertEqual(sample.dim, 1)
        self.assertEqual(sample.size, 4)
        np.testing.assert_allclose(sample.probabilities(), [0.25] * 4)

        # Test samples that are not valid.
        with self.assertRaises(exceptions.EmptySampleError):
            analytics.EmpiricalSample([])
        with self.assertRaises(exceptions.DimensionError):
            analytics.EmpiricalSample([1.0, 2.0], weights=[1.0])
        with self.assertRaises(exceptions.ModelError):
            analytics.EmpiricalSample([1.0, 2.0], weights=[0.3, 0.3])
        with self.assertRaises(exceptions.ModelError):
            analytics.EmpiricalSample([1.0, 2.0], weights=[1.5, -0.5])

    def test_entropy_flow_check(self):
        """Test the entropy_flow_check function.

        """
        for _ in range(100):
            dim = int(self.rng.integers(1, 4))
            mu = helpers.random_law(self.rng, dim)
            nu = helpers.random_law(self.rng, dim)
            gamma = self.rng.uniform(0.01, 2.0)
            self.assertGreaterEqual(
                analytics.entropy_flow_check(mu, nu, gamma),
                -1e-9,
            )

    def test_free_energy_gaussian(self):
        """Test the free_energy_gaussian function.

        """
        # Test the free energy gap against the direct divergence.
        for _ in range(100):
            dim = int(self.rng.integers(1, 5))
            H = self.random_hessian(dim)
            law = helpers.random_law(self.rng, dim)
            target = analytics.target_law(H)
            gap = (
                analytics.free_energy_gaussian(law, H)
                - analytics.free_energy_gaussian(target, H)
            )
            self.assertAlmostEqual(
                gap,
                analytics.kl_gaussian(law, target),
                delta=1e-9,
            )
            self.assertGreaterEqual(gap, -1e-12)

        # Test a degenerate law.
        self.assertEqual(
            analytics.free_energy_gaussian(analytics.point_mass([1.0]), 1.0),
            math.inf,
        )

    def test_gaussian_law(self):
        """Test the GaussianLaw class.

        """
        # Test that tiny negative eigenvalues are clamped.
        law = analytics.GaussianLaw(
            [0.0, 0.0],
            [[1.0, 1.0], [1.0, 1.0 - 1e-14]],
        )
        self.assertGreaterEqual(np.linalg.eigvalsh(law.cov)[0], -1e-12)

        # Test a scalar covariance.
        law = analytics.GaussianLaw(1.0, 2.0)
        np.testing.assert_array_equal(law.cov, [[2.0]])

        # Test laws that are not valid.
        with self.assertRaises(exceptions.DimensionError):
            analytics.GaussianLaw([0.0, 0.0], np.eye(3))
        with self.assertRaises(exceptions.ModelError):
            analytics.GaussianLaw([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
        with self.assertRaises(exceptions.ModelError):
            analytics.GaussianLaw([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_gaussian_w2_gap(self):
        """Test the gaussian_w2_gap function.

        """
        # Test the stationary bias in one dimension, where it is exact.
        stationary = analytics.ula_gaussian_stationary(1.0, 0.1)
        target = analytics.target_law(1.0)
        self.assertAlmostEqual(
            analytics.gaussian_w2_gap(1.0, 0.1, 0, 0.0),
            analytics.w2_gaussian(stationary, target),
        )

        # Test the contraction of the starting distance.
        self.assertAlmostEqual(
            analytics.gaussian_w2_gap(1.0, 0.1, 2, 1.0)
            - analytics.gaussian_w2_gap(1.0, 0.1, 2, 0.0),
            0.81,
        )

        # Test the errors.
        with self.assertRaises(exceptions.ModelError):
            analytics.gaussian_w2_gap([0.0, 1.0], 0.1, 1, 1.0)
        with self.assertRaises(exceptions.StepSizeError):
            analytics.gaussian_w2_gap(1.0, 2.0, 1, 1.0)

    def test_kl_gaussian(self):
        """Test the kl_gaussian function.

        """
        # Test a law against itself.
        law = helpers.random_law(self.rng, 3)
        self.assertAlmostEqual(analytics.kl_gaussian(law, law), 0.0)

        # Test the stationary law of ULA against its target.
        stationary = analytics.GaussianLaw([0.0], [[2 / 1.9]])
        target = analytics.GaussianLaw([0.0], [[1.0]])
        self.assertAlmostEqual(
            analytics.kl_gaussian(stationary, target),
            6.6914e-4,
            delta=1e-7,
        )

        # Test degenerate laws.
        point = analytics.point_mass([0.0])
        self.assertEqual(analytics.kl_gaussian(point, target), math.inf)
        with self.assertRaises(exceptions.ModelError):
            analytics.kl_gaussian(target, point)

        # Test a dimension mismatch.
        with self.assertRaises(exceptions.DimensionError):
            analytics.kl_gaussian(target, law)

    def test_one_step_gap_check(self):
        """Test the one_step_gap_check function.

        """
        # Test a start at the target.
        H = self.random_hessian(3)
        L = np.linalg.eigvalsh(H)[-1]
        report = analytics.one_step_gap_check(
            H,
            0.5 / L,
            analytics.target_law(H),
        )
        self.assertGreaterEqual(report["lhs"], 0.0)
        self.assertGreaterEqual(report["rhs"], 0.0)
        self.assertGreaterEqual(report["margin"], 0.0)

        # Test a shifted start on a standard target.
        mu0 = analytics.GaussianLaw([3.0, 0.0], np.eye(2))
        report = analytics.one_step_gap_check(np.eye(2), 0.5, mu0)
        kl = 0.5 * (2.5 + 2.25 - 2 - 2 * math.log(1.25))
        self.assertAlmostEqual(report["lhs"], kl)
        expected_rhs = 4.5 - (2.25 + 2 * (math.sqrt(1.25) - 1) ** 2) + 1.0
        self.assertAlmostEqual(report["rhs"], expected_rhs)
        self.assertGreater(report["margin"], 0.0)

        # Test that the energy bound is tight for the identity.
        self.assertAlmostEqual(report["energy_increase"], 1.0)
        self.assertAlmostEqual(report["energy_margin"], 0.0)
        self.assertLess(report["energy_identity_error"], 1e-12)

        # Test random starts and comparison laws.
        for _ in range(50):
            dim = int(self.rng.integers(1, 4))
            H = self.random_hessian(dim)
            L = np.linalg.eigvalsh(H)[-1]
            report = analytics.one_step_gap_check(
                H,
                self.rng.uniform(0.01, 1.0) / L,
                helpers.random_law(self.rng, dim),
                nu=helpers.random_law(self.rng, dim),
            )
            self.assertGreaterEqual(report["min_margin"], -1e-8)

        # Test a step size above 1/L.
        with self.assertRaises(exceptions.StepSizeError):
            analytics.one_step_gap_check(np.eye(2), 1.5, mu0)

    def test_pinsker_tv_bound(self):
        """Test the pinsker_tv_bound function.

        """
        self.assertEqual(analytics.pinsker_tv_bound(0.0), 0.0)
        self.assertAlmostEqual(analytics.pinsker_tv_bound(0.02), 0.2)
        self.assertEqual(analytics.pinsker_tv_bound(10.0), 1.0)

    def test_sqrtm_psd(self):
        """Test the sqrtm_psd function.

        """
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        root = analytics.sqrtm_psd(A)
        np.testing.assert_allclose(root @ root, A)
        np.testing.assert_allclose(
            analytics.sqrtm_psd(np.diag([4.0, 0.0])),
            np.diag([2.0, 0.0]),
        )

    def test_target_law(self):
        """Test the target_law function.

        """
        H = np.array([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(
            analytics.target_law(H).cov,
            np.linalg.inv(H),
        )
        with self.assertRaises(exceptions.ModelError):
            analytics.target_law([1.0, 0.0])

    def test_ula_gaussian_law(self):
        """Test the ula_gaussian_law function.

        """
        # Test zero steps.
        law = analytics.ula_gaussian_law(1.0, 0.1, 0, [10.0])
        np.testing.assert_allclose(law.mean, [10.0])
        np.testing.assert_allclose(law.cov, [[0.0]])

        # Test one step.
        law = analytics.ula_gaussian_law(1.0, 0.1, 1, [10.0])
        np.testing.assert_allclose(law.mean, [9.0])
        np.testing.assert_allclose(law.cov, [[0.2]])

        # Test many steps.
        law = analytics.ula_gaussian_law(1.0, 0.1, 1000, [10.0])
        np.testing.assert_allclose(law.cov, [[2 / 1.9]])

        # Test agreement with the affine recursion.
        H = self.random_hessian(3)
        gamma = 0.7 / np.linalg.eigvalsh(H)[-1]
        x0 = self.rng.standard_normal(3)
        path = analytics.ula_gaussian_path(H, [gamma] * 25, x0)
        for k, law in enumerate(path):
            closed = analytics.ula_gaussian_law(H, gamma, k, x0)
            np.testing.assert_allclose(closed.mean, law.mean, atol=1e-12)
            np.testing.assert_allclose(closed.cov, law.cov, atol=1e-12)

        # Test a flat direction, where the variance grows linearly.
        law = analytics.ula_gaussian_law([0.0, 1.0], 0.5, 4, [1.0, 1.0])
        np.testing.assert_allclose(law.mean, [1.0, 0.0625])
        self.assertAlmostEqual(law.cov[0, 0], 4.0)

        # Test a step size above 1/L.
        with self.assertRaises(exceptions.StepSizeError):
            analytics.ula_gaussian_law(2.0, 0.6, 1, [0.0])

    def test_ula_gaussian_stationary(self):
        """Test the ula_gaussian_stationary function.

        """
        # Test one dimension.
        law = analytics.ula_gaussian_stationary(1.0, 0.1)
        np.testing.assert_allclose(law.cov, [[2 / 1.9]])

        # Test a diagonal Hessian.
        law = analytics.ula_gaussian_stationary([1.0, 4.0], 0.1)
        np.testing.assert_allclose(law.cov, np.diag([2 / 1.9, 2 / 6.4]))

        # Test the vanishing step limit.
        law = analytics.ula_gaussian_stationary(4.0, 1e-9)
        self.assertAlmostEqual(law.cov[0, 0], 0.25)

        # Test that the law is a fixed point of the recursion.
        H = self.random_hessian(3)
        gamma = 0.5 / np.linalg.eigvalsh(H)[-1]
        law = analytics.ula_gaussian_stationary(H, gamma)
        moved = analytics.ula_transition(law, H, gamma)
        np.testing.assert_allclose(moved.cov, law.cov, atol=1e-12)

        # Test the errors.
        with self.assertRaises(exceptions.ModelError):
            analytics.ula_gaussian_stationary([0.0, 1.0], 0.1)
        with self.assertRaises(exceptions.StepSizeError):
            analytics.ula_gaussian_stationary(1.0, 2.0)

    def test_w2_empirical_1d(self):
        """Test the w2_empirical_1d function.

        """
        sample = analytics.EmpiricalSample(self.rng.standard_normal(50))

        # Test identical and shifted samples.
        self.assertEqual(analytics.w2_empirical_1d(sample, sample), 0.0)
        shifted = analytics.EmpiricalSample(sample.points[:, 0] - 2.5)
        self.assertAlmostEqual(analytics.w2_empirical_1d(sample, shifted), 2.5)

        # Test two-point samples.
        self.assertAlmostEqual(
            analytics.w2_empirical_1d(
                analytics.EmpiricalSample([0.0, 1.0]),
                analytics.EmpiricalSample([2.0, 1.0]),
            ),
            1.0,
        )

        # Test samples of different sizes.
        self.assertAlmostEqual(
            analytics.w2_empirical_1d(
                analytics.EmpiricalSample([0.0]),
                analytics.EmpiricalSample([0.0, 2.0]),
            ),
            math.sqrt(2.0),
        )

        # Test a sample which is not one-dimensional.
        with self.assertRaises(exceptions.DimensionError):
            analytics.w2_empirical_1d(
                analytics.EmpiricalSample(np.ones((3, 2))),
                sample,
            )

    def test_w2_gaussian(self):
        """Test the w2_gaussian function.

        """
        # Test the closed forms.
        law = helpers.random_law(self.rng, 3)
        self.assertAlmostEqual(
            analytics.w2_gaussian(law, law),
            0.0,
            delta=1e-5,
        )
        self.assertAlmostEqual(
            analytics.w2_gaussian(
                analytics.GaussianLaw([0.0], [[1.0]]),
                analytics.GaussianLaw([3.0], [[1.0]]),
            ),
            3.0,
        )
        self.assertAlmostEqual(
            analytics.w2_gaussian(
                analytics.GaussianLaw([0.0], [[0.25]]),
                analytics.GaussianLaw([0.0], [[1.0]]),
            ),
            0.5,
        )

        # Test symmetry and the triangle inequality on random laws.
        for _ in range(1000):
            a, b, c = (helpers.random_law(self.rng, 3) for _ in range(3))
            ab = analytics.w2_gaussian(a, b)
            self.assertAlmostEqual(ab, analytics.w2_gaussian(b, a), places=6)
            self.assertLessEqual(
                analytics.w2_gaussian(a, c),
                ab + analytics.w2_gaussian(b, c) + 1e-8,
            )

    def test_w2_to_quantiles_1d(self):
        """Test the w2_to_quantiles_1d function.

        """
        sample = analytics.EmpiricalSample([0.5])
        self.assertAlmostEqual(
            analytics.w2_to_quantiles_1d(sample, uniform_ppf),
            math.sqrt(1 / 12),
            delta=2e-3,
        )
        with self.assertRaises(exceptions.DimensionError):
            analytics.w2_to_quantiles_1d(
                analytics.EmpiricalSample(np.ones((3, 2))),
                uniform_ppf,
            )
