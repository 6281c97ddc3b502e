import os
import shutil

import numpy as np

import langevin.analytics as analytics
import langevin.model as model
from tests import constants


def quadratic_sum_model(rows=6, dim=2, a1=0.0, a2=0.0, seed=0):
    """Build a small finite-sum model with random centres.

    Returns
    -------
    QuadraticSumModel
        The model.

    """
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((rows, dim))
    return model.QuadraticSumModel(centers, a1=a1, a2=a2)


def random_law(rng, dim):
    """Draw a random non-degenerate Gaussian law.

    Parameters
    ----------
    rng : numpy.random.Generator
        The random stream.
    dim : int
        The dimension.

    Returns
    -------
    GaussianLaw
        The law.

    """
    A = rng.standard_normal((dim, dim))
    cov = A @ A.T / dim + 0.1 * np.eye(dim)
    return analytics.GaussianLaw(rng.standard_normal(dim), cov)


def set_up():
    """Create the testing directory and its fixture files.

    Any previous testing directory is removed first.

    Returns
    -------
    None

    """
    shutil.rmtree(constants.DIRECTORY_PATH, ignore_errors=True)
    os.makedirs(constants.DIRECTORY_PATH)

    fixtures = {
        constants.BAD_LABELS_CSV_PATH: constants.BAD_LABELS_CSV,
        constants.BENCHMARK_CONFIG_PATH: constants.BENCHMARK_CONFIG,
        constants.CONSTANT_FEATURE_CSV_PATH: constants.CONSTANT_FEATURE_CSV,
        constants.MALFORMED_CONFIG_PATH: constants.MALFORMED_CONFIG,
        constants.MISSING_CELL_CSV_PATH: constants.MISSING_CELL_CSV,
        constants.NO_LABEL_CSV_PATH: constants.NO_LABEL_CSV,
        constants.NON_NUMERIC_CSV_PATH: constants.NON_NUMERIC_CSV,
        constants.SAMPLE_CONFIG_PATH: constants.SAMPLE_CONFIG,
        constants.TOY_CSV_PATH: constants.TOY_CSV,
        constants.UNKNOWN_KEY_CONFIG_PATH: constants.UNKNOWN_KEY_CONFIG,
    }
    for path, text in fixtures.items():
        write_file(path, text)


def slow_tests_enabled():
    """Whether the long acceptance tests were requested."""
    return bool(os.environ.get(constants.SLOW_TESTS_VARIABLE))


def write_file(path, text):
    """Write text to a file, creating its directory if needed."""
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


def tear_down():
    """Delete the testing directory.

    Returns
    -------
    None

    """
    shutil.rmtree(constants.DIRECTORY_PATH, ignore_errors=True)
