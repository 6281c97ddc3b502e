import dataclasses
import itertools

import numpy as np
from scipy import special

from langevin import (
    constants,
    exceptions,
)


@dataclasses.dataclass(frozen=True, eq=False)
class ExactOracle:
    """A deterministic oracle returning exact (sub)gradients.

    In smooth mode it returns grad U1; in subgradient mode grad U1 plus the
    designated subgradient of U2. Each draw costs one effective pass.

    """

    potential: object
    mode: str = constants.SMOOTH

    def __post_init__(self):
        _check_mode(self.mode)

    @property
    def dim(self):
        """int: The dimension of the space."""
        return self.potential.dim

    @property
    def passes_per_draw(self):
        """float: The effective passes consumed by one draw."""
        return 1.0

    def draw(self, x, rng):  # pylint: disable=unused-argument
        """Return the exact oracle value. No random numbers are used."""
        if self.mode == constants.SMOOTH:
            return self.potential.u1.grad(x)
        return self.potential.subgrad(x)


@dataclasses.dataclass(frozen=True, eq=False)
class MinibatchOracle:
    """A minibatch estimator of the posterior (sub)gradient.

    For a uniformly drawn subset Z of size batch,

        smooth:      (N / batch) sum_{n in Z} grad l_n(b) + 2 a2 b
        subgradient: (N / batch) sum_{n in Z} grad l_n(b) + 2 a2 b
                     + a1 sign(b)

    Attributes
    ----------
    model : LogisticModel or QuadraticSumModel
        A finite-sum model exposing data_gradient and add_prior_gradient.
    batch : int
        The subset size, between 1 and N.
    mode : str
        Either "smooth" or "subgradient".

    """

    model: object
    batch: int
    mode: str = constants.SUBGRADIENT

    def __post_init__(self):
        _check_mode(self.mode)
        if not 1 <= self.batch <= self.model.rows:
            msg = "Batch size must be between 1 and {}, got {}"
            raise exceptions.OracleError(
                msg.format(self.model.rows, self.batch),
            )
        object.__setattr__(self, "batch", int(self.batch))

    @property
    def dim(self):
        """int: The dimension of the space."""
        return self.model.dim

    @property
    def n_subsets(self):
        """int: The number of distinct subsets."""
        return special.comb(self.model.rows, self.batch, exact=True)

    @property
    def passes_per_draw(self):
        """float: The effective passes consumed by one draw."""
        return self.batch / self.model.rows

    @property
    def scale(self):
        """float: The unbiasedness factor N / batch."""
        return self.model.rows / self.batch

    def draw(self, x, rng):
        """Draw one realization of the oracle at x.

        A stack of points of shape (n_chains, d) gets one independent
        subset per chain.

        """
        # One chain.
        if x.ndim == 1:
            return self.evaluate(x, draw_subset(self, rng))
        return np.stack([
            self.evaluate(point, draw_subset(self, rng)) for point in x
        ])

    def evaluate(self, x, subset=None):
        """Evaluate the oracle at x for a fixed subset.

        A subset of None means every row, with scale 1.

        """
        scale = 1.0 if subset is None else self.scale
        gradient = scale * self.model.data_gradient(x, subset)
        return self.model.add_prior_gradient(gradient, x, self.mode)


@dataclasses.dataclass(frozen=True)
class RngStream:
    """A replayable random stream identified by a seed and a stream id.

    Streams with the same seed and distinct ids are independent by
    construction of the seed sequence.

    """

    seed: int
    stream_id: int = 0

    def generator(self):
        """Return a fresh generator positioned at the start of the stream."""
        sequence = np.random.SeedSequence(
            self.seed,
            spawn_key=(self.stream_id,),
        )
        return np.random.Generator(np.random.PCG64(sequence))


def cocoercivity_constant(o):
    """Compute the cocoercivity constant of the smooth minibatch oracle.

    The worst-case subset holds the batch rows of largest curvature, so

        L~ = (N / batch) * (sum of the batch largest row constants) + 2 a2.

    Parameters
    ----------
    o : MinibatchOracle
        The oracle.

    Returns
    -------
    float
        L~.

    """
    # The worst subset holds the batch rows of largest curvature.
    curvatures = np.sort(o.model.row_curvatures())[::-1]
    return o.scale * float(np.sum(curvatures[:o.batch])) + 2 * o.model.a2


def draw_oracle(o, beta, rng):
    """Draw one realization of the oracle.

    Parameters
    ----------
    o : MinibatchOracle or ExactOracle
        The oracle.
    beta : numpy.ndarray
        A finite point of shape (d,).
    rng : numpy.random.Generator
        The chain's random stream.

    Returns
    -------
    numpy.ndarray
        The oracle value. A minibatch draw evaluates exactly batch rows.

    """
    return o.draw(np.asarray(beta, dtype=float), rng)


def draw_subset(o, rng):
    """Draw a uniform subset of rows without replacement.

    numpy draws it with a partial Fisher-Yates shuffle. A full batch uses
    every row in order and consumes no random numbers.

    Returns
    -------
    numpy.ndarray or None
        The row indices, or None for the full batch.

    """
    if o.batch == o.model.rows:
        return None
    return rng.choice(o.model.rows, size=o.batch, replace=False)


def full_gradient(o, beta):
    """Return the exact mean of the oracle at beta."""
    return o.evaluate(np.asarray(beta, dtype=float), None)


def oracle_at(o, beta, subset):
    """Evaluate the oracle at beta for a fixed subset of rows.

    Parameters
    ----------
    o : MinibatchOracle
        The oracle.
    beta : numpy.ndarray
        A point of shape (d,).
    subset : array_like or None
        Exactly o.batch distinct row indices, or None for every row.

    Returns
    -------
    numpy.ndarray
        Theta(beta, subset).

    Raises
    ------
    OracleError
        If the subset does not hold o.batch distinct valid rows.

    """
    if subset is not None:
        subset = np.asarray(subset, dtype=int)
        distinct = np.unique(subset)
        valid = (
            subset.ndim == 1
            and len(distinct) == o.batch == len(subset)
            and distinct[0] >= 0
            and distinct[-1] < o.model.rows
        )
        if not valid:
            raise exceptions.OracleError(
                "A subset must hold {} distinct row indices".format(o.batch),
            )
    return o.evaluate(np.asarray(beta, dtype=float), subset)


def oracle_mean_bruteforce(o, beta):
    """Average the oracle over every subset of rows.

    Parameters
    ----------
    o : MinibatchOracle
        The oracle.
    beta : numpy.ndarray
        A point of shape (d,).

    Returns
    -------
    numpy.ndarray
        The exact mean, which equals the full (sub)gradient.

    Raises
    ------
    OracleError
        If there are more subsets than constants.MAX_SUBSETS.

    """
    values = _all_oracle_values(o, beta)
    return np.sum(values, axis=0) / len(values)


def variance_at(o, beta, n_samples, rng):
    """Estimate the oracle variance at a point by Monte Carlo.

    The variance is E|Theta(beta, Z) - E Theta(beta, Z)|^2, centred at the
    exact oracle mean.

    Parameters
    ----------
    o : MinibatchOracle
        The oracle.
    beta : numpy.ndarray
        A point of shape (d,).
    n_samples : int
        The number of draws, at least 2.
    rng : numpy.random.Generator
        The random stream.

    Returns
    -------
    tuple of float
        The estimate and its standard error.

    Raises
    ------
    OracleError
        If n_samples is less than 2.

    """
    if n_samples < 2:
        raise exceptions.OracleError("At least 2 samples are needed")

    beta = np.asarray(beta, dtype=float)
    # Squared deviations from the exact mean.
    mean = full_gradient(o, beta)
    deviations = np.array([
        np.sum((o.draw(beta, rng) - mean) ** 2) for _ in range(n_samples)
    ])
    estimate = float(np.mean(deviations))
    standard_error = float(np.std(deviations, ddof=1) / np.sqrt(n_samples))

    return estimate, standard_error


def variance_bruteforce(o, beta):
    """Compute the oracle variance at a point exactly by enumeration.

    Raises
    ------
    OracleError
        If there are more subsets than constants.MAX_SUBSETS.

    """
    values = _all_oracle_values(o, beta)
    mean = np.sum(values, axis=0) / len(values)
    return float(np.mean(np.sum((values - mean) ** 2, axis=1)))


def _all_oracle_values(o, beta):
    """Evaluate the oracle on every subset, guarding against blow-up."""
    if o.n_subsets > constants.MAX_SUBSETS:
        msg = "C({}, {}) = {:,} subsets exceeds the limit of {:,}"
        raise exceptions.OracleError(msg.format(
            o.model.rows,
            o.batch,
            o.n_subsets,
            constants.MAX_SUBSETS,
        ))

    beta = np.asarray(beta, dtype=float)
    # Subsets in lexicographic order.
    subsets = itertools.combinations(range(o.model.rows), o.batch)
    return np.array([o.evaluate(beta, np.array(s)) for s in subsets])


def _check_mode(mode):
    """Raise an OracleError for an unknown oracle mode."""
    if mode not in (constants.SMOOTH, constants.SUBGRADIENT):
        raise exceptions.OracleError("Unknown oracle mode {}".format(mode))
