"""Closed-form Gaussian laws of ULA and divergences between laws.

Every law is parameterized by its mean and covariance, and every target
by the Hessian H of its potential x.Hx / 2, so that the target is
N(0, H^-1). Functionals follow the free energy decomposition
F = H + E, where H(mu) is the integral of log(density) against mu and
E(mu) the integral of the potential.

"""
import dataclasses
import math

import numpy as np
from scipy import linalg

from langevin import (
    constants,
    exceptions,
    model,
)


@dataclasses.dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """A finite, possibly weighted, sample of points.

    Attributes
    ----------
    points : numpy.ndarray
        Shape (n,) or (n, d). Stored as (n, d).
    weights : numpy.ndarray or None
        Non-negative weights summing to 1. Uniform when None.

    """

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, np.newaxis]
        if points.ndim != 2:
            raise exceptions.DimensionError("Points must be (n,) or (n, d)")
        if len(points) == 0:
            raise exceptions.EmptySampleError("The sample has no points")
        object.__setattr__(self, "points", points)

        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float)
            if weights.shape != (len(points),):
                raise exceptions.DimensionError(
                    "Expected {} weights, got shape {}".format(
                        len(points),
                        weights.shape,
                    ),
                )
            if np.any(weights < 0):
                raise exceptions.ModelError("Weights must be non-negative")
            if abs(math.fsum(weights) - 1) > constants.CHECK_TOLERANCE:
                raise exceptions.ModelError("Weights must sum to 1")
            object.__setattr__(self, "weights", weights)

    @property
    def dim(self):
        """int: The dimension of the points."""
        return self.points.shape[1]

    @property
    def size(self):
        """int: The number of points."""
        return len(self.points)

    def probabilities(self):
        """Return the weights, uniform when none were given."""
        if self.weights is None:
            return np.full(self.size, 1.0 / self.size)
        return self.weights


@dataclasses.dataclass(frozen=True, eq=False)
class GaussianLaw:
    """A Gaussian law, possibly degenerate.

    The covariance is symmetrized, and eigenvalues down to
    -constants.EIGENVALUE_TOLERANCE are clamped at 0.

    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.array(self.mean, dtype=float))
        cov = np.array(self.cov, dtype=float)
        if cov.ndim == 0:
            cov = cov.reshape(1, 1)
        d = len(mean)
        if mean.ndim != 1 or cov.shape != (d, d):
            raise exceptions.DimensionError(
                "Mean of shape {} does not match covariance of shape {}"
                .format(mean.shape, cov.shape),
            )
        if d > constants.MAX_DENSE_DIM:
            raise exceptions.DimensionError(
                "Dense analytics are limited to dimension {}".format(
                    constants.MAX_DENSE_DIM,
                ),
            )

        scale = max(1.0, float(np.max(np.abs(cov))))
        tolerance = constants.EIGENVALUE_TOLERANCE * scale
        if np.max(np.abs(cov - cov.T)) > tolerance:
            raise exceptions.ModelError("Covariance must be symmetric")
        cov = (cov + cov.T) / 2

        if not _is_diagonal(cov):
            values, vectors = linalg.eigh(cov)
            if values[0] < -tolerance:
                raise exceptions.ModelError("Covariance must be PSD")
            if values[0] < 0:
                cov = (vectors * np.maximum(values, 0)) @ vectors.T
        else:
            values = np.diagonal(cov)
            if np.min(values) < -tolerance:
                raise exceptions.ModelError("Covariance must be PSD")
            cov = np.diag(np.maximum(values, 0))

        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        """int: The dimension of the space."""
        return len(self.mean)


def averaged_kl_lower_bound(laws, weights, H):
    """Bound KL(nu | pi) from below for a mixture nu of Gaussian laws.

    Two lower bounds are available in closed form: the KL divergence of
    the Gaussian with nu's first two moments, and
    sum_k w_k KL(mu_k | pi) - Shannon(w). The larger one is returned.

    Parameters
    ----------
    laws : iterable of GaussianLaw
        The mixture components.
    weights : iterable of float
        Non-negative component weights, normalized here.
    H : array_like
        The Hessian of the target.

    Returns
    -------
    float
        A lower bound on KL(nu | pi), at least 0.

    """
    target = target_law(H)
    d = target.dim

    weights = np.asarray(list(weights), dtype=float)
    weights = weights / math.fsum(weights)

    first = np.zeros(d)
    second = np.zeros((d, d))
    mixed = 0.0
    for weight, law in zip(weights, laws):
        first += weight * law.mean
        second += weight * (law.cov + np.outer(law.mean, law.mean))
        mixed += weight * kl_gaussian(law, target)

    positive = weights[weights > 0]
    shannon = -float(np.sum(positive * np.log(positive)))

    matched = GaussianLaw(first, second - np.outer(first, first))
    return max(kl_gaussian(matched, target), mixed - shannon, 0.0)


def entropy_flow_check(mu, nu, gamma):
    """Compute the margin of the heat-flow entropy inequality.

        2 gamma (H(mu T) - H(nu)) <= W2^2(mu, nu) - W2^2(mu T, nu)

    where mu T is mu after a heat step of length gamma.

    Returns
    -------
    float
        Right side minus left side.

    """
    moved = heat_step_law(mu, gamma)
    lhs = 2 * gamma * (entropy_functional(moved) - entropy_functional(nu))
    rhs = _w2_squared(mu, nu) - _w2_squared(moved, nu)
    return rhs - lhs


def entropy_functional(law):
    """Return H(law) = -log((2 pi e)^d det C) / 2, +inf when C is singular."""
    values = _eigenvalues(law.cov)
    if values[0] <= 0:
        return math.inf
    d = law.dim
    return -0.5 * (d * math.log(2 * math.pi * math.e) + np.sum(np.log(values)))


def free_energy_gaussian(law, H):
    """Return the free energy E(law) + H(law) for the potential x.Hx / 2."""
    return potential_energy(law, H) + entropy_functional(law)


def gaussian_w2_gap(H, gamma, k, w0):
    """Bound W2(mu0 R^k, pi) by contraction plus the stationary bias.

        (1 - m gamma)^k w0 + sqrt(d / m) ((1 - gamma L / 2)^(-1/2) - 1)

    Parameters
    ----------
    H : array_like
        The Hessian of the target, positive definite.
    gamma : float
        The constant step size, below 2 / L.
    k : int
        The number of steps.
    w0 : float
        W2(mu0, pi).

    Returns
    -------
    float
        The bound.

    Raises
    ------
    ModelError
        If H is singular.
    StepSizeError
        If gamma L >= 2.

    """
    values, _ = _spectrum(H)
    m, L = values[0], values[-1]
    if m <= constants.EIGENVALUE_TOLERANCE:
        raise exceptions.ModelError("The target must be strongly convex")
    if gamma * L >= 2:
        raise exceptions.StepSizeError("Step size must be below 2/L")
    bias = math.sqrt(len(values) / m) * ((1 - gamma * L / 2) ** -0.5 - 1)
    return (1 - m * gamma) ** k * w0 + bias


def gradient_step_law(law, H, gamma):
    """Push a law through the gradient step x -> (I - gamma H) x."""
    A = np.eye(law.dim) - gamma * model.hessian_matrix(H)
    return GaussianLaw(A @ law.mean, A @ law.cov @ A.T)


def heat_step_law(law, gamma):
    """Push a law through the heat step x -> x + sqrt(2 gamma) G."""
    return GaussianLaw(law.mean, law.cov + 2 * gamma * np.eye(law.dim))


def kl_gaussian(a, b):
    """Compute KL(a | b) between Gaussian laws.

    Parameters
    ----------
    a : GaussianLaw
        The first law.
    b : GaussianLaw
        The second law, non-degenerate.

    Returns
    -------
    float
        The divergence, +inf when a is degenerate.

    Raises
    ------
    DimensionError
        If the dimensions differ.
    ModelError
        If b is degenerate.

    """
    _check_dims(a, b)
    values, vectors = linalg.eigh(b.cov)
    if values[0] <= 0:
        raise exceptions.ModelError("KL needs a non-degenerate second law")
    a_values = _eigenvalues(a.cov)
    if a_values[0] <= 0:
        return math.inf

    b_inverse = (vectors / values) @ vectors.T
    shift = b.mean - a.mean
    trace = float(np.sum(b_inverse * a.cov))
    quadratic = float(shift @ b_inverse @ shift)
    log_ratio = float(np.sum(np.log(values)) - np.sum(np.log(a_values)))
    return max(0.0, 0.5 * (trace + quadratic - a.dim + log_ratio))


def one_step_gap_check(H, gamma, mu0, nu=None):
    """Verify the one-step inequalities of ULA on a Gaussian target.

    With pi = N(0, H^-1), m and L the extreme eigenvalues of H and R the
    ULA kernel, the checks are

        free energy:   2 gamma KL(mu0 R | pi)
                           <= (1 - m gamma) W2^2(mu0, pi)
                              - W2^2(mu0 R, pi) + 2 gamma^2 L d
        energy:        E(mu0 T) - E(mu0) = gamma tr(H) <= L d gamma
        entropy flow:  entropy_flow_check(mu0, nu, gamma) >= 0
        gradient step: 2 gamma (E(mu0 S) - E(nu))
                           <= (1 - m gamma) W2^2(mu0, nu) - W2^2(mu0 S, nu)
                              - gamma^2 (1 - gamma L) int |grad U|^2 dmu0

    Parameters
    ----------
    H : array_like
        The Hessian of the target, positive definite.
    gamma : float
        The step size, in (0, 1/L].
    mu0 : GaussianLaw
        The starting law.
    nu : GaussianLaw, optional
        The comparison law of the entropy and gradient steps. The default
        is pi.

    Returns
    -------
    dict
        The terms and margins of every check, and "min_margin".

    Raises
    ------
    BoundViolationError
        If a margin is below -constants.CHECK_TOLERANCE, relative to the
        size of the terms, or the energy identity fails.
    StepSizeError
        If gamma is outside (0, 1/L].

    """
    H = model.hessian_matrix(H)
    values, _ = _spectrum(H)
    m, L = values[0], values[-1]
    d = len(values)
    _check_step(gamma, L)

    target = target_law(H)
    nu = target if nu is None else nu
    moved = ula_transition(mu0, H, gamma)

    lhs = 2 * gamma * kl_gaussian(moved, target)
    rhs = (
        (1 - m * gamma) * _w2_squared(mu0, target)
        - _w2_squared(moved, target)
        + 2 * gamma ** 2 * L * d
    )

    heated = heat_step_law(mu0, gamma)
    energy_increase = potential_energy(heated, H) - potential_energy(mu0, H)
    energy_identity = gamma * float(np.trace(H))

    stepped = gradient_step_law(mu0, H, gamma)
    squared_gradient = (
        float(mu0.mean @ H @ H @ mu0.mean) + float(np.sum((H @ H) * mu0.cov))
    )
    gradient_lhs = 2 * gamma * (
        potential_energy(stepped, H) - potential_energy(nu, H)
    )
    gradient_rhs = (
        (1 - m * gamma) * _w2_squared(mu0, nu)
        - _w2_squared(stepped, nu)
        - gamma ** 2 * (1 - gamma * L) * squared_gradient
    )

    report = {
        "gamma": gamma,
        "lhs": lhs,
        "rhs": rhs,
        "margin": rhs - lhs,
        "energy_increase": energy_increase,
        "energy_identity_error": abs(energy_increase - energy_identity),
        "energy_margin": L * d * gamma - energy_increase,
        "entropy_margin": entropy_flow_check(mu0, nu, gamma),
        "gradient_margin": gradient_rhs - gradient_lhs,
    }
    report["min_margin"] = min(
        report["margin"],
        report["energy_margin"],
        report["entropy_margin"],
        report["gradient_margin"],
    )

    size = max(1.0, abs(lhs), abs(rhs), abs(gradient_lhs), abs(gradient_rhs))
    failed = (
        report["min_margin"] < -constants.CHECK_TOLERANCE * size
        or report["energy_identity_error"] > 1e-10 * max(1.0, energy_identity)
    )
    if failed:
        raise exceptions.BoundViolationError(
            "One-step inequality violated at gamma = {}".format(gamma),
            inputs={"gamma": gamma, "mu0": mu0, "report": report},
        )

    return report


def pinsker_tv_bound(kl):
    """Bound the total variation distance by sqrt(2 KL), clamped at 1."""
    # Parameter check.
    assert kl >= 0

    return min(1.0, math.sqrt(2 * kl))


def point_mass(x0):
    """Return the degenerate law at x0."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    return GaussianLaw(x0, np.zeros((len(x0), len(x0))))


def potential_energy(law, H):
    """Return E(law) = (m.Hm + tr(HC)) / 2 for the potential x.Hx / 2."""
    H = model.hessian_matrix(H)
    return 0.5 * (float(law.mean @ H @ law.mean) + float(np.sum(H * law.cov)))


def sqrtm_psd(A):
    """Return the PSD square root of a symmetric PSD matrix.

    Eigenvalues are clamped at 0 before taking roots.

    """
    A = np.asarray(A, dtype=float)
    if _is_diagonal(A):
        return np.diag(np.sqrt(np.maximum(np.diagonal(A), 0)))
    values, vectors = linalg.eigh((A + A.T) / 2)
    return (vectors * np.sqrt(np.maximum(values, 0))) @ vectors.T


def target_law(H):
    """Return the target N(0, H^-1) of the potential x.Hx / 2.

    Raises
    ------
    ModelError
        If H is singular.

    """
    values, vectors = _spectrum(H)
    if values[0] <= constants.EIGENVALUE_TOLERANCE:
        raise exceptions.ModelError("The target needs a non-singular Hessian")
    return GaussianLaw(np.zeros(len(values)), _compose(1 / values, vectors))


def ula_gaussian_law(H, gamma, k, x0):
    """Compute the exact law of the k-th ULA iterate started at x0.

    Along each eigenvector of H with eigenvalue h, the mean is scaled by
    (1 - gamma h)^k and the variance is 2 gamma sum_{i<k} (1 - gamma h)^{2i}.

    Parameters
    ----------
    H : array_like
        The Hessian of the potential.
    gamma : float
        The step size, in (0, 1/L].
    k : int
        The number of steps, at least 0.
    x0 : array_like
        The starting point.

    Returns
    -------
    GaussianLaw
        The law of X_k.

    Raises
    ------
    ModelError
        If H is not symmetric PSD.
    StepSizeError
        If gamma is outside (0, 1/L].

    """
    # Parameter check.
    assert k >= 0

    values, vectors = _spectrum(H)
    _check_step(gamma, values[-1])

    contraction = 1 - gamma * values
    ratio = contraction ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        series = np.where(
            np.isclose(ratio, 1.0, rtol=0, atol=1e-15),
            float(k),
            (1 - ratio ** k) / (1 - ratio),
        )

    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    mean = _compose(contraction ** k, vectors) @ x0
    return GaussianLaw(mean, _compose(2 * gamma * series, vectors))


def ula_gaussian_path(H, gammas, start):
    """Generate the exact laws of an inhomogeneous ULA chain.

    Parameters
    ----------
    H : array_like
        The Hessian of the potential.
    gammas : iterable of float
        gamma_1, gamma_2, ... in (0, 1/L].
    start : GaussianLaw or array_like
        The starting law, or a starting point.

    Yields
    ------
    GaussianLaw
        The laws of X_0, X_1, ...

    """
    H = model.hessian_matrix(H)
    L = _spectrum(H)[0][-1]
    law = start if isinstance(start, GaussianLaw) else point_mass(start)
    yield law
    for gamma in gammas:
        _check_step(gamma, L)
        law = ula_transition(law, H, gamma)
        yield law


def ula_gaussian_stationary(H, gamma):
    """Compute the stationary law of ULA with a constant step size.

    Along each eigenvector of H with eigenvalue h the stationary variance
    is 2 / (h (2 - gamma h)).

    Raises
    ------
    ModelError
        If H is singular.
    StepSizeError
        If gamma is not positive or gamma >= 2 / L.

    """
    values, vectors = _spectrum(H)
    if values[0] <= constants.EIGENVALUE_TOLERANCE:
        raise exceptions.ModelError("A flat direction has no stationary law")
    if not gamma > 0 or gamma * values[-1] >= 2:
        raise exceptions.StepSizeError(
            "ULA diverges for step size {}".format(gamma),
        )
    variances = 2 / (values * (2 - gamma * values))
    return GaussianLaw(np.zeros(len(values)), _compose(variances, vectors))


def ula_transition(law, H, gamma):
    """Push a law through one ULA step, a gradient step then a heat step."""
    return heat_step_law(gradient_step_law(law, H, gamma), gamma)


def w2_empirical_1d(s1, s2):
    """Compute the exact W2 distance between two 1-D empirical measures.

    The optimal coupling matches quantiles, so with both cumulative weight
    sequences merged, W2^2 is the sum over merged intervals of the interval
    length times the squared difference of the matched points.

    Raises
    ------
    DimensionError
        If a sample is not 1-D.

    """
    if s1.dim != 1 or s2.dim != 1:
        raise exceptions.DimensionError("Only 1-D samples are supported")

    x1, c1 = _sorted_quantiles(s1)
    x2, c2 = _sorted_quantiles(s2)

    breaks = np.union1d(c1, c2)
    breaks = breaks[(breaks > 0) & (breaks <= 1)]
    lengths = np.diff(np.concatenate([[0.0], breaks]))
    middles = breaks - lengths / 2

    i1 = np.minimum(np.searchsorted(c1, middles), len(x1) - 1)
    i2 = np.minimum(np.searchsorted(c2, middles), len(x2) - 1)
    return math.sqrt(math.fsum(lengths * (x1[i1] - x2[i2]) ** 2))


def w2_gaussian(a, b):
    """Compute the W2 distance between two Gaussian laws.

        W2^2 = |m_a - m_b|^2
               + tr(C_a + C_b - 2 (C_b^1/2 C_a C_b^1/2)^1/2)

    Diagonal covariances use the per-coordinate formula.

    Raises
    ------
    DimensionError
        If the dimensions differ.

    """
    return math.sqrt(_w2_squared(a, b))


def w2_to_quantiles_1d(sample, ppf, nodes=16):
    """Compute W2 between a 1-D empirical measure and a continuous law.

    The integral of (Q_sample(t) - ppf(t))^2 over (0, 1) is taken with a
    midpoint rule of the given number of nodes on every atom's interval.

    Parameters
    ----------
    sample : EmpiricalSample
        A 1-D sample.
    ppf : callable
        The quantile function of the continuous law, vectorized.
    nodes : int, optional
        Midpoint nodes per atom. The default is 16.

    Returns
    -------
    float
        The distance.

    Raises
    ------
    DimensionError
        If the sample is not 1-D.

    """
    # Parameter check.
    assert nodes >= 1

    if sample.dim != 1:
        raise exceptions.DimensionError("Only 1-D samples are supported")

    x, c = _sorted_quantiles(sample)
    lengths = np.diff(np.concatenate([[0.0], c]))
    lower = c - lengths
    offsets = (np.arange(nodes) + 0.5) / nodes

    t = lower[:, np.newaxis] + lengths[:, np.newaxis] * offsets
    t = np.clip(t, np.finfo(float).tiny, 1 - np.finfo(float).epsneg)
    squared = (x[:, np.newaxis] - ppf(t)) ** 2
    return math.sqrt(math.fsum(lengths * np.mean(squared, axis=1)))


def _check_dims(a, b):
    """Raise a DimensionError unless two laws share a dimension."""
    if a.dim != b.dim:
        raise exceptions.DimensionError(
            "Laws have dimensions {} and {}".format(a.dim, b.dim),
        )


def _check_step(gamma, L):
    """Raise a StepSizeError unless gamma is in (0, 1/L]."""
    if not gamma > 0 or gamma * L > 1 + constants.ADMISSIBILITY_RTOL:
        raise exceptions.StepSizeError(
            "Step size {} is outside (0, 1/L] with L = {}".format(gamma, L),
        )


def _compose(values, vectors):
    """Build V diag(values) V^T, or diag(values) when V is None."""
    if vectors is None:
        return np.diag(values)
    return (vectors * values) @ vectors.T


def _eigenvalues(A):
    """Return the ascending eigenvalues of a symmetric matrix."""
    if _is_diagonal(A):
        return np.sort(np.diagonal(A))
    return linalg.eigh(A, eigvals_only=True)


def _is_diagonal(A):
    """Whether a square matrix has no off-diagonal entries."""
    return not np.any(A - np.diag(np.diagonal(A)))


def _sorted_quantiles(sample):
    """Sort a 1-D sample and return its points and cumulative weights."""
    order = np.argsort(sample.points[:, 0], kind="stable")
    x = sample.points[order, 0]
    c = np.cumsum(sample.probabilities()[order])
    c[-1] = 1.0
    return x, c


def _spectrum(H):
    """Validate H and return its ascending eigenvalues and eigenvectors.

    The eigenvectors are None for a diagonal H, whose eigenvalues are then
    its diagonal in coordinate order.

    """
    H = model.hessian_matrix(H)
    if _is_diagonal(H):
        values = np.diagonal(H).copy()
        order = np.argsort(values)
        if np.all(order == np.arange(len(values))):
            return values, None
        vectors = np.eye(len(values))[:, order]
        return values[order], vectors
    return linalg.eigh(H)


def _w2_squared(a, b):
    """Return W2^2 between two Gaussian laws."""
    _check_dims(a, b)
    mean_part = float(np.sum((a.mean - b.mean) ** 2))
    if _is_diagonal(a.cov) and _is_diagonal(b.cov):
        roots = np.sqrt(np.diagonal(a.cov)) - np.sqrt(np.diagonal(b.cov))
        return mean_part + float(np.sum(roots ** 2))

    root_b = sqrtm_psd(b.cov)
    cross = sqrtm_psd(root_b @ a.cov @ root_b)
    trace = float(np.trace(a.cov) + np.trace(b.cov) - 2 * np.trace(cross))
    return mean_part + max(trace, 0.0)
