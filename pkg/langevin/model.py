import abc
import dataclasses

import numpy as np
from scipy import (
    linalg,
    special,
)

from langevin import (
    constants,
    exceptions,
)


class SmoothPotential(abc.ABC):
    """A convex potential with Lipschitz gradient.

    ``value`` and ``grad`` accept a single point of shape (d,) or a stack
    of points of shape (..., d).

    """

    @property
    @abc.abstractmethod
    def dim(self):
        """int: The dimension of the space."""

    @property
    @abc.abstractmethod
    def m(self):
        """float: The strong convexity modulus."""

    @property
    @abc.abstractmethod
    def L(self):  # pylint: disable=invalid-name
        """float: The Lipschitz constant of the gradient."""

    @abc.abstractmethod
    def grad(self, x):
        """Evaluate the gradient."""

    @abc.abstractmethod
    def value(self, x):
        """Evaluate the potential."""


class NonSmoothTerm(abc.ABC):
    """A convex, Lipschitz and possibly non-differentiable potential term."""

    #: Whether the term is a sum of one-dimensional terms.
    separable = False

    @property
    @abc.abstractmethod
    def dim(self):
        """int: The dimension of the space."""

    @property
    @abc.abstractmethod
    def M2(self):  # pylint: disable=invalid-name
        """float: The Lipschitz constant of the term."""

    @abc.abstractmethod
    def prox(self, gamma, x):
        """Evaluate the proximal operator with parameter gamma."""

    @abc.abstractmethod
    def subgrad(self, x):
        """Evaluate the designated subgradient."""

    @abc.abstractmethod
    def value(self, x):
        """Evaluate the term."""


@dataclasses.dataclass(frozen=True, eq=False)
class CompositePotential:
    """A potential U = U1 + U2 with its constants.

    Attributes
    ----------
    u1 : SmoothPotential
        The smooth part.
    u2 : NonSmoothTerm or None
        The non-smooth part. None means U2 = 0.
    M : float or None
        The global Lipschitz constant of U, when one is known.
    x_star : numpy.ndarray or None
        A minimizer of U, when one is known.
    heuristic : bool
        Whether M was supplied for a potential which is not globally
        Lipschitz, so that bounds using it are heuristic.

    """

    u1: SmoothPotential
    u2: NonSmoothTerm = None
    M: float = None
    x_star: np.ndarray = None
    heuristic: bool = False

    def __post_init__(self):
        if self.u2 is not None and self.u2.dim != self.u1.dim:
            msg = "Smooth part has dimension {} but non-smooth part has {}"
            raise exceptions.DimensionError(
                msg.format(self.u1.dim, self.u2.dim),
            )
        if self.M is not None and self.M < 0:
            raise exceptions.ModelError("M must be non-negative")
        if self.x_star is not None:
            x_star = np.asarray(self.x_star, dtype=float)
            _check_point(x_star, self.u1.dim)
            object.__setattr__(self, "x_star", x_star)

    @property
    def dim(self):
        """int: The dimension of the space."""
        return self.u1.dim

    @property
    def L(self):  # pylint: disable=invalid-name
        """float: The gradient Lipschitz constant of the smooth part."""
        return self.u1.L

    @property
    def m(self):
        """float: The strong convexity modulus of the smooth part."""
        return self.u1.m

    @property
    def M2(self):  # pylint: disable=invalid-name
        """float: The Lipschitz constant of the non-smooth part."""
        return 0.0 if self.u2 is None else self.u2.M2

    def prox(self, gamma, x):
        """Apply the proximal operator of U2, the identity when U2 = 0."""
        if self.u2 is None:
            return x
        return self.u2.prox(gamma, x)

    def subgrad(self, x):
        """Return grad U1(x) plus the designated subgradient of U2."""
        if self.u2 is None:
            return self.u1.grad(x)
        return self.u1.grad(x) + self.u2.subgrad(x)

    def value(self, x):
        """Return U1(x) + U2(x)."""
        if self.u2 is None:
            return self.u1.value(x)
        return self.u1.value(x) + self.u2.value(x)


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """A binary-label dataset ready for logistic regression.

    Attributes
    ----------
    X : numpy.ndarray
        The N x d covariate matrix.
    Y : numpy.ndarray
        The length-N label vector, with values in {0, 1}.
    feature_names : tuple of str
        The column names of X.
    fingerprint : str
        A digest identifying the source bytes and ingestion options.

    """

    X: np.ndarray
    Y: np.ndarray
    feature_names: tuple = ()
    fingerprint: str = ""

    @property
    def cols(self):
        """int: The number of features d."""
        return self.X.shape[1]

    @property
    def rows(self):
        """int: The number of observations N."""
        return self.X.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class FunctionPotential(SmoothPotential):
    """A smooth potential given by user functions.

    The functions must be defined at module level so that the potential
    can be sent to worker processes.

    """

    value_fn: object
    grad_fn: object
    dimension: int
    modulus: float = 0.0
    lipschitz: float = 0.0

    @property
    def dim(self):
        return self.dimension

    @property
    def L(self):
        return self.lipschitz

    @property
    def m(self):
        return self.modulus

    def grad(self, x):
        return np.asarray(self.grad_fn(x), dtype=float)

    def value(self, x):
        return self.value_fn(x)


class LaplaceTerm(NonSmoothTerm):
    """The term a1 * sum |x_i|, with soft-thresholding as its prox."""

    separable = True

    def __init__(self, dim, a1):
        if a1 < 0:
            raise exceptions.ModelError("a1 must be non-negative")
        if dim < 1:
            raise exceptions.DimensionError("dim must be positive")
        self._dim = int(dim)
        self.a1 = float(a1)

    def __repr__(self):
        return "LaplaceTerm(dim={}, a1={})".format(self._dim, self.a1)

    @property
    def dim(self):
        return self._dim

    @property
    def M2(self):
        return self.a1 * np.sqrt(self._dim)

    def prox(self, gamma, x):
        """Soft-threshold x at level a1 * gamma."""
        # Parameter check.
        assert gamma > 0

        return np.sign(x) * np.maximum(np.abs(x) - self.a1 * gamma, 0.0)

    def subgrad(self, x):
        # np.sign(0) is 0, the minimal-norm element of the subdifferential.
        return self.a1 * np.sign(x)

    def value(self, x):
        return self.a1 * np.sum(np.abs(x), axis=-1)


class LogisticPotential(SmoothPotential):
    """The negative log-likelihood of logistic regression plus a ridge term.

    U1(beta) = sum_n [log(1 + exp(beta.X_n)) - Y_n beta.X_n]
    + a2 * |beta|^2.

    """

    def __init__(self, X, Y, a2=0.0):
        self.X = X
        self.Y = Y
        self.a2 = float(a2)

    def __repr__(self):
        return "LogisticPotential(rows={}, dim={}, a2={})".format(
            self.X.shape[0],
            self.dim,
            self.a2,
        )

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def L(self):
        return 0.25 * float(np.sum(self.X ** 2)) + 2 * self.a2

    @property
    def m(self):
        return 2 * self.a2

    def data_gradient(self, beta, rows=None):
        """Sum the data-term gradients over a set of rows.

        Parameters
        ----------
        beta : numpy.ndarray
            A point of shape (d,).
        rows : numpy.ndarray, optional
            Row indices. All rows are used when omitted.

        Returns
        -------
        numpy.ndarray
            The sum of grad l_n(beta) over the rows.

        """
        return _logistic_data_gradient(self.X, self.Y, beta, rows)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.data_gradient(x) + 2 * self.a2 * x
        # A stack of points.
        u = x @ self.X.T
        return (special.expit(u) - self.Y) @ self.X + 2 * self.a2 * x

    def value(self, x):
        x = np.asarray(x, dtype=float)
        u = x @ self.X.T
        likelihood = np.sum(np.logaddexp(0.0, u) - self.Y * u, axis=-1)
        return likelihood + self.a2 * np.sum(x ** 2, axis=-1)


@dataclasses.dataclass(frozen=True, eq=False)
class LogisticModel:
    """A Bayesian logistic regression model with an elastic-net prior.

    Attributes
    ----------
    X : numpy.ndarray
        The N x d covariate matrix.
    Y : numpy.ndarray
        The length-N label vector, with values in {0, 1}.
    a1 : float
        The Laplace prior scale.
    a2 : float
        The Gaussian (ridge) prior scale.

    """

    X: np.ndarray
    Y: np.ndarray
    a1: float = 1.0
    a2: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.shape[0] != Y.shape[0]:
            msg = "X has {} rows but Y has {} entries"
            raise exceptions.DimensionError(msg.format(X.shape[0], Y.shape[0]))
        if not np.all((Y == 0) | (Y == 1)):
            raise exceptions.ModelError("Labels must be 0 or 1")
        if self.a1 < 0 or self.a2 < 0:
            raise exceptions.ModelError("Prior scales must be non-negative")
        # Read-only from here on.
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def dim(self):
        """int: The number of coefficients d."""
        return self.X.shape[1]

    @property
    def rows(self):
        """int: The number of observations N."""
        return self.X.shape[0]

    def add_prior_gradient(self, gradient, beta, mode):
        """Add the prior part of an oracle to a data gradient.

        The ridge term 2 a2 beta is always added; the designated Laplace
        subgradient a1 sign(beta) only in subgradient mode.

        """
        return _add_prior_gradient(gradient, beta, self.a1, self.a2, mode)

    def data_gradient(self, beta, rows=None):
        """Sum the data-term gradients over a set of rows."""
        return _logistic_data_gradient(self.X, self.Y, beta, rows)

    def row_curvatures(self):
        """Return the per-row gradient Lipschitz constants |X_n|^2 / 4."""
        return 0.25 * np.sum(self.X ** 2, axis=1)


@dataclasses.dataclass(frozen=True, eq=False)
class QuadraticSumModel:
    """A finite sum of isotropic quadratic data terms.

    l_n(beta) = |beta - c_n|^2 / 2, plus the same elastic-net prior as
    LogisticModel. Its oracles have closed-form means and variances.

    """

    centers: np.ndarray
    a1: float = 0.0
    a2: float = 0.0

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if self.a1 < 0 or self.a2 < 0:
            raise exceptions.ModelError("Prior scales must be non-negative")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    @property
    def dim(self):
        """int: The dimension of the space."""
        return self.centers.shape[1]

    @property
    def rows(self):
        """int: The number of data terms N."""
        return self.centers.shape[0]

    def data_gradient(self, beta, rows=None):
        """Sum the data-term gradients over a set of rows."""
        centers = self.centers if rows is None else self.centers[rows]
        return centers.shape[0] * beta - np.sum(centers, axis=0)

    def add_prior_gradient(self, gradient, beta, mode):
        """Add the prior part of an oracle to a data gradient."""
        return _add_prior_gradient(gradient, beta, self.a1, self.a2, mode)

    def row_curvatures(self):
        """Return the per-row gradient Lipschitz constants, all 1."""
        return np.ones(self.rows)


class QuadraticPotential(SmoothPotential):
    """The potential U(x) = x.Hx / 2 for a symmetric PSD Hessian H."""

    def __init__(self, H):
        H = hessian_matrix(H)
        eigenvalues = linalg.eigh(H, eigvals_only=True)
        self.H = H
        self.eigenvalues = eigenvalues
        self.is_diagonal = not np.any(H - np.diag(np.diag(H)))

    def __repr__(self):
        return "QuadraticPotential(dim={})".format(self.dim)

    @property
    def dim(self):
        return self.H.shape[0]

    @property
    def L(self):
        return float(max(self.eigenvalues[-1], 0.0))

    @property
    def m(self):
        return float(max(self.eigenvalues[0], 0.0))

    def grad(self, x):
        return np.asarray(x, dtype=float) @ self.H

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, self.H, x)


def eval_composite(p, x):
    """Evaluate a composite potential and its gradients at a point.

    Parameters
    ----------
    p : CompositePotential
        The potential.
    x : array_like
        A point of shape (d,).

    Returns
    -------
    tuple of (float, numpy.ndarray, numpy.ndarray)
        U1(x) + U2(x), grad U1(x), and grad U1(x) plus the designated
        subgradient of U2, which is an element of the subdifferential of U.

    Raises
    ------
    DimensionError
        If x does not have dimension p.dim.

    """
    x = np.asarray(x, dtype=float)
    _check_point(x, p.dim)

    smooth_grad = p.u1.grad(x)
    sub_grad = smooth_grad
    if p.u2 is not None:
        sub_grad = smooth_grad + p.u2.subgrad(x)

    return float(p.value(x)), smooth_grad, sub_grad


def find_minimizer(p, tol=constants.MINIMIZER_TOLERANCE, max_iter=10 ** 6,
                   start=None):
    """Find a minimizer by deterministic proximal gradient descent.

    Parameters
    ----------
    p : CompositePotential
        The potential.
    tol : float, optional
        Stop when successive iterates are closer than this.
    max_iter : int, optional
        The maximum number of iterations.
    start : array_like, optional
        The starting point. The origin by default.

    Returns
    -------
    numpy.ndarray
        An approximate minimizer of U.

    Raises
    ------
    ModelError
        If the iteration does not reach the tolerance.

    """
    # Step 1/L, or 1 when the smooth part is flat.
    step = 1.0 / p.L if p.L > 0 else 1.0
    x = np.zeros(p.dim) if start is None else np.asarray(start, dtype=float)

    for _ in range(max_iter):
        x_next = p.prox(step, x - step * p.u1.grad(x))
        if np.linalg.norm(x_next - x) <= tol:
            return x_next
        x = x_next

    raise exceptions.ModelError(
        "Proximal gradient descent did not converge in {:,} steps".format(
            max_iter,
        ),
    )


def hessian_matrix(H):
    """Convert a Hessian description to a validated symmetric matrix.

    Parameters
    ----------
    H : array_like
        A scalar, a vector of diagonal entries or a square matrix.

    Returns
    -------
    numpy.ndarray
        A read-only symmetric positive semi-definite matrix.

    Raises
    ------
    DimensionError
        If H is not square or is too large for dense analytics.
    ModelError
        If H is not symmetric or has a negative eigenvalue.

    """
    # Scalars and vectors stand for diagonal Hessians.
    H = np.asarray(H, dtype=float)
    if H.ndim == 0:
        H = H.reshape(1, 1)
    elif H.ndim == 1:
        H = np.diag(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise exceptions.DimensionError("Hessian must be square")
    if H.shape[0] > constants.MAX_DENSE_DIM:
        raise exceptions.DimensionError(
            "Dense analytics are limited to dimension {}".format(
                constants.MAX_DENSE_DIM,
            ),
        )

    # Tolerances are relative to the largest entry.
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.T)) > constants.EIGENVALUE_TOLERANCE * scale:
        raise exceptions.ModelError("Hessian must be symmetric")
    H = (H + H.T) / 2
    lowest = linalg.eigh(H, eigvals_only=True)[0]
    if lowest < -constants.EIGENVALUE_TOLERANCE * scale:
        raise exceptions.ModelError("Hessian must be positive semi-definite")

    H.setflags(write=False)
    return H


def logistic_constants(model):
    """Compute the constants of a logistic posterior.

    Parameters
    ----------
    model : LogisticModel
        The model.

    Returns
    -------
    tuple of float
        m = 2 a2, L = sum |X_n|^2 / 4 + 2 a2 and M2 = a1 sqrt(d).

    """
    m = 2 * model.a2
    L = 0.25 * float(np.sum(model.X ** 2)) + 2 * model.a2
    M2 = model.a1 * np.sqrt(model.dim)
    return m, L, M2


def logistic_potential(model):
    """Build the composite posterior potential of a logistic model."""
    u1 = LogisticPotential(model.X, model.Y, model.a2)
    u2 = make_laplace_term(model.dim, model.a1) if model.a1 > 0 else None
    return CompositePotential(u1=u1, u2=u2)


def make_laplace_term(dim, a1):
    """Make the Laplace prior term a1 * sum |x_i|.

    Parameters
    ----------
    dim : int
        The dimension.
    a1 : float
        The scale, at least 0.

    Returns
    -------
    LaplaceTerm
        The term, with M2 = a1 sqrt(dim).

    Raises
    ------
    ModelError
        If a1 is negative.

    """
    return LaplaceTerm(dim, a1)


def make_prior(name, a1=None, a2=None):
    """Resolve a prior name to its (a1, a2) scales.

    Raises
    ------
    ModelError
        If the name is unknown, a custom prior lacks its scales, or a named
        prior is given scales.

    """
    if name == constants.CUSTOM:
        if a1 is None or a2 is None:
            raise exceptions.ModelError("A custom prior needs a1 and a2")
        return float(a1), float(a2)
    if a1 is not None or a2 is not None:
        raise exceptions.ModelError(
            "Prior {} fixes its own scales, use custom for a1 and a2".format(
                name,
            ),
        )
    try:
        return constants.PRIORS[name]
    except KeyError:
        raise exceptions.ModelError("Unknown prior {}".format(name))


def make_quadratic(H, u2=None):
    """Build the Gaussian potential x.Hx / 2, whose minimizer is 0."""
    u1 = QuadraticPotential(H)
    return CompositePotential(u1=u1, u2=u2, x_star=np.zeros(u1.dim))


def with_minimizer(p, tol=constants.MINIMIZER_TOLERANCE):
    """Return the potential with x_star filled in when it is missing."""
    if p.x_star is not None:
        return p
    return dataclasses.replace(p, x_star=find_minimizer(p, tol=tol))


def _check_point(x, dim):
    """Raise a DimensionError unless x is a point of dimension dim."""
    if x.shape[-1:] != (dim,):
        msg = "Expected a point of dimension {}, got shape {}"
        raise exceptions.DimensionError(msg.format(dim, x.shape))


def _add_prior_gradient(gradient, beta, a1, a2, mode):
    """Add the elastic-net prior part of an oracle to a data gradient."""
    gradient = gradient + 2 * a2 * beta
    if mode == constants.SUBGRADIENT:
        gradient = gradient + a1 * np.sign(beta)
    return gradient


def _logistic_data_gradient(X, Y, beta, rows):
    """Sum (expit(beta.X_n) - Y_n) X_n over the rows, or over all rows."""
    if rows is not None:
        X = X[rows]
        Y = Y[rows]
    return (special.expit(X @ beta) - Y) @ X
