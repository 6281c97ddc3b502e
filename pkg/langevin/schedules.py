import dataclasses
import math

import numpy as np

from langevin import (
    constants,
    exceptions,
)


@dataclasses.dataclass(frozen=True)
class StepPlan:
    """Paired step-size and weight sequences, indexed from k = 1.

    Step sizes:
        constant   gamma_k = gamma1
        poly       gamma_k = gamma1 / k^alpha
        piecewise  gamma_k = gamma1 for k <= switch_step, gamma2 after

    Weights:
        constant   lambda_k = lambda1
        poly       lambda_k = lambda1 / (k + 1)^weight_alpha
        gamma      lambda_k = gamma_k

    lambda1 defaults to gamma1 and weight_alpha to alpha. The first burn_in
    iterates are excluded from the weighted averages.

    """

    kind: str = constants.CONSTANT
    gamma1: float = 0.01
    alpha: float = 0.5
    switch_step: int = 0
    gamma2: float = None
    weights: str = constants.GAMMA
    lambda1: float = None
    weight_alpha: float = None
    burn_in: int = 0

    def __post_init__(self):
        if self.kind not in constants.SCHEDULE_KINDS:
            raise exceptions.StepSizeError(
                "Unknown schedule kind {}".format(self.kind),
            )
        if self.weights not in constants.WEIGHT_KINDS:
            raise exceptions.StepSizeError(
                "Unknown weight kind {}".format(self.weights),
            )
        if not self.gamma1 > 0:
            raise exceptions.StepSizeError("gamma1 must be positive")
        if self.kind == constants.POLY and not 0 < self.alpha <= 1:
            raise exceptions.StepSizeError("alpha must be in (0, 1]")
        if self.kind == constants.PIECEWISE:
            if self.gamma2 is None or not self.gamma2 > 0:
                raise exceptions.StepSizeError("gamma2 must be positive")
            if self.switch_step < 0:
                raise exceptions.StepSizeError(
                    "switch_step must be non-negative",
                )
        if self.lambda1 is not None and not self.lambda1 > 0:
            raise exceptions.StepSizeError("lambda1 must be positive")
        if self.burn_in < 0:
            raise exceptions.StepSizeError("burn_in must be non-negative")

    @property
    def is_constant(self):
        """bool: Whether every step size and weight is the same."""
        return (
            self.kind == constants.CONSTANT
            and self.weights != constants.POLY
        )

    def gamma(self, k):
        """Return gamma_k for an index or an array of indices k >= 1."""
        k = np.asarray(k, dtype=float)
        if self.kind == constants.CONSTANT:
            values = np.full(k.shape, self.gamma1)
        elif self.kind == constants.POLY:
            values = self.gamma1 / k ** self.alpha
        else:
            values = np.where(k <= self.switch_step, self.gamma1, self.gamma2)
        return values if values.ndim else float(values)

    def lam(self, k):
        """Return lambda_k for an index or an array of indices k >= 1."""
        if self.weights == constants.GAMMA:
            return self.gamma(k)
        k = np.asarray(k, dtype=float)
        lambda1 = self.gamma1 if self.lambda1 is None else self.lambda1
        if self.weights == constants.CONSTANT:
            values = np.full(k.shape, lambda1)
        else:
            alpha = self.weight_alpha
            if alpha is None:
                alpha = self.alpha
            values = lambda1 / (k + 1) ** alpha
        return values if values.ndim else float(values)


def check_admissible(plan, m, variant, horizon):
    """Check a plan against a family of theorems' step hypotheses.

    Both sequences must be non-increasing, and for every k from
    burn_in + 1 to burn_in + horizon,

        ULA:          lambda_{k+1} (1 - m gamma_{k+1}) / gamma_{k+1}
                          <= lambda_k / gamma_k
        SGLD-family:  lambda_{k+1} / gamma_{k+2} <= lambda_k / gamma_{k+1}

    with a relative slack of constants.ADMISSIBILITY_RTOL.

    Parameters
    ----------
    plan : StepPlan
        The plan.
    m : float
        The strong convexity modulus.
    variant : str
        Either constants.VARIANT_ULA or constants.VARIANT_SGLD.
    horizon : int
        The number of averaged iterations.

    Returns
    -------
    bool
        Whether every inequality holds.

    """
    # Parameter check.
    assert variant in (constants.VARIANT_ULA, constants.VARIANT_SGLD)
    assert horizon >= 1

    rtol = constants.ADMISSIBILITY_RTOL
    k = np.arange(plan.burn_in + 1, plan.burn_in + horizon + 3)
    gammas = plan.gamma(k)
    lambdas = plan.lam(k)

    monotone = (
        np.all(gammas[1:] <= gammas[:-1] * (1 + rtol))
        and np.all(lambdas[1:] <= lambdas[:-1] * (1 + rtol))
    )
    if not monotone:
        return False

    if variant == constants.VARIANT_ULA:
        left = lambdas[1:-1] * (1 - m * gammas[1:-1]) / gammas[1:-1]
        right = lambdas[:-2] / gammas[:-2]
    else:
        left = lambdas[1:-1] / gammas[2:]
        right = lambdas[:-2] / gammas[1:-1]

    return bool(np.all(left <= right * (1 + rtol)))


def cumulative(plan, N, n):
    """Sum the step sizes and the weights over k = N + 1, ..., N + n.

    Parameters
    ----------
    plan : StepPlan
        The plan.
    N : int
        The burn-in, at least 0.
    n : int
        The number of terms, at least 1.

    Returns
    -------
    tuple of float
        Gamma_{N,N+n} and Lambda_{N,N+n}.

    """
    # Parameter check.
    assert N >= 0
    assert n >= 1

    k = np.arange(N + 1, N + n + 1)
    return math.fsum(plan.gamma(k)), math.fsum(plan.lam(k))


def step_size(plan, k):
    """Return gamma_k."""
    return plan.gamma(k)


def weight(plan, k):
    """Return lambda_k."""
    return plan.lam(k)
