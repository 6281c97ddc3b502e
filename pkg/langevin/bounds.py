import dataclasses
import json
import math
import warnings

import numpy as np

from langevin import (
    constants,
    exceptions,
    schedules,
)


# Display names of the constants, used in error messages.
SYMBOLS = {
    "d": "d",
    "m": "m",
    "L": "L",
    "M": "M",
    "M2": "M2",
    "D2": "D^2",
    "L_tilde": "L~",
    "m_tilde1": "m~1",
    "L_tilde1": "L~1",
    "upsilon_star": "upsilon*",
    "W0_sq": "W0^2",
    "R0_sq": "R0^2",
    "eta": "eta",
    "M_eta": "M_eta",
}


@dataclasses.dataclass(frozen=True)
class ProblemConstants:
    """The constants a bound or tuning rule may need.

    Attributes
    ----------
    d : int
        The dimension.
    m : float
        The strong convexity modulus.
    L : float
        The gradient Lipschitz constant of the smooth part.
    M : float
        The Lipschitz constant of U.
    M2 : float
        The Lipschitz constant of the non-smooth part.
    D2 : float
        A uniform bound on the oracle variance.
    L_tilde : float
        The cocoercivity constant of the oracle.
    m_tilde1 : float
        The strong monotonicity constant of the smooth oracle.
    L_tilde1 : float
        The cocoercivity constant of the smooth oracle.
    upsilon_star : float
        The oracle variance at the minimizer.
    W0_sq : float
        The squared W2 distance from the start to the target, or a bound.
    R0_sq : float
        The second moment of the start around the minimizer.
    eta : float
        The growth radius of the potential.
    M_eta : float
        The growth offset of the potential.
    heuristic : bool
        Whether M was supplied for a potential without a global Lipschitz
        constant.

    """

    d: int
    m: float = 0.0
    L: float = None
    M: float = None
    M2: float = None
    D2: float = None
    L_tilde: float = None
    m_tilde1: float = None
    L_tilde1: float = None
    upsilon_star: float = None
    W0_sq: float = None
    R0_sq: float = None
    eta: float = None
    M_eta: float = None
    heuristic: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise exceptions.ModelError("d must be at least 1")
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if field.name == "heuristic" or value is None:
                continue
            if not value >= 0:
                raise exceptions.ModelError(
                    "{} must be non-negative".format(SYMBOLS[field.name]),
                )
        if self.L is not None and self.L < self.m:
            raise exceptions.ModelError("L must be at least m")

    def require(self, name, rule):
        """Return a constant, raising when it is missing.

        Raises
        ------
        InsufficientConstantsError
            If the constant is None.

        """
        value = getattr(self, name)
        if value is None:
            raise exceptions.InsufficientConstantsError(SYMBOLS[name], rule)
        return value

    def require_positive_m(self, rule):
        """Return m, raising when the rule needs strong convexity."""
        if not self.m > 0:
            raise exceptions.InsufficientConstantsError("m > 0", rule)
        return self.m


@dataclasses.dataclass(frozen=True)
class BoundReport:
    """The evaluated output of a bound or tuning rule.

    Attributes
    ----------
    rule : str
        The rule or theorem name.
    inputs : dict
        The constants and settings that produced the outputs.
    outputs : dict
        Step sizes, iteration counts or bound values.
    flags : dict
        Preconditions, each True when met.

    """

    rule: str
    inputs: dict
    outputs: dict
    flags: dict

    @property
    def valid(self):
        """bool: Whether every precondition is met."""
        return all(self.flags.values())

    def to_json(self):
        """Serialize the report to one line of JSON."""
        return json.dumps(
            {
                "rule": self.rule,
                "inputs": self.inputs,
                "outputs": self.outputs,
                "flags": self.flags,
                "valid": self.valid,
            },
            sort_keys=True,
            default=_jsonable,
        )


def bound_rhs(theorem, c, plan, horizon, variances=None):
    """Evaluate the right-hand side of a convergence bound.

    Parameters
    ----------
    theorem : str
        One of constants.THEOREMS.
    c : ProblemConstants
        The constants.
    plan : StepPlan
        The step plan. Its burn-in N sets where averaging starts.
    horizon : int
        The number n of averaged iterations, or of steps for the W2
        recursions, where 0 is allowed.
    variances : array_like, optional
        A measured oracle variance for each of the n iterations. A uniform
        bound D2 is used when omitted.

    Returns
    -------
    BoundReport
        The bound, with the plan's admissibility as a flag.

    Raises
    ------
    InsufficientConstantsError
        If a constant the theorem needs is missing.

    """
    try:
        evaluate = _THEOREMS[theorem]
    except KeyError:
        raise exceptions.ConfigError("Unknown theorem {}".format(theorem))

    outputs, flags = evaluate(c, plan, horizon, variances, theorem)
    for name, met in flags.items():
        if not met:
            warnings.warn(
                "Precondition {} of {} is not met".format(name, theorem),
                exceptions.AdmissibilityWarning,
            )

    inputs = _echo(c)
    inputs["plan"] = dataclasses.asdict(plan)
    inputs["horizon"] = horizon
    inputs["measured_variances"] = variances is not None
    return BoundReport(theorem, inputs, outputs, flags)


def moment_bound(c):
    """Bound the second moment of the target around its minimizer.

    The bounds are d / m when m > 0, and 2 d (1 + d) / eta^2 + M_eta^2
    when the growth constants are known. The smaller one is returned.

    Raises
    ------
    InsufficientConstantsError
        If neither bound applies.

    """
    candidates = []
    if c.m > 0:
        candidates.append(c.d / c.m)
    if c.eta is not None and c.M_eta is not None and c.eta > 0:
        candidates.append(2 * c.d * (1 + c.d) / c.eta ** 2 + c.M_eta ** 2)
    if not candidates:
        raise exceptions.InsufficientConstantsError(
            "m > 0 or (eta, M_eta)",
            "moment",
        )
    return min(candidates)


def problem_constants(p, **extra):
    """Collect the constants of a composite potential.

    Parameters
    ----------
    p : CompositePotential
        The potential.
    **extra
        Further constants, such as W0_sq or D2.

    Returns
    -------
    ProblemConstants
        d, m, L, M2 and M with its heuristic flag, plus the extras.

    """
    values = {
        "d": p.dim,
        "m": p.m,
        "L": p.L,
        "M2": p.M2,
        "M": p.M,
        "heuristic": p.heuristic,
    }
    values.update(extra)
    return ProblemConstants(**values)


def tune(rule, c, eps):
    """Compute the step size and iteration counts of a tuning rule.

    Counts are the smallest integers meeting each rule's inequalities and
    step sizes the largest.

    Parameters
    ----------
    rule : str
        One of constants.TUNING_RULES.
    c : ProblemConstants
        The constants.
    eps : float
        The target accuracy, positive.

    Returns
    -------
    BoundReport
        Outputs "gamma" and "n", and for two-phase rules also "N" and
        "gamma_tilde".

    Raises
    ------
    ConfigError
        If the rule is unknown.
    InsufficientConstantsError
        If a constant the rule needs is missing.
    StepSizeError
        If eps is not positive.

    """
    if not eps > 0:
        raise exceptions.StepSizeError("eps must be positive")
    try:
        evaluate = _RULES[rule]
    except KeyError:
        raise exceptions.ConfigError("Unknown rule {}".format(rule))

    outputs = evaluate(c, eps, rule)
    tuned = [
        outputs[key]
        for key in ("gamma", "N", "gamma_tilde", "n")
        if key in outputs
    ]
    flags = {"finite": all(math.isfinite(v) and v > 0 for v in tuned)}
    if rule in (constants.SSGLD_UNIFORM, constants.SSGLD_COCO):
        flags["globally_lipschitz"] = not c.heuristic
        if c.heuristic:
            warnings.warn(
                "M is not a global Lipschitz constant; {} is heuristic".format(
                    rule,
                ),
                exceptions.HeuristicBoundWarning,
            )

    inputs = _echo(c)
    inputs["eps"] = eps
    return BoundReport(rule, inputs, outputs, flags)


def w2_bound_path(c, plan, n):
    """Evaluate the strongly convex ULA W2 bound for every k up to n.

        b_0 = W0^2,  b_k = (1 - m gamma_k) b_{k-1} + 2 L d gamma_k^2

    Returns
    -------
    numpy.ndarray
        b_0, ..., b_n, bounds on W2^2(mu0 Q_k, pi).

    """
    L = c.require("L", constants.ULA_W2)
    path = np.empty(n + 1)
    path[0] = c.require("W0_sq", constants.ULA_W2)
    if n:
        gammas = plan.gamma(np.arange(1, n + 1))
        for k, gamma in enumerate(gammas, start=1):
            drift = 2 * L * c.d * gamma ** 2
            path[k] = (1 - c.m * gamma) * path[k - 1] + drift
    return path


def _averaged_kl(c, plan, horizon, theorem):
    """Return the ULA averaged KL bound and the plan's Lambda."""
    L = c.require("L", theorem)
    W0_sq = c.require("W0_sq", theorem)
    # Averaging runs over the iterations after the burn-in.
    N = plan.burn_in
    k = np.arange(N + 1, N + horizon + 1)
    gammas = plan.gamma(k)
    lambdas = plan.lam(k)
    total = math.fsum(lambdas)

    first = lambdas[0] * (1 - c.m * gammas[0]) * W0_sq
    first /= 2 * gammas[0] * total
    second = L * c.d * math.fsum(gammas * lambdas) / total
    return first + second


def _ceil(value):
    """Round up to an integer of at least 1, ignoring float noise."""
    nearest = round(value)
    tolerance = constants.CHECK_TOLERANCE * max(1.0, abs(value))
    if abs(value - nearest) <= tolerance:
        value = nearest
    return max(1, int(math.ceil(value)))


def _echo(c):
    """Return the constants that were supplied, for report inputs."""
    return {
        key: value
        for key, value in dataclasses.asdict(c).items()
        if value is not None
    }


def _jsonable(value):
    """Convert numpy scalars for JSON serialization."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError("Cannot serialize {!r}".format(value))


def _plan_flags(c, plan, horizon, variant):
    """Check a plan's admissibility and its step sizes against 1/L."""
    k = np.arange(1, plan.burn_in + max(horizon, 1) + 3)
    flags = {
        "admissible": schedules.check_admissible(
            plan,
            c.m,
            variant,
            max(horizon, 1),
        ),
    }
    if c.L:
        largest = float(np.max(plan.gamma(k)))
        flags["step_within_1_over_L"] = (
            largest * c.L <= 1 + constants.ADMISSIBILITY_RTOL
        )
    return flags


def _rule_spgld_coco(c, eps, rule):
    gamma, n = _spgld_coco(c, eps, rule)
    return {"gamma": gamma, "n": n}


def _rule_spgld_strconv(c, eps, rule):
    L = c.require("L", rule)
    m = c.require_positive_m(rule)
    m_tilde = min(m, c.require("m_tilde1", rule))
    L_tilde1 = c.require("L_tilde1", rule)
    M2 = c.require("M2", rule)
    upsilon = c.require("upsilon_star", rule)
    W0_sq = c.require("W0_sq", rule)
    R0_sq = c.require("R0_sq", rule)
    if not m_tilde > 0:
        raise exceptions.InsufficientConstantsError("m~1 > 0", rule)

    # The step is found with Delta1 and Delta2 at the cap, then once more
    # with them at that candidate step.
    cap = min(_inverse(L), _inverse(2 * L_tilde1))
    gamma = cap
    for _ in range(2):
        factor = 2 * L_tilde1 * (1 + gamma * L) / m_tilde
        delta1 = 2 * (L * c.d + M2) / m + factor * c.d
        delta2 = factor * upsilon
        gamma = min(
            eps / (4 * delta1),
            math.sqrt(eps / (4 * delta2)) if delta2 > 0 else math.inf,
            cap,
        )
    delta3 = gamma * L_tilde1 * (1 + gamma * L) * R0_sq
    N = max(
        _ceil(math.log(4 * W0_sq / eps) / (gamma * m)) if W0_sq > 0 else 1,
        _ceil(math.log(4 * delta3 / eps) / (gamma * m_tilde))
        if delta3 > 0 else 1,
    )

    gamma_tilde = _spgld_coco_step(c, eps, rule)
    L_tilde = c.require("L_tilde", rule)
    # Second moment of the chain after the first phase.
    moment_after = 2 * eps + 2 * moment_bound(c)
    n = 2 * max(_ceil(1 / gamma), _ceil(2 * L_tilde * moment_after / eps))

    return {
        "gamma": gamma,
        "N": N,
        "gamma_tilde": gamma_tilde,
        "n": n,
        "delta1": delta1,
        "delta2": delta2,
        "delta3": delta3,
    }


def _rule_spgld_strconv_uniform(c, eps, rule):
    L = c.require("L", rule)
    m = c.require_positive_m(rule)
    D2 = c.require("D2", rule)
    M2 = c.require("M2", rule)
    W0_sq = c.require("W0_sq", rule)

    gamma = min(m * eps / (4 * (L * c.d + D2 + M2 ** 2)), _inverse(L))
    return {"gamma": gamma, "n": _log_count(2 * W0_sq / eps, gamma * m)}


def _rule_spgld_uniform(c, eps, rule):
    L = c.require("L", rule)
    D2 = c.require("D2", rule)
    M2 = c.require("M2", rule)
    W0_sq = c.require("W0_sq", rule)

    gamma = min(eps / (2 * (L * c.d + M2 ** 2 + D2)), _inverse(L))
    return {"gamma": gamma, "n": _ceil(W0_sq / (gamma * eps))}


def _rule_ssgld_coco(c, eps, rule):
    M = c.require("M", rule)
    L_tilde = c.require("L_tilde", rule)
    upsilon = c.require("upsilon_star", rule)
    W0_sq = c.require("W0_sq", rule)
    R0_sq = c.require("R0_sq", rule)

    gamma = min(
        eps / (2 * M ** 2 + 4 * L_tilde * c.d),
        _root(eps, 4 * L_tilde * upsilon),
        _inverse(2 * L_tilde),
    )
    n = 2 * max(
        _ceil(W0_sq / (gamma * eps)),
        _ceil(L_tilde * R0_sq / eps),
    )
    return {"gamma": gamma, "n": n}


def _rule_ssgld_uniform(c, eps, rule):
    M = c.require("M", rule)
    D2 = c.require("D2", rule)
    W0_sq = c.require("W0_sq", rule)
    if M ** 2 + D2 == 0:
        raise exceptions.InsufficientConstantsError("M^2 + D^2 > 0", rule)

    gamma = eps / (M ** 2 + D2)
    return {"gamma": gamma, "n": _ceil(W0_sq / (gamma * eps))}


def _rule_ula_convex(c, eps, rule):
    L = c.require("L", rule)
    W0_sq = c.require("W0_sq", rule)

    gamma = min(eps / (2 * L * c.d), _inverse(L))
    return {"gamma": gamma, "n": _ceil(W0_sq / (gamma * eps))}


def _rule_ula_strconv_kl(c, eps, rule):
    outputs = _rule_ula_strconv_w2(c, eps, rule)
    L = c.L
    gamma_tilde = min(eps / (2 * L * c.d), _inverse(L))
    return {
        "gamma": outputs["gamma"],
        "N": outputs["n"],
        "gamma_tilde": gamma_tilde,
        "n": _ceil(1 / gamma_tilde),
    }


def _rule_ula_strconv_w2(c, eps, rule):
    L = c.require("L", rule)
    m = c.require_positive_m(rule)
    W0_sq = c.require("W0_sq", rule)

    gamma = min(m * eps / (4 * L * c.d), _inverse(L))
    return {"gamma": gamma, "n": _log_count(2 * W0_sq / eps, gamma * m)}


def _inverse(value):
    """Return 1 / value, infinite for 0."""
    return math.inf if value == 0 else 1 / value


def _log_count(ratio, rate):
    """Return ceil(ln(ratio) / rate), at least 1."""
    if ratio <= 1:
        return 1
    return _ceil(math.log(ratio) / rate)


def _root(eps, scale):
    """Return sqrt(eps / scale), infinite for a zero scale."""
    return math.inf if scale == 0 else math.sqrt(eps / scale)


def _spgld_coco(c, eps, rule):
    """Return the SPGLD cocoercive step size and iteration count."""
    gamma = _spgld_coco_step(c, eps, rule)
    L_tilde = c.require("L_tilde", rule)
    W0_sq = c.require("W0_sq", rule)
    R0_sq = c.require("R0_sq", rule)
    n = 2 * max(
        _ceil(W0_sq / (gamma * eps)),
        _ceil(2 * L_tilde * R0_sq / eps),
    )
    return gamma, n


def _spgld_coco_step(c, eps, rule):
    """Return the SPGLD cocoercive step size."""
    L = c.require("L", rule)
    M2 = c.require("M2", rule)
    L_tilde = c.require("L_tilde", rule)
    upsilon = c.require("upsilon_star", rule)
    return min(
        eps / (4 * M2 ** 2 + 4 * L * c.d + 8 * L_tilde * c.d),
        _root(eps, 8 * L_tilde * upsilon),
        _inverse(L),
        _inverse(2 * L_tilde),
    )


def _theorem_spgld_kl(c, plan, horizon, variances, theorem):
    L = c.require("L", theorem)
    M2 = c.M2 or 0.0
    W0_sq = c.require("W0_sq", theorem)
    upsilon = _variance_series(c, horizon, variances, theorem)

    k = np.arange(plan.burn_in + 1, plan.burn_in + horizon + 1)
    lambdas = plan.lam(k)
    next_gammas = plan.gamma(k + 1)
    total = math.fsum(lambdas)

    # Drift and noise use the step one index ahead.
    first = lambdas[0] * W0_sq / (2 * plan.gamma(plan.burn_in + 2) * total)
    terms = lambdas * next_gammas * (
        2 * L * c.d + (1 + next_gammas * L) * upsilon + 2 * M2 ** 2
    )
    value = first + math.fsum(terms) / (2 * total)
    flags = _plan_flags(c, plan, horizon, constants.VARIANT_SGLD)
    return {"kl": value}, flags


def _theorem_spgld_w2(c, plan, horizon, variances, theorem):
    L = c.require("L", theorem)
    M2 = c.M2 or 0.0
    bound = c.require("W0_sq", theorem)
    c.require_positive_m(theorem)
    upsilon = _variance_series(c, horizon, variances, theorem)

    # One contraction step per iteration.
    next_gammas = plan.gamma(np.arange(2, horizon + 2))
    for gamma, variance in zip(next_gammas, upsilon):
        bound = (1 - c.m * gamma) * bound + gamma ** 2 * (
            2 * L * c.d + (1 + gamma * L) * variance + 2 * M2 ** 2
        )
    flags = _plan_flags(c, plan, horizon, constants.VARIANT_SGLD)
    return {"w2_sq": bound}, flags


def _theorem_ssgld_kl(c, plan, horizon, variances, theorem):
    M = c.require("M", theorem)
    W0_sq = c.require("W0_sq", theorem)
    upsilon = _variance_series(c, horizon, variances, theorem)
    if c.heuristic:
        warnings.warn(
            "M is not a global Lipschitz constant; the bound is heuristic",
            exceptions.HeuristicBoundWarning,
        )

    k = np.arange(plan.burn_in + 1, plan.burn_in + horizon + 1)
    lambdas = plan.lam(k)
    next_gammas = plan.gamma(k + 1)
    total = math.fsum(lambdas)

    first = lambdas[0] * W0_sq / (2 * plan.gamma(plan.burn_in + 2) * total)
    value = first + math.fsum(next_gammas * lambdas * (M ** 2 + upsilon)) / (
        2 * total
    )
    flags = _plan_flags(c, plan, horizon, constants.VARIANT_SGLD)
    flags.pop("step_within_1_over_L", None)
    flags["globally_lipschitz"] = not c.heuristic
    return {"kl": value}, flags


def _theorem_ula_avg_kl(c, plan, horizon, variances, theorem):
    # pylint: disable=unused-argument
    value = _averaged_kl(c, plan, max(horizon, 1), theorem)
    return {"kl": value}, _plan_flags(c, plan, horizon, constants.VARIANT_ULA)


def _theorem_ula_bias(c, plan, horizon, variances, theorem):
    # pylint: disable=unused-argument
    L = c.require("L", theorem)
    gamma = plan.gamma1
    kl = L * c.d * gamma
    outputs = {
        "kl": kl,
        # Pinsker.
        "tv": min(1.0, math.sqrt(2 * kl)),
    }
    if c.m > 0:
        outputs["w2_sq"] = 2 * L * c.d * gamma / c.m
    flags = {
        "constant_step": plan.kind == constants.CONSTANT,
        "step_within_1_over_L": gamma * L <= 1 + constants.ADMISSIBILITY_RTOL,
    }
    return outputs, flags


def _theorem_ula_rate(c, plan, horizon, variances, theorem):
    # pylint: disable=unused-argument
    n = max(horizon, 1)
    value = _averaged_kl(c, plan, n, theorem)
    alpha = plan.alpha
    if math.isclose(alpha, 0.5):
        rate = (math.log(n) + 1) / math.sqrt(n)
    else:
        rate = max(n ** (alpha - 1), n ** -alpha)
    flags = _plan_flags(c, plan, horizon, constants.VARIANT_ULA)
    flags["polynomial_plan"] = plan.kind == constants.POLY
    return {"kl": value, "rate": rate, "constant": value / rate}, flags


def _theorem_ula_w2(c, plan, horizon, variances, theorem):
    # pylint: disable=unused-argument
    c.require_positive_m(theorem)
    path = w2_bound_path(c, plan, horizon)
    flags = _plan_flags(c, plan, horizon, constants.VARIANT_ULA)
    flags.pop("admissible")
    return {"w2_sq": float(path[-1])}, flags


def _variance_series(c, horizon, variances, theorem):
    """Return the per-iteration oracle variances, measured or uniform."""
    if variances is None:
        return np.full(horizon, c.require("D2", theorem))
    variances = np.asarray(variances, dtype=float)
    if variances.shape != (horizon,):
        raise exceptions.DimensionError(
            "Expected {} variances, got shape {}".format(
                horizon,
                variances.shape,
            ),
        )
    return variances


_RULES = {
    constants.SPGLD_COCO: _rule_spgld_coco,
    constants.SPGLD_STRCONV: _rule_spgld_strconv,
    constants.SPGLD_STRCONV_UNIFORM: _rule_spgld_strconv_uniform,
    constants.SPGLD_UNIFORM: _rule_spgld_uniform,
    constants.SSGLD_COCO: _rule_ssgld_coco,
    constants.SSGLD_UNIFORM: _rule_ssgld_uniform,
    constants.ULA_CONVEX: _rule_ula_convex,
    constants.ULA_STRCONV_KL: _rule_ula_strconv_kl,
    constants.ULA_STRCONV_W2: _rule_ula_strconv_w2,
}


_THEOREMS = {
    constants.SPGLD_KL: _theorem_spgld_kl,
    constants.SPGLD_W2: _theorem_spgld_w2,
    constants.SSGLD_KL: _theorem_ssgld_kl,
    constants.ULA_AVG_KL: _theorem_ula_avg_kl,
    constants.ULA_BIAS: _theorem_ula_bias,
    constants.ULA_RATE: _theorem_ula_rate,
    constants.ULA_W2: _theorem_ula_w2,
}
