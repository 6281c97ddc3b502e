import dataclasses
import datetime
import warnings

import numpy as np

from langevin import (
    constants,
    exceptions,
    oracles,
    schedules,
    utilities,
)


@dataclasses.dataclass
class ChainState:
    """The mutable state of one chain, or of a stack of independent chains.

    Attributes
    ----------
    k : int
        The number of transitions made so far.
    x : numpy.ndarray
        The position, of shape (d,) or (n_chains, d).
    rng : numpy.random.Generator
        The chain's random stream.
    sums : dict
        Weighted running sums of the registered functionals.
    weight_total : float
        The sum of the weights accumulated so far.
    passes : float
        The effective passes consumed so far.
    accepted : int
        Accepted Metropolis proposals, summed over chains.
    proposals : int
        Metropolis proposals made, summed over chains.

    """

    k: int
    x: np.ndarray
    rng: np.random.Generator
    sums: dict = dataclasses.field(default_factory=dict)
    weight_total: float = 0.0
    passes: float = 0.0
    accepted: int = 0
    proposals: int = 0

    @property
    def acceptance_rate(self):
        """float or None: The fraction of accepted proposals."""
        if self.proposals == 0:
            return None
        return self.accepted / self.proposals

    def estimates(self):
        """Return the weighted averages of the registered functionals."""
        if self.weight_total == 0:
            return {name: np.nan for name in self.sums}
        return {
            name: total / self.weight_total
            for name, total in self.sums.items()
        }


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """The configuration of one chain run.

    The burn-in is the plan's. Checkpoints are counts of averaged
    iterations at which the running estimates are recorded.

    """

    kind: str
    plan: schedules.StepPlan
    iterations: int
    seed: int
    stream: int = 0
    functionals: tuple = constants.DEFAULT_FUNCTIONALS
    thin: int = 0
    start: np.ndarray = None
    n_chains: int = 1
    checkpoints: tuple = ()

    def __post_init__(self):
        if self.kind not in constants.SAMPLER_KINDS:
            raise exceptions.ConfigError(
                "Unknown sampler kind {}".format(self.kind),
            )
        if self.iterations < 1:
            raise exceptions.ConfigError("iterations must be at least 1")
        if self.thin < 0:
            raise exceptions.ConfigError("thin must be non-negative")
        if self.n_chains < 1:
            raise exceptions.ConfigError("n_chains must be at least 1")
        for name in self.functionals:
            functional(name)

    @property
    def burn_in(self):
        """int: The number of iterations excluded from the averages."""
        return self.plan.burn_in


@dataclasses.dataclass(frozen=True)
class ChainResult:
    """The outcome of run_chain.

    Attributes
    ----------
    state : ChainState
        The final state.
    estimates : dict
        Functional name to weighted ergodic average.
    weight_total : float
        Lambda_{N,N+n}.
    passes : float
        The effective passes of the whole run, burn-in included.
    checkpoints : list of dict
        Running estimates with keys "n", "passes" and one per functional.
    trace : list of tuple
        (k, x) pairs kept every thin iterations.
    admissible : bool or None
        Whether the plan met the sampler's step hypotheses.

    """

    state: ChainState
    estimates: dict
    weight_total: float
    passes: float
    checkpoints: list
    trace: list
    admissible: bool

    @property
    def acceptance_rate(self):
        """float or None: The Metropolis acceptance rate."""
        return self.state.acceptance_rate


def acceptance_probability(p, x, y, gamma):
    """Compute the prox-MALA probability of accepting a move from x to y.

    Parameters
    ----------
    p : CompositePotential
        The target potential.
    x : numpy.ndarray
        The current point.
    y : numpy.ndarray
        The proposed point.
    gamma : float
        The step size.

    Returns
    -------
    float or numpy.ndarray
        min(1, exp(log_ratio)), per chain for stacked points.

    """
    return np.exp(np.minimum(0.0, _log_acceptance_ratio(p, x, y, gamma)))


def first_coordinate(x):
    """Return beta_1."""
    return x[..., 0]


def functional(name):
    """Look up a registered test functional by name.

    Raises
    ------
    ConfigError
        If the name is unknown.

    """
    try:
        return FUNCTIONALS[name]
    except KeyError:
        raise exceptions.ConfigError("Unknown functional {}".format(name))


def make_state(x, rng, functionals=()):
    """Make a fresh chain state at x with empty accumulators."""
    x = np.array(x, dtype=float)
    zeros = np.zeros(x.shape[:-1])
    sums = {name: zeros.copy() if zeros.ndim else 0.0 for name in functionals}
    return ChainState(k=0, x=x, rng=rng, sums=sums)


def mean_square(x):
    """Return (1/d) sum_i beta_i^2."""
    return np.mean(x ** 2, axis=-1)


def prox_mala_step(p, state, gamma):
    """Make one prox-MALA transition in place.

    The proposal is y ~ N(mu(x), 2 gamma I) with
    mu(x) = prox(gamma, x) - gamma grad U1(prox(gamma, x)), accepted with
    probability acceptance_probability(p, x, y, gamma). The uniform variate
    is drawn after the Gaussian one.

    Parameters
    ----------
    p : CompositePotential
        The target potential.
    state : ChainState
        The state, advanced in place.
    gamma : float
        The step size, positive.

    Returns
    -------
    ChainState
        The advanced state.

    Raises
    ------
    StepSizeError
        If gamma is not positive.

    """
    _check_positive(gamma)

    x = state.x
    noise = state.rng.standard_normal(x.shape)
    y = _proposal_mean(p, x, gamma) + np.sqrt(2 * gamma) * noise
    log_ratio = _log_acceptance_ratio(p, x, y, gamma)
    uniform = state.rng.random(np.shape(log_ratio))
    accept = np.log(uniform) < log_ratio

    state.x = np.where(np.expand_dims(accept, -1), y, x)
    state.accepted += int(np.sum(accept))
    state.proposals += int(np.size(accept))
    state.passes += 1.0
    state.k += 1
    return state


def run_chain(config, p, oracle=None, progress=False):
    """Run a chain and form weighted ergodic averages.

    Iterates X_1, ..., X_{N+n} are produced from the start X_0, and every
    functional f is estimated as Lambda^{-1} sum lambda_k f(X_k) over
    k = N + 1, ..., N + n. The result depends only on the configuration
    and the potential.

    Parameters
    ----------
    config : RunConfig
        The run configuration.
    p : CompositePotential
        The target potential.
    oracle : MinibatchOracle or ExactOracle, optional
        The gradient oracle of SGLD, SSGLD and SPGLD. By default the exact
        smooth gradient (SGLD, SPGLD) or exact subgradient (SSGLD).
    progress : bool, optional
        Whether to print a progress bar. The default is False.

    Returns
    -------
    ChainResult
        The estimates, the final state and the recorded checkpoints.

    Raises
    ------
    DivergenceError
        If the state stops being finite.
    ModelError
        If ULA or SGLD is asked to sample a potential with U2.
    StepSizeError
        If a ULA step size exceeds 1/L.

    """
    plan = config.plan
    burn_in = plan.burn_in
    total = burn_in + config.iterations

    if config.kind in (constants.ULA, constants.SGLD) and p.u2 is not None:
        raise exceptions.ModelError(
            "{} needs a potential without a non-smooth part".format(
                config.kind,
            ),
        )
    if oracle is None and config.kind != constants.PROX_MALA:
        oracle = _default_oracle(config.kind, p)

    admissible = _check_plan(config, p)

    # gammas[j] is gamma_j and lambdas[j] is lambda_j.
    indices = np.arange(total + 2)
    indices[0] = 1
    gammas = plan.gamma(indices)
    lambdas = plan.lam(indices)

    start = p.x_star if config.start is None else config.start
    if start is None:
        start = np.zeros(p.dim)
    start = np.asarray(start, dtype=float)
    if config.n_chains > 1:
        start = np.broadcast_to(start, (config.n_chains, p.dim))

    rng = oracles.RngStream(config.seed, config.stream).generator()
    state = make_state(start, rng, config.functionals)
    fns = {name: functional(name) for name in config.functionals}
    checkpoints = set(config.checkpoints)
    recorded = []
    trace = []
    start_time = datetime.datetime.now()

    for k in range(total):
        _transition(config.kind, p, oracle, state, gammas[k + 1],
                    gammas[k + 2])

        if not np.all(np.isfinite(state.x)):
            raise exceptions.DivergenceError(
                "Chain diverged at iteration {:,}".format(state.k),
                k=state.k,
                state=state.x.copy(),
            )

        if state.k > burn_in:
            weight = lambdas[state.k]
            for name, fn in fns.items():
                state.sums[name] = state.sums[name] + weight * fn(state.x)
            state.weight_total += weight

            averaged = state.k - burn_in
            if averaged in checkpoints:
                row = {"n": averaged, "passes": state.passes}
                row.update(state.estimates())
                recorded.append(row)

        if config.thin and state.k % config.thin == 0:
            trace.append((state.k, state.x.copy()))

        if progress:
            utilities.print_progress_bar(
                start_time,
                state.k,
                total,
                every=max(1, total // 1000),
            )

    if config.kind == constants.PROX_MALA:
        _check_acceptance(state.acceptance_rate)

    return ChainResult(
        state=state,
        estimates=state.estimates(),
        weight_total=state.weight_total,
        passes=state.passes,
        checkpoints=recorded,
        trace=trace,
        admissible=admissible,
    )


def sgld_step(oracle, state, gamma):
    """Make one stochastic gradient Langevin transition in place.

    This is ssgld_step with the same step size for drift and noise.

    """
    return ssgld_step(oracle, state, gamma, gamma)


def spgld_step(p, oracle, state, gamma_prox, gamma_grad):
    """Make one stochastic proximal gradient Langevin transition in place.

    y = prox(gamma_prox, x), then
    x' = y - gamma_grad Theta1(y, Z) + sqrt(2 gamma_grad) G. Without U2 the
    prox is the identity and the step reduces to SGLD.

    Parameters
    ----------
    p : CompositePotential
        The potential whose U2 is applied through its prox.
    oracle : MinibatchOracle or ExactOracle
        A smooth-part oracle.
    state : ChainState
        The state, advanced in place.
    gamma_prox : float
        gamma_{k+1}.
    gamma_grad : float
        gamma_{k+2}.

    Returns
    -------
    ChainState
        The advanced state.

    Raises
    ------
    StepSizeError
        If a step size is not positive.

    """
    _check_positive(gamma_prox)
    _check_positive(gamma_grad)

    y = p.prox(gamma_prox, state.x)
    drift = oracle.draw(y, state.rng)
    noise = state.rng.standard_normal(y.shape)
    state.x = y - gamma_grad * drift + np.sqrt(2 * gamma_grad) * noise
    state.passes += oracle.passes_per_draw
    state.k += 1
    return state


def squared_norm(x):
    """Return |beta|^2."""
    return np.sum(x ** 2, axis=-1)


def ssgld_step(oracle, state, gamma_drift, gamma_noise):
    """Make one stochastic subgradient Langevin transition in place.

    x' = x - gamma_drift Theta(x, Z) + sqrt(2 gamma_noise) G. The subset Z
    is drawn before G from the same stream.

    Parameters
    ----------
    oracle : MinibatchOracle or ExactOracle
        A subgradient oracle.
    state : ChainState
        The state, advanced in place.
    gamma_drift : float
        gamma_{k+1}.
    gamma_noise : float
        gamma_{k+2}.

    Returns
    -------
    ChainState
        The advanced state.

    Raises
    ------
    StepSizeError
        If a step size is not positive.

    """
    _check_positive(gamma_drift)
    _check_positive(gamma_noise)

    x = state.x
    drift = oracle.draw(x, state.rng)
    noise = state.rng.standard_normal(x.shape)
    state.x = x - gamma_drift * drift + np.sqrt(2 * gamma_noise) * noise
    state.passes += oracle.passes_per_draw
    state.k += 1
    return state


def tune_prox_mala(p, x0, rng, gamma0=None,
                   target=constants.TARGET_ACCEPTANCE,
                   band=constants.ACCEPTANCE_BAND,
                   rounds=constants.TUNING_ROUNDS,
                   steps=constants.TUNING_STEPS):
    """Tune the prox-MALA step size to a target acceptance rate.

    Each round runs a batch of steps at the current step size and moves
    log gamma by a decreasing gain times the acceptance error. The chain
    keeps running across rounds, so it also burns in.

    Parameters
    ----------
    p : CompositePotential
        The target potential.
    x0 : numpy.ndarray
        The starting point.
    rng : numpy.random.Generator
        The random stream.
    gamma0 : float, optional
        The first step size. The default is 1 / (L + m), or 1 when L = 0.
    target : float, optional
        The acceptance rate to reach.
    band : float, optional
        The accepted distance from the target.
    rounds : int, optional
        The maximum number of rounds.
    steps : int, optional
        The steps per round.

    Returns
    -------
    tuple
        The tuned step size, the acceptance rate of the last round and the
        chain's position.

    Raises
    ------
    TuningError
        If no round lands within the band.

    """
    # Parameter check.
    assert 0 < target < 1
    assert rounds >= 1
    assert steps >= 1

    if gamma0 is None:
        gamma0 = 1.0 / (p.L + p.m) if p.L > 0 else 1.0
    log_gamma = np.log(gamma0)
    state = make_state(x0, rng)

    for round_number in range(rounds):
        gamma = float(np.exp(log_gamma))
        state.accepted = 0
        state.proposals = 0
        for _ in range(steps):
            prox_mala_step(p, state, gamma)
        rate = state.acceptance_rate

        if abs(rate - target) <= band:
            return gamma, rate, state.x

        gain = 2.0 / (round_number + 1) ** 0.6
        log_gamma += gain * (rate - target)

    raise exceptions.TuningError(
        "Acceptance rate not within {} of {} after {} rounds".format(
            band,
            target,
            rounds,
        ),
    )


def ula_step(p, state, gamma):
    """Make one unadjusted Langevin transition in place.

    x' = x - gamma grad U(x) + sqrt(2 gamma) G, with G drawn from the
    chain's stream by numpy's standard normal sampler.

    Parameters
    ----------
    p : CompositePotential
        A potential without a non-smooth part.
    state : ChainState
        The state, advanced in place.
    gamma : float
        The step size, in (0, 1/L].

    Returns
    -------
    ChainState
        The advanced state.

    Raises
    ------
    ModelError
        If the potential has a non-smooth part.
    StepSizeError
        If gamma is outside (0, 1/L].

    """
    if p.u2 is not None:
        raise exceptions.ModelError("ULA needs a smooth potential")
    _check_positive(gamma)
    if gamma * p.L > 1 + constants.ADMISSIBILITY_RTOL:
        raise exceptions.StepSizeError(
            "Step size {} exceeds 1/L = {}".format(gamma, 1 / p.L),
        )

    x = state.x
    drift = p.u1.grad(x)
    noise = state.rng.standard_normal(x.shape)
    state.x = x - gamma * drift + np.sqrt(2 * gamma) * noise
    state.passes += 1.0
    state.k += 1
    return state


def _check_acceptance(rate):
    """Warn when a Metropolis acceptance rate is outside the target band."""
    distance = abs(rate - constants.TARGET_ACCEPTANCE)
    if distance > constants.ACCEPTANCE_BAND:
        warnings.warn(
            "Acceptance rate {:.3f} is outside {} +/- {}".format(
                rate,
                constants.TARGET_ACCEPTANCE,
                constants.ACCEPTANCE_BAND,
            ),
            exceptions.AcceptanceWarning,
        )


def _check_plan(config, p):
    """Check the plan's admissibility, warning when it fails."""
    if config.kind == constants.PROX_MALA:
        return None
    variant = constants.VARIANT_SGLD
    if config.kind == constants.ULA:
        variant = constants.VARIANT_ULA

    admissible = schedules.check_admissible(
        config.plan,
        p.m,
        variant,
        config.iterations,
    )
    if not admissible:
        warnings.warn(
            "Step plan breaks the {} step hypotheses".format(variant),
            exceptions.AdmissibilityWarning,
        )
    return admissible


def _check_positive(gamma):
    """Raise a StepSizeError unless gamma is positive."""
    if not gamma > 0:
        raise exceptions.StepSizeError(
            "Step size must be positive, got {}".format(gamma),
        )


def _default_oracle(kind, p):
    """Return the exact oracle a sampler uses when none is given."""
    mode = constants.SMOOTH
    if kind == constants.SSGLD:
        mode = constants.SUBGRADIENT
    return oracles.ExactOracle(p, mode)


def _log_acceptance_ratio(p, x, y, gamma):
    """Compute the prox-MALA log Metropolis-Hastings ratio."""
    forward = np.sum((y - _proposal_mean(p, x, gamma)) ** 2, axis=-1)
    backward = np.sum((x - _proposal_mean(p, y, gamma)) ** 2, axis=-1)
    return p.value(x) - p.value(y) + (forward - backward) / (4 * gamma)


def _proposal_mean(p, x, gamma):
    """Return prox(gamma, x) - gamma grad U1(prox(gamma, x))."""
    y = p.prox(gamma, x)
    return y - gamma * p.u1.grad(y)


def _transition(kind, p, oracle, state, gamma_next, gamma_after):
    """Dispatch one transition with gamma_{k+1} and gamma_{k+2}."""
    if kind == constants.ULA:
        ula_step(p, state, gamma_next)
    elif kind == constants.SGLD:
        sgld_step(oracle, state, gamma_next)
    elif kind == constants.SSGLD:
        ssgld_step(oracle, state, gamma_next, gamma_after)
    elif kind == constants.SPGLD:
        spgld_step(p, oracle, state, gamma_next, gamma_after)
    else:
        prox_mala_step(p, state, gamma_next)


FUNCTIONALS = {
    constants.FIRST_COORDINATE: first_coordinate,
    constants.MEAN_SQUARE: mean_square,
    constants.SQUARED_NORM: squared_norm,
}
