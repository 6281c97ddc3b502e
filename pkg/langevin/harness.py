"""The Bayesian logistic regression benchmark.

A benchmark runs every (sampler, tau, batch) cell of a grid for a number
of replications, and measures the absolute errors of the posterior
functionals against a reference: exact moments for Gaussian and Laplace
targets, a long prox-MALA run for logistic posteriors.

"""
import concurrent.futures
import dataclasses
import datetime
import hashlib
import io
import json
import os

import numpy as np
import pandas as pd
from scipy import special

from langevin import (
    constants,
    exceptions,
    model,
    oracles,
    plotting,
    reporting,
    samplers,
    schedules,
    utilities,
)


@dataclasses.dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """The design of a benchmark.

    Attributes
    ----------
    target : Target
        The posterior to sample.
    samplers : tuple of str
        Sampler kinds.
    taus : tuple of float
        Step size multipliers, with gamma = tau / (L + m).
    batch_divisors : tuple of int
        Batches are max(1, floor(N / divisor)).
    replications : int
        Independent runs per cell.
    iterations : int
        Averaged iterations per run.
    burn_in : int
        Iterations discarded before averaging.
    seed : int
        The seed shared by every cell; replication r uses stream r.
    checkpoints : int
        The number of geometrically spaced checkpoints.
    reference_budget : int
        The prox-MALA reference run length.
    workers : int
        Worker processes. 1 runs every cell in this process.
    plots : bool
        Whether to write SVG figures.
    functionals : tuple of str
        The functionals to estimate.
    start : tuple of float or None
        The starting point of every chain. The target's minimizer when
        None.

    """

    target: object
    samplers: tuple = (constants.SSGLD, constants.SPGLD)
    taus: tuple = constants.TAUS
    batch_divisors: tuple = constants.BATCH_DIVISORS
    replications: int = constants.REPLICATIONS
    iterations: int = constants.BENCHMARK_ITERATIONS
    burn_in: int = 0
    seed: int = 0
    checkpoints: int = constants.CHECKPOINT_COUNT
    reference_budget: int = constants.REFERENCE_BUDGET
    workers: int = 1
    plots: bool = True
    functionals: tuple = constants.DEFAULT_FUNCTIONALS
    start: tuple = None

    def __post_init__(self):
        dim = self.target.potential.dim
        if self.start is not None and len(self.start) != dim:
            raise exceptions.ConfigError(
                "start must have {} coordinates".format(dim),
            )
        if any(not tau > 0 for tau in self.taus):
            raise exceptions.ConfigError("Every tau must be positive")
        if self.replications < 1:
            raise exceptions.ConfigError("replications must be at least 1")
        if self.iterations < 1:
            raise exceptions.ConfigError("iterations must be at least 1")
        if any(divisor < 1 for divisor in self.batch_divisors):
            raise exceptions.ConfigError("Batch divisors must be positive")
        if self.workers < 1:
            raise exceptions.ConfigError("workers must be at least 1")
        for kind in self.samplers:
            if kind not in constants.SAMPLER_KINDS:
                raise exceptions.ConfigError(
                    "Unknown sampler kind {}".format(kind),
                )
            smooth_only = kind in (constants.ULA, constants.SGLD)
            if smooth_only and self.target.potential.u2 is not None:
                raise exceptions.ConfigError(
                    "{} cannot sample a target with a non-smooth part".format(
                        kind,
                    ),
                )


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    """The tables produced by run_experiment."""

    errors: pd.DataFrame
    summary: pd.DataFrame
    reference: dict


@dataclasses.dataclass(frozen=True)
class ReferenceRun:
    """Reference values of the functionals from a long prox-MALA run.

    Attributes
    ----------
    fingerprint : str
        The target's fingerprint.
    prior : list or None
        The prior scales [a1, a2] of a logistic target.
    gamma : float
        The tuned step size.
    budget : int
        The number of iterations.
    seed : int
        The seed.
    estimates : dict
        Functional name to estimate.
    standard_errors : dict
        Functional name to batch-means standard error.
    acceptance_rate : float
        The acceptance rate of the run.
    timestamp : str
        When the run finished, in ISO format.

    """

    fingerprint: str
    prior: list
    gamma: float
    budget: int
    seed: int
    estimates: dict
    standard_errors: dict
    acceptance_rate: float
    timestamp: str

    @classmethod
    def from_dict(cls, data):
        """Rebuild a reference run from its JSON form."""
        return cls(**data)

    def to_dict(self):
        """Return the JSON form of the reference run."""
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True, eq=False)
class Target:
    """A posterior to benchmark.

    Attributes
    ----------
    kind : str
        One of constants.TARGET_KINDS.
    potential : CompositePotential
        The potential, with its minimizer.
    model : LogisticModel or None
        The finite-sum model behind minibatch oracles.
    fingerprint : str
        A digest of the data and the prior.
    exact : dict or None
        Exact values of the functionals, when known.

    """

    kind: str
    potential: model.CompositePotential
    model: object = None
    fingerprint: str = ""
    exact: dict = None


def batch_means_se(values, n_batches):
    """Estimate the standard error of a chain average by batch means.

    Parameters
    ----------
    values : array_like
        The per-iteration values. A remainder beyond a whole number of
        batches is dropped.
    n_batches : int
        The number of batches, at least 2.

    Returns
    -------
    float
        The standard deviation of the batch means over sqrt(n_batches).

    Raises
    ------
    EmptySampleError
        If there are fewer values than batches.

    """
    # Parameter check.
    assert n_batches >= 2

    values = np.asarray(values, dtype=float)
    size = len(values) // n_batches
    if size == 0:
        raise exceptions.EmptySampleError(
            "{} values cannot fill {} batches".format(len(values), n_batches),
        )
    means = values[:size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


def checkpoint_schedule(iterations, count):
    """Return up to count geometrically spaced checkpoints ending at n."""
    points = np.geomspace(1, iterations, num=max(count, 1))
    return tuple(sorted(set(int(round(p)) for p in points) | {iterations}))


def ingest_dataset(path, add_intercept=False):
    """Read and standardize a CSV dataset for logistic regression.

    The file needs a header row, a label column named y with values 0 or 1
    and numeric feature columns. Each feature is standardized to mean 0
    and variance 1, and an optional intercept column of ones is appended
    afterwards.

    Parameters
    ----------
    path : str
        The CSV file.
    add_intercept : bool, optional
        Whether to append the intercept column. The default is False.

    Returns
    -------
    Dataset
        The dataset, fingerprinted by the file bytes and the options.

    Raises
    ------
    DatasetError
        If the file is unreadable, has missing or non-numeric cells,
        non-binary labels or a constant feature.

    """
    try:
        with open(path, "rb") as source:
            raw = source.read()
        table = pd.read_csv(io.BytesIO(raw))
    except (OSError, ValueError, pd.errors.ParserError) as error:
        raise exceptions.DatasetError(
            "Could not read {}: {}".format(path, error),
        )

    if constants.LABEL_COLUMN not in table.columns:
        raise exceptions.DatasetError(
            "No label column {} in {}".format(constants.LABEL_COLUMN, path),
        )
    if table.isna().any().any():
        raise exceptions.DatasetError("{} has missing cells".format(path))

    features = table.drop(columns=constants.LABEL_COLUMN)
    if features.shape[1] == 0 and not add_intercept:
        raise exceptions.DatasetError("{} has no features".format(path))
    try:
        X = features.to_numpy(dtype=float)
        Y = table[constants.LABEL_COLUMN].to_numpy(dtype=float)
    except ValueError:
        raise exceptions.DatasetError("{} has non-numeric cells".format(path))
    if not np.all((Y == 0) | (Y == 1)):
        raise exceptions.DatasetError("Labels must be 0 or 1")

    names = tuple(str(name) for name in features.columns)
    digest = utilities.fingerprint(
        raw + "|intercept={}".format(add_intercept).encode(),
    )
    return _make_dataset(X, Y, names, add_intercept, digest)


def laplace_target(dim=1, a1=1.0):
    """Build the Laplace target with potential a1 * sum |x_i|.

    Its smooth part is zero, so it has a global Lipschitz constant
    a1 sqrt(d), and its functionals are known exactly.

    """
    term = model.make_laplace_term(dim, a1)
    p = model.make_quadratic(np.zeros(dim), u2=term)
    p = dataclasses.replace(p, M=term.M2)
    exact = {
        constants.FIRST_COORDINATE: 0.0,
        constants.MEAN_SQUARE: 2.0 / a1 ** 2,
        constants.SQUARED_NORM: 2.0 * dim / a1 ** 2,
    }
    digest = _digest({"kind": constants.LAPLACE, "dim": dim, "a1": a1})
    return Target(constants.LAPLACE, p, None, digest, exact)


def logistic_target(dataset, a1, a2, M=None):
    """Build a logistic posterior target.

    Parameters
    ----------
    dataset : Dataset
        The data.
    a1 : float
        The Laplace prior scale.
    a2 : float
        The ridge prior scale.
    M : float, optional
        A Lipschitz constant for bounds. The posterior has none, so a
        supplied M makes such bounds heuristic.

    Returns
    -------
    Target
        The target, with its minimizer computed.

    """
    logistic = model.LogisticModel(dataset.X, dataset.Y, a1=a1, a2=a2)
    p = model.with_minimizer(model.logistic_potential(logistic))
    if M is not None:
        p = dataclasses.replace(p, M=M, heuristic=True)
    digest = _digest({
        "kind": constants.LOGISTIC,
        "data": dataset.fingerprint,
        "a1": a1,
        "a2": a2,
    })
    return Target(constants.LOGISTIC, p, logistic, digest)


def quadratic_target(hessian):
    """Build the Gaussian target N(0, H^-1) with its exact functionals."""
    p = model.make_quadratic(hessian)
    if not p.m > 0:
        raise exceptions.ModelError("A Gaussian target needs H positive")
    H = p.u1.H
    covariance = np.linalg.inv(H)
    variances = np.diagonal(covariance)
    exact = {
        constants.FIRST_COORDINATE: 0.0,
        constants.MEAN_SQUARE: float(np.mean(variances)),
        constants.SQUARED_NORM: float(np.sum(variances)),
    }
    digest = _digest({"kind": constants.QUADRATIC, "H": H.tolist()})
    return Target(constants.QUADRATIC, p, None, digest, exact)


def reference_run(target, budget=constants.REFERENCE_BUDGET, seed=0,
                  cache_dir=None, progress=False):
    """Compute reference functionals with a tuned prox-MALA chain.

    The step size is first tuned to an acceptance rate of
    constants.TARGET_ACCEPTANCE within constants.ACCEPTANCE_BAND, then a
    chain of budget iterations starts where tuning stopped. Results are
    cached by target fingerprint, budget and seed.

    Parameters
    ----------
    target : Target
        The target.
    budget : int, optional
        The number of iterations, at least constants.MIN_REFERENCE_BUDGET.
    seed : int, optional
        The seed. The default is 0.
    cache_dir : str, optional
        Where cached runs are kept. Nothing is cached when omitted.
    progress : bool, optional
        Whether to print a progress bar.

    Returns
    -------
    ReferenceRun
        The estimates with batch-means standard errors.

    Raises
    ------
    ConfigError
        If the budget is too small.
    TuningError
        If the step size cannot be tuned.

    """
    if budget < constants.MIN_REFERENCE_BUDGET:
        raise exceptions.ConfigError(
            "A reference run needs at least {:,} iterations".format(
                constants.MIN_REFERENCE_BUDGET,
            ),
        )

    cache_path = None
    if cache_dir is not None:
        key = _digest({
            "fingerprint": target.fingerprint,
            "budget": budget,
            "seed": seed,
        })
        cache_path = os.path.join(cache_dir, "reference_{}.json".format(key))
        if os.path.exists(cache_path):
            with open(cache_path) as source:
                return ReferenceRun.from_dict(json.load(source))

    p = target.potential
    start = p.x_star if p.x_star is not None else np.zeros(p.dim)
    tuning_rng = oracles.RngStream(seed, stream_id=0).generator()
    gamma, _, position = samplers.tune_prox_mala(p, start, tuning_rng)

    batch = budget // constants.REFERENCE_BATCHES
    config = samplers.RunConfig(
        kind=constants.PROX_MALA,
        plan=schedules.StepPlan(
            gamma1=gamma,
            weights=constants.CONSTANT,
            lambda1=1.0,
        ),
        iterations=budget,
        seed=seed,
        stream=1,
        functionals=constants.DEFAULT_FUNCTIONALS,
        start=position,
        checkpoints=tuple(
            batch * j for j in range(1, constants.REFERENCE_BATCHES + 1)
        ),
    )
    result = samplers.run_chain(config, p, progress=progress)

    standard_errors = {}
    for name in config.functionals:
        means = _batch_means(result.checkpoints, name, batch)
        standard_errors[name] = batch_means_se(means, len(means))

    reference = ReferenceRun(
        fingerprint=target.fingerprint,
        prior=_prior(target),
        gamma=gamma,
        budget=budget,
        seed=seed,
        estimates={k: float(v) for k, v in result.estimates.items()},
        standard_errors=standard_errors,
        acceptance_rate=result.acceptance_rate,
        timestamp=datetime.datetime.now().isoformat(timespec="seconds"),
    )
    if cache_path is not None:
        reporting.write_json(cache_path, reference.to_dict())
    return reference


def reference_values(config, cache_dir=None, progress=False):
    """Return the reference functionals of an experiment's target.

    Exact values are used when the target has them.

    Returns
    -------
    dict
        Functional name to {"value": ..., "se": ..., "source": ...}.

    """
    target = config.target
    if target.exact is not None:
        return {
            name: {"value": target.exact[name], "se": 0.0, "source": "exact"}
            for name in config.functionals
        }

    run = reference_run(
        target,
        budget=config.reference_budget,
        seed=config.seed,
        cache_dir=cache_dir,
        progress=progress,
    )
    return {
        name: {
            "value": run.estimates[name],
            "se": run.standard_errors[name],
            "source": "prox-MALA",
        }
        for name in config.functionals
    }


def run_experiment(config, out_dir=None, progress=False):
    """Run a benchmark grid and tabulate absolute errors.

    Every (sampler, tau, batch, replication) cell runs one chain with
    gamma = tau / (L + m). Running estimates at the checkpoints are
    compared with the reference values. A diverging cell is recorded with
    the status "diverged", and a cell raising any other package error with
    "failed: <error class>", instead of stopping the benchmark.

    Parameters
    ----------
    config : ExperimentConfig
        The design.
    out_dir : str, optional
        Where to write errors.csv, summary.csv, metadata.json, the cache
        and the figures. Nothing is written when omitted.
    progress : bool, optional
        Whether to print progress bars.

    Returns
    -------
    ExperimentResult
        The per-replication errors, the summary and the reference.

    """
    cache_dir = None
    if out_dir is not None:
        cache_dir = os.path.join(out_dir, constants.CACHE_DIRECTORY)
    reference = reference_values(config, cache_dir, progress)

    cells = _cells(config)
    rows = []
    start_time = datetime.datetime.now()
    if progress:
        utilities.print_progress_bar(start_time, 0, len(cells))

    for count, cell_rows in enumerate(_map_cells(cells, config.workers), 1):
        rows.extend(cell_rows)
        if progress:
            utilities.print_progress_bar(start_time, count, len(cells), 1)

    errors = _error_table(rows, reference)
    summary = summarize_errors(errors)

    if out_dir is not None:
        utilities.ensure_directory(out_dir)
        reporting.write_table(
            os.path.join(out_dir, constants.ERRORS_FILE),
            errors,
        )
        reporting.write_table(
            os.path.join(out_dir, constants.SUMMARY_FILE),
            summary,
        )
        reporting.write_json(
            os.path.join(out_dir, constants.METADATA_FILE),
            _metadata(config, reference),
        )
        if config.plots:
            plotting.plot_benchmark(summary, errors, out_dir)

    return ExperimentResult(errors, summary, reference)


def summarize_errors(errors):
    """Aggregate absolute errors across replications.

    Returns
    -------
    pandas.DataFrame
        Per (sampler, tau, batch, functional, n): the mean absolute error,
        its standard error, the mean effective passes and the numbers of
        diverged and failed replications.

    """
    keys = ["sampler", "tau", "batch", "functional", "n"]
    grouped = errors.groupby(keys, sort=True)
    summary = grouped.agg(
        mae=("error", "mean"),
        sd=("error", "std"),
        finite=("error", "count"),
        passes=("passes", "mean"),
    ).reset_index()
    diverged = grouped["status"].apply(
        lambda status: int((status == "diverged").sum()),
    )
    failed = grouped["status"].apply(
        lambda status: int(status.str.startswith("failed").sum()),
    )
    summary["diverged"] = diverged.to_numpy()
    summary["failed"] = failed.to_numpy()
    summary["se"] = summary["sd"] / np.sqrt(summary["finite"])
    return summary.drop(columns=["sd", "finite"])


def synthetic_dataset(seed, rows, cols):
    """Generate a standardized logistic dataset.

    Covariates are standard normal, coefficients are N(0, 1 / cols) and
    labels are Bernoulli(expit(X beta)), all drawn from one seeded stream.

    Parameters
    ----------
    seed : int
        The seed.
    rows : int
        N.
    cols : int
        d.

    Returns
    -------
    Dataset
        The dataset, fingerprinted by its generator settings.

    """
    if rows < 2 or cols < 1:
        raise exceptions.DatasetError("Need at least 2 rows and 1 column")

    rng = oracles.RngStream(seed).generator()
    X = rng.standard_normal((rows, cols))
    beta = rng.standard_normal(cols) / np.sqrt(cols)
    Y = (rng.random(rows) < special.expit(X @ beta)).astype(float)

    names = tuple("x{}".format(i + 1) for i in range(cols))
    digest = _digest({"synthetic": [seed, rows, cols]})
    return _make_dataset(X, Y, names, False, digest)


def _batch_means(checkpoints, name, batch):
    """Recover batch means from running averages at batch boundaries."""
    totals = np.array([0.0] + [row["n"] * row[name] for row in checkpoints])
    return np.diff(totals) / batch


def _cells(config):
    """List the grid cells of an experiment."""
    target = config.target
    p = target.potential
    checkpoints = checkpoint_schedule(config.iterations, config.checkpoints)
    start = None
    if config.start is not None:
        start = np.asarray(config.start, dtype=float)
    cells = []
    for kind in config.samplers:
        for tau in config.taus:
            gamma = tau / (p.L + p.m) if p.L + p.m > 0 else tau
            for batch in _batches(config, kind):
                oracle = _oracle(target, kind, batch)
                for replication in range(config.replications):
                    run = samplers.RunConfig(
                        kind=kind,
                        plan=schedules.StepPlan(
                            gamma1=gamma,
                            burn_in=config.burn_in,
                        ),
                        iterations=config.iterations,
                        seed=config.seed,
                        stream=replication,
                        functionals=config.functionals,
                        checkpoints=checkpoints,
                        start=start,
                    )
                    cells.append((kind, tau, batch, replication, run, p,
                                  oracle))
    return cells


def _batches(config, kind):
    """Return the batch sizes a sampler runs with."""
    model_ = config.target.model
    if model_ is None or kind in (constants.ULA, constants.PROX_MALA):
        rows = model_.rows if model_ is not None else 1
        return (rows,)
    sizes = [max(1, model_.rows // d) for d in config.batch_divisors]
    return tuple(dict.fromkeys(sizes))


def _digest(data):
    """Return a SHA-256 digest of JSON-serializable data."""
    text = json.dumps(data, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def _error_table(rows, reference):
    """Turn cell rows into the absolute error table."""
    table = pd.DataFrame(rows, columns=[
        "sampler",
        "tau",
        "batch",
        "replication",
        "n",
        "passes",
        "functional",
        "estimate",
        "status",
    ])
    truth = table["functional"].map(
        {name: entry["value"] for name, entry in reference.items()},
    )
    table["error"] = (table["estimate"] - truth).abs()
    return table


def _make_dataset(X, Y, names, add_intercept, digest):
    """Standardize the features and build a Dataset."""
    if X.shape[1]:
        scale = X.std(axis=0)
        if np.any(scale == 0):
            raise exceptions.DatasetError("A feature is constant")
        X = (X - X.mean(axis=0)) / scale
    if add_intercept:
        X = np.hstack([X, np.ones((X.shape[0], 1))])
        names = names + (constants.INTERCEPT_NAME,)
    X.setflags(write=False)
    Y.setflags(write=False)
    return model.Dataset(X=X, Y=Y, feature_names=names, fingerprint=digest)


def _map_cells(cells, workers):
    """Run cells in order, in worker processes when workers > 1."""
    if workers == 1:
        for cell in cells:
            yield _run_cell(cell)
        return
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_cell, cells)


def _metadata(config, reference):
    """Describe an experiment for metadata.json."""
    target = config.target
    p = target.potential
    metadata = {
        "target": target.kind,
        "fingerprint": target.fingerprint,
        "dimension": p.dim,
        "L": p.L,
        "m": p.m,
        "samplers": list(config.samplers),
        "taus": list(config.taus),
        "batch_divisors": list(config.batch_divisors),
        "replications": config.replications,
        "iterations": config.iterations,
        "burn_in": config.burn_in,
        "seed": config.seed,
        "start": (
            None if config.start is None
            else [float(value) for value in config.start]
        ),
        "reference": reference,
        "effective_passes": constants.EFFECTIVE_PASSES_DEFINITION,
    }
    if target.model is not None:
        metadata["rows"] = target.model.rows
        metadata["a1"] = target.model.a1
        metadata["a2"] = target.model.a2
    return metadata


def _oracle(target, kind, batch):
    """Build the oracle of a cell, or None for the exact default."""
    if target.model is None or kind in (constants.ULA, constants.PROX_MALA):
        return None
    mode = constants.SMOOTH
    if kind == constants.SSGLD:
        mode = constants.SUBGRADIENT
    return oracles.MinibatchOracle(target.model, batch, mode)


def _prior(target):
    """Return the prior scales of a target with a finite-sum model."""
    if target.model is None:
        return None
    return [float(target.model.a1), float(target.model.a2)]


def _run_cell(cell):
    """Run one replication of one cell and return its checkpoint rows.

    A failing chain gives rows with a "diverged" or "failed: <error>"
    status and no estimates, so the rest of the grid still runs.

    """
    kind, tau, batch, replication, run, p, oracle = cell
    head = [kind, tau, batch, replication]
    try:
        result = samplers.run_chain(run, p, oracle)
    except exceptions.DivergenceError:
        status = "diverged"
    except (exceptions.LangevinError, FloatingPointError) as error:
        status = "failed: {}".format(type(error).__name__)
    else:
        return [
            head + [row["n"], row["passes"], name, float(row[name]), "ok"]
            for row in result.checkpoints
            for name in run.functionals
        ]
    return [
        head + [n, np.nan, name, np.nan, status]
        for n in run.checkpoints
        for name in run.functionals
    ]
