"""Loading of TOML run and benchmark configurations.

A configuration has up to four tables, [schedule], [sampler], [target] and
[experiment]. Missing keys take their defaults from constants, and unknown
tables or keys are errors.

"""
import os

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from langevin import (
    constants,
    exceptions,
    harness,
    model,
    oracles,
    samplers,
    schedules,
)


def build_experiment(config):
    """Build the benchmark design of a configuration.

    Parameters
    ----------
    config : dict
        A configuration returned by load_config.

    Returns
    -------
    ExperimentConfig
        The design, with its target built.

    """
    table = config.get("experiment", {})
    return harness.ExperimentConfig(
        target=build_target(config),
        samplers=tuple(_get(table, "samplers", list, [
            constants.SSGLD,
            constants.SPGLD,
        ])),
        taus=tuple(
            float(tau)
            for tau in _get(table, "tau", list, list(constants.TAUS))
        ),
        batch_divisors=tuple(
            int(divisor) for divisor in _get(
                table,
                "batch_fractions",
                list,
                list(constants.BATCH_DIVISORS),
            )
        ),
        replications=_get(table, "replications", int, constants.REPLICATIONS),
        iterations=_get(
            table,
            "iterations",
            int,
            constants.BENCHMARK_ITERATIONS,
        ),
        burn_in=_get(table, "burn_in", int, 0),
        seed=_get(table, "seed", int, 0),
        checkpoints=_get(
            table,
            "checkpoints",
            int,
            constants.CHECKPOINT_COUNT,
        ),
        reference_budget=_get(
            table,
            "reference_budget",
            int,
            constants.REFERENCE_BUDGET,
        ),
        workers=_get(table, "workers", int, 1),
        plots=_get(table, "plots", bool, True),
        functionals=tuple(_get(
            table,
            "functionals",
            list,
            list(constants.DEFAULT_FUNCTIONALS),
        )),
        start=_start(table),
    )


def build_oracle(config, target, kind):
    """Build the gradient oracle of a single run.

    Finite-sum targets get a minibatch oracle of size target.batch (all
    rows by default), in subgradient mode for SSGLD and smooth mode
    otherwise. Other targets and samplers use the exact default.

    Returns
    -------
    MinibatchOracle or None
        The oracle, or None for the sampler's exact default.

    """
    if target.model is None or kind in (constants.ULA, constants.PROX_MALA):
        return None
    table = config.get("target", {})
    batch = _get(table, "batch", int, target.model.rows)
    mode = constants.SMOOTH
    if kind == constants.SSGLD:
        mode = constants.SUBGRADIENT
    return oracles.MinibatchOracle(target.model, batch, mode)


def build_plan(config):
    """Build the step plan of the [schedule] table.

    The burn-in is read from the [sampler] table.

    """
    table = config.get("schedule", {})
    return schedules.StepPlan(
        kind=_get(table, "kind", str, constants.CONSTANT),
        gamma1=_get(table, "gamma1", float, 0.01),
        alpha=_get(table, "alpha", float, 0.5),
        switch_step=_get(table, "switch_step", int, 0),
        gamma2=_get(table, "gamma2", float, None),
        weights=_get(table, "weights", str, constants.GAMMA),
        lambda1=_get(table, "lambda1", float, None),
        weight_alpha=_get(table, "weight_alpha", float, None),
        burn_in=_get(config.get("sampler", {}), "burn_in", int, 0),
    )


def build_run(config):
    """Build the single-chain run of the [sampler] table."""
    table = config.get("sampler", {})
    start = _start(table)
    if start is not None:
        start = np.asarray(start)
    return samplers.RunConfig(
        kind=_get(table, "kind", str, constants.ULA),
        plan=build_plan(config),
        iterations=_get(table, "iterations", int, 10 ** 4),
        seed=_get(table, "seed", int, 0),
        stream=_get(table, "stream", int, 0),
        functionals=tuple(_get(
            table,
            "functionals",
            list,
            list(constants.DEFAULT_FUNCTIONALS),
        )),
        thin=_get(table, "thin", int, 0),
        start=start,
    )


def build_target(config):
    """Build the target of the [target] table.

    Returns
    -------
    Target
        The target.

    Raises
    ------
    ConfigError
        If the kind is unknown or a required key is missing.

    """
    table = config.get("target", {})
    kind = _get(table, "kind", str, constants.QUADRATIC)

    if kind == constants.QUADRATIC:
        if "hessian" not in table:
            raise exceptions.ConfigError("A quadratic target needs hessian")
        hessian = table["hessian"]
        if isinstance(hessian, int) and not isinstance(hessian, bool):
            hessian = float(hessian)
        if not isinstance(hessian, (float, list)):
            raise exceptions.ConfigError(
                "hessian must be a number or a list, got {!r}".format(hessian),
            )
        return harness.quadratic_target(hessian)

    if kind == constants.LAPLACE:
        return harness.laplace_target(
            dim=_get(table, "dim", int, 1),
            a1=_get(table, "a1", float, 1.0),
        )

    if kind == constants.LOGISTIC:
        scaled = "a1" in table or "a2" in table
        prior = constants.CUSTOM if scaled else constants.P1
        prior = _get(table, "prior", str, prior)
        if scaled and prior != constants.CUSTOM:
            raise exceptions.ConfigError(
                "Prior {} cannot take a1 or a2, use prior = \"custom\"".format(
                    prior,
                ),
            )
        a1, a2 = model.make_prior(
            prior,
            _get(table, "a1", float, None),
            _get(table, "a2", float, None),
        )
        return harness.logistic_target(
            _dataset(table),
            a1,
            a2,
            M=_get(table, "M", float, None),
        )

    raise exceptions.ConfigError("Unknown target kind {}".format(kind))


def load_config(path):
    """Read and check a TOML configuration file.

    A relative dataset path is resolved against the file's directory.

    Parameters
    ----------
    path : str
        The configuration file.

    Returns
    -------
    dict
        The parsed tables.

    Raises
    ------
    ConfigError
        If the file cannot be read or parsed, or has unknown tables or keys.

    """
    try:
        with open(path, "rb") as source:
            config = tomllib.load(source)
    except OSError as error:
        raise exceptions.ConfigError(
            "Could not read {}: {}".format(path, error.strerror),
        )
    except tomllib.TOMLDecodeError as error:
        raise exceptions.ConfigError("Malformed {}: {}".format(path, error))

    for name, table in config.items():
        if name not in KNOWN_KEYS:
            raise exceptions.ConfigError("Unknown table [{}]".format(name))
        if not isinstance(table, dict):
            raise exceptions.ConfigError("[{}] must be a table".format(name))
        unknown = sorted(set(table) - KNOWN_KEYS[name])
        if unknown:
            raise exceptions.ConfigError(
                "Unknown keys in [{}]: {}".format(name, ", ".join(unknown)),
            )

    target = config.get("target", {})
    dataset = target.get("dataset")
    if isinstance(dataset, str) and not os.path.isabs(dataset):
        directory = os.path.dirname(os.path.abspath(path))
        target["dataset"] = os.path.join(directory, dataset)

    return config


def _dataset(table):
    """Build the dataset of a logistic target."""
    if "dataset" in table and "synthetic" in table:
        raise exceptions.ConfigError("Give either dataset or synthetic")
    if "dataset" in table:
        return harness.ingest_dataset(
            _get(table, "dataset", str, None),
            add_intercept=_get(table, "add_intercept", bool, False),
        )

    synthetic = _get(table, "synthetic", dict, None)
    if synthetic is None:
        raise exceptions.ConfigError(
            "A logistic target needs dataset or synthetic",
        )
    unknown = sorted(set(synthetic) - {"seed", "rows", "cols"})
    if unknown:
        raise exceptions.ConfigError(
            "Unknown synthetic keys: {}".format(", ".join(unknown)),
        )
    rows, cols = constants.DATASET_SCALES["heart"]
    return harness.synthetic_dataset(
        seed=_get(synthetic, "seed", int, 0),
        rows=_get(synthetic, "rows", int, rows),
        cols=_get(synthetic, "cols", int, cols),
    )


def _get(table, key, kind, default):
    """Read a key of a table and check its type.

    Integers are accepted where floats are expected.

    Raises
    ------
    ConfigError
        If the value has the wrong type.

    """
    if key not in table:
        return default
    value = table[key]

    if kind is float and isinstance(value, int) and not isinstance(
        value,
        bool,
    ):
        return float(value)
    if kind is int and isinstance(value, bool):
        valid = False
    else:
        valid = isinstance(value, kind)
    if not valid:
        raise exceptions.ConfigError(
            "{} must be of type {}, got {!r}".format(
                key,
                kind.__name__,
                value,
            ),
        )
    return value


def _start(table):
    """Read an optional starting point as a tuple of floats."""
    start = _get(table, "start", list, None)
    if start is None:
        return None
    numeric = all(
        isinstance(value, (int, float)) and not isinstance(value, bool)
        for value in start
    )
    if not start or not numeric:
        raise exceptions.ConfigError(
            "start must be a list of numbers, got {!r}".format(start),
        )
    return tuple(float(value) for value in start)


KNOWN_KEYS = {
    "experiment": {
        "batch_fractions",
        "burn_in",
        "checkpoints",
        "functionals",
        "iterations",
        "plots",
        "reference_budget",
        "replications",
        "samplers",
        "seed",
        "start",
        "tau",
        "workers",
    },
    "sampler": {
        "burn_in",
        "functionals",
        "iterations",
        "kind",
        "seed",
        "start",
        "stream",
        "thin",
    },
    "schedule": {
        "alpha",
        "gamma1",
        "gamma2",
        "kind",
        "lambda1",
        "switch_step",
        "weight_alpha",
        "weights",
    },
    "target": {
        "M",
        "a1",
        "a2",
        "add_intercept",
        "batch",
        "dataset",
        "dim",
        "hessian",
        "kind",
        "prior",
        "synthetic",
    },
}
