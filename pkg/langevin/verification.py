"""Verification of the ULA inequalities on Gaussian targets.

Every check compares a quantity computed exactly from closed-form Gaussian
laws with the bound it must satisfy, so no sampling noise is involved.
A check passes when its worst margin, bound minus exact value, is at least
-constants.CHECK_TOLERANCE relative to the size of the terms.

"""
import datetime
import math
import os

import numpy as np
import pandas as pd

from langevin import (
    analytics,
    bounds,
    constants,
    exceptions,
    harness,
    oracles,
    reporting,
    schedules,
    utilities,
)


COLUMNS = [
    "check",
    "gamma",
    "k",
    "w2_exact",
    "w2_bound",
    "kl_exact",
    "kl_bound",
    "margin",
]


def bias_check():
    """Check KL(pi_gamma | pi) <= L d gamma and W2^2 <= 2 L d gamma / m."""
    rows = []
    for H in _hessians():
        target = analytics.target_law(H)
        c = _constants(H)
        for gamma in _step_grid(c.L):
            plan = schedules.StepPlan(gamma1=gamma)
            report = bounds.bound_rhs(constants.ULA_BIAS, c, plan, 1)
            stationary = analytics.ula_gaussian_stationary(H, gamma)
            kl = analytics.kl_gaussian(stationary, target)
            w2_sq = analytics.w2_gaussian(stationary, target) ** 2
            rows.append(_row(
                "bias",
                gamma,
                None,
                w2_sq,
                report.outputs["w2_sq"],
                kl,
                report.outputs["kl"],
            ))
    return rows


def contraction_check(steps):
    """Check exact W2^2(mu0 Q_k, pi) against its bound for every k."""
    rows = []
    recorded = set(
        harness.checkpoint_schedule(steps, constants.CHECKPOINT_COUNT),
    )
    for H in _hessians():
        target = analytics.target_law(H)
        x0 = np.full(target.dim, 3.0)
        start = analytics.point_mass(x0)
        c = _constants(H, W0_sq=analytics.w2_gaussian(start, target) ** 2)

        for name, plan in _plans(c.L):
            path = bounds.w2_bound_path(c, plan, steps)
            gammas = plan.gamma(np.arange(1, steps + 1))
            laws = analytics.ula_gaussian_path(H, gammas, start)
            worst = None
            for k, law in enumerate(laws):
                w2_sq = analytics.w2_gaussian(law, target) ** 2
                row = _row(name, plan.gamma(max(k, 1)), k, w2_sq, path[k])
                if k == 0:
                    continue
                if worst is None or row["margin"] < worst["margin"]:
                    worst = row
                if k in recorded:
                    rows.append(row)
            rows.append(worst)

        gamma = 0.5 / c.L
        w0 = math.sqrt(c.W0_sq)
        for k in sorted(recorded):
            law = analytics.ula_gaussian_law(H, gamma, k, x0)
            w2 = analytics.w2_gaussian(law, target)
            gap = analytics.gaussian_w2_gap(H, gamma, k, w0)
            rows.append(_row("gaussian-gap", gamma, k, w2 ** 2, gap ** 2))
    return rows


def entropy_flow_check(rng, samples):
    """Check the heat-flow entropy inequality on random Gaussian triples."""
    rows = []
    for _ in range(4 * samples):
        d = int(rng.choice((1, 2, 5)))
        mu = _random_law(rng, d)
        nu = _random_law(rng, d)
        gamma = float(10 ** rng.uniform(-3, 0))
        margin = analytics.entropy_flow_check(mu, nu, gamma)
        row = _row("entropy-flow", gamma, 1)
        row["margin"] = margin
        rows.append(row)
    return rows


def free_energy_check(rng, samples):
    """Check that F(mu) - F(pi) and KL(mu | pi) agree to 1e-9."""
    rows = []
    for _ in range(2 * samples):
        d = int(rng.choice((1, 2, 5)))
        H = _random_law(rng, d).cov
        mu = _random_law(rng, d)
        target = analytics.target_law(H)
        difference = (
            analytics.free_energy_gaussian(mu, H)
            - analytics.free_energy_gaussian(target, H)
        )
        kl = analytics.kl_gaussian(mu, target)
        row = _row("free-energy", None, None, kl_exact=kl, kl_bound=difference)
        row["margin"] = 1e-9 * max(1.0, kl) - abs(difference - kl)
        rows.append(row)
    return rows


def one_step_check(rng, samples):
    """Check the one-step free energy, energy and gradient-step inequalities.

    A BoundViolationError is recorded as a failing row.

    """
    rows = []
    for H in _hessians():
        c = _constants(H)
        for gamma in _step_grid(c.L):
            for _ in range(samples):
                mu0 = _random_law(rng, c.d)
                try:
                    report = analytics.one_step_gap_check(H, gamma, mu0)
                except exceptions.BoundViolationError as error:
                    report = error.inputs["report"]
                row = _row(
                    "one-step",
                    gamma,
                    1,
                    kl_exact=report["lhs"] / (2 * gamma),
                    kl_bound=report["rhs"] / (2 * gamma),
                )
                row["margin"] = report["min_margin"]
                if report["energy_identity_error"] > 1e-10:
                    row["margin"] = min(row["margin"], -1.0)
                rows.append(row)
    return rows


def run_validation(out_dir=None, steps=constants.VALIDATION_STEPS,
                   samples=constants.VALIDATION_SAMPLES, seed=0,
                   progress=False):
    """Run every verification check.

    Parameters
    ----------
    out_dir : str, optional
        Where to write validation.csv. Nothing is written when omitted.
    steps : int, optional
        The horizon of the contraction checks.
    samples : int, optional
        Random starting laws per (H, gamma) cell of the one-step check.
    seed : int, optional
        The seed of the random laws. The default is 0.
    progress : bool, optional
        Whether to print a progress bar over the checks.

    Returns
    -------
    tuple of (list, pandas.DataFrame)
        (name, passed, worst margin) for each check, and every row.

    """
    arguments = {
        "rng": oracles.RngStream(seed).generator(),
        "samples": samples,
        "steps": steps,
    }
    checks = []
    frames = []
    start_time = datetime.datetime.now()

    for count, (name, check, needs) in enumerate(CHECKS, 1):
        rows = check(*(arguments[need] for need in needs))
        table = pd.DataFrame(rows, columns=COLUMNS)
        worst = float(table["margin"].min())
        checks.append((name, worst >= -constants.CHECK_TOLERANCE, worst))
        frames.append(table)
        if progress:
            utilities.print_progress_bar(start_time, count, len(CHECKS), 1)

    table = pd.concat(frames, ignore_index=True)
    if out_dir is not None:
        reporting.write_table(
            os.path.join(out_dir, constants.VALIDATION_FILE),
            table,
        )
    return checks, table


def tuning_check():
    """Run ULA with tuned (gamma, n) and check W2^2 <= eps exactly."""
    rows = []
    for H in _hessians():
        target = analytics.target_law(H)
        x0 = np.full(target.dim, 2.0)
        w0_sq = analytics.w2_gaussian(analytics.point_mass(x0), target) ** 2
        c = _constants(H, W0_sq=w0_sq)
        for eps in constants.VALIDATION_EPSILONS:
            report = bounds.tune(constants.ULA_STRCONV_W2, c, eps)
            gamma, n = report.outputs["gamma"], report.outputs["n"]
            law = analytics.ula_gaussian_law(H, gamma, n, x0)
            w2_sq = analytics.w2_gaussian(law, target) ** 2
            rows.append(_row("tuning", gamma, n, w2_sq, eps))
    return rows


def _constants(H, **extra):
    """Return the ProblemConstants of the Gaussian target with Hessian H."""
    p = harness.quadratic_target(H).potential
    return bounds.problem_constants(p, **extra)


def _hessians():
    """Return the Hessians of the verification grid."""
    hessians = []
    for d in (1, 2, 5):
        hessians.append(np.ones(d))
        if d > 1:
            hessians.append(np.linspace(0.5, 2.0, d))
    rotation = np.array([[1.0, 1.0], [-1.0, 1.0]]) / math.sqrt(2)
    hessians.append(rotation @ np.diag([0.5, 2.0]) @ rotation.T)
    return hessians


def _plans(L):
    """Return the named step plans of the contraction check."""
    return [
        ("contraction-constant", schedules.StepPlan(gamma1=0.1 / L)),
        (
            "contraction-poly",
            schedules.StepPlan(kind=constants.POLY, gamma1=1 / L, alpha=0.5),
        ),
    ]


def _random_law(rng, d):
    """Draw a random non-degenerate Gaussian law."""
    A = rng.standard_normal((d, d))
    cov = A @ A.T / d + 0.1 * np.eye(d)
    return analytics.GaussianLaw(rng.standard_normal(d), cov)


def _row(check, gamma, k, w2_exact=np.nan, w2_bound=np.nan, kl_exact=np.nan,
         kl_bound=np.nan):
    """Build a validation row whose margin is the worst relative slack."""
    margins = []
    for exact, bound in ((w2_exact, w2_bound), (kl_exact, kl_bound)):
        if not (np.isnan(exact) or np.isnan(bound)):
            margins.append((bound - exact) / max(1.0, abs(bound)))
    return {
        "check": check,
        "gamma": gamma,
        "k": k,
        "w2_exact": w2_exact,
        "w2_bound": w2_bound,
        "kl_exact": kl_exact,
        "kl_bound": kl_bound,
        "margin": min(margins) if margins else np.nan,
    }


def _step_grid(L):
    """Return the step sizes of the one-step and bias checks."""
    return [gamma for gamma in (1e-3, 1e-2, 1e-1) if gamma * L < 1] + [1 / L]


CHECKS = [
    ("one-step", one_step_check, ("rng", "samples")),
    ("entropy-flow", entropy_flow_check, ("rng", "samples")),
    ("bias", bias_check, ()),
    ("contraction", contraction_check, ("steps",)),
    ("tuning", tuning_check, ()),
    ("free-energy", free_energy_check, ("rng", "samples")),
]
