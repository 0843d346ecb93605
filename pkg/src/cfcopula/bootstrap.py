"""Multinomial bootstrap for copula estimates, measures and policy effects.

Each replicate draws multinomial counts M with equal cell probabilities and
multiplies them into the estimators: the actual-copula replicate weights
observation i by M_i, the counterfactual replicate by M_i W_i, and the same
multipliers enter the weighted marginal CDFs used for the ranks.  Replicate
weight vectors are rescaled to total mass n (a no-op on the actual side,
where the counts sum to n by construction), so every replicate grid is a
copula at (1, 1) just like the point estimate.  Kernel weights W are NOT
recomputed per replicate by default; an opt-in mode resamples rows and
recomputes them instead.

Confidence intervals are symmetric around the point estimate with half-width
Q/sqrt(n), where Q is the level-quantile of the centered absolute deviations
|sqrt(n)(theta_b - theta_hat) - mean_b sqrt(n)(theta_b - theta_hat)| taken at
the ceiling-index order statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import association
from .copula import (
    CopulaGrid,
    ObservationSample,
    WeightVector,
    counterfactual_weights,
    margin_ranks,
    weighted_rank_copula_values,
)
from .kernels import bandwidth as _bandwidth
from .kernels import scale_from_sample

TARGETS = ("actual", "counterfactual", "effect")
MEASURES = association.MEASURES


class DegenerateReplicateError(RuntimeError):
    """A replicate kept collapsing onto a single row after the retry cap."""


@dataclass(frozen=True)
class BootstrapConfig:
    B: int = 1000
    level: float = 0.95
    seed: int = 0
    recompute_weights: bool = False

    def __post_init__(self):
        if self.B < 2:
            raise ValueError(f"need at least 2 bootstrap replicates, got B={self.B}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"coverage level must lie in (0, 1), got {self.level}")


@dataclass(frozen=True)
class BootstrapRun:
    """Replicate statistics and the derived interval for one scalar target."""

    target: str
    measure: str
    point: float
    replicates: np.ndarray
    q: float
    lo: float
    hi: float

    def covers(self, truth):
        return self.lo <= truth <= self.hi


@dataclass(frozen=True)
class BootstrapResult:
    """All scalar bootstrap targets of one run plus shared diagnostics."""

    runs: dict
    discarded: int
    config: BootstrapConfig

    def __getitem__(self, key):
        return self.runs[key]

    def interval(self, target, measure):
        r = self.runs[(target, measure)]
        return r.lo, r.hi


def multinomial_counts(n, rng):
    """One multinomial draw of n trials over n equiprobable cells."""
    return rng.multinomial(n, np.full(n, 1.0 / n))


def centered_quantile(replicates, point, n, level):
    """Ceiling-index level-quantile of centered absolute sqrt(n) deviations."""
    replicates = np.asarray(replicates, dtype=float)
    B = replicates.shape[0]
    if B < 2:
        raise ValueError("need at least 2 replicates")
    dev = math.sqrt(n) * (replicates - point)
    centered = np.abs(dev - dev.mean())
    k = math.ceil(level * B)
    return float(np.sort(centered)[k - 1])


def _replicate_seed(seed, b):
    return np.random.SeedSequence(entropy=seed, spawn_key=(b,))


def _is_degenerate(counts):
    return int(counts.max()) == counts.shape[0]


def _draw_counts(n, rng, max_retries=10):
    # redraw degenerate (single-row) resamples up to the retry cap
    for attempt in range(max_retries + 1):
        counts = multinomial_counts(n, rng)
        if not _is_degenerate(counts):
            return counts, attempt
    raise DegenerateReplicateError(
        f"replicate collapsed onto a single row {max_retries + 1} times in a row"
    )


def _grid_pair_from_multipliers(ranks1, ranks2, counts, w, m, n):
    v_act = counts.astype(float)
    u1 = ranks1.pseudo_obs(v_act)
    u2 = ranks2.pseudo_obs(v_act)
    act = weighted_rank_copula_values(u1, u2, v_act, m, n)
    # The actual-side mass sum(counts) is exactly n, but the resampled
    # counterfactual mass sum(counts * w) is not: left unnormalized it
    # fluctuates with sd of order sqrt(mean(w^2) - 1) / sqrt(n), a noise
    # component the point estimator (whose weights sum to n by
    # construction) does not have.  Rescale so every replicate is a copula.
    v_cf = v_act * w
    total = v_cf.sum()
    if total <= 0.0:
        raise DegenerateReplicateError(
            "resampled counterfactual mass is zero: every positive-count row "
            "has zero weight"
        )
    v_cf *= n / total
    u1c = ranks1.pseudo_obs(v_cf)
    u2c = ranks2.pseudo_obs(v_cf)
    cf = weighted_rank_copula_values(u1c, u2c, v_cf, m, n)
    return act, cf


def _as_grid(values, m):
    # bootstrap replicate grids skip the validity flags: their margins are
    # only near-uniform and nothing downstream reads the flags
    return CopulaGrid(m=m, values=values, two_increasing=True, margins_uniform=False)


def bootstrap_replicate(sample, counts, w, m=100, kernel=None, h=None,
                        recompute_weights=False, bandwidth_rule=None):
    """One bootstrap replicate: actual grid, counterfactual grid, reports.

    With ``recompute_weights`` the counts are expanded into an explicit
    row resample and the kernel weights are recomputed on it, which requires
    ``kernel`` and ``h``.  Passing ``bandwidth_rule`` as well rebuilds the
    bandwidth from the resampled covariate scale, treating it as part of the
    estimator being bootstrapped.  Otherwise the original weights are reused
    and the counts enter only as multipliers.
    """
    counts = np.asarray(counts)
    n = sample.n
    wv = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    if recompute_weights:
        rows = np.repeat(np.arange(n), counts)
        resample = ObservationSample(
            y1=sample.y1[rows],
            y2=sample.y2[rows],
            x=sample.x[rows],
            xstar=sample.xstar[rows],
            discrete_mask=sample.discrete_mask,
        )
        hb = h
        if bandwidth_rule is not None:
            hb = _bandwidth(
                replace(
                    bandwidth_rule,
                    scale=scale_from_sample(resample.x, resample.discrete_mask),
                ),
                n,
            )
        wb = counterfactual_weights(
            resample.x, resample.xstar, kernel=kernel, h=hb,
            discrete_mask=resample.discrete_mask,
        )
        r1 = margin_ranks(resample.y1)
        r2 = margin_ranks(resample.y2)
        ones = np.ones(n)
        act = weighted_rank_copula_values(
            r1.pseudo_obs(ones), r2.pseudo_obs(ones), ones, m, n
        )
        vb = wb.w * (n / wb.w.sum())
        cf = weighted_rank_copula_values(
            r1.pseudo_obs(vb), r2.pseudo_obs(vb), vb, m, n
        )
    else:
        r1 = margin_ranks(sample.y1)
        r2 = margin_ranks(sample.y2)
        act, cf = _grid_pair_from_multipliers(r1, r2, counts, wv, m, n)
    act_grid = _as_grid(act, m)
    cf_grid = _as_grid(cf, m)
    reports = {
        "actual": association.measures_from_grid(act_grid),
        "counterfactual": association.measures_from_grid(cf_grid),
    }
    reports["effect"] = association.policy_effect(
        reports["counterfactual"], reports["actual"]
    )
    return act_grid, cf_grid, reports


def run_bootstrap(sample, config, w=None, kernel=None, h=None, m=100,
                  bandwidth_rule=None):
    """Bootstrap intervals for every measure of {actual, counterfactual, effect}.

    The point estimates are the rank-based copula grids of the sample; the
    returned result holds one BootstrapRun per (target, measure) pair.  The
    whole run is a pure function of (sample, config, weights, m).
    ``bandwidth_rule`` only matters under ``config.recompute_weights``, where
    it makes each replicate rebuild its bandwidth from the resampled
    covariates.
    """
    n = sample.n
    if w is None:
        w = counterfactual_weights(
            sample.x, sample.xstar, kernel=kernel, h=h,
            discrete_mask=sample.discrete_mask,
        )
    wv = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=float)

    r1 = margin_ranks(sample.y1)
    r2 = margin_ranks(sample.y2)
    ones = np.ones(n)
    act_point, cf_point = _grid_pair_from_multipliers(
        r1, r2, np.ones(n, dtype=np.int64), wv, m, n
    )
    point = {
        "actual": association.measures_from_grid(_as_grid(act_point, m)),
        "counterfactual": association.measures_from_grid(_as_grid(cf_point, m)),
    }
    point["effect"] = association.policy_effect(
        point["counterfactual"], point["actual"]
    )

    stats = {key: np.empty(config.B) for key in _target_keys()}
    discarded = 0
    for b in range(config.B):
        rng = np.random.default_rng(_replicate_seed(config.seed, b))
        counts, redraws = _draw_counts(n, rng)
        discarded += redraws
        if config.recompute_weights:
            _, _, reports = bootstrap_replicate(
                sample, counts, w, m=m, kernel=kernel, h=h,
                recompute_weights=True, bandwidth_rule=bandwidth_rule,
            )
            for target in TARGETS:
                rep = reports[target]
                for measure in MEASURES:
                    stats[(target, measure)][b] = getattr(rep, measure)
        else:
            act, cf = _grid_pair_from_multipliers(r1, r2, counts, wv, m, n)
            arep = association.measures_from_grid(_as_grid(act, m))
            crep = association.measures_from_grid(_as_grid(cf, m))
            for measure in MEASURES:
                a_val = getattr(arep, measure)
                c_val = getattr(crep, measure)
                stats[("actual", measure)][b] = a_val
                stats[("counterfactual", measure)][b] = c_val
                stats[("effect", measure)][b] = c_val - a_val

    runs = {}
    for target, measure in _target_keys():
        theta = getattr(point[target], measure)
        reps = stats[(target, measure)]
        q = centered_quantile(reps, theta, n, config.level)
        half = q / math.sqrt(n)
        runs[(target, measure)] = BootstrapRun(
            target=target,
            measure=measure,
            point=theta,
            replicates=reps,
            q=q,
            lo=theta - half,
            hi=theta + half,
        )
    return BootstrapResult(runs=runs, discarded=discarded, config=config)


def _target_keys():
    return [(t, m) for t in TARGETS for m in MEASURES]


@dataclass(frozen=True)
class SupBand:
    """Uniform confidence band for a copula grid."""

    half_width: float
    lo: np.ndarray
    hi: np.ndarray


def sup_band(replicate_grids, point_grid, n, level):
    """Uniform band from the sup-norm of centered replicate grid deviations."""
    point = point_grid.values
    devs = np.stack(
        [math.sqrt(n) * (g.values - point) for g in replicate_grids], axis=0
    )
    centered = devs - devs.mean(axis=0, keepdims=True)
    sups = np.max(np.abs(centered), axis=(1, 2))
    B = sups.shape[0]
    k = math.ceil(level * B)
    q = float(np.sort(sups)[k - 1])
    half = q / math.sqrt(n)
    return SupBand(
        half_width=half,
        lo=np.clip(point - half, 0.0, 1.0),
        hi=np.clip(point + half, 0.0, 1.0),
    )
