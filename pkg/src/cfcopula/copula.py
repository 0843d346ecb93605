"""Empirical and counterfactual copula estimation.

The actual copula of two outcomes is estimated from ranks.  The
counterfactual copula reweights observations by kernel-ratio weights that
transport the sample covariates to their manipulated values, then applies
the same rank construction with weighted marginal CDFs.

Both estimators share one weighted grid-evaluation path, so the unweighted
case is literally the weighted case with unit weights.  The multiplier
form used by the bootstrap reuses the same path, which makes the
"multipliers all one" reduction exact at the bit level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, kernel_1d

RANK_BASED = "rank_based"
DEHEUVELS = "deheuvels"
_VARIANTS = (RANK_BASED, DEHEUVELS)

# slack for float dust on cumulative sums of weights
_EPS = 1e-9


class BandwidthTooSmallError(ValueError):
    """Some counterfactual target has no sample donor within bandwidth."""

    def __init__(self, columns, h):
        self.columns = list(columns)
        self.h = h
        shown = ", ".join(str(j) for j in self.columns[:10])
        more = "" if len(self.columns) <= 10 else f" (+{len(self.columns) - 10} more)"
        super().__init__(
            f"kernel denominator is zero for counterfactual rows [{shown}]{more}: "
            f"no donor within bandwidth h={h}; increase the bandwidth constant"
        )


class SupportViolationWarning(UserWarning):
    """Counterfactual covariates fall outside the sampled covariate box."""


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, 1) if a.ndim == 1 else a


@dataclass(frozen=True)
class ObservationSample:
    """One estimation sample: outcomes, covariates and manipulated covariates.

    Attributes
    ----------
    y1, y2 : array, shape (n,)
        The two outcomes.
    x : array, shape (n, d)
        Observed covariates (a 1-D array is treated as a single column).
    xstar : array, shape (n, d)
        Covariates after the manipulation, row-aligned with ``x``.
    discrete_mask : array of bool, shape (d,)
        Coordinates flagged True are matched exactly instead of smoothed.
    """

    y1: np.ndarray
    y2: np.ndarray
    x: np.ndarray
    xstar: np.ndarray
    discrete_mask: np.ndarray = None

    def __post_init__(self):
        y1 = np.asarray(self.y1, dtype=float)
        y2 = np.asarray(self.y2, dtype=float)
        x = _as_matrix(self.x)
        xstar = _as_matrix(self.xstar)
        n = y1.shape[0]
        if y1.ndim != 1 or y2.shape != (n,):
            raise ValueError("y1 and y2 must be one-dimensional with equal length")
        if x.shape[0] != n or xstar.shape != x.shape:
            raise ValueError(
                f"row mismatch: y has {n} rows, x has {x.shape[0]}, "
                f"xstar has shape {xstar.shape}"
            )
        if n < 2:
            raise ValueError(f"need at least 2 observations, got n={n}")
        for name, block in (("y1", y1), ("y2", y2), ("x", x), ("xstar", xstar)):
            if not np.all(np.isfinite(block)):
                raise ValueError(f"non-finite values in {name}")
        mask = self.discrete_mask
        mask = np.zeros(x.shape[1], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        if mask.shape != (x.shape[1],):
            raise ValueError("discrete_mask must have one entry per covariate column")
        object.__setattr__(self, "y1", y1)
        object.__setattr__(self, "y2", y2)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xstar", xstar)
        object.__setattr__(self, "discrete_mask", mask)

    @property
    def n(self):
        return self.y1.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


def support_violations(sample):
    """Indices of xstar rows outside the coordinate-wise box of the x rows.

    Rows listed here force the kernel weights to extrapolate.  This is a
    diagnostic, not an error: callers decide whether to warn or stop.
    """
    lo = sample.x.min(axis=0)
    hi = sample.x.max(axis=0)
    outside = (sample.xstar < lo) | (sample.xstar > hi)
    return np.flatnonzero(outside.any(axis=1))


def warn_on_support_violations(sample, limit=20):
    rows = support_violations(sample)
    if rows.size:
        shown = ", ".join(str(r) for r in rows[:limit])
        more = "" if rows.size <= limit else f" (+{rows.size - limit} more)"
        warnings.warn(
            f"{rows.size} counterfactual rows lie outside the sampled covariate "
            f"box: rows [{shown}]{more}; weights extrapolate there",
            SupportViolationWarning,
            stacklevel=2,
        )
    return rows


@dataclass(frozen=True)
class WeightVector:
    """Counterfactual weights with their diagnostics.

    ``w`` sums to n by construction: each target column of the kernel-ratio
    matrix is normalized to one before summing over targets.
    """

    w: np.ndarray
    negative_count: int
    sum: float

    @classmethod
    def from_array(cls, w):
        w = np.asarray(w, dtype=float)
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        return cls(w=w, negative_count=int(np.sum(w < 0)), sum=float(w.sum()))

    def __len__(self):
        return self.w.shape[0]


def unit_weights(n):
    return WeightVector.from_array(np.ones(n))


@dataclass(frozen=True)
class StepCDF:
    """Right-continuous step CDF with mass at finitely many support points.

    ``monotone`` is False when negative masses make the cumulative values
    non-monotone (possible under higher-order kernels).
    """

    support: np.ndarray
    cum: np.ndarray
    monotone: bool

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        idx = np.searchsorted(self.support, y, side="right") - 1
        vals = np.where(idx >= 0, self.cum[np.maximum(idx, 0)], 0.0)
        return float(vals) if vals.ndim == 0 else vals

    def __call__(self, y):
        return self.evaluate(y)

    @property
    def total_mass(self):
        return float(self.cum[-1])


def weighted_marginal_cdf(y, w):
    """Step CDF placing mass w_i/n at y_i (ties accumulate).

    With unit weights this is the empirical CDF.
    """
    y = np.asarray(y, dtype=float)
    wv = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    if y.shape != wv.shape:
        raise ValueError("y and weights must have the same length")
    n = y.shape[0]
    order = np.argsort(y, kind="stable")
    sy = y[order]
    cw = np.cumsum(wv[order]) / n
    last = np.flatnonzero(np.r_[sy[1:] != sy[:-1], True])
    support = sy[last]
    cum = cw[last]
    masses = np.diff(np.r_[0.0, cum])
    monotone = bool(np.all(masses >= -1e-12))
    return StepCDF(support=support, cum=cum, monotone=monotone)


def empirical_cdf(column):
    """Empirical CDF with mass 1/n at each observation."""
    column = np.asarray(column, dtype=float)
    if column.size == 0:
        raise ValueError("cannot build an empirical CDF from an empty column")
    return weighted_marginal_cdf(column, np.ones(column.shape[0]))


def generalized_inverse(F, u):
    """Quantile inf{y : F(y) >= u} of a step CDF, vectorized over u.

    u=0 returns the smallest support point (the literal inf is -inf) and u at
    the top is clamped to the largest support point.  For non-monotone CDFs
    the inf is taken against the running maximum of the cumulative values.
    """
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("quantile argument must lie in [0, 1]")
    target = np.maximum.accumulate(F.cum) if not F.monotone else F.cum
    idx = np.searchsorted(target, u, side="left")
    idx = np.minimum(idx, F.support.shape[0] - 1)
    vals = F.support[idx]
    return float(vals) if vals.ndim == 0 else vals


def counterfactual_joint_cdf(sample, w, y1, y2):
    """Weighted joint CDF (1/n) sum_i W_i 1{Y1_i <= y1, Y2_i <= y2}."""
    wv = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=float)
    inside = (sample.y1 <= y1) & (sample.y2 <= y2)
    return float(wv[inside].sum() / sample.n)


# --- counterfactual weights -------------------------------------------------

def counterfactual_weights(x, xstar, kernel=None, h=1.0, discrete_mask=None,
                           chunk=512):
    """Kernel-ratio weights transporting the sample to the manipulated covariates.

    W_i = sum_j K((X_i - X*_j)/h) / sum_l K((X_l - X*_j)/h).  Each target
    column is normalized by its donor total, so the weights sum to n.

    Parameters
    ----------
    x, xstar : array, shape (n, d) or (n,)
        Observed and manipulated covariates.
    kernel : KernelSpec
        Defaults to the Epanechnikov kernel.
    h : float or array of shape (d,)
        Bandwidth, shared or per coordinate.  Coordinates flagged discrete
        ignore it and match exactly.
    discrete_mask : array of bool, shape (d,), optional
    chunk : int
        Number of target columns processed at a time to bound memory.

    Raises
    ------
    BandwidthTooSmallError
        If some target column has a zero donor total.
    """
    X = _as_matrix(x)
    Xs = _as_matrix(xstar)
    if Xs.shape != X.shape:
        raise ValueError(f"x has shape {X.shape} but xstar has shape {Xs.shape}")
    n, d = X.shape
    kernel = KernelSpec() if kernel is None else kernel
    hvec = np.broadcast_to(np.asarray(h, dtype=float), (d,))
    mask = np.zeros(d, dtype=bool) if discrete_mask is None else np.asarray(discrete_mask, dtype=bool)
    if np.any(hvec[~mask] <= 0):
        raise ValueError("bandwidth must be positive for continuous coordinates")

    w = np.zeros(n)
    bad = []
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        kmat = np.ones((n, stop - start))
        for c in range(d):
            block = Xs[start:stop, c][None, :]
            if mask[c]:
                kmat *= X[:, c][:, None] == block
            else:
                kmat *= kernel_1d(kernel, (X[:, c][:, None] - block) / hvec[c])
        denom = kmat.sum(axis=0)
        zero = denom == 0.0
        if np.any(zero):
            bad.extend((start + np.flatnonzero(zero)).tolist())
            kmat = kmat[:, ~zero]
            denom = denom[~zero]
        if denom.size:
            w += (kmat / denom).sum(axis=1)
    if bad:
        raise BandwidthTooSmallError(bad, h)
    return WeightVector.from_array(w)


# --- rank machinery shared by all grid estimators ----------------------------

@dataclass(frozen=True)
class MarginRanks:
    """Precomputed sort data for one outcome column.

    Lets weighted pseudo-observations be recomputed for many weight vectors
    (bootstrap multipliers) without re-sorting.
    """

    order: np.ndarray
    pos: np.ndarray
    max_tie_run: int
    n: int

    def pseudo_obs(self, v):
        """u_i = (1/n) sum_j v_j 1{y_j <= y_i} for weight vector v."""
        cw = np.cumsum(v[self.order])
        return cw[self.pos] / self.n


def margin_ranks(y):
    y = np.asarray(y, dtype=float)
    order = np.argsort(y, kind="stable")
    sy = y[order]
    pos = np.searchsorted(sy, y, side="right") - 1
    boundaries = np.flatnonzero(np.r_[True, sy[1:] != sy[:-1], True])
    max_tie_run = int(np.max(np.diff(boundaries)))
    return MarginRanks(order=order, pos=pos, max_tie_run=max_tie_run, n=y.shape[0])


def _atom_indices(u, m):
    # first grid node k/m >= u_i, comparing floats exactly; m+1 marks atoms
    # genuinely above 1 (only float dust within 1e-9 is clamped back)
    nodes = np.arange(m + 1) / m
    idx = np.searchsorted(nodes, u, side="left")
    return np.where((idx > m) & (u <= 1.0 + _EPS), m, idx)


def weighted_rank_copula_values(u1, u2, v, m, n):
    """Grid values (1/n) sum_i v_i 1{u1_i <= a/m} 1{u2_i <= b/m}.

    Atoms with a pseudo-observation above 1 + 1e-9 (possible only under
    negative weights) fall off the grid and are excluded.
    """
    i1 = _atom_indices(np.asarray(u1, dtype=float), m)
    i2 = _atom_indices(np.asarray(u2, dtype=float), m)
    cells = np.zeros((m + 2, m + 2))
    np.add.at(cells, (i1, i2), v)
    values = cells.cumsum(axis=0).cumsum(axis=1)[: m + 1, : m + 1] / n
    return np.ascontiguousarray(values)


@dataclass(frozen=True)
class CopulaGrid:
    """Copula values on the uniform grid {(i/m, j/m)}.

    Flags record distributional validity: ``two_increasing`` is set when all
    rectangle increments are nonnegative (guaranteed under nonnegative
    weights), ``margins_uniform`` when both grid margins track the uniform
    within the largest marginal atom.
    """

    m: int
    values: np.ndarray
    two_increasing: bool
    margins_uniform: bool

    @property
    def nodes(self):
        return np.arange(self.m + 1) / self.m

    def at(self, u1, u2):
        """Value at a grid node given by coordinates (u1, u2)."""
        i = int(round(u1 * self.m))
        j = int(round(u2 * self.m))
        if not (0 <= i <= self.m and 0 <= j <= self.m) or not (
            np.isclose(i / self.m, u1) and np.isclose(j / self.m, u2)
        ):
            raise ValueError(f"({u1}, {u2}) is not a node of the m={self.m} grid")
        return float(self.values[i, j])


def _margins_uniform(values, m, jump_bound):
    nodes = np.arange(m + 1) / m
    dev = max(
        float(np.max(np.abs(values[:, m] - nodes))),
        float(np.max(np.abs(values[m, :] - nodes))),
    )
    return dev <= jump_bound + _EPS


def frechet_hoeffding_violation(grid):
    """Largest violation of the copula bounds max(u+v-1,0) <= C <= min(u,v)."""
    nodes = grid.nodes
    u = nodes[:, None]
    v = nodes[None, :]
    lower = np.maximum(u + v - 1.0, 0.0)
    upper = np.minimum(u, v)
    return float(
        max(np.max(lower - grid.values), np.max(grid.values - upper), 0.0)
    )


@dataclass(frozen=True)
class PseudoObservations:
    """Marginal-CDF values of the data points plus the weights attached to them."""

    u1: np.ndarray
    u2: np.ndarray
    w: np.ndarray


def pseudo_observations(sample, w=None):
    """Rank pseudo-observations of (y1, y2); weighted marginals when w is given."""
    n = sample.n
    v = np.ones(n) if w is None else (w.w if isinstance(w, WeightVector) else np.asarray(w, float))
    u1 = margin_ranks(sample.y1).pseudo_obs(v)
    u2 = margin_ranks(sample.y2).pseudo_obs(v)
    return PseudoObservations(u1=u1, u2=u2, w=v)


# --- grid estimators ---------------------------------------------------------

def _rearranged_pseudo_obs(ranks, v):
    # monotone rearrangement of the weighted CDF values before reading them
    # off at the data points
    cw = np.sort(np.cumsum(v[ranks.order]))
    return cw[ranks.pos] / ranks.n


def _deheuvels_indices(F, y, m):
    # node index a_i = smallest a in 1..m with F^{-1}(a/m) >= y_i; the u=0
    # threshold is the literal inf (-infinity), so node 0 gets no atom
    u = np.arange(1, m + 1) / m
    thresholds = generalized_inverse(F, u)
    return np.searchsorted(thresholds, y, side="left") + 1


def _grid_from_sample(y1, y2, v, m, variant, ranks1=None, ranks2=None,
                      rearrange=False):
    n = y1.shape[0]
    # pin the total mass to exactly n so the grid is a copula at (1, 1);
    # for unit weights the factor is exactly 1.0 and nothing changes
    total = v.sum()
    if not total > 0.0:
        raise ValueError(f"total weight mass must be positive, got {total}")
    v = v * (n / total)
    r1 = margin_ranks(y1) if ranks1 is None else ranks1
    r2 = margin_ranks(y2) if ranks2 is None else ranks2
    if variant == RANK_BASED:
        if rearrange:
            u1 = _rearranged_pseudo_obs(r1, v)
            u2 = _rearranged_pseudo_obs(r2, v)
        else:
            u1 = r1.pseudo_obs(v)
            u2 = r2.pseudo_obs(v)
        values = weighted_rank_copula_values(u1, u2, v, m, n)
    else:
        F1 = weighted_marginal_cdf(y1, v)
        F2 = weighted_marginal_cdf(y2, v)
        if rearrange:
            F1 = StepCDF(F1.support, np.sort(F1.cum), True)
            F2 = StepCDF(F2.support, np.sort(F2.cum), True)
        i1 = _deheuvels_indices(F1, y1, m)
        i2 = _deheuvels_indices(F2, y2, m)
        cells = np.zeros((m + 2, m + 2))
        np.add.at(cells, (i1, i2), v)
        values = np.ascontiguousarray(
            cells.cumsum(axis=0).cumsum(axis=1)[: m + 1, : m + 1] / n
        )
    jump = max(
        float(np.max(np.abs(v))) * r1.max_tie_run,
        float(np.max(np.abs(v))) * r2.max_tie_run,
    ) / n
    return values, jump


def empirical_copula(sample, m=100, variant=RANK_BASED):
    """Empirical copula of (y1, y2) on the m-grid.

    The default rank-based variant evaluates
    C(u1, u2) = (1/n) sum_i 1{F1(y1_i) <= u1, F2(y2_i) <= u2} with empirical
    marginal CDFs.  The deheuvels variant thresholds the outcomes at marginal
    quantiles instead; the two differ by at most one rank per margin.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    v = np.ones(sample.n)
    values, jump = _grid_from_sample(sample.y1, sample.y2, v, m, variant)
    return CopulaGrid(
        m=m,
        values=values,
        two_increasing=True,
        margins_uniform=_margins_uniform(values, m, jump),
    )


def counterfactual_copula(sample, w, m=100, variant=RANK_BASED, rearrange=False):
    """Counterfactual copula of (y1, y2) under the weights w on the m-grid.

    Rank-based variant (default):
    C*(u1, u2) = (1/n) sum_i W_i 1{F*_1(y1_i) <= u1, F*_2(y2_i) <= u2}
    with weighted marginal CDFs F*_j(y) = (1/n) sum_i W_i 1{y_ji <= y}.
    With unit weights this coincides with ``empirical_copula`` exactly.

    Negative weights (higher-order kernels) can break monotonicity of the
    weighted marginals; the default leaves the estimate untouched and clears
    the two_increasing flag.  ``rearrange=True`` opts into sorting the
    marginal CDF values into monotone order first.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if not isinstance(w, WeightVector):
        w = WeightVector.from_array(w)
    values, jump = _grid_from_sample(
        sample.y1, sample.y2, w.w, m, variant, rearrange=rearrange
    )
    return CopulaGrid(
        m=m,
        values=values,
        two_increasing=w.negative_count == 0,
        margins_uniform=_margins_uniform(values, m, jump),
    )
