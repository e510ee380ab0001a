"""Closed-form constants and Monte Carlo checks for the slice sampler's
instantiated-component overhead.

The quantity under study is K - H: how many components the slice sampler
instantiates beyond the occupied ones, conditionally on a fixed partition.
This module evaluates the printed constants (B1, B2, C_delta, D_alpha),
simulates the overhead by composing the exact same conditional draws the
sampler uses (weights, slices, stick extension), and runs the statistical
checks: the high-probability C_delta log n bound, exponential tails in t,
survival monotonicity under cluster merges, and the Poisson law of the
pure stick count.

Every check returns a small report dataclass with a ``passed`` flag and a
``to_dict`` for JSON serialization; failing configurations are reported
with their Monte Carlo error bars rather than raised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2 as _chi2

from .core import LABEL_DTYPE, ModelConfig, Partition, WeightState
from .randkit import RngStream
from .samplers import extend_components, sample_allocated_weights, sample_slices

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class BoundConstants:
    alpha: float
    delta: float
    b1: float
    b2: float
    c_delta: float
    d_alpha: float

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k))
                for k in ("alpha", "delta", "b1", "b2", "c_delta", "d_alpha")}


def overhead_bound_constants(alpha: float, delta: float) -> BoundConstants:
    """Evaluate the overhead-bound constants.

    b2 = (6 alpha + 1) / log 2
    b1 = 12 alpha + (1 + 3 alpha log(8 e (1+alpha)^2) + log 2) / log 2
    c_delta = b1 + b2 log(1/delta)
    d_alpha = b1 / log 2 + b2
    """
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    b2 = (6.0 * alpha + 1.0) / LN2
    b1 = 12.0 * alpha + (1.0 + 3.0 * alpha * math.log(8.0 * math.e * (1.0 + alpha) ** 2)
                         + LN2) / LN2
    c_delta = b1 + b2 * math.log(1.0 / delta)
    d_alpha = b1 / LN2 + b2
    return BoundConstants(alpha=alpha, delta=delta, b1=b1, b2=b2,
                          c_delta=c_delta, d_alpha=d_alpha)


def umin_tail_bound(n: int, alpha: float, x: float) -> float:
    """Upper bound n (alpha + n - 1) x (1 + log(1/x)) on P(u_min <= x) given
    any partition of n items. A bound, not a probability: it may exceed 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    return float(n * (alpha + n - 1.0) * x * (1.0 + math.log(1.0 / x)))


def umin_threshold(n: int, alpha: float, delta: float) -> float:
    """The slice level x(n, delta) = delta / (4 n (alpha+n-1) log(2 n
    (alpha+n-1) e / delta)), for which the u_min tail bound is <= delta/2."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    q = n * (alpha + n - 1.0)
    return float(delta / (4.0 * q * math.log(2.0 * q * math.e / delta)))


# ---------------------------------------------------------------------------
# overhead simulation


def resolve_partition_sizes(spec, n: int) -> np.ndarray:
    """Map a partition spec to block sizes summing to n.

    Accepted specs: "singleton", "one-block", "balanced:H" (sizes differ by
    at most one), or an explicit sequence of positive sizes.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(spec, str):
        if spec == "singleton":
            return np.ones(n, dtype=LABEL_DTYPE)
        if spec == "one-block":
            return np.array([n], dtype=LABEL_DTYPE)
        if spec.startswith("balanced:"):
            h = int(spec.split(":", 1)[1])
            if not 1 <= h <= n:
                raise ValueError(f"balanced spec needs 1 <= H <= n, got H={h}")
            base, extra = divmod(n, h)
            sizes = np.full(h, base, dtype=LABEL_DTYPE)
            sizes[:extra] += 1
            return sizes
        raise ValueError(f"unknown partition spec {spec!r}")
    sizes = np.asarray(spec, dtype=LABEL_DTYPE)
    if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 1):
        raise ValueError("explicit sizes must be a nonempty vector of positives")
    if int(sizes.sum()) != n:
        raise ValueError(f"sizes sum to {int(sizes.sum())}, expected {n}")
    return sizes


def _partition_from_sizes(sizes: np.ndarray) -> Partition:
    labels = np.repeat(np.arange(1, sizes.size + 1, dtype=LABEL_DTYPE), sizes)
    return Partition(labels=labels, sizes=sizes.copy())


@dataclass(frozen=True)
class OverheadSample:
    k_minus_h: int
    umin: float
    spec: str


class OverheadSamples:
    """Monte Carlo draws of the overhead K - H and of u_min for one
    (n, partition, alpha) configuration."""

    def __init__(self, spec: str, n: int, alpha: float,
                 k_minus_h: np.ndarray, umin: np.ndarray):
        self.spec = spec
        self.n = n
        self.alpha = alpha
        self.k_minus_h = k_minus_h
        self.umin = umin

    def __len__(self) -> int:
        return int(self.k_minus_h.size)

    def __getitem__(self, i: int) -> OverheadSample:
        return OverheadSample(k_minus_h=int(self.k_minus_h[i]),
                              umin=float(self.umin[i]), spec=self.spec)


def simulate_overhead(rng: RngStream, n: int, spec, alpha: float,
                      replicates: int, cfg: ModelConfig | None = None) -> OverheadSamples:
    """Draw the overhead distribution conditionally on a fixed partition.

    Each replicate runs the sampler's own conditional steps once: occupied
    weights plus leftover mass, per-observation slices, then the stick
    extension loop (the single shared implementation in the samplers
    module) counting how many components it instantiates.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    if cfg is None:
        cfg = ModelConfig()
    sizes = resolve_partition_sizes(spec, n)
    part = _partition_from_sizes(sizes)
    spec_name = spec if isinstance(spec, str) else "custom"
    k_minus_h = np.empty(replicates, dtype=np.int64)
    umins = np.empty(replicates)
    empty_tail = np.empty(0)
    for m in range(replicates):
        allocated, residual = sample_allocated_weights(rng, sizes, alpha)
        weights = WeightState(allocated=allocated, tail=empty_tail, residual=residual)
        _, umin = sample_slices(rng, part, weights)
        tail_w, _, _ = extend_components(rng, residual, umin, alpha, cfg,
                                         with_atoms=False)
        k_minus_h[m] = len(tail_w)
        umins[m] = umin
    return OverheadSamples(spec=spec_name, n=n, alpha=alpha,
                           k_minus_h=k_minus_h, umin=umins)


# ---------------------------------------------------------------------------
# statistical checks


@dataclass(frozen=True)
class OverheadBoundReport:
    n: int
    alpha: float
    delta: float
    spec: str
    threshold: float
    exceedance: float
    limit: float
    replicates: int
    passed: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "alpha": self.alpha, "delta": self.delta,
                "spec": self.spec, "threshold": self.threshold,
                "exceedance": self.exceedance, "limit": self.limit,
                "replicates": self.replicates, "passed": self.passed}


def check_overhead_bound(samples: OverheadSamples,
                         constants: BoundConstants) -> OverheadBoundReport:
    """Empirical P(K - H > c_delta log n) against delta plus three binomial
    standard errors. Valid for replicate counts of 10^3 and up."""
    m = len(samples)
    delta = constants.delta
    threshold = constants.c_delta * math.log(samples.n)
    exceedance = float(np.mean(samples.k_minus_h > threshold))
    limit = delta + 3.0 * math.sqrt(delta * (1.0 - delta) / m)
    return OverheadBoundReport(n=samples.n, alpha=samples.alpha, delta=delta,
                               spec=samples.spec, threshold=threshold,
                               exceedance=exceedance, limit=limit,
                               replicates=m, passed=exceedance <= limit)


@dataclass(frozen=True)
class TailCheckReport:
    n: int
    alpha: float
    spec: str
    t_grid: tuple
    tails: tuple
    limits: tuple
    mean_ratio: float
    mean_limit: float
    replicates: int
    passed: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "alpha": self.alpha, "spec": self.spec,
                "t_grid": list(self.t_grid), "tails": list(self.tails),
                "limits": list(self.limits), "mean_ratio": self.mean_ratio,
                "mean_limit": self.mean_limit, "replicates": self.replicates,
                "passed": self.passed}


def check_exponential_tail(samples: OverheadSamples, constants: BoundConstants,
                           t_grid=(0.5, 1.0, 2.0, 3.0)) -> TailCheckReport:
    """For each t: empirical P((K-H)/log n > b1 + b2 t) <= e^-t plus three
    binomial standard errors; and mean (K-H)/log n <= b1 + b2 (the first
    moment bound). Valid for replicate counts of 10^4 and up."""
    m = len(samples)
    logn = math.log(samples.n)
    ratio = samples.k_minus_h / logn
    tails = []
    limits = []
    ok = True
    for t in t_grid:
        thr = constants.b1 + constants.b2 * t
        tail = float(np.mean(ratio > thr))
        target = math.exp(-t)
        limit = target + 3.0 * math.sqrt(target * (1.0 - target) / m)
        tails.append(tail)
        limits.append(limit)
        ok = ok and tail <= limit
    mean_ratio = float(ratio.mean())
    mean_limit = constants.b1 + constants.b2
    ok = ok and mean_ratio <= mean_limit
    return TailCheckReport(n=samples.n, alpha=samples.alpha, spec=samples.spec,
                           t_grid=tuple(t_grid), tails=tuple(tails),
                           limits=tuple(limits), mean_ratio=mean_ratio,
                           mean_limit=mean_limit, replicates=m, passed=ok)


def simulate_umin(rng: RngStream, sizes, alpha: float, replicates: int,
                  chunk: int = 4096) -> np.ndarray:
    """Replicated draws of u_min given a fixed partition, without the
    extension step. Vectorized across replicates: weights come from the
    same normalized-Gamma construction as the Dirichlet draw, slices are
    uniforms scaled by each observation's own-block weight."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    sizes = np.asarray(sizes, dtype=LABEL_DTYPE)
    if sizes.ndim != 1 or sizes.size == 0 or np.any(sizes < 1):
        raise ValueError("sizes must be a nonempty vector of positives")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    conc = np.append(sizes.astype(float), alpha)
    owner = np.repeat(np.arange(sizes.size), sizes)
    n = int(sizes.sum())
    out = np.empty(replicates)
    done = 0
    gen = rng.gen
    while done < replicates:
        m = min(chunk, replicates - done)
        g = gen.standard_gamma(conc, size=(m, conc.size))
        np.maximum(g, 1e-300, out=g)
        w = g / g.sum(axis=1, keepdims=True)
        wi = w[:, owner]
        u = wi * gen.random((m, n))
        out[done:done + m] = u.min(axis=1)
        done += m
    return out


@dataclass(frozen=True)
class MergeStep:
    x: float
    p_unmerged: float
    p_merged: float
    pooled_se: float
    passed: bool


@dataclass(frozen=True)
class MergeReport:
    sizes: tuple
    merged_sizes: tuple
    alpha: float
    x_grid: tuple
    steps: tuple
    replicates: int
    passed: bool

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "merged_sizes": list(self.merged_sizes),
                "alpha": self.alpha, "x_grid": list(self.x_grid),
                "steps": [{"x": s.x, "p_unmerged": s.p_unmerged,
                           "p_merged": s.p_merged, "pooled_se": s.pooled_se,
                           "passed": s.passed} for s in self.steps],
                "replicates": self.replicates, "passed": self.passed}


def check_merge_monotonicity(rng: RngStream, sizes, r: int, s: int, x_grid,
                             replicates: int, alpha: float = 1.0) -> MergeReport:
    """Monte Carlo check that merging blocks r and s (1-based) does not
    increase P(u_min <= x) at any grid x, within three pooled binomial
    standard errors. Valid for replicate counts of 10^5 and up."""
    sizes = np.asarray(sizes, dtype=LABEL_DTYPE)
    h = sizes.size
    if not (1 <= r <= h and 1 <= s <= h):
        raise ValueError(f"block indices must lie in 1..{h}")
    if r == s:
        raise ValueError("merging a block with itself is a no-op; need r != s")
    keep = [i for i in range(h) if i not in (r - 1, s - 1)]
    merged = np.concatenate([sizes[keep],
                             [sizes[r - 1] + sizes[s - 1]]]).astype(LABEL_DTYPE)
    u_before = simulate_umin(rng, sizes, alpha, replicates)
    u_after = simulate_umin(rng, merged, alpha, replicates)
    steps = []
    ok = True
    for x in x_grid:
        p1 = float(np.mean(u_before <= x))
        p2 = float(np.mean(u_after <= x))
        se = math.sqrt(p1 * (1.0 - p1) / replicates + p2 * (1.0 - p2) / replicates)
        step_ok = p2 <= p1 + 3.0 * se
        steps.append(MergeStep(x=float(x), p_unmerged=p1, p_merged=p2,
                               pooled_se=se, passed=step_ok))
        ok = ok and step_ok
    return MergeReport(sizes=tuple(int(v) for v in sizes),
                       merged_sizes=tuple(int(v) for v in merged),
                       alpha=alpha, x_grid=tuple(float(x) for x in x_grid),
                       steps=tuple(steps), replicates=replicates, passed=ok)


@dataclass(frozen=True)
class PoissonCheckReport:
    x: float
    alpha: float
    rate: float
    sample_mean: float
    chi2_stat: float
    dof: int
    p_value: float
    significance: float
    replicates: int
    passed: bool

    def to_dict(self) -> dict:
        return {"x": self.x, "alpha": self.alpha, "rate": self.rate,
                "sample_mean": self.sample_mean, "chi2_stat": self.chi2_stat,
                "dof": self.dof, "p_value": self.p_value,
                "significance": self.significance,
                "replicates": self.replicates, "passed": self.passed}


def check_poisson_stick_law(rng: RngStream, x: float, alpha: float,
                            replicates: int, cfg: ModelConfig | None = None,
                            significance: float = 0.01) -> PoissonCheckReport:
    """The pure stick count at residual 1 and threshold x, minus one, is
    Poisson(alpha log(1/x)): chi-square goodness of fit with bins merged
    from the right until every expected count reaches 5. Valid for
    replicate counts of 10^5 and up."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    if replicates < 2:
        raise ValueError("replicates must be >= 2")
    if cfg is None:
        cfg = ModelConfig()
    counts = np.empty(replicates, dtype=np.int64)
    for m in range(replicates):
        tail_w, _, _ = extend_components(rng, 1.0, x, alpha, cfg, with_atoms=False)
        counts[m] = len(tail_w)
    shifted = counts - 1
    rate = alpha * math.log(1.0 / x)
    sample_mean = float(shifted.mean())

    kmax = int(shifted.max())
    observed = np.bincount(shifted, minlength=kmax + 1).astype(float)
    ks = np.arange(kmax + 1)
    pmf = np.exp(ks * math.log(rate) - rate
                 - np.array([math.lgamma(k + 1.0) for k in ks]))
    expected = replicates * pmf
    # everything past kmax lands in the final bin
    expected[-1] += replicates * max(0.0, 1.0 - float(pmf.sum()))
    # merge right-tail bins until each expected count is at least 5
    obs_b = list(observed)
    exp_b = list(expected)
    while len(exp_b) > 1 and exp_b[-1] < 5.0:
        exp_b[-2] += exp_b[-1]
        del exp_b[-1]
        obs_b[-2] += obs_b[-1]
        del obs_b[-1]
    obs_arr = np.asarray(obs_b)
    exp_arr = np.asarray(exp_b)
    stat = float((((obs_arr - exp_arr) ** 2) / exp_arr).sum())
    dof = max(1, obs_arr.size - 1)
    p_value = float(_chi2.sf(stat, dof))
    return PoissonCheckReport(x=x, alpha=alpha, rate=rate,
                              sample_mean=sample_mean, chi2_stat=stat,
                              dof=dof, p_value=p_value,
                              significance=significance,
                              replicates=replicates,
                              passed=p_value >= significance)
