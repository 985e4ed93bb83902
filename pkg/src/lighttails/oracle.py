"""Ground-truth estimators for the weighted-sum tail, independent of the expansion.

Three methods:

  conditional_mc   integrates one variable out analytically, conditionally on
                   it carrying the largest summand: the sample value is

                     sum_i P(c_i X > max(M'_i, t - S'_i) | rest),

                   with S'_i the residual sum and M'_i the residual maximum
                   of the c_j X_j.  Decomposing the tail event by which
                   summand is largest keeps the estimator unbiased for the
                   truncated model while the M'_i floor removes the heavy
                   branch that makes the naive one-index conditional
                   estimator (average of P(c* X > t - S')) underestimate its
                   own sampling error deep in the tail.

  plain_mc         indicator Monte Carlo on the truncated sum.

  quadrature       recursive numerical convolution of up to four factors via
                   the splitting

                     P(X+Y > t) = int_{-inf}^{t/2} sfY(t-x) dX(x)
                                + int_{-inf}^{t/2} sfX(t-x) dY(x)
                                + sfX(t/2) * sfY(t/2),

                   each integral computed adaptively on a log-normalized
                   integrand so tails far below 1e-300 in product scale stay
                   representable.

Randomness contract: streams are keyed by (seed, variable index, block index)
through numpy's SeedSequence/Philox, with a fixed block size.  Results are
therefore reproducible from the seed alone, independent of how work is
partitioned, and extending the truncation level appends variables without
disturbing existing draws (which isolates truncation bias in paired runs).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .distributions import TailDistribution
from .errors import LightTailsError
from .expansion import TailExpansion, evaluate
from .weights import WeightSequence

__all__ = [
    "OracleEstimate", "OracleBudget", "QuadratureToleranceError",
    "conditional_mc", "plain_mc", "quadrature_estimate",
    "ScaledFactor", "PointMassFactor", "convolve_pair_sf", "convolved_sf",
    "ComparisonTable", "compare_with_oracle",
]

_BLOCK = 1 << 18


class QuadratureToleranceError(LightTailsError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, achieved: float, requested: float):
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"quadrature achieved error bound {achieved:.3e}, requested {requested:.3e}"
        )


@dataclass(frozen=True)
class OracleEstimate:
    t: float
    p_hat: float
    std_err: float
    n_samples: int
    truncation_n: int
    truncation_bias_bound: float
    seed: int
    method: str


@dataclass(frozen=True)
class OracleBudget:
    method: str = "conditional_mc"
    n: int = 10**6
    seed: int = 0
    eps_trunc: float = 1e-9
    slack: float = 10.0
    threads: int = 1


# ---------------------------------------------------------------------------
# seeded sampling
# ---------------------------------------------------------------------------


def _block_uniforms(seed: int, var_index: int, block: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(var_index, block))
    return np.random.Generator(np.random.Philox(ss)).random(size)


def _truncation_bias_bound(dist: TailDistribution, seq: WeightSequence,
                           n_trunc: int, t: float, p_hat: float) -> float:
    """Bound on how far the dropped tail weights can move the estimate.

    The dropped variables shift the argument of the survival by at most
    sum_{i>N} |c_i| times a high quantile of |X|; a shift d moves log-survival
    by at most h(t - d) * d near t.
    """
    dropped = seq.abs_sum() - sum(abs(w) for _, w in seq.truncated_entries(n_trunc))
    if dropped <= 0.0:
        return 0.0
    q = max(abs(float(dist.ppf(1e-5))), abs(float(dist.ppf(1.0 - 1e-5))))
    shift = dropped * q
    anchor = max(t - shift, dist.upper.t0 * 1.01)
    slope = dist.upper.hazard(anchor)
    return p_hat * abs(math.expm1(slope * shift))


def _sample_stats(value_blocks) -> tuple[float, float, int]:
    # deviations are accumulated against a shift taken from the first block, so
    # a constant estimator reports exactly zero variance
    shift = None
    dev = 0.0
    dev_sq = 0.0
    n = 0
    for block in value_blocks:
        if shift is None:
            shift = float(block[0])
        centered = block - shift
        dev += float(np.sum(centered))
        dev_sq += float(np.sum(np.square(centered)))
        n += block.size
    mean = shift + dev / n
    var = max(0.0, (dev_sq - dev * dev / n) / (n - 1)) if n > 1 else 0.0
    return mean, math.sqrt(var / n), n


def _scaled_sf_batch(dist: TailDistribution, c: float, x: np.ndarray) -> np.ndarray:
    return dist.sf_batch(x / c) if c > 0 else dist.cdf_batch(x / c)


def conditional_mc(dist: TailDistribution, seq: WeightSequence, t: float, n: int,
                   seed: int, eps_trunc: float = 1e-9) -> OracleEstimate:
    """Tail estimate by argmax-conditional Monte Carlo on the truncated sum.

    Each sample draws all truncated variables, then sums over candidate
    indices i the probability that a fresh c_i X clears both the residual
    maximum and the level t minus the residual sum; this is exactly the
    conditional probability of {sum > t, summand i largest}, so the sample
    mean is unbiased for the truncated model.
    """
    if n < 1:
        raise ValueError("sample count must be positive")
    n_trunc = max(seq.truncation_index(eps_trunc), max(seq.maximal_indices()))
    entries = seq.truncated_entries(n_trunc)

    def blocks():
        done = 0
        b = 0
        while done < n:
            size = min(_BLOCK, n - done)
            summands = np.empty((len(entries), size))
            for row, (i, w) in enumerate(entries):
                u = _block_uniforms(seed, i, b, size)
                summands[row] = w * np.asarray(dist.ppf(u), dtype=float)
            total = summands.sum(axis=0)
            if len(entries) == 1:
                yield _scaled_sf_batch(dist, entries[0][1], np.full(size, t))
            else:
                order = np.sort(summands, axis=0)
                largest, second = order[-1], order[-2]
                value = np.zeros(size)
                for row, (i, w) in enumerate(entries):
                    resid_sum = total - summands[row]
                    resid_max = np.where(summands[row] == largest, second, largest)
                    level = np.maximum(resid_max, t - resid_sum)
                    value += _scaled_sf_batch(dist, w, level)
                yield value
            done += size
            b += 1

    p_hat, std_err, n_done = _sample_stats(blocks())
    return OracleEstimate(t=t, p_hat=p_hat, std_err=std_err, n_samples=n_done,
                          truncation_n=n_trunc,
                          truncation_bias_bound=_truncation_bias_bound(
                              dist, seq, n_trunc, t, p_hat),
                          seed=seed, method="conditional_mc")


def plain_mc(dist: TailDistribution, seq: WeightSequence, t: float, n: int,
             seed: int, eps_trunc: float = 1e-9) -> OracleEstimate:
    """Indicator Monte Carlo on the truncated weighted sum."""
    if n < 1:
        raise ValueError("sample count must be positive")
    n_trunc = max(seq.truncation_index(eps_trunc), max(seq.maximal_indices()))
    entries = seq.truncated_entries(n_trunc)

    def blocks():
        done = 0
        b = 0
        while done < n:
            size = min(_BLOCK, n - done)
            total = np.zeros(size)
            for i, w in entries:
                u = _block_uniforms(seed, i, b, size)
                total += w * np.asarray(dist.ppf(u), dtype=float)
            yield (total > t).astype(float)
            done += size
            b += 1

    p_hat, std_err, n_done = _sample_stats(blocks())
    return OracleEstimate(t=t, p_hat=p_hat, std_err=std_err, n_samples=n_done,
                          truncation_n=n_trunc,
                          truncation_bias_bound=_truncation_bias_bound(
                              dist, seq, n_trunc, t, p_hat),
                          seed=seed, method="plain_mc")


# ---------------------------------------------------------------------------
# quadrature convolution factors
# ---------------------------------------------------------------------------


class PointMassFactor:
    """Degenerate factor at a point (the convolution unit when at == 0)."""

    def __init__(self, at: float = 0.0):
        self.at = at
        self.support_left = at
        self.support_right = at
        self.breaks = (at,)

    def sf(self, x):
        return 1.0 if x < self.at else 0.0

    def cdf(self, x):
        return 1.0 if x >= self.at else 0.0


class ScaledFactor:
    """The distribution of c * X for an innovation X."""

    def __init__(self, dist: TailDistribution, c: float):
        if c == 0.0:
            raise ValueError("use PointMassFactor for a zero scale")
        self.dist = dist
        self.c = c
        left = dist.support_left
        if c > 0:
            self.support_left = c * left if math.isfinite(left) else -math.inf
            self.support_right = math.inf
        else:
            self.support_left = -math.inf
            self.support_right = c * left if math.isfinite(left) else math.inf
        pts = {dist.body_left, dist.upper.t0}
        if dist.lower is not None:
            pts.add(-dist.lower.t0)
        pts.update(dist.quad_breaks)
        self.breaks = tuple(sorted(c * p for p in pts))

    def sf(self, x):
        return self.dist.scaled_sf(self.c, x)

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def logsf(self, x):
        if self.c > 0:
            return self.dist.logsf(x / self.c)
        v = self.sf(x)
        return math.log(v) if v > 0 else -math.inf

    def logpdf(self, x):
        v = self.dist.pdf(x / self.c)
        if v <= 0.0:
            return -math.inf
        return math.log(v) - math.log(abs(self.c))


class ConvolvedFactor:
    """Sum of two factors; survival and density via pairwise quadrature.

    Exact values are memoized; when a query range is known in advance (the
    outer convolution integrates this factor across a fixed window) the factor
    prepares monotone interpolants of its log-survival and log-density on a
    node grid, trading one batch of exact solves for cheap evaluations inside
    the adaptive outer quadrature.
    """

    def __init__(self, a, b, tol_rel: float = 1e-9, nodes: int = 129):
        self.a = a
        self.b = b
        self.tol_rel = tol_rel
        self.nodes = nodes
        self.support_left = a.support_left + b.support_left
        self.support_right = a.support_right + b.support_right
        self.breaks = tuple(sorted(
            {x + y for x in a.breaks for y in b.breaks}))[:16]
        self._sf_cache: dict[float, float] = {}
        self._pdf_cache: dict[float, float] = {}
        self._sf_interp = None
        self._sf_window = (math.inf, -math.inf)
        self._pdf_interp = None
        self._pdf_window = (math.inf, -math.inf)

    def _exact_logsf(self, x):
        v = self._sf_cache.get(x)
        if v is None:
            v, _ = convolve_pair_sf(self.a, self.b, x, tol_rel=self.tol_rel,
                                    strict=False)
            v = min(1.0, max(0.0, v))
            self._sf_cache[x] = v
        return math.log(v) if v > 0 else -math.inf

    def _exact_logpdf(self, x):
        v = self._pdf_cache.get(x)
        if v is None:
            v = _density_convolution(self.a, self.b, x, tol_rel=self.tol_rel)
            self._pdf_cache[x] = v
        return math.log(v) if v > 0 else -math.inf

    def prepare_sf(self, lo: float, hi: float):
        from scipy.interpolate import PchipInterpolator
        lo = max(lo, self.support_left + 1e-9 * max(1.0, abs(self.support_left)))
        if hi <= lo:
            return
        xs = np.linspace(lo, hi, self.nodes)
        ys = [self._exact_logsf(float(x)) for x in xs]
        if all(math.isfinite(y) for y in ys):
            self._sf_interp = PchipInterpolator(xs, ys)
            self._sf_window = (lo, hi)

    def prepare_pdf(self, lo: float, hi: float):
        from scipy.interpolate import PchipInterpolator
        edge = self.support_left
        lo = max(lo, edge)
        if hi <= lo:
            return
        # densities may be steep (even singular) toward the support edge, so
        # nodes are geometric in the distance from it
        span = hi - edge
        offsets = np.geomspace(span * 1e-9, span, self.nodes)
        xs = edge + offsets
        ys = [self._exact_logpdf(float(x)) for x in xs]
        if all(math.isfinite(y) for y in ys):
            self._pdf_interp = PchipInterpolator(xs, ys)
            self._pdf_window = (float(xs[0]), hi)

    def sf(self, x):
        return math.exp(self.logsf(x))

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def logsf(self, x):
        if self._sf_interp is not None and self._sf_window[0] <= x <= self._sf_window[1]:
            return float(self._sf_interp(x))
        return self._exact_logsf(x)

    def logpdf(self, x):
        if self._pdf_interp is not None and self._pdf_window[0] <= x <= self._pdf_window[1]:
            return float(self._pdf_interp(x))
        return self._exact_logpdf(x)


def _panel_edges(lo: float, hi: float, probes, ladder: float) -> list[float]:
    """Panel boundaries: factor junctions plus a geometric ladder, so each
    panel spans a modest dynamic range of the integrand."""
    edges = {lo, hi}
    edges.update(p for p in probes if lo < p < hi)
    width = hi - lo
    # geometric ladder away from lo (where densities may be singular) and
    # toward hi (where survival factors swing fastest)
    step = width
    while step > width * 1e-9:
        edges.add(lo + step)
        edges.add(hi - step)
        step /= ladder
    return sorted(edges)


def _log_quad_panels(log_g, lo: float, hi: float, probes,
                     tol_rel: float) -> tuple[float, float]:
    """Integral of exp(log_g) over [lo, hi] by per-panel normalized quadrature."""
    if hi <= lo:
        return 0.0, 0.0
    ladder = 4.0 if tol_rel < 1e-7 else 16.0
    edges = _panel_edges(lo, hi, probes, ladder)
    total = 0.0
    total_err = 0.0
    for a, b in zip(edges, edges[1:]):
        probe_xs = np.linspace(a, b, 9)[1:-1]
        best = -math.inf
        for x in probe_xs:
            try:
                v = log_g(x)
            except (ValueError, OverflowError):
                continue
            if math.isfinite(v) and v > best:
                best = v
        if best == -math.inf or (total > 0 and
                                 math.exp(min(best, 300.0)) * (b - a) < 1e-18 * total):
            continue

        def integrand(x, m=best):
            v = log_g(x)
            return math.exp(v - m) if v > -math.inf else 0.0

        with warnings.catch_warnings():
            # panel-level roundoff reports are expected near interpolant kinks;
            # the per-panel error estimate is still accumulated and checked
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(integrand, a, b, epsabs=1e-15,
                            epsrel=max(1e-11, tol_rel / 10), limit=200)
        total += val * math.exp(best)
        total_err += err * math.exp(best)
    return total, total_err


def _t_integral(f_logsf, k_factor, t: float, tol_rel: float) -> tuple[float, float]:
    """int_{-inf}^{t/2} exp(f_logsf(t - x)) dK(x) by panel quadrature."""
    hi = min(t / 2.0, k_factor.support_right)
    lo = k_factor.support_left
    if not math.isfinite(lo):
        lo = min(-1e6, hi - 1e6)  # mass further down is negligible for every factor shipped
    if hi <= lo:
        return 0.0, 0.0

    def log_g(x):
        lp = k_factor.logpdf(x)
        if lp == -math.inf:
            return -math.inf
        return f_logsf(t - x) + lp

    probes = list(k_factor.breaks)
    return _log_quad_panels(log_g, lo, hi, probes, tol_rel)


def convolve_pair_sf(a, b, t: float, tol_rel: float = 1e-9,
                     strict: bool = True) -> tuple[float, float]:
    """Survival of the sum of two independent factors at t, with an error bound."""
    if isinstance(a, PointMassFactor):
        return b.sf(t - a.at), 0.0
    if isinstance(b, PointMassFactor):
        return a.sf(t - b.at), 0.0
    i1, e1 = _t_integral(a.logsf, b, t, tol_rel)
    i2, e2 = _t_integral(b.logsf, a, t, tol_rel)
    half = a.sf(t / 2.0) * b.sf(t / 2.0)
    value = i1 + i2 + half
    err = e1 + e2
    if strict and value > 0 and err > tol_rel * value + 1e-300:
        raise QuadratureToleranceError(achieved=err / value, requested=tol_rel)
    return value, err


def _density_convolution(a, b, t: float, tol_rel: float) -> float:
    lo = max(a.support_left, t - b.support_right)
    hi = min(a.support_right, t - b.support_left)
    if not math.isfinite(lo):
        lo = min(t, hi) - 1e6
    if not math.isfinite(hi):
        hi = max(t, lo) + 1e6
    if hi <= lo:
        return 0.0

    def log_g(x):
        la = a.logpdf(x)
        if la == -math.inf:
            return -math.inf
        lb = b.logpdf(t - x)
        if lb == -math.inf:
            return -math.inf
        return la + lb

    probes = list(a.breaks) + [t - p for p in b.breaks]
    val, _ = _log_quad_panels(log_g, lo, hi, probes, tol_rel)
    return val


def convolved_sf(factors, t: float, tol_rel: float = 1e-9) -> tuple[float, float]:
    """Survival of a sum of up to four factors by pairwise recursion."""
    live = [f for f in factors if not (isinstance(f, PointMassFactor) and f.at == 0.0)]
    if len(live) > 4:
        raise ValueError("quadrature convolution supports at most four factors")
    if not live:
        return (1.0 if t < 0 else 0.0), 0.0
    if len(live) == 1:
        return live[0].sf(t), 0.0
    if len(live) == 2:
        return convolve_pair_sf(live[0], live[1], t, tol_rel)
    # group so each side of the top split is at most a pair, and precompute
    # interpolants of each composite over the window the outer integrals hit
    inner_tol = tol_rel / 4.0
    mid = len(live) // 2
    left = live[0] if mid == 1 else ConvolvedFactor(live[0], live[1], tol_rel=inner_tol)
    rest = live[mid:]
    right = rest[0] if len(rest) == 1 else ConvolvedFactor(rest[0], rest[1],
                                                           tol_rel=inner_tol)
    for side, other in ((left, right), (right, left)):
        if isinstance(side, ConvolvedFactor):
            lo_other = other.support_left if math.isfinite(other.support_left) else -t
            side.prepare_sf(t / 2.0 - 1e-9 * abs(t), t - lo_other + 1e-9 * abs(t))
            side.prepare_pdf(side.support_left, t / 2.0 + 1e-9 * abs(t))
    return convolve_pair_sf(left, right, t, tol_rel, strict=False)


def quadrature_estimate(dist: TailDistribution, seq: WeightSequence, t: float,
                        eps_trunc: float = 1e-9,
                        tol_rel: float = 1e-9) -> OracleEstimate:
    """Deterministic tail value by numerical convolution of the truncated sum."""
    n_trunc = max(seq.truncation_index(eps_trunc), max(seq.maximal_indices()))
    entries = seq.truncated_entries(n_trunc)
    if len(entries) > 4:
        raise ValueError(
            f"quadrature oracle supports at most 4 factors; truncation kept {len(entries)}"
        )
    factors = [ScaledFactor(dist, w) for _, w in entries]
    value, _ = convolved_sf(factors, t, tol_rel=tol_rel)
    return OracleEstimate(t=t, p_hat=value, std_err=0.0, n_samples=0,
                          truncation_n=n_trunc,
                          truncation_bias_bound=_truncation_bias_bound(
                              dist, seq, n_trunc, t, value),
                          seed=0, method="quadrature")


# ---------------------------------------------------------------------------
# expansion-versus-oracle comparison
# ---------------------------------------------------------------------------


@dataclass
class ComparisonTable:
    t: np.ndarray
    expansion_total: np.ndarray
    term_values: np.ndarray
    term_labels: tuple[str, ...]
    benchmark: np.ndarray
    oracle_p: np.ndarray
    oracle_stderr: np.ndarray
    deviation: np.ndarray
    deviation_over_benchmark: np.ndarray
    passed: np.ndarray
    cancellation: np.ndarray
    estimates: list[OracleEstimate] = field(default_factory=list)


def _estimate(dist, seq, t, budget: OracleBudget) -> OracleEstimate:
    if budget.method == "conditional_mc":
        return conditional_mc(dist, seq, t, budget.n, budget.seed, budget.eps_trunc)
    if budget.method == "plain_mc":
        return plain_mc(dist, seq, t, budget.n, budget.seed, budget.eps_trunc)
    if budget.method == "quadrature":
        return quadrature_estimate(dist, seq, t, budget.eps_trunc)
    raise ValueError(f"unknown oracle method {budget.method!r}")


def compare_with_oracle(expansion: TailExpansion, dist: TailDistribution,
                        seq: WeightSequence, t_grid,
                        budget: OracleBudget) -> ComparisonTable:
    """Per grid point: oracle estimate, expansion total, deviation diagnostics.

    The acceptance band is max(3 * std_err + truncation bias, benchmark * slack):
    statistical error plus the remainder-scale allowance.
    """
    table = evaluate(expansion, dist, t_grid)
    ts = list(table.t)
    if budget.threads > 1:
        with ThreadPoolExecutor(max_workers=budget.threads) as pool:
            estimates = list(pool.map(lambda t: _estimate(dist, seq, t, budget), ts))
    else:
        estimates = [_estimate(dist, seq, t, budget) for t in ts]

    oracle_p = np.array([e.p_hat for e in estimates])
    oracle_se = np.array([e.std_err for e in estimates])
    deviation = np.abs(oracle_p - table.totals)
    with np.errstate(divide="ignore", invalid="ignore"):
        dev_over_bench = deviation / table.benchmark
    band = np.maximum(3.0 * oracle_se + np.array([e.truncation_bias_bound
                                                  for e in estimates]),
                      table.benchmark * budget.slack)
    passed = deviation <= band
    return ComparisonTable(
        t=table.t,
        expansion_total=table.totals,
        term_values=table.term_values,
        term_labels=table.term_labels,
        benchmark=table.benchmark,
        oracle_p=oracle_p,
        oracle_stderr=oracle_se,
        deviation=deviation,
        deviation_over_benchmark=dev_over_bench,
        passed=passed,
        cancellation=table.cancellation,
        estimates=estimates,
    )
