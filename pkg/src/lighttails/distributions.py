"""Full distributions assembled from hazard-rate tails plus an explicit body.

A TailDistribution combines an upper-tail HazardModel, an optional lower-tail
model for two-sided innovations (with the convention that both tails share
their regular-variation metadata), a body CDF on the interval between the
tail anchors, and a quantile function for the samplers.  Moments are computed
by adaptive quadrature of the survival decomposition

    E[X^k] = k * int_0^inf x^(k-1) [ P(X > x) + (-1)^k P(X < -x) ] dx

and memoized; the cache population is idempotent, so concurrent read-through
writes are safe.

Built-in families:

    weibull_type(a)     S(t) = exp(-t^a), 0 < a < 1, support [0, inf)
    log_weibull(a)      S(t) = exp(-(log t)^a), 1 < a < 2, support [1, inf)
    lognormal_type(th)  S(t) = exp(-th * log(t)^2), support [1, inf)
    custom_hazard(...)  hazard given as a sum of kappa * t^rho * log(t)^gamma
    log_power_mixture   S(t) = sum_i a_i exp(-psi_i(t)) with psi_i a sum of
                        powers of log(scale_i * t); exposes its signed pieces
                        for cancellation detection

Each family accepts symmetric=True, which mirrors half the mass to the
negative axis (tail balance ratio 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DegenerateWeightError, DomainError, UnsupportedSignError
from .hazard import HazardModel, LogPowerSum

__all__ = [
    "TailDistribution",
    "weibull_type",
    "log_weibull",
    "lognormal_type",
    "custom_hazard",
    "log_power_mixture",
]

_JUNCTION_TOL = 1e-12
_QUAD_KW = dict(epsabs=1e-13, epsrel=1e-11, limit=400)


@dataclass(frozen=True)
class TailDistribution:
    """One innovation distribution: body CDF plus hazard-rate tails."""

    upper: HazardModel
    body_cdf: Callable
    ppf: Callable
    body_left: float
    lower: HazardModel | None = None
    tail_balance_ratio: float | None = None
    body_pdf: Callable | None = None
    symmetric: bool = False
    name: str = "custom"
    quad_breaks: tuple[float, ...] = ()
    _moment_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        gap = abs(self.body_cdf(self.upper.t0) - (1.0 - self.upper.sbar_t0))
        if gap > _JUNCTION_TOL:
            raise ValueError(f"body/upper-tail junction discontinuity {gap:.3e}")
        if self.lower is not None:
            if self.tail_balance_ratio is None or not self.tail_balance_ratio > 0:
                raise ValueError("two-sided model requires a positive tail_balance_ratio")
            if self.lower.rv_index != self.upper.rv_index or \
               self.lower.log_exponent != self.upper.log_exponent:
                raise ValueError(
                    "balanced two-sided tails must share rv_index and log_exponent"
                )
            gap = abs(self.body_cdf(self.body_left) - self.lower.sbar_t0)
            if gap > _JUNCTION_TOL:
                raise ValueError(f"body/lower-tail junction discontinuity {gap:.3e}")

    # -- pointwise CDF machinery ------------------------------------------

    def cdf(self, x: float) -> float:
        if x >= self.upper.t0:
            return 1.0 - self.upper.survival(x)
        if x <= self.body_left:
            if self.lower is not None and -x >= self.lower.t0:
                return self.lower.survival(-x)
            return 0.0
        return self.body_cdf(x)

    def sf(self, x: float) -> float:
        if x >= self.upper.t0:
            return self.upper.survival(x)
        return 1.0 - self.cdf(x)

    def logsf(self, x: float) -> float:
        if x >= self.upper.t0:
            return self.upper.log_survival(x)
        return math.log1p(-self.cdf(x))

    def pdf(self, x: float) -> float:
        if x >= self.upper.t0:
            return self.upper.hazard(x) * self.upper.survival(x)
        if x <= self.body_left and self.lower is not None:
            s = -x
            if s >= self.lower.t0:
                return self.lower.hazard(s) * self.lower.survival(s)
            return 0.0
        if x <= self.body_left:
            return 0.0
        if self.body_pdf is None:
            raise NotImplementedError(f"{self.name}: no body density available")
        return self.body_pdf(x)

    @property
    def support_left(self) -> float:
        return -math.inf if self.lower is not None else self.body_left

    # -- vectorized CDF paths for the samplers ------------------------------

    def sf_batch(self, x) -> np.ndarray:
        """Survival over an array; tail region vectorized when the cumulated
        hazard accepts arrays, everything else through the scalar path."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        tail = x >= self.upper.t0
        if tail.any():
            try:
                cum = np.asarray(self.upper.cum_hazard(x[tail]), dtype=float)
                out[tail] = self.upper.sbar_t0 * np.exp(-cum)
            except (TypeError, ValueError):
                out[tail] = [self.sf(v) for v in x[tail]]
        rest = ~tail
        if rest.any():
            out[rest] = [self.sf(v) for v in x[rest]]
        return out

    def cdf_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        handled = np.zeros(x.shape, dtype=bool)
        if self.lower is not None:
            low = x <= -self.lower.t0
            if low.any():
                try:
                    cum = np.asarray(self.lower.cum_hazard(-x[low]), dtype=float)
                    out[low] = self.lower.sbar_t0 * np.exp(-cum)
                    handled |= low
                except (TypeError, ValueError):
                    pass
        rest = ~handled
        if rest.any():
            out[rest] = [self.cdf(v) for v in x[rest]]
        return out

    # -- scaled tails ------------------------------------------------------

    def _require_scale(self, c: float):
        if c == 0.0:
            raise DegenerateWeightError("scale c = 0 is the point mass at zero")
        if c < 0.0 and self.lower is None:
            raise UnsupportedSignError(
                "negative scale needs a lower-tail model (distribution vanishes below)"
            )

    def scaled_sf(self, c: float, x: float) -> float:
        """P(c*X > x) over the full range, body included."""
        self._require_scale(c)
        return self.sf(x / c) if c > 0 else self.cdf(x / c)

    def scaled_logsf(self, c: float, t: float) -> float:
        """log P(c*X > t) in the tail domain (t/|c| beyond the anchor)."""
        self._require_scale(c)
        if c > 0:
            return self.upper.log_survival(t / c)
        return self.lower.log_survival(t / abs(c))

    def scaled_sf_deriv(self, c: float, k: int, t: float) -> float:
        sign, logabs = self.scaled_sf_deriv_signed_log(c, k, t)
        return sign * math.exp(logabs) if sign else 0.0

    def scaled_sf_deriv_signed_log(self, c: float, k: int, t: float) -> tuple[float, float]:
        """(sign, log|.|) of the k-th derivative of t -> P(c*X > t), tail domain.

        For c > 0 this is c^-k * S^(k)(t/c) from the upper tail.  For c < 0,
        P(c*X > t) = L(t/|c|) with L the survival of -X, so each derivative
        pulls out one factor |c|^-1 and differentiates L; the lower-tail model
        represents exactly L.
        """
        self._require_scale(c)
        model = self.upper if c > 0 else self.lower
        a = abs(c)
        sign, logabs = model.survival_derivative_signed_log(k, t / a)
        return sign, logabs - k * math.log(a)

    def tail_component_values(self, c: float, t: float) -> np.ndarray | None:
        """Signed closed-form pieces of P(c*X > t) when the tail exposes them."""
        model = self.upper if c > 0 else self.lower
        if model is None or model.tail_components is None:
            return None
        return np.asarray(model.tail_components(t / abs(c)), dtype=float)

    # -- moments -----------------------------------------------------------

    def moment(self, k: int) -> float:
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        if k == 0:
            return 1.0
        if self.symmetric and k % 2 == 1:
            return 0.0
        cached = self._moment_cache.get(k)
        if cached is None:
            cached = self._moment_by_quadrature(k)
            self._moment_cache[k] = cached
        return cached

    def abs_moment(self, k: int) -> float:
        if k == 0:
            return 1.0
        key = ("abs", k)
        cached = self._moment_cache.get(key)
        if cached is None:
            cached = k * (self._tail_power_integral(k, upper=True)
                          + self._tail_power_integral(k, upper=False))
            self._moment_cache[key] = cached
        return cached

    def moments(self, order: int) -> tuple[float, ...]:
        return tuple(self.moment(i) for i in range(order + 1))

    def _tail_power_integral(self, k: int, upper: bool) -> float:
        """int_0^inf x^(k-1) * P(side) dx for one side of the axis."""
        if upper:
            weight = self.sf
            anchor = self.upper.t0
        else:
            if self.lower is None:
                return 0.0 if self.body_left >= 0 else self._body_negative_integral(k)
            weight = lambda x: self.cdf(-x)
            anchor = self.lower.t0

        def f(x):
            return x ** (k - 1) * weight(x)

        pts = sorted({p for p in (abs(b) for b in self.quad_breaks) if 0.0 < p < anchor})
        head, _ = quad(f, 0.0, anchor, points=pts or None, **_QUAD_KW)
        tail, _ = quad(f, anchor, math.inf, **_QUAD_KW)
        return head + tail

    def _body_negative_integral(self, k: int) -> float:
        if self.body_left >= 0:
            return 0.0
        f = lambda x: x ** (k - 1) * self.cdf(-x)
        val, _ = quad(f, 0.0, -self.body_left, **_QUAD_KW)
        return val

    def _moment_by_quadrature(self, k: int) -> float:
        pos = self._tail_power_integral(k, upper=True)
        neg = self._tail_power_integral(k, upper=False)
        return k * (pos + (-1) ** k * neg)


# ---------------------------------------------------------------------------
# body and quantile helpers shared by the families
# ---------------------------------------------------------------------------


def _symmetric_parts(base_cdf, base_ppf, t0, sbar_base):
    """Mirror a positive-support family: each side carries half the mass."""

    def body_cdf(x):
        if x >= 0:
            return 1.0 - 0.5 * (1.0 - base_cdf(x))
        return 0.5 * (1.0 - base_cdf(-x))

    # both where-branches get evaluated, so their arguments are clipped away
    # from the base quantile's singular endpoint at 1
    top = np.nextafter(1.0, 0.0)

    def ppf(p):
        p = np.asarray(p, dtype=float)
        up = base_ppf(np.clip(1.0 - 2.0 * (1.0 - p), 0.0, top))
        down = -base_ppf(np.clip(1.0 - 2.0 * p, 0.0, top))
        out = np.where(p >= 0.5, up, down)
        return float(out) if out.ndim == 0 else out

    return body_cdf, ppf


def _assemble(base_sf, base_pdf, base_ppf, upper_factory, t0, support_left,
              symmetric, name, quad_breaks):
    """Build a TailDistribution from one-sided closed forms.

    base_sf is the exact survival (kept in closed form so anchors far below
    machine epsilon of 1 stay accurate); the CDF is its complement.
    """
    base_cdf = lambda x: 1.0 - base_sf(x)
    if not symmetric:
        upper = upper_factory(base_sf(t0))
        return TailDistribution(
            upper=upper,
            body_cdf=lambda x: base_cdf(x) if x > support_left else 0.0,
            body_pdf=base_pdf,
            ppf=base_ppf,
            body_left=support_left,
            symmetric=False,
            name=name,
            quad_breaks=quad_breaks,
        )

    sbar_half = 0.5 * base_sf(t0)
    upper = upper_factory(sbar_half)
    lower = upper_factory(sbar_half)
    body_cdf, ppf = _symmetric_parts(base_cdf, base_ppf, t0, sbar_half)

    def body_pdf(x):
        return 0.5 * base_pdf(abs(x))

    return TailDistribution(
        upper=upper,
        lower=lower,
        tail_balance_ratio=1.0,
        body_cdf=body_cdf,
        body_pdf=body_pdf,
        ppf=ppf,
        body_left=-t0,
        symmetric=True,
        name=name + "_symmetric",
        quad_breaks=tuple(sorted(set(quad_breaks) | {-b for b in quad_breaks})),
    )


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

_DEFAULT_SMOOTH_ORDER = 8


def weibull_type(a: float, t0: float = 2.0, symmetric: bool = False,
                 smooth_order: int = _DEFAULT_SMOOTH_ORDER) -> TailDistribution:
    """Stretched-exponential tail S(t) = exp(-t^a) with 0 < a < 1."""
    if not 0.0 < a < 1.0:
        raise ValueError("weibull_type needs 0 < a < 1 (rapidly varying, subexponential)")
    if t0 <= 1.0:
        raise ValueError("t0 must exceed 1")

    h = LogPowerSum(((a, a - 1.0, 0.0),))

    def upper_factory(sbar):
        return HazardModel(
            hazard_derivs=h.hazard_derivatives(smooth_order),
            t0=t0,
            sbar_t0=sbar,
            cum_hazard=lambda t: t**a - t0**a,
            rv_index=a - 1.0,
            smooth_order=smooth_order,
        )

    base_sf = lambda x: math.exp(-(x ** a)) if x > 0 else 1.0
    base_pdf = lambda x: a * x ** (a - 1.0) * math.exp(-(x ** a)) if x > 0 else 0.0

    def base_ppf(p):
        p = np.asarray(p, dtype=float)
        out = (-np.log1p(-p)) ** (1.0 / a)
        return float(out) if out.ndim == 0 else out

    return _assemble(base_sf, base_pdf, base_ppf, upper_factory, t0,
                     support_left=0.0, symmetric=symmetric,
                     name=f"weibull_type(a={a})", quad_breaks=(0.0, t0))


def log_weibull(a: float, t0: float = math.e, symmetric: bool = False,
                smooth_order: int = _DEFAULT_SMOOTH_ORDER) -> TailDistribution:
    """Tail S(t) = exp(-(log t)^a) with 1 < a < 2, support [1, inf)."""
    if not 1.0 < a < 2.0:
        raise ValueError("log_weibull needs 1 < a < 2 (hazard below the critical scale)")
    if t0 <= 1.0:
        raise ValueError("t0 must exceed 1")

    h = LogPowerSum(((a, -1.0, a - 1.0),))

    def upper_factory(sbar):
        return HazardModel(
            hazard_derivs=h.hazard_derivatives(smooth_order),
            t0=t0,
            sbar_t0=sbar,
            cum_hazard=lambda t: np.log(t) ** a - math.log(t0) ** a,
            rv_index=-1.0,
            log_exponent=a - 1.0,
            smooth_order=smooth_order,
        )

    base_sf = lambda x: math.exp(-(math.log(x) ** a)) if x > 1.0 else 1.0
    base_pdf = lambda x: (a * math.log(x) ** (a - 1.0) / x
                          * math.exp(-(math.log(x) ** a))) if x > 1.0 else 0.0

    def base_ppf(p):
        p = np.asarray(p, dtype=float)
        out = np.exp((-np.log1p(-p)) ** (1.0 / a))
        return float(out) if out.ndim == 0 else out

    return _assemble(base_sf, base_pdf, base_ppf, upper_factory, t0,
                     support_left=1.0, symmetric=symmetric,
                     name=f"log_weibull(a={a})", quad_breaks=(1.0, t0))


def lognormal_type(theta: float, t0: float = math.e, symmetric: bool = False,
                   smooth_order: int = _DEFAULT_SMOOTH_ORDER) -> TailDistribution:
    """Tail S(t) = exp(-theta * log(t)^2); hazard ~ 2*theta * t^-1 log t."""
    if not theta > 0.0:
        raise ValueError("lognormal_type needs theta > 0")
    if t0 <= 1.0:
        raise ValueError("t0 must exceed 1")

    h = LogPowerSum(((2.0 * theta, -1.0, 1.0),))

    def upper_factory(sbar):
        return HazardModel(
            hazard_derivs=h.hazard_derivatives(smooth_order),
            t0=t0,
            sbar_t0=sbar,
            cum_hazard=lambda t: theta * (np.log(t) ** 2 - math.log(t0) ** 2),
            rv_index=-1.0,
            log_exponent=1.0,
            lambda_coeff=2.0 * theta,
            smooth_order=smooth_order,
        )

    base_sf = lambda x: math.exp(-theta * math.log(x) ** 2) if x > 1.0 else 1.0
    base_pdf = lambda x: (2.0 * theta * math.log(x) / x
                          * math.exp(-theta * math.log(x) ** 2)) if x > 1.0 else 0.0

    def base_ppf(p):
        p = np.asarray(p, dtype=float)
        out = np.exp(np.sqrt(-np.log1p(-p) / theta))
        return float(out) if out.ndim == 0 else out

    return _assemble(base_sf, base_pdf, base_ppf, upper_factory, t0,
                     support_left=1.0, symmetric=symmetric,
                     name=f"lognormal_type(theta={theta})", quad_breaks=(1.0, t0))


# ---------------------------------------------------------------------------
# custom constructors
# ---------------------------------------------------------------------------


def _ramp_body(t0: float, sbar_t0: float, body_left: float = 0.0):
    """Linear body CDF from 0 at body_left to 1 - sbar_t0 at t0."""
    mass = 1.0 - sbar_t0
    width = t0 - body_left

    def body_cdf(x):
        if x <= body_left:
            return 0.0
        if x >= t0:
            return mass
        return mass * (x - body_left) / width

    def body_pdf(x):
        return mass / width if body_left < x < t0 else 0.0

    return body_cdf, body_pdf


def _tail_ppf(logsf: Callable, t0: float, body_mass: float, body_inverse: Callable):
    """Quantile by monotone root-finding on the log-survival in the tail."""

    def scalar(p: float) -> float:
        if not 0.0 < p < 1.0:
            raise ValueError("quantile defined on (0, 1)")
        if p <= body_mass:
            return body_inverse(p)
        target = math.log1p(-p)
        hi = 2.0 * t0
        while logsf(hi) > target:
            hi *= 2.0
            if hi > 1e300:
                raise RuntimeError("quantile bracket expansion failed")
        return brentq(lambda t: logsf(t) - target, t0, hi, xtol=1e-12, rtol=1e-14)

    def ppf(p):
        arr = np.asarray(p, dtype=float)
        if arr.ndim == 0:
            return scalar(float(arr))
        return np.array([scalar(v) for v in arr.ravel()]).reshape(arr.shape)

    return ppf


def custom_hazard(terms: Sequence[tuple[float, float, float]],
                  t0: float,
                  sbar_t0: float,
                  rv_index: float,
                  log_exponent: float = 0.0,
                  lambda_coeff: float | None = None,
                  smooth_order: int = _DEFAULT_SMOOTH_ORDER,
                  body_left: float = 0.0,
                  name: str = "custom") -> TailDistribution:
    """One-sided distribution with hazard h(t) = sum kappa * t^rho * log(t)^gamma.

    Metadata is declared by the caller, matching the convention that
    regular-variation indices cannot be inferred from finitely many values.
    The body below t0 is a linear ramp carrying the remaining mass.
    """
    h = LogPowerSum(tuple(tuple(map(float, trm)) for trm in terms))
    upper = HazardModel(
        hazard_derivs=h.hazard_derivatives(smooth_order),
        t0=t0,
        sbar_t0=sbar_t0,
        cum_hazard=h.antiderivative_from(t0),
        rv_index=rv_index,
        log_exponent=log_exponent,
        lambda_coeff=lambda_coeff,
        smooth_order=smooth_order,
    )
    body_cdf, body_pdf = _ramp_body(t0, sbar_t0, body_left)
    ppf = _tail_ppf(upper.log_survival, t0, 1.0 - sbar_t0,
                    lambda p: body_left + p / (1.0 - sbar_t0) * (t0 - body_left))
    return TailDistribution(upper=upper, body_cdf=body_cdf, body_pdf=body_pdf,
                            ppf=ppf, body_left=body_left, name=name,
                            quad_breaks=(body_left, t0))


def log_power_mixture(components: Sequence[tuple[float, float, Sequence[tuple[float, float]]]],
                      t0: float,
                      body_left: float = 0.0,
                      name: str = "log_power_mixture",
                      check_grid_decades: float = 8.0) -> TailDistribution:
    """Signed mixture tail S(t) = sum_i a_i * exp(-sum_j w_ij * log(b_i t)^e_ij).

    Each component is (coeff a_i, scale b_i, [(w_ij, e_ij), ...]).  The first
    component must be the asymptotically dominant one; metadata derives from
    its leading log power (largest exponent).  The signed pieces are exposed
    through the model's tail_components hook so the expansion evaluator can
    report cancellations between them.  Smoothness order is 0: these models
    serve the regime where expansions carry no derivative terms.
    """
    comps = [(float(a), float(b), tuple((float(w), float(e)) for w, e in ts))
             for a, b, ts in components]
    if not comps:
        raise ValueError("mixture needs at least one component")
    if t0 <= 1.0:
        raise ValueError("t0 must exceed 1")

    def psi(i, t):
        a, b, ts = comps[i]
        lg = math.log(b * t)
        return sum(w * lg**e for w, e in ts)

    def psi_prime(i, t):
        a, b, ts = comps[i]
        lg = math.log(b * t)
        return sum(w * e * lg ** (e - 1.0) for w, e in ts) / t

    def component_values(t):
        return np.array([a * math.exp(-psi(i, t)) for i, (a, _, _) in enumerate(comps)])

    def sf_value(t):
        return float(np.sum(component_values(t)))

    def log_sf(t):
        vals = component_values(t)
        total = float(np.sum(vals))
        if total <= 0.0:
            raise ValueError(f"mixture survival nonpositive at t = {t}")
        return math.log(total)

    def hazard_value(t):
        vals = component_values(t)
        num = sum(v * psi_prime(i, t) for i, v in enumerate(vals))
        return num / float(np.sum(vals))

    # validity: survival must be positive and nonincreasing from t0 onward
    probe = np.geomspace(t0, t0 * 10.0 ** check_grid_decades, 64)
    sf_probe = [sf_value(t) for t in probe]
    if min(sf_probe) <= 0.0 or any(b > a * (1.0 + 1e-12) for a, b in zip(sf_probe, sf_probe[1:])):
        raise ValueError("mixture is not a valid tail on [t0, inf): "
                         "survival must be positive and nonincreasing")
    sbar_t0 = sf_value(t0)
    if not sbar_t0 < 1.0:
        raise ValueError("mixture survival at t0 must be below 1")

    # metadata from the dominant component's leading log power
    lead_w, lead_e = max(comps[0][2], key=lambda we: (we[1], we[0]))
    log_exponent = lead_e - 1.0
    lambda_coeff = 2.0 * lead_w if log_exponent == 1.0 else None

    log_sbar = math.log(sbar_t0)
    upper = HazardModel(
        hazard_derivs=(hazard_value,),
        t0=t0,
        sbar_t0=sbar_t0,
        cum_hazard=lambda t: log_sbar - log_sf(t),
        rv_index=-1.0,
        log_exponent=log_exponent,
        lambda_coeff=lambda_coeff,
        smooth_order=0,
        tail_components=component_values,
    )
    body_cdf, body_pdf = _ramp_body(t0, sbar_t0, body_left)
    ppf = _tail_ppf(upper.log_survival, t0, 1.0 - sbar_t0,
                    lambda p: body_left + p / (1.0 - sbar_t0) * (t0 - body_left))
    return TailDistribution(upper=upper, body_cdf=body_cdf, body_pdf=body_pdf,
                            ppf=ppf, body_left=body_left, name=name,
                            quad_breaks=(body_left, t0))
