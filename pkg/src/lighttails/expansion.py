"""Regime classification and assembly of the tail expansion of the weighted sum.

How the hazard rate h of the innovation compares with the critical scale
t^-1 log t decides which weights contribute and at which operator orders:

  supercritical  h >> t^-1 log t (rv_index > -1, or log_exponent > 1).
                 Only scales equivalent to the largest contribute; each
                 carries the full order-m Laplace character of its residual
                 sum; remainder o(h^m * top scaled tail).

  subcritical    h << t^-1 log t (rv_index == -1, log_exponent < 1, plus a
                 boundedness condition checked on a diagnostic grid).  The m
                 largest weight classes each contribute their scaled tail at
                 order zero; remainder o(m-th scaled tail).

  critical       h ~ lam * t^-1 log t (log_exponent == 1).  Scales down to
                 c_(1) * exp(-k/lam) contribute (boundary inclusive); a scale
                 at relative depth d = lam*log(c_(1)/|c|) carries a character
                 truncated to order k - ceil(d) via the floor rule, because
                 each extra derivative costs one power of h and the scaled
                 tail itself already sits d powers down.

Every term carries its decay-order pair (p, q), with value comparable to
t^-p (log t)^q relative to the top scaled tail; the pair drives the pruning
of insignificant terms and the hazard-scale rewriting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .distributions import TailDistribution
from .errors import (DomainError, OutOfScopeError, RegimeConditionError,
                     SmoothnessError)
from .hazard import HazardModel, functional_diverges, validate_metadata
from .hazardpoly import survival_derivative_polys
from .laplace import character_from_moments, residual_moments
from .weights import WeightSequence

__all__ = [
    "RegimeKind", "Regime", "classify",
    "ExpansionTerm", "RemainderScale", "TailExpansion",
    "expand", "expand_supercritical", "expand_subcritical", "expand_critical",
    "HazardMonomial", "HazardScaleRewrite", "rewrite_in_hazard_scale",
    "EvaluationTable", "evaluate",
]

_ORDER_TOL = 1e-12
_CANCEL_RATIO = 0.01


class RegimeKind(str, Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    lam: float | None = None
    provenance: str = "declared"

    def __post_init__(self):
        if self.kind is RegimeKind.CRITICAL and not (self.lam and self.lam > 0):
            raise ValueError("critical regime carries a positive lambda")


def default_diagnostic_grid(model: HazardModel, decades: float = 6.0,
                            points: int = 40) -> np.ndarray:
    lo = max(4.0 * model.t0, 20.0)
    return np.geomspace(lo, lo * 10.0 ** decades, points)


def classify(model: HazardModel, grid=None) -> Regime:
    """Decide the regime from declared metadata, numerically corroborated.

    Passing a grid (or relying on the default) runs the advisory metadata
    checks; disagreement raises rather than silently reclassifying, because
    asymptotic hypotheses cannot be decided from finitely many evaluations.
    """
    corroborate = grid is not None
    if grid is None:
        grid = default_diagnostic_grid(model)

    if model.rv_index > -1.0:
        kind, lam = RegimeKind.SUPERCRITICAL, None
    elif model.log_exponent > 1.0:
        kind, lam = RegimeKind.SUPERCRITICAL, None
    elif model.log_exponent == 1.0:
        if model.lambda_coeff is None:
            raise OutOfScopeError(
                "hazard at the critical scale (log_exponent == 1) needs lambda_coeff: "
                "h(t) ~ lambda * t^-1 log t"
            )
        kind, lam = RegimeKind.CRITICAL, model.lambda_coeff
    else:
        # subcritical needs the boundedness of t h(t)^2 / h(1/h(t))
        h = np.array([model.hazard(t) for t in grid])
        functional = np.full(len(grid), np.nan)
        for i, t in enumerate(grid):
            arg = 1.0 / h[i]
            if arg > model.t0:
                functional[i] = t * h[i] ** 2 / model.hazard(arg)
        if functional_diverges(functional):
            raise RegimeConditionError(
                "subcritical condition violated: t h(t)^2 / h(1/h(t)) grows without "
                "bound on the diagnostic grid"
            )
        kind, lam = RegimeKind.SUBCRITICAL, None

    provenance = "declared"
    if corroborate:
        diag = validate_metadata(model, grid)
        if diag.flags:
            raise RegimeConditionError(
                "declared metadata disagrees with grid estimates: " + "; ".join(diag.flags)
            )
        if not diag.inconclusive:
            provenance = "numerically-corroborated"
    return Regime(kind=kind, lam=lam, provenance=provenance)


# ---------------------------------------------------------------------------
# expansion data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionTerm:
    """coeff * D^deriv_index applied to the survival of (scale * X)."""

    scale: float
    deriv_index: int
    coeff: float
    source_level: int
    operator_order: int
    decay_power: float | None = None  # term ~ t^-p (log t)^q * top scaled tail
    decay_log: float | None = None

    @property
    def label(self) -> str:
        return f"c{self.scale:g}_j{self.deriv_index}"


@dataclass(frozen=True)
class RemainderScale:
    """The o(.) benchmark: h(t)^hazard_power * P(scale * X > t)."""

    hazard_power: int
    scale: float

    def describe(self) -> str:
        if self.hazard_power == 0:
            return f"o(P({self.scale:g} X > t))"
        return f"o(h^{self.hazard_power} * P({self.scale:g} X > t))"


@dataclass(frozen=True)
class TailExpansion:
    terms: tuple[ExpansionTerm, ...]
    remainder: RemainderScale
    regime: Regime
    order_request: int
    characters: tuple[tuple[float, int, tuple[float, ...]], ...] = ()
    flags: tuple[str, ...] = ()

    def max_deriv_order(self) -> int:
        return max((t.deriv_index for t in self.terms), default=0)


def _check_smoothness(dist: TailDistribution, order: int, negative_scales: bool):
    if order > dist.upper.smooth_order:
        raise SmoothnessError(required=order, available=dist.upper.smooth_order)
    if negative_scales and dist.lower is not None and order > dist.lower.smooth_order:
        raise SmoothnessError(required=order, available=dist.lower.smooth_order)


def _check_sign_compatibility(dist: TailDistribution, seq: WeightSequence):
    if seq.sign_mode == "balanced" and dist.lower is None:
        raise OutOfScopeError(
            "balanced weights need a two-sided (strongly tail balanced) distribution"
        )


def expand(dist: TailDistribution, seq: WeightSequence, order: int,
           regime: Regime | None = None) -> TailExpansion:
    """Dispatch on the (declared or supplied) regime."""
    if regime is None:
        regime = classify(dist.upper)
    if regime.kind is RegimeKind.SUPERCRITICAL:
        return expand_supercritical(dist, seq, order, regime)
    if regime.kind is RegimeKind.SUBCRITICAL:
        return expand_subcritical(dist, seq, order, regime)
    return expand_critical(dist, seq, order, regime)


# ---------------------------------------------------------------------------
# supercritical: full characters on the maximal class
# ---------------------------------------------------------------------------


def expand_supercritical(dist: TailDistribution, seq: WeightSequence, m: int,
                         regime: Regime | None = None) -> TailExpansion:
    if m < 0:
        raise ValueError("expansion order must be nonnegative")
    _check_sign_compatibility(dist, seq)
    regime = regime or Regime(RegimeKind.SUPERCRITICAL)
    maximal = seq.maximal_indices()
    _check_smoothness(dist, m, any(seq.weight(i) < 0 for i in maximal))

    rho = dist.upper.rv_index
    gamma = dist.upper.log_exponent
    merged: dict[tuple[float, int], float] = {}
    characters = []
    seen_scales = set()
    for i in maximal:
        c = seq.weight(i)
        ch = character_from_moments(residual_moments(dist, seq, i, m), m)
        if c not in seen_scales:
            characters.append((c, m, ch.coeffs))
            seen_scales.add(c)
        for j, a in enumerate(ch.coeffs):
            key = (c, j)
            merged[key] = merged.get(key, 0.0) + a

    terms = tuple(sorted(
        (ExpansionTerm(scale=c, deriv_index=j, coeff=coeff, source_level=1,
                       operator_order=m,
                       decay_power=j * (-rho), decay_log=j * gamma)
         for (c, j), coeff in merged.items()),
        key=lambda t: (t.deriv_index, -t.scale)))
    remainder = RemainderScale(hazard_power=m, scale=seq.max_magnitude)
    return TailExpansion(terms=terms, remainder=remainder, regime=regime,
                         order_request=m, characters=tuple(characters))


# ---------------------------------------------------------------------------
# subcritical: scaled tails of the m largest classes, order zero
# ---------------------------------------------------------------------------


def expand_subcritical(dist: TailDistribution, seq: WeightSequence, m: int,
                       regime: Regime | None = None) -> TailExpansion:
    if m < 1:
        raise ValueError("subcritical expansion order must be a positive integer")
    _check_sign_compatibility(dist, seq)
    regime = regime or Regime(RegimeKind.SUBCRITICAL)

    levels = seq.levels(m) if not seq.is_finite() else seq.levels()[:m]
    flags = []
    if len(levels) < m:
        flags.append(f"level_shortfall: {len(levels)} distinct classes available, "
                     f"{m} requested")

    terms = []
    for idx, level in enumerate(levels, start=1):
        if level.pos_count:
            terms.append(ExpansionTerm(scale=level.magnitude, deriv_index=0,
                                       coeff=float(level.pos_count),
                                       source_level=idx, operator_order=0))
        if level.neg_count:
            terms.append(ExpansionTerm(scale=-level.magnitude, deriv_index=0,
                                       coeff=float(level.neg_count),
                                       source_level=idx, operator_order=0))
    remainder = RemainderScale(hazard_power=0, scale=levels[-1].magnitude)
    return TailExpansion(terms=tuple(terms), remainder=remainder, regime=regime,
                         order_request=m, flags=tuple(flags))


# ---------------------------------------------------------------------------
# critical: floor-reduced characters down to the inclusion threshold
# ---------------------------------------------------------------------------


def _strictly_smaller(p1, q1, p2, q2) -> bool:
    if p1 > p2 + _ORDER_TOL:
        return True
    return abs(p1 - p2) <= _ORDER_TOL and q1 < q2 - _ORDER_TOL


def expand_critical(dist: TailDistribution, seq: WeightSequence, k: int,
                    regime: Regime | None = None) -> TailExpansion:
    if k < 1:
        raise ValueError("critical expansion order must be a positive integer")
    _check_sign_compatibility(dist, seq)
    if regime is None:
        regime = classify(dist.upper)
    if regime.kind is not RegimeKind.CRITICAL:
        raise OutOfScopeError("expand_critical needs a critical-regime model")
    lam = regime.lam
    gamma = dist.upper.log_exponent  # == 1 in this regime

    c1 = seq.max_magnitude
    threshold = c1 * math.exp(-k / lam)
    # enumerate candidates slightly past the threshold, then apply the exact log test
    enumeration_floor = threshold * (1.0 - 1e-9)
    by_scale: dict[float, int] = {}
    for _, w in seq.iter_weights(min_magnitude=enumeration_floor):
        x = k + lam * math.log(abs(w) / c1)
        if x >= -_ORDER_TOL * max(1.0, k):
            by_scale[w] = by_scale.get(w, 0) + 1

    has_negative = any(s < 0 for s in by_scale)
    max_char_order = max(
        min(k, math.floor(k + lam * math.log(abs(s) / c1) + _ORDER_TOL))
        for s in by_scale)
    _check_smoothness(dist, max_char_order, has_negative)

    # raw terms with their decay pairs
    magnitudes = sorted({abs(s) for s in by_scale}, reverse=True)
    level_of = {mag: r for r, mag in enumerate(magnitudes, start=1)}
    raw = []  # (scale, j, coeff, p, q, level, order_s)
    characters = []
    for s, count in sorted(by_scale.items(), key=lambda kv: (-abs(kv[0]), -kv[0])):
        x = k + lam * math.log(abs(s) / c1)
        order_s = min(k, math.floor(x + _ORDER_TOL))
        order_s = max(order_s, 0)
        depth = k - x  # lam * log(c1/|s|), 0 at the top scale
        rep_index = next(i for i, w in seq.iter_weights(min_magnitude=enumeration_floor)
                         if w == s)
        ch = character_from_moments(residual_moments(dist, seq, rep_index, order_s),
                                    order_s)
        characters.append((s, order_s, ch.coeffs))
        for j, a in enumerate(ch.coeffs):
            raw.append((s, j, count * a, depth + j, j * gamma,
                        level_of[abs(s)], order_s))

    # prune by order bookkeeping:
    #  - derivative terms strictly below the remainder (possible only through the
    #    log refinement at integer depths) carry no information; drop them;
    #  - the top scale's order-k term sits exactly at the remainder order; it
    #    stays significant unless some strictly shallower other scale is
    #    included (whose whole tail then dominates it), which reproduces the
    #    two-term case analysis: below-threshold keeps the derivative
    #    correction, above-threshold the second scale replaces it, and a
    #    boundary scale (depth exactly k) displaces nothing.
    remainder_pair = (float(k), k * gamma)
    depths = {s: k - (k + lam * math.log(abs(s) / c1)) for s in by_scale}
    kept_terms = []
    for s, j, coeff, p, q, level, order_s in raw:
        if j >= 1:
            if _strictly_smaller(p, q, *remainder_pair):
                continue
            is_marginal = (abs(p - remainder_pair[0]) <= _ORDER_TOL
                           and abs(q - remainder_pair[1]) <= _ORDER_TOL)
            if is_marginal and any(
                    d < k - _ORDER_TOL * max(1.0, k)
                    for other, d in depths.items() if abs(other) != abs(s)):
                continue
        kept_terms.append(ExpansionTerm(scale=s, deriv_index=j, coeff=coeff,
                                        source_level=level,
                                        operator_order=order_s,
                                        decay_power=p, decay_log=q))

    kept_terms.sort(key=lambda t: (t.decay_power, -t.decay_log, -t.scale))
    remainder = RemainderScale(hazard_power=k, scale=c1)
    return TailExpansion(terms=tuple(kept_terms), remainder=remainder, regime=regime,
                         order_request=k, characters=tuple(characters))


# ---------------------------------------------------------------------------
# hazard-scale rewriting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HazardMonomial:
    """coeff * prod_l (h^(l)(t/s) / s^(l+1))^e_l * P(s X > t); exponents trimmed."""

    scale: float
    exponents: tuple[int, ...]
    coeff: float
    decay_power: float
    decay_log: float
    order_class: int  # 1-based significance class after sorting; ties share it

    @property
    def label(self) -> str:
        if not self.exponents:
            base = "1"
        else:
            names = []
            for l, e in enumerate(self.exponents):
                if e == 0:
                    continue
                nm = "h" + "'" * l
                names.append(nm if e == 1 else f"{nm}^{e}")
            base = "*".join(names)
        return f"[{base}] @ c={self.scale:g}"


@dataclass(frozen=True)
class HazardScaleRewrite:
    kept: tuple[HazardMonomial, ...]
    dropped: tuple[HazardMonomial, ...]
    ties: tuple[tuple[int, ...], ...]  # indices into kept sharing one class
    flags: tuple[str, ...] = ()


def rewrite_in_hazard_scale(expansion: TailExpansion, dist: TailDistribution,
                            keep: int) -> HazardScaleRewrite:
    """Expand derivative terms into hazard monomials and keep the significant ones.

    Monomials are ranked by their decay pair; a significance class is a set of
    monomials sharing the pair (reported as ties, kept or dropped together).
    Classes beyond the source expansion's remainder resolution are never kept,
    whatever `keep` says.
    """
    if expansion.regime.kind is RegimeKind.SUBCRITICAL:
        raise ValueError("hazard-scale rewriting applies to regimes with derivative terms")
    if keep < 1:
        raise ValueError("keep must be positive")

    rho = dist.upper.rv_index
    gamma = dist.upper.log_exponent
    lam = expansion.regime.lam
    c1 = expansion.remainder.scale

    entries = []
    for term in expansion.terms:
        depth = 0.0
        if abs(term.scale) != c1:
            if lam is None:
                raise ValueError("non-maximal scale in a supercritical expansion")
            depth = lam * math.log(c1 / abs(term.scale))
        polys = survival_derivative_polys(term.deriv_index)
        for mono, cm in polys[term.deriv_index].items():
            s = sum(e for e in mono)
            p = depth + sum(e * (l - rho) for l, e in enumerate(mono))
            q = gamma * s
            entries.append((term.scale, mono, term.coeff * cm, p, q))

    # merge identical (scale, monomial) contributions
    merged: dict[tuple[float, tuple[int, ...]], list] = {}
    for scale, mono, coeff, p, q in entries:
        key = (scale, mono)
        if key in merged:
            merged[key][0] += coeff
        else:
            merged[key] = [coeff, p, q]

    items = [(scale, mono, coeff, p, q)
             for (scale, mono), (coeff, p, q) in merged.items() if coeff != 0.0]
    items.sort(key=lambda it: (it[3], -it[4]))

    # group into significance classes by (p, q) within tolerance
    classes: list[list[int]] = []
    for idx, it in enumerate(items):
        if classes:
            _, _, _, p0, q0 = items[classes[-1][0]]
            if abs(it[3] - p0) <= _ORDER_TOL and abs(it[4] - q0) <= _ORDER_TOL:
                classes[-1].append(idx)
                continue
        classes.append([idx])

    # resolution cap: classes strictly below the remainder pair are never valid
    rem_p = expansion.remainder.hazard_power * (-rho)
    rem_q = expansion.remainder.hazard_power * gamma
    valid_classes = [cl for cl in classes
                     if not _strictly_smaller(items[cl[0]][3], items[cl[0]][4],
                                              rem_p, rem_q)]
    flags = []
    if keep > len(valid_classes):
        flags.append(f"keep={keep} exceeds the source expansion's resolution; "
                     f"{len(valid_classes)} significant classes available")
    kept_classes = valid_classes[:min(keep, len(valid_classes))]

    def build(cls_list, offset=0):
        out = []
        for rank, cl in enumerate(cls_list, start=1 + offset):
            for idx in cl:
                scale, mono, coeff, p, q = items[idx]
                out.append(HazardMonomial(scale=scale, exponents=mono, coeff=coeff,
                                          decay_power=p, decay_log=q,
                                          order_class=rank))
        return out

    kept = build(kept_classes)
    dropped_classes = [cl for cl in classes if cl not in kept_classes]
    dropped = build(dropped_classes, offset=len(kept_classes))

    ties = []
    pos = 0
    for cl in kept_classes:
        if len(cl) > 1:
            ties.append(tuple(range(pos, pos + len(cl))))
        pos += len(cl)
    return HazardScaleRewrite(kept=tuple(kept), dropped=tuple(dropped),
                              ties=tuple(ties), flags=tuple(flags))


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------


@dataclass
class EvaluationTable:
    t: np.ndarray
    term_values: np.ndarray            # shape (len(t), n_terms)
    totals: np.ndarray
    benchmark: np.ndarray              # remainder-scale value at each t
    cancellation: np.ndarray           # bool per row
    domain_ok: np.ndarray              # bool per row
    term_labels: tuple[str, ...]
    notes: list[str] = field(default_factory=list)


def _signed_log_sum(signs, logs) -> float:
    """sum_i s_i exp(l_i), scaled by the largest magnitude to stay in range."""
    finite = [(s, l) for s, l in zip(signs, logs) if s != 0.0 and l > -math.inf]
    if not finite:
        return 0.0
    m = max(l for _, l in finite)
    acc = sum(s * math.exp(l - m) for s, l in finite)
    return acc * math.exp(m)


def evaluate(expansion: TailExpansion, dist: TailDistribution, t_grid) -> EvaluationTable:
    """Evaluate every term on the grid in log-safe arithmetic.

    A grid point below some term's tail domain yields a per-point domain
    failure (NaN row), not a global error.  The cancellation flag fires when
    the signed total nearly vanishes against the largest term, or when two
    closed-form tail components of opposite sign nearly cancel across terms.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    n_t, n_terms = len(t_grid), len(expansion.terms)
    term_values = np.full((n_t, n_terms), np.nan)
    totals = np.full(n_t, np.nan)
    benchmark = np.full(n_t, np.nan)
    cancellation = np.zeros(n_t, dtype=bool)
    domain_ok = np.ones(n_t, dtype=bool)
    notes: list[str] = []

    for r, t in enumerate(t_grid):
        signs, logs = [], []
        components = []
        try:
            for col, term in enumerate(expansion.terms):
                s, l = dist.scaled_sf_deriv_signed_log(term.scale, term.deriv_index, t)
                if term.coeff < 0:
                    s, l = -s, l + math.log(-term.coeff)
                elif term.coeff > 0:
                    l = l + math.log(term.coeff)
                else:
                    s = 0.0
                term_values[r, col] = s * math.exp(l) if s else 0.0
                signs.append(s)
                logs.append(l)
                if term.deriv_index == 0:
                    comp = dist.tail_component_values(term.scale, t)
                    if comp is not None:
                        components.extend(float(term.coeff) * comp)
            rem = expansion.remainder
            log_bench = dist.scaled_logsf(rem.scale, t)
            if rem.hazard_power:
                log_bench += rem.hazard_power * math.log(dist.upper.hazard(t))
            benchmark[r] = math.exp(log_bench)
        except DomainError as exc:
            domain_ok[r] = False
            notes.append(f"t={t:g}: {exc}")
            continue

        totals[r] = _signed_log_sum(signs, logs)

        finite = np.abs(term_values[r][np.isfinite(term_values[r])])
        if n_terms >= 2 and finite.size and finite.max() > 0.0:
            if abs(totals[r]) < _CANCEL_RATIO * finite.max():
                cancellation[r] = True
                notes.append(f"t={t:g}: total nearly vanishes against the largest term")
        # opposite-sign closed-form pieces cancelling across terms
        pos = [v for v in components if v > 0]
        neg = [v for v in components if v < 0]
        for x in neg:
            for y in pos:
                if abs(x + y) <= _CANCEL_RATIO * max(-x, y):
                    cancellation[r] = True
                    notes.append(
                        f"t={t:g}: tail components {x:.6g} and {y:.6g} cancel")
                    break
            if cancellation[r]:
                break

    return EvaluationTable(t=t_grid, term_values=term_values, totals=totals,
                           benchmark=benchmark, cancellation=cancellation,
                           domain_ok=domain_ok,
                           term_labels=tuple(t.label for t in expansion.terms),
                           notes=notes)
