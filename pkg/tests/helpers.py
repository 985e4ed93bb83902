"""Independent oracles used by the tests.

Everything here is deliberately written against the math directly (composition
sums, Richardson-extrapolated finite differences, multinomial expansions,
closed-form special values) and never calls the code paths it is checking.
"""

from __future__ import annotations

import math
from itertools import product


def compositions(total: int, parts: int):
    """All tuples of `parts` positive integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def faa_di_bruno_ratio(hazard_values, k: int) -> float:
    """S^(k)/S via the composition sum: sum over i of ((-1)^i / i!) times
    sum over n_1+..+n_i = k of k!/(n_1! .. n_i!) * prod h^(n_j - 1)."""
    if k == 0:
        return 1.0
    total = 0.0
    for i in range(1, k + 1):
        inner = 0.0
        for comp in compositions(k, i):
            coeff = math.factorial(k)
            prod = 1.0
            for n in comp:
                coeff //= math.factorial(n)
                prod *= hazard_values[n - 1]
            inner += coeff * prod
        total += ((-1) ** i / math.factorial(i)) * inner
    return total


def hand_survival_ratio(hazard_values, k: int) -> float:
    """Hand-derived S^(k)/S for k <= 4 in terms of h and its derivatives."""
    h = hazard_values[0]
    h1 = hazard_values[1] if k >= 2 else 0.0
    h2 = hazard_values[2] if k >= 3 else 0.0
    h3 = hazard_values[3] if k >= 4 else 0.0
    if k == 0:
        return 1.0
    if k == 1:
        return -h
    if k == 2:
        return -h1 + h * h
    if k == 3:
        return -h2 + 3 * h1 * h - h ** 3
    if k == 4:
        return -h3 + 4 * h * h2 + 3 * h1 ** 2 - 6 * h1 * h ** 2 + h ** 4
    raise ValueError("hand forms available for k <= 4")


def _central_stencil(f, x: float, k: int, step: float) -> float:
    if k == 1:
        return (f(x + step) - f(x - step)) / (2 * step)
    if k == 2:
        return (f(x + step) - 2 * f(x) + f(x - step)) / step**2
    if k == 3:
        return (f(x + 2 * step) - 2 * f(x + step) + 2 * f(x - step)
                - f(x - 2 * step)) / (2 * step**3)
    if k == 4:
        return (f(x + 2 * step) - 4 * f(x + step) + 6 * f(x)
                - 4 * f(x - step) + f(x - 2 * step)) / step**4
    raise ValueError("finite differences available for k <= 4")


def richardson_derivative(f, x: float, k: int, step: float) -> float:
    """Fourth-order finite difference: Richardson combination of central stencils."""
    coarse = _central_stencil(f, x, k, step)
    fine = _central_stencil(f, x, k, step / 2)
    return (4.0 * fine - coarse) / 3.0


def multinomial_moment(weights, moments, n: int) -> float:
    """E[(sum_j w_j X_j)^n] for independent X_j with the given raw moments,
    by direct multinomial expansion (exponential in len(weights), tests only)."""
    total = 0.0
    m = len(weights)
    for ks in product(range(n + 1), repeat=m):
        if sum(ks) != n:
            continue
        coeff = math.factorial(n)
        term = 1.0
        for w, k in zip(weights, ks):
            coeff //= math.factorial(k)
            term *= w**k * moments[k]
        total += coeff * term
    return total


def weibull_raw_moment(a: float, k: int, symmetric: bool = False) -> float:
    """Closed form: E[X^k] = Gamma(k/a + 1) for the one-sided stretched
    exponential; the symmetric version zeroes odd orders and keeps even ones."""
    if symmetric and k % 2 == 1:
        return 0.0
    return math.gamma(k / a + 1.0)


def geometric_power_sum(first: float, ratio: float, n: int) -> float:
    """sum_{k>=0} (first * ratio^k)^n."""
    return first**n / (1.0 - ratio**n)
