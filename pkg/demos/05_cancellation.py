"""A two-term expansion can secretly be a one-term expansion.

Take the signed tail S(t) = e(t) - e(2t) with e(t) = exp(-(log t)^1.5) and
weights (1, 1/2).  The subcritical expansion is S(t) + S(2t), formally two
terms; but the second piece of S(t) cancels the leading piece of S(2t)
exactly, so the total is e(t) - e(4t): one significant term at the claimed
resolution.  The evaluator sees the signed closed-form components and raises
the cancellation flag; the ratio |total - e(t)| / S(2t) decaying to zero
confirms that the second term carries no second-order information.
"""

import math

import numpy as np

import lighttails as lt

e1 = lambda t: math.exp(-math.log(t) ** 1.5)

mix = lt.log_power_mixture(
    [(1.0, 1.0, [(1.0, 1.5)]), (-1.0, 2.0, [(1.0, 1.5)])], t0=2.0)
seq = lt.WeightSequence([1.0, 0.5])
exp = lt.expand(mix, seq, 2)

print("expansion terms:",
      [(t.scale, t.deriv_index, t.coeff) for t in exp.terms])

grid = np.geomspace(10.0, 1e5, 6)
table = lt.evaluate(exp, mix, grid)
print(f"\n{'t':>10} {'total':>13} {'e(t) - e(4t)':>13} "
      f"{'flag':>5} {'|total - e(t)|/S(2t)':>22}")
for i, t in enumerate(grid):
    closed = e1(t) - e1(4 * t)
    ratio = abs(table.totals[i] - e1(t)) / mix.sf(2 * t)
    print(f"{t:10.1f} {table.totals[i]:13.6e} {closed:13.6e} "
          f"{str(bool(table.cancellation[i])):>5} {ratio:22.4e}")

print("\nnotes from the evaluator:")
for note in table.notes[:3]:
    print(" ", note)
