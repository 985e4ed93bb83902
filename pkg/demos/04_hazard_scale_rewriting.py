"""Rewriting derivative terms in the hazard scale reveals the significant terms.

A supercritical expansion of order 3 has four operator terms, but expressed
in the monomials h^e0 (h')^e1 ... times the survival, their decay orders
interleave: which monomial comes fourth depends on the regular-variation
index (h^3 against h').  Ties are kept together and reported.
"""

import lighttails as lt

seq = lt.WeightSequence([1.0, 0.5])

for a in (0.4, 0.5, 0.7):
    w = lt.weibull_type(a)
    exp = lt.expand(w, seq, 3)
    rw = lt.rewrite_in_hazard_scale(exp, w, keep=4)
    print(f"\n=== index a = {a}: four significant classes")
    for mono in rw.kept:
        print(f"  class {mono.order_class}: {mono.label:<16} coeff {mono.coeff:+.6g}"
              f"   decay t^-{mono.decay_power:.2f}")
    if rw.ties:
        print(f"  tied classes (kept together): {rw.ties}")
    print(f"  dropped below resolution: {[m.label for m in rw.dropped]}")

print("\n=== asking beyond the source expansion's resolution is flagged")
w = lt.weibull_type(0.4)
rw = lt.rewrite_in_hazard_scale(lt.expand(w, seq, 3), w, keep=10)
print(f"  flags: {rw.flags}")
print(f"  kept classes: {max(m.order_class for m in rw.kept)}")
