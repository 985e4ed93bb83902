"""Weight sequences for the infinite sum, with tail-dominance ordering.

A sequence is an explicit head of nonzero weights plus an optional geometric
generator continuing it (entry i beyond the head equals the last explicit
weight times ratio^(i - last_index)).  The summability requirement is that
sum |c_i|^delta is finite for the declared delta in (0, 1); geometric tails
always satisfy it, so the constructor verifies the head by direct summation
and the tail in closed form.

Because the innovation tails are rapidly varying, scales compare by tail
dominance: in balanced mode (two-sided innovations with balanced tails) two
scales are equivalent exactly when their magnitudes are equal; in one-sided
mode every nonpositive scale is equivalent to zero and precedes any positive
scale.  Either way the induced ordering is total on equivalence classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

__all__ = ["Ordering", "GeometricTail", "Level", "WeightSequence"]


class Ordering(Enum):
    PRECEDES = "precedes"
    EQUIVALENT = "equivalent"
    SUCCEEDS = "succeeds"


@dataclass(frozen=True)
class GeometricTail:
    """Continuation rule: weight(i) = first_value * ratio^(i - start_index)."""

    ratio: float
    start_index: int
    first_value: float

    def __post_init__(self):
        if not 0.0 < abs(self.ratio) < 1.0:
            raise ValueError("generator ratio must satisfy 0 < |ratio| < 1")
        if self.first_value == 0.0:
            raise ValueError("generator first value must be nonzero")

    def weight(self, i: int) -> float:
        if i < self.start_index:
            raise KeyError(i)
        return self.first_value * self.ratio ** (i - self.start_index)

    def power_sum(self, n: int) -> float:
        """sum_{i >= start} weight(i)^n, closed form."""
        r = self.ratio ** n
        return self.first_value ** n / (1.0 - r)

    def abs_tail_sum(self, from_index: int) -> float:
        """sum_{i >= from_index} |weight(i)|."""
        if from_index < self.start_index:
            from_index = self.start_index
        head = abs(self.first_value) * abs(self.ratio) ** (from_index - self.start_index)
        return head / (1.0 - abs(self.ratio))


@dataclass(frozen=True)
class Level:
    magnitude: float
    pos_count: int
    neg_count: int

    @property
    def multiplicity(self) -> int:
        return self.pos_count + self.neg_count


class WeightSequence:
    """Nonzero weights c_i, i = 1..n explicit, optionally continued geometrically."""

    def __init__(self, weights, delta: float = 0.5, sign_mode: str = "one_sided",
                 generator: GeometricTail | None = None):
        if sign_mode not in ("one_sided", "balanced"):
            raise ValueError("sign_mode must be 'one_sided' or 'balanced'")
        if not 0.0 < delta < 1.0:
            raise ValueError("summability exponent delta must lie in (0, 1)")
        entries = []
        index = 1
        for w in weights:
            w = float(w)
            if w == 0.0:
                continue  # point mass at zero is the convolution unit
            if sign_mode == "one_sided" and w < 0.0:
                raise ValueError("one_sided mode admits only positive weights")
            entries.append((index, w))
            index += 1
        if not entries:
            raise ValueError("weight sequence must contain a nonzero entry")
        if generator is not None and generator.start_index != entries[-1][0] + 1:
            raise ValueError("generator must start right after the explicit entries")
        if generator is not None and sign_mode == "one_sided" and (
                generator.first_value < 0 or generator.ratio < 0):
            raise ValueError("one_sided mode admits only positive generator weights")
        if generator is not None and abs(generator.first_value) > abs(entries[-1][1]):
            raise ValueError("generator must continue below the last explicit weight, "
                             "so that maximal entries stay explicit")

        self.entries: tuple[tuple[int, float], ...] = tuple(entries)
        self.delta = float(delta)
        self.sign_mode = sign_mode
        self.generator = generator
        # head summed exactly, generator tail in closed form (always finite)
        self._delta_sum = sum(abs(w) ** delta for _, w in entries)
        if generator is not None:
            r = abs(generator.ratio) ** delta
            self._delta_sum += abs(generator.first_value) ** delta / (1.0 - r)
        if not math.isfinite(self._delta_sum):
            raise ValueError("sum |c_i|^delta diverges for the declared delta")

    # -- basic access -------------------------------------------------------

    @classmethod
    def geometric(cls, first: float, ratio: float, head: int = 1, delta: float = 0.5,
                  sign_mode: str = "one_sided") -> "WeightSequence":
        """Fully geometric sequence c_i = first * ratio^(i-1) with `head` explicit entries."""
        weights = [first * ratio ** k for k in range(head)]
        gen = GeometricTail(ratio=ratio, start_index=head + 1,
                            first_value=first * ratio ** head)
        return cls(weights, delta=delta, sign_mode=sign_mode, generator=gen)

    @property
    def explicit_indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def weight(self, i: int) -> float:
        for j, w in self.entries:
            if j == i:
                return w
        if self.generator is not None:
            return self.generator.weight(i)
        raise KeyError(f"no weight with index {i}")

    def is_finite(self) -> bool:
        return self.generator is None

    def iter_weights(self, min_magnitude: float = 0.0) -> Iterator[tuple[int, float]]:
        """All (index, weight) with |weight| >= min_magnitude; finite for positive bound."""
        if min_magnitude <= 0.0 and self.generator is not None:
            raise ValueError("enumerating an infinite sequence needs a positive magnitude bound")
        for i, w in self.entries:
            if abs(w) >= min_magnitude:
                yield i, w
        if self.generator is not None:
            i = self.generator.start_index
            while True:
                w = self.generator.weight(i)
                if abs(w) < min_magnitude:
                    break
                yield i, w
                i += 1

    # -- ordering -----------------------------------------------------------

    def compare(self, a: float, b: float) -> Ordering:
        """Tail-dominance comparison of scales a, b under the standard conditions."""
        if self.sign_mode == "one_sided":
            a_cls = a if a > 0 else 0.0
            b_cls = b if b > 0 else 0.0
        else:
            a_cls, b_cls = abs(a), abs(b)
        if a_cls == b_cls:
            return Ordering.EQUIVALENT
        return Ordering.PRECEDES if a_cls < b_cls else Ordering.SUCCEEDS

    # -- levels ---------------------------------------------------------------

    def levels(self, count: int | None = None) -> list[Level]:
        """Distinct magnitudes in decreasing order with signed multiplicities.

        For a generated (infinite) sequence, `count` bounds how many levels are
        materialized; explicit entries and generator values are merged, grouping
        magnitudes that coincide exactly.
        """
        if count is None and self.generator is not None:
            raise ValueError("infinite sequence: pass the number of levels to materialize")

        groups: dict[float, list[int]] = {}
        for _, w in self.entries:
            groups.setdefault(abs(w), [0, 0])[0 if w > 0 else 1] += 1

        gen_mags: list[float] = []
        if self.generator is not None and count is not None:
            # enough generator values that, merged with the head, `count` levels exist
            need = count + len(groups) + 2
            v = self.generator.first_value
            for _ in range(need):
                sign = 0 if v > 0 else 1
                mag = abs(v)
                if mag in groups or mag in gen_mags:
                    groups.setdefault(mag, [0, 0])[sign] += 1
                else:
                    gen_mags.append(mag)
                    groups[mag] = [0, 0]
                    groups[mag][sign] = 1
                v *= self.generator.ratio

        ordered = sorted(groups.items(), key=lambda kv: -kv[0])
        out = [Level(mag, pos, neg) for mag, (pos, neg) in ordered]
        return out[:count] if count is not None else out

    @property
    def max_magnitude(self) -> float:
        top = max(abs(w) for _, w in self.entries)
        return top  # generator values are strictly below the last explicit entry

    def maximal_indices(self) -> tuple[int, ...]:
        """Indices of entries equivalent to the top class (|c| equal to the max)."""
        top = self.max_magnitude
        return tuple(i for i, w in self.entries if abs(w) == top)

    # -- residual and sums ----------------------------------------------------

    def residual(self, i: int) -> "WeightSequence":
        """The sequence with explicit entry i deleted (distribution of the sum without it)."""
        if i not in self.explicit_indices:
            raise KeyError(f"index {i} is not an explicit entry")
        kept = [w for j, w in self.entries if j != i]
        if not kept and self.generator is None:
            raise ValueError("residual of a single-entry sequence is empty")
        gen = self.generator
        if gen is not None and not kept:
            # promote one generated value into the head so the sequence stays valid
            kept = [gen.first_value]
            gen = GeometricTail(ratio=gen.ratio, start_index=2,
                                first_value=gen.first_value * gen.ratio)
        elif gen is not None:
            # keep generated values identical; re-anchor the start index
            gen = GeometricTail(ratio=gen.ratio, start_index=len(kept) + 1,
                                first_value=gen.first_value)
        return WeightSequence(kept, delta=self.delta, sign_mode=self.sign_mode,
                              generator=gen)

    def power_sum(self, n: int) -> float:
        """sum_i c_i^n over the whole sequence (head exact, generator closed form)."""
        total = sum(w ** n for _, w in self.entries)
        if self.generator is not None:
            total += self.generator.power_sum(n)
        return total

    def residual_power_sum(self, i: int, n: int) -> float:
        """sum_{j != i} c_j^n.  For explicit i the head is summed directly so no
        cancellation error enters; generator indices subtract their closed form."""
        if i in self.explicit_indices:
            total = sum(w ** n for j, w in self.entries if j != i)
            if self.generator is not None:
                total += self.generator.power_sum(n)
            return total
        if self.generator is None:
            raise KeyError(f"no weight with index {i}")
        return self.power_sum(n) - self.generator.weight(i) ** n

    def abs_sum(self) -> float:
        total = sum(abs(w) for _, w in self.entries)
        if self.generator is not None:
            total += self.generator.abs_tail_sum(self.generator.start_index)
        return total

    def truncation_index(self, eps: float) -> int:
        """Smallest N with sum_{i > N} |c_i| < eps; closed form on the generator."""
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        last = self.entries[-1][0]
        if self.generator is None:
            # dropping trailing explicit entries while the remainder stays below eps
            n = last
            tail = 0.0
            for j, w in reversed(self.entries):
                if tail + abs(w) < eps:
                    tail += abs(w)
                    n = j - 1
                else:
                    break
            return n
        gen = self.generator
        if gen.abs_tail_sum(gen.start_index) < eps:
            return self.truncation_index_explicit_part(eps)
        # need sum_{i > N} = |first| r^(N+1-start) / (1-r) < eps
        r = abs(gen.ratio)
        bound = eps * (1.0 - r) / abs(gen.first_value)
        n = gen.start_index - 1 + max(0, math.ceil(math.log(bound) / math.log(r)))
        while gen.abs_tail_sum(n + 1) >= eps:
            n += 1
        while n > gen.start_index - 1 and gen.abs_tail_sum(n) < eps:
            n -= 1
        return n

    def truncation_index_explicit_part(self, eps: float) -> int:
        gen_sum = self.generator.abs_tail_sum(self.generator.start_index) if self.generator else 0.0
        n = self.entries[-1][0]
        tail = gen_sum
        for j, w in reversed(self.entries):
            if tail + abs(w) < eps:
                tail += abs(w)
                n = j - 1
            else:
                break
        return n

    def truncated_entries(self, n: int) -> tuple[tuple[int, float], ...]:
        """Entries with index <= n, generator included."""
        out = [(i, w) for i, w in self.entries if i <= n]
        if self.generator is not None:
            for i in range(self.generator.start_index, n + 1):
                out.append((i, self.generator.weight(i)))
        return tuple(out)

    def __repr__(self):
        head = ", ".join(f"{w:g}" for _, w in self.entries[:6])
        more = ", ..." if self.generator is not None or len(self.entries) > 6 else ""
        return (f"WeightSequence([{head}{more}], delta={self.delta}, "
                f"sign_mode={self.sign_mode!r})")
