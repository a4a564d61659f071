"""Finite and limiting detection probabilities on regular trees, Pólya urns
and increasing-tree counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from scipy import special

EXACT_SIZE_LIMIT = 200


class AsymptoticsError(ValueError):
    pass


def rising(b: int | Fraction, x: int, m: int) -> int | Fraction:
    """Rising product with step ``m``: ``b (b+m) ... (b+(x-1)m)``."""
    out = 1
    for i in range(x):
        out *= b + i * m
    return out


def _log_rising(b: float, x: int, m: int) -> float:
    if x == 0:
        return 0.0
    if m == 0:
        return x * math.log(b)
    return x * math.log(m) + math.lgamma(b / m + x) - math.lgamma(b / m)


# --------------------------------------------------------------------------
# Pólya urns
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UrnSpec:
    """``len(initial)`` colours, ``initial[j]`` starting balls of colour ``j``,
    ``m`` extra balls of the drawn colour returned per draw."""

    initial: tuple[int, ...]
    m: int
    draws: int

    def __post_init__(self) -> None:
        if not self.initial or any(b <= 0 for b in self.initial):
            raise AsymptoticsError("every colour needs a positive ball count")
        if self.m < 0 or self.draws < 0:
            raise AsymptoticsError("reinforcement and draws must be non-negative")

    @property
    def colors(self) -> int:
        return len(self.initial)

    @classmethod
    def spreading(cls, d: int, n: int) -> "UrnSpec":
        """Urn whose composition law equals the source's branch sizes after
        ``n`` infections on an infinite ``d``-regular tree."""
        if d < 2 or n < 1:
            raise AsymptoticsError("need d >= 2 and n >= 1")
        return cls((1,) * d, d - 2, n - 1)


def urn_joint_pmf(spec: UrnSpec, outcome: Sequence[int]) -> Fraction:
    """Exact probability that colour ``j`` is drawn ``outcome[j]`` times."""
    if len(outcome) != spec.colors or any(x < 0 for x in outcome):
        raise AsymptoticsError("outcome must give one non-negative count per colour")
    if sum(outcome) != spec.draws:
        raise AsymptoticsError(f"outcome sums to {sum(outcome)}, expected {spec.draws}")
    num = math.factorial(spec.draws)
    for b, x in zip(spec.initial, outcome):
        num = num * rising(b, x, spec.m)
    den = rising(sum(spec.initial), spec.draws, spec.m)
    for x in outcome:
        den *= math.factorial(x)
    return Fraction(num, den)


def urn_marginal_pmf(spec: UrnSpec, color: int = 0) -> tuple[Fraction, ...]:
    """Exact law of the number of draws of one colour."""
    b = spec.initial[color]
    rest = sum(spec.initial) - b
    if rest == 0:
        return tuple(Fraction(int(a == spec.draws)) for a in range(spec.draws + 1))
    two = UrnSpec((b, rest), spec.m, spec.draws)
    return tuple(urn_joint_pmf(two, (a, spec.draws - a)) for a in range(spec.draws + 1))


def urn_sample_batch(spec: UrnSpec, replicates: int, seed) -> np.ndarray:
    """``replicates`` independent compositions, one row each.

    Draw ``k`` of every replicate consumes row ``k`` of a pre-drawn uniform
    matrix, so results do not depend on how replicates are batched.
    """
    rng = np.random.default_rng(seed)
    init = np.asarray(spec.initial, dtype=np.int64)
    counts = np.zeros((replicates, spec.colors), dtype=np.int64)
    total = int(init.sum())
    for k in range(spec.draws):
        u = rng.random(replicates)
        weights = init + spec.m * counts
        cum = np.cumsum(weights, axis=1)
        target = u * (total + spec.m * k)
        pick = (cum <= target[:, None]).sum(axis=1)
        np.minimum(pick, spec.colors - 1, out=pick)
        counts[np.arange(replicates), pick] += 1
    return counts


def urn_sample(spec: UrnSpec, seed) -> tuple[int, ...]:
    return tuple(int(x) for x in urn_sample_batch(spec, 1, seed)[0])


# --------------------------------------------------------------------------
# Detection probability
# --------------------------------------------------------------------------


def in_detection_set(composition: Sequence[int], n: int) -> bool:
    """True when no branch of the source exceeds half of the ``n`` nodes."""
    return all(2 * x <= n for x in composition)


def detection_prob_exact(d: int, n: int, exact: bool | None = None, tie_weight: Fraction = Fraction(1)):
    """Probability that the source is a rumor center after ``n`` infections on
    an infinite ``d``-regular tree.

    At most one branch can hold more than ``n/2`` nodes, so the probability is
    ``1 - d * P(X_1 > n/2)`` with ``X_1`` the first branch size, whose law is
    the urn marginal. A branch of exactly ``n/2`` makes two centers; such
    compositions count with ``tie_weight`` (1 by default, ``1/2`` for
    half-weighting). Exact rationals are returned up to ``n = 200`` unless
    ``exact`` says otherwise.
    """
    if d < 2 or n < 1:
        raise AsymptoticsError("need d >= 2 and n >= 1")
    if n == 1:
        return Fraction(1) if exact is not False else 1.0
    if exact is None:
        exact = n <= EXACT_SIZE_LIMIT
    tie_weight = Fraction(tie_weight)
    draws = n - 1
    m = d - 2
    lo = n // 2 + 1
    tie = n // 2 if n % 2 == 0 else None
    if exact:
        spec = UrnSpec((1, d - 1), m, draws)
        tail = sum((urn_joint_pmf(spec, (a, draws - a)) for a in range(lo, n)), Fraction(0))
        tied = urn_joint_pmf(spec, (tie, draws - tie)) if tie is not None else Fraction(0)
        return 1 - d * tail - d * (1 - tie_weight) * tied
    log_den = _log_rising(float(d), draws, m)

    def log_p(a: int) -> float:
        return (
            math.lgamma(n) - math.lgamma(a + 1) - math.lgamma(n - a)
            + _log_rising(1.0, a, m)
            + _log_rising(float(d - 1), draws - a, m)
            - log_den
        )

    tail = math.fsum(math.exp(log_p(a)) for a in range(lo, n))
    tied = math.exp(log_p(tie)) if tie is not None else 0.0
    return 1.0 - d * tail - d * float(1 - tie_weight) * tied


def detection_prob_closed_form(d: int, n: int) -> Fraction:
    """Closed forms for lines (odd ``n``) and 3-regular trees."""
    if d == 2:
        if n % 2 == 0:
            raise AsymptoticsError("the line closed form needs odd n")
        t = (n - 1) // 2
        return Fraction(math.comb(2 * t, t), 4**t)
    if d == 3:
        if n % 2 == 0:
            return Fraction(n * n + 10 * n, 4 * n * n + 4 * n)
        return Fraction(n * n + 4 * n + 3, 4 * n * n + 4 * n)
    raise AsymptoticsError("closed forms exist for d = 2 and d = 3 only")


def detection_prob_limit(d: int, dps: int = 50) -> float:
    """Limit of the detection probability as ``n`` grows, for ``d >= 3``."""
    if d < 3:
        raise AsymptoticsError("the limit is defined for d >= 3")
    if d == 3:
        return 0.25
    with mpmath.workdps(dps):
        dp = mpmath.mpf(d - 2)
        alpha = 1 / dp
        pref = 2 * mpmath.gamma(2 / dp) / (dp * mpmath.gamma(1 / dp) * mpmath.gamma((d - 1) / dp))
        integral = (mpmath.beta(alpha, alpha + 1) - 1 / (alpha * mpmath.power(4, alpha))) / 2
        return float(1 - d * pref * integral)


def incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if not (0.0 <= x <= 1.0):
        raise AsymptoticsError("x must lie in [0, 1]")
    if not (a > 0 and b > 0):
        raise AsymptoticsError("a and b must be positive")
    return float(special.betainc(a, b, x))


# --------------------------------------------------------------------------
# Increasing trees
# --------------------------------------------------------------------------


def increasing_tree_counts(phi: Sequence[int], n_max: int) -> list[int]:
    """``T_1..T_{n_max}`` for the increasing-tree family with degree function
    ``phi(w) = sum_k phi[k] w^k``, from the series solution of ``T' = phi(T)``."""
    if n_max < 1:
        raise AsymptoticsError("n_max must be positive")
    a = [Fraction(0)] * (n_max + 1)  # exponential generating function coefficients
    for n in range(n_max):
        # coefficient of z^n in phi(T(z)), using a[0..n]
        power = [Fraction(0)] * (n + 1)
        power[0] = Fraction(1)
        acc = Fraction(0)
        for k, c in enumerate(phi):
            if k > 0:
                power = [
                    sum((power[i] * a[j - i] for i in range(j)), Fraction(0)) for j in range(n + 1)
                ]
            acc += c * power[n]
        a[n + 1] = acc / (n + 1)
    return [int(a[n] * math.factorial(n)) for n in range(1, n_max + 1)]


def increasing_tree_count(d: int, n: int) -> tuple[int, int]:
    """``(T_n, T~_n)`` for ``(d-1)``-ary increasing trees.

    ``T_n`` counts trees of size ``n`` whose nodes have ``d-1`` ordered child
    slots; ``T~_n`` is the variant whose root has ``d`` slots, which is the
    shape of a spreading history on a ``d``-regular tree.
    """
    if d < 3 or n < 1:
        raise AsymptoticsError("need d >= 3 and n >= 1")
    t = rising(1, n, d - 2)
    t_tilde = rising(2, n, d - 2) // 2
    return t, t_tilde
