"""Exact discrete-Laplace sampling with seeded determinism.

The sampler is built from integer arithmetic plus Bernoulli(e^-gamma) draws
for rational gamma, never from floating-point CDF inversion (float samplers
are a well-known source of privacy bugs).  The construction is the standard
exact one: accept a uniform residue with probability e^(-u/den), extend with
a geometric number of whole e^-1 steps, contract by the numerator, and
symmetrize with a sign flip that rejects the duplicated zero.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from scipy.stats import chi2

from .dist import LaplaceParams, laplace_pmf

# A trace is an append-only list of (params, drawn value) pairs; it is the
# audit companion of the budget ledger for a sampled run.
SampleTrace = list[tuple[LaplaceParams, int]]


class LaplaceSampler:
    """Seeded exact sampler for the discrete Laplacian.

    Identical seeds produce identical sample streams for identical request
    sequences.  The underlying generator is the stdlib Mersenne Twister; the
    only primitive consumed is ``randrange`` (uniform integers), so every
    draw is exact.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._rng = random.Random(self.seed)
        self.trace: SampleTrace = []

    # -- exact Bernoulli factories -------------------------------------

    def _bernoulli(self, p: Fraction) -> bool:
        assert 0 <= p <= 1
        return self._rng.randrange(p.denominator) < p.numerator

    def _bernoulli_exp1(self, gamma: Fraction) -> bool:
        # Bernoulli(e^-gamma) for 0 <= gamma <= 1 via the alternating-series
        # trick: K = first k with Bernoulli(gamma/k) = 0; accept iff K odd.
        assert 0 <= gamma <= 1
        k = 1
        while self._bernoulli(gamma / k):
            k += 1
        return k % 2 == 1

    def _bernoulli_exp(self, gamma: Fraction) -> bool:
        # Bernoulli(e^-gamma) for any rational gamma >= 0.
        assert gamma >= 0
        while gamma > 1:
            if not self._bernoulli_exp1(Fraction(1)):
                return False
            gamma -= 1
        return self._bernoulli_exp1(gamma)

    def _geometric_exp(self, x: Fraction) -> int:
        # Geometric with Pr[k] proportional to e^(-x*k), k >= 0, for x > 0.
        assert x > 0
        t = x.denominator
        while True:
            u = self._rng.randrange(t)
            if self._bernoulli_exp(Fraction(u, t)):
                break
        v = 0
        while self._bernoulli_exp(Fraction(1)):
            v += 1
        return (v * t + u) // x.numerator

    # -- public API ------------------------------------------------------

    def sample(self, eps, mean: int) -> int:
        """Draw one value distributed per the discrete-Laplace pmf."""
        p = LaplaceParams(eps, mean)
        if p.eps <= 0:
            v = p.mean
        else:
            while True:
                negative = self._bernoulli(Fraction(1, 2))
                magnitude = self._geometric_exp(p.eps)
                if negative and magnitude == 0:
                    continue  # zero is generated only with positive sign
                v = p.mean + (-magnitude if negative else magnitude)
                break
        self.trace.append((p, v))
        return v


def sample_laplace(sampler: LaplaceSampler, eps, mean: int) -> int:
    return sampler.sample(eps, mean)


def goodness_of_fit(samples, eps, mean: int) -> float:
    """Chi-square p-value of ``samples`` against the discrete-Laplace pmf.

    Bins are single integers around the mean plus two aggregated tail
    buckets; outer bins are merged until every expected count is at least 5.
    Requires at least 1000 samples.
    """
    samples = list(samples)
    n = len(samples)
    if n < 1000:
        raise ValueError("goodness_of_fit needs at least 1000 samples")
    if isinstance(eps, float):
        raise TypeError("scale must be rational")
    eps = Fraction(eps)
    if eps <= 0:
        # Point mass: consistent iff every sample equals the mean.
        return 1.0 if all(s == mean for s in samples) else 0.0

    e = float(eps)

    def half_tail(k: int) -> float:
        # Mass of {v : v - mean >= k}; geometric series of the pmf.
        return math.exp(-e * (k - 1)) / (math.exp(e) + 1.0)

    # Choose the widest radius whose per-side tail bucket still expects >= 5.
    radius = 1
    while n * half_tail(radius + 1) >= 5.0 and radius < 10_000:
        radius += 1

    counts: dict[int, int] = {}
    lo_tail = hi_tail = 0
    for s in samples:
        d = s - mean
        if d < -radius:
            lo_tail += 1
        elif d > radius:
            hi_tail += 1
        else:
            counts[d] = counts.get(d, 0) + 1

    observed = [lo_tail]
    expected = [n * half_tail(radius + 1)]
    for d in range(-radius, radius + 1):
        observed.append(counts.get(d, 0))
        expected.append(n * laplace_pmf(eps, 0, d))
    observed.append(hi_tail)
    expected.append(n * half_tail(radius + 1))

    # Merge inward any bin that still expects fewer than 5 counts.
    obs_m: list[float] = []
    exp_m: list[float] = []
    for o, x in zip(observed, expected):
        if exp_m and exp_m[-1] < 5.0:
            obs_m[-1] += o
            exp_m[-1] += x
        else:
            obs_m.append(o)
            exp_m.append(x)
    if len(exp_m) > 1 and exp_m[-1] < 5.0:
        exp_m[-2] += exp_m.pop()
        obs_m[-2] += obs_m.pop()

    # Normalize expectations to the sample size (guards the tiny mass that
    # falls outside all buckets).
    scale = n / sum(exp_m)
    stat = sum((o - x * scale) ** 2 / (x * scale) for o, x in zip(obs_m, exp_m))
    dof = len(obs_m) - 1
    if dof <= 0:
        return 1.0
    return float(chi2.sf(stat, dof))
