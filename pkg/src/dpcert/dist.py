"""Finite-support discrete subdistributions and the discrete Laplacian.

A subdistribution assigns nonnegative weight to countably many values with
total mass at most 1; mass may be "missing" (e.g. discarded by truncation).
The discrete Laplacian with rational scale ``eps`` and integer mean ``m`` has

    pmf(v) = (e^eps - 1) / (e^eps + 1) * e^(-eps * |v - m|)

for ``eps > 0``; for ``eps <= 0`` it degenerates to the point mass at ``m``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Mapping

# Tolerance folded into every probability inequality.  Probabilities are
# doubles; exact rational weights are impossible since e^(-eps) is irrational.
MASS_TOL = 1e-9

# Supports are nominally 64-bit; exceeding this is an error, not wraparound.
_INT64_MAX = 2**63 - 1

Value = Hashable


def _rational(eps) -> Fraction:
    if isinstance(eps, float):
        raise TypeError("scale must be rational (int, Fraction, or 'num/den' string)")
    return Fraction(eps)


class LaplaceParams:
    """Scale/mean pair of a discrete Laplace request.

    ``eps`` is a rational scale; ``eps <= 0`` selects the point-mass
    convention.  ``mean`` is the integer center.
    """

    __slots__ = ("eps", "mean")

    def __init__(self, eps, mean: int):
        object.__setattr__(self, "eps", _rational(eps))
        object.__setattr__(self, "mean", int(mean))

    def __setattr__(self, name, value):
        raise AttributeError("LaplaceParams is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, LaplaceParams)
            and self.eps == other.eps
            and self.mean == other.mean
        )

    def __hash__(self):
        return hash((self.eps, self.mean))

    def __repr__(self):
        return f"LaplaceParams(eps={self.eps}, mean={self.mean})"


class SubDist:
    """Immutable finite-support subdistribution over hashable values.

    Zero-weight entries are pruned eagerly so support enumeration is exact.
    Total mass must not exceed ``1 + MASS_TOL``.
    """

    __slots__ = ("_w",)

    def __init__(self, weights: Mapping[Value, float]):
        w = {}
        total = 0.0
        for v, p in weights.items():
            p = float(p)
            if p < 0.0:
                raise ValueError(f"negative weight {p} at {v!r}")
            if p > 1.0 + MASS_TOL:
                raise ValueError(f"weight {p} at {v!r} exceeds 1")
            if p > 0.0:
                w[v] = p
                total += p
        if total > 1.0 + MASS_TOL:
            raise ValueError(f"total mass {total} exceeds 1")
        object.__setattr__(self, "_w", w)

    def __setattr__(self, name, value):
        raise AttributeError("SubDist is immutable")

    @staticmethod
    def point(v: Value) -> "SubDist":
        return SubDist({v: 1.0})

    def prob(self, v: Value) -> float:
        return self._w.get(v, 0.0)

    def mass(self) -> float:
        return math.fsum(self._w.values())

    def support(self) -> list[Value]:
        # Deterministic order: natural when the values are comparable,
        # repr-keyed otherwise (mixed-type supports).
        try:
            return sorted(self._w)
        except TypeError:
            return sorted(self._w, key=repr)

    def items(self) -> Iterable[tuple[Value, float]]:
        return self._w.items()

    def __iter__(self) -> Iterator[Value]:
        return iter(self._w)

    def __len__(self) -> int:
        return len(self._w)

    def __eq__(self, other):
        return isinstance(other, SubDist) and self._w == other._w

    def __hash__(self):
        return hash(frozenset(self._w.items()))

    def bind(self, f: Callable[[Value], "SubDist"]) -> "SubDist":
        return dist_bind(self, f)

    def map(self, g: Callable[[Value], Value]) -> "SubDist":
        return dist_bind(self, lambda v: dist_ret(g(v)))

    def __repr__(self):
        inner = ", ".join(f"{v!r}: {p:.6g}" for v, p in sorted(self._w.items(), key=lambda kv: repr(kv[0])))
        return f"SubDist({{{inner}}})"


def dist_ret(v: Value) -> SubDist:
    """Point mass at ``v`` (monad return)."""
    return SubDist.point(v)


def dist_bind(mu: SubDist, f: Callable[[Value], SubDist]) -> SubDist:
    """Monad bind: result(b) = sum_a mu(a) * f(a)(b)."""
    acc: dict[Value, float] = {}
    for a, p in mu.items():
        for b, q in f(a).items():
            acc[b] = acc.get(b, 0.0) + p * q
    return SubDist(acc)


def dist_mass(mu: SubDist) -> float:
    """Total mass of ``mu`` (at most 1 up to MASS_TOL)."""
    return mu.mass()


def laplace_pmf(eps, mean: int, v: int) -> float:
    """Discrete-Laplace probability mass at ``v``.

    Closed form ((e^eps - 1)/(e^eps + 1)) * e^(-eps*|v-mean|) for eps > 0;
    point mass at ``mean`` for eps <= 0.
    """
    eps = _rational(eps)
    if eps <= 0:
        return 1.0 if v == mean else 0.0
    e = float(eps)
    coef = math.expm1(e) / (math.exp(e) + 1.0)
    return coef * math.exp(-e * abs(int(v) - int(mean)))


def laplace_tail(eps, radius: int) -> float:
    """Exact mass outside {mean-radius, ..., mean+radius}.

    Geometric series of the closed-form pmf: 2 * e^(-eps*radius) / (e^eps + 1).
    Zero under the point-mass convention (eps <= 0).
    """
    eps = _rational(eps)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if eps <= 0:
        return 0.0
    e = float(eps)
    return 2.0 * math.exp(-e * radius) / (math.exp(e) + 1.0)


def laplace_truncated(eps, mean: int, radius: int) -> tuple[SubDist, float]:
    """Discrete Laplacian restricted to ``[mean-radius, mean+radius]``.

    Returns the truncated subdistribution together with the exact discarded
    tail mass, so that mass(dist) + tail = 1 up to float rounding.
    """
    eps = _rational(eps)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    mean = int(mean)
    if abs(mean) + radius > _INT64_MAX:
        raise OverflowError("support exceeds 64-bit integer range")
    if eps <= 0:
        return SubDist.point(mean), 0.0
    e = float(eps)
    coef = math.expm1(e) / (math.exp(e) + 1.0)
    w = {mean + d: coef * math.exp(-e * abs(d)) for d in range(-radius, radius + 1)}
    return SubDist(w), laplace_tail(eps, radius)
