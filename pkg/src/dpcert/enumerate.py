"""Exhaustive execution of a mechanism over all truncated noise outcomes.

A mechanism is any callable taking a noise source and returning a hashable
output.  The enumerator repeatedly replays recorded noise prefixes; when the
mechanism requests a draw beyond the prefix, the path forks over the entire
truncated support of that draw.  The discarded tail mass of every draw is
accumulated (weighted by the path probability) into the reported tail slack,
so ``1 - mass(dist) <= tail_slack`` always holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable

from .budget import Credits
from .dist import SubDist, laplace_truncated
from .noise import NoiseSource


class BranchCapError(RuntimeError):
    """The enumeration exceeded the configured branch budget."""


@dataclass(frozen=True)
class EnumConfig:
    """Truncation radius per Laplace call and a safety cap on total branches."""

    radius: int
    max_branches: int = 5_000_000

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be positive")
        if self.max_branches < 1:
            raise ValueError("max_branches must be positive")


class _BranchNeeded(Exception):
    __slots__ = ("eps", "mean")

    def __init__(self, eps, mean):
        self.eps = eps
        self.mean = mean


# float views of charged rationals, keyed by (num, den) to dodge the cost of
# hashing Fraction objects on the hot path
_FLOAT_CACHE: dict[tuple[int, int], float] = {}

_ZERO = Fraction(0)


class ReplayNoise(NoiseSource):
    """Noise source that replays a fixed outcome prefix.

    A draw beyond the prefix aborts the run and reports the pending request;
    charges are recorded per path so the enumerator can audit worst-case
    ledger totals.
    """

    __slots__ = ("choices", "pos", "charges", "eps_spent")

    ledger = None

    def __init__(self, choices: tuple):
        self.choices = choices
        self.pos = 0
        self.charges: list[tuple[str, Fraction, Fraction]] = []
        self.eps_spent = 0.0

    def laplace(self, eps, mean: int) -> int:
        i = self.pos
        if i < len(self.choices):
            self.pos = i + 1
            return self.choices[i]
        raise _BranchNeeded(eps, mean)

    def charge(self, label, eps, delta=_ZERO):
        if type(eps) is not Fraction:
            eps = Fraction(eps)
        if type(delta) is not Fraction:
            delta = Fraction(delta)
        if eps < 0:
            eps = _ZERO
        if delta < 0:
            delta = _ZERO
        self.charges.append((label, eps, delta))
        key = (eps.numerator, eps.denominator)
        f = _FLOAT_CACHE.get(key)
        if f is None:
            f = _FLOAT_CACHE[key] = float(eps)
        self.eps_spent += f


@dataclass
class EnumResult:
    """Exact output subdistribution of a mechanism plus audit data."""

    dist: SubDist
    tail_slack: float
    paths: int
    max_spend: Credits
    max_spend_entries: list[tuple[str, Fraction, Fraction]]

    def ledger_jsonable(self) -> list[dict]:
        return [
            {"label": label, "eps": str(e), "delta": str(d)}
            for label, e, d in self.max_spend_entries
        ]


def enumerate_mechanism(
    mech: Callable[[NoiseSource], Hashable], cfg: EnumConfig
) -> EnumResult:
    """Compute the exact output distribution of ``mech`` under truncation."""
    out: dict[Hashable, float] = {}
    tail_acc = 0.0
    paths = 0
    branches = 0
    worst_eps = -1.0
    worst_charges: list[tuple[str, Fraction, Fraction]] = []

    # Truncated supports are translation invariant: cache offsets per scale.
    offsets_cache: dict[tuple[int, int], tuple[list[tuple[int, float]], float]] = {}

    def offsets_for(eps) -> tuple[list[tuple[int, float]], float]:
        if type(eps) is not Fraction:
            eps = Fraction(eps)
        key = (eps.numerator, eps.denominator)
        hit = offsets_cache.get(key)
        if hit is None:
            dist, tail = laplace_truncated(eps, 0, cfg.radius)
            hit = (sorted(dist.items()), tail)
            offsets_cache[key] = hit
        return hit

    stack: list[tuple[tuple, float]] = [((), 1.0)]
    while stack:
        choices, weight = stack.pop()
        ns = ReplayNoise(choices)
        try:
            value = mech(ns)
        except _BranchNeeded as request:
            offs, tail = offsets_for(request.eps)
            tail_acc += weight * tail
            branches += len(offs)
            if branches > cfg.max_branches:
                raise BranchCapError(
                    f"enumeration exceeded {cfg.max_branches} branches"
                ) from None
            mean = request.mean
            stack.extend(
                (choices + (mean + d,), weight * p) for d, p in offs
            )
            continue
        paths += 1
        out[value] = out.get(value, 0.0) + weight
        if ns.eps_spent > worst_eps:
            worst_eps = ns.eps_spent
            worst_charges = ns.charges

    dist = SubDist(out)
    eps_total = sum((e for _, e, _ in worst_charges), Fraction(0))
    delta_total = sum((d for _, _, d in worst_charges), Fraction(0))
    tail_slack = max(tail_acc, 1.0 - dist.mass())
    return EnumResult(
        dist=dist,
        tail_slack=tail_slack,
        paths=paths,
        max_spend=Credits(eps_total, delta_total),
        max_spend_entries=worst_charges,
    )
