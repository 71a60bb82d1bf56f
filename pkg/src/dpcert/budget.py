"""Privacy-credit accounting: splittable credits, a spend ledger, and filters.

Credits hold a multiplicative (eps) and an additive (delta) component.  They
are stored as exact rationals so split/join round-trips and ledger sums are
literal equalities; conversion to float happens only at divergence-check
boundaries.  Holding a full additive credit (delta >= 1) saturates the
accounting: every spend succeeds, since any mechanism is trivially
(eps, 1)-private.

Overspending the ledger is a hard error (the mechanism's declared cost was
wrong); a privacy filter's refusal is an ordinary value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, TypeVar

T = TypeVar("T")


class OverspendError(RuntimeError):
    """A spend or split exceeded the available credits."""


def _rat(x) -> Fraction:
    r = Fraction(x)
    if r < 0:
        raise ValueError(f"credits must be nonnegative, got {x}")
    return r


@dataclass(frozen=True)
class Credits:
    """A pair of nonnegative privacy credits (eps multiplicative, delta additive)."""

    eps: Fraction = Fraction(0)
    delta: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "eps", _rat(self.eps))
        object.__setattr__(self, "delta", _rat(self.delta))

    @property
    def saturated(self) -> bool:
        return self.delta >= 1

    def __add__(self, other: "Credits") -> "Credits":
        return Credits(self.eps + other.eps, self.delta + other.delta)

    def covers(self, cost: "Credits") -> bool:
        return self.eps >= cost.eps and self.delta >= cost.delta

    def minus(self, cost: "Credits") -> "Credits":
        if not self.covers(cost):
            raise OverspendError(f"cannot take {cost} out of {self}")
        return Credits(self.eps - cost.eps, self.delta - cost.delta)


def credits_split(c: Credits, eps1, delta1) -> tuple[Credits, Credits]:
    """Split ``c`` into a requested share and the exact remainder.

    Joining the two parts restores ``c`` exactly (rational arithmetic).
    """
    share = Credits(eps1, delta1)
    return share, c.minus(share)


def credits_join(a: Credits, b: Credits) -> Credits:
    return a + b


@dataclass
class Ledger:
    """Append-only spend log against an initial credit holding.

    ``spend`` fails hard on overdraft unless the remaining holdings are
    saturated (delta >= 1), in which case every spend is admitted.
    """

    initial: Credits
    entries: list[tuple[str, Credits]] = field(default_factory=list)

    @property
    def spent(self) -> Credits:
        total = Credits()
        for _, c in self.entries:
            total = total + c
        return total

    @property
    def remaining(self) -> Credits:
        spent = self.spent
        return Credits(
            max(self.initial.eps - spent.eps, Fraction(0)),
            max(self.initial.delta - spent.delta, Fraction(0)),
        )

    @property
    def saturated(self) -> bool:
        return self.remaining.delta >= 1

    def spend(self, label: str, cost: Credits) -> None:
        if not self.saturated and not self.remaining.covers(cost):
            raise OverspendError(
                f"spend {label!r} of {cost} exceeds remaining {self.remaining}"
            )
        self.entries.append((label, cost))

    def to_jsonable(self) -> list[dict]:
        return [
            {"label": label, "eps": str(c.eps), "delta": str(c.delta)}
            for label, c in self.entries
        ]


class PrivacyFilter:
    """Runtime guard that runs a costed thunk only when budget remains.

    Tracks the eps budget only; refusal returns ``None`` and leaves the
    remaining budget unchanged.  The thunk may itself call ``try_run`` on the
    same filter (the cost is deducted before the thunk runs), so nested
    filtered calls compose naturally.
    """

    def __init__(self, budget):
        budget = Fraction(budget)
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        self.remaining = budget

    def try_run(self, cost, thunk: Callable[[], T]) -> Optional[T]:
        cost = Fraction(cost)
        if cost < 0:
            raise ValueError("cost must be nonnegative")
        if self.remaining < cost:
            return None
        self.remaining -= cost
        return thunk()


class EpsDeltaFilter:
    """Two-component variant of :class:`PrivacyFilter` over (eps, delta)."""

    def __init__(self, budget: Credits):
        self.remaining = budget

    def try_run(self, cost: Credits, thunk: Callable[[], T]) -> Optional[T]:
        if not self.remaining.covers(cost):
            return None
        self.remaining = self.remaining.minus(cost)
        return thunk()
