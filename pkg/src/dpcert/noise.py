"""The noise port: the seam between mechanisms and their execution mode.

Mechanisms request noise through a :class:`NoiseSource` and report their
declared budget consumption through its ``charge`` hook.  The same mechanism
code then runs unchanged under a seeded sampler (execution mode) or under
the branching replay source used by the certifier (verification mode).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional

from .budget import Credits, Ledger
from .sampling import LaplaceSampler


class NoiseSource(ABC):
    """Port with one noise operation plus a ledger cost hook."""

    ledger: Optional[Ledger] = None

    @abstractmethod
    def laplace(self, eps, mean: int) -> int:
        """Return a discrete-Laplace draw with scale ``eps`` and mean ``mean``."""

    def charge(self, label: str, eps, delta=0) -> None:
        # A nonpositive scale is a deterministic draw and costs nothing.
        if self.ledger is not None:
            self.ledger.spend(label, Credits(max(eps, 0), max(delta, 0)))


class SamplingNoise(NoiseSource):
    """Execution mode: real draws from a seeded exact sampler.

    Every draw lands in the sampler's trace; charges land in the ledger, so
    a run leaves a complete audit trail.
    """

    def __init__(self, sampler: LaplaceSampler, ledger: Optional[Ledger] = None):
        self.sampler = sampler
        self.ledger = ledger

    def laplace(self, eps, mean: int) -> int:
        return self.sampler.sample(eps, mean)
