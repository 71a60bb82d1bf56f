"""Hockey-stick divergence and the approximate-coupling decision oracle.

An (eps, delta)-approximate coupling of mu1 and mu2 through a relation Phi
exists iff for every event S in the support of mu1,

    mu1(S) <= e^eps * mu2(Phi(S)) + delta,

where Phi(S) is the image of S under the relation.  The oracle computes the
least such delta by maximizing mu1(S) - e^eps * mu2(Phi(S)) exactly:

* when the distinct image sets are pairwise disjoint (shift maps, equality,
  partial injections) the maximum separates per image group;
* otherwise it enumerates activation patterns over the distinct image sets,
  which is exhaustive because the optimum is attained at a union of images.

The reduction from the expectation form over [0,1]-valued test functions is
cross-validated against a direct LP (:func:`lp_divergence`).
"""

from __future__ import annotations

import math
from typing import Callable, Hashable

from .dist import MASS_TOL, SubDist

# Beyond this many distinct image sets the oracle refuses rather than
# sampling: certification must be exhaustive.
SUPPORT_CAP = 20


class SupportTooLargeError(RuntimeError):
    """The event enumeration would exceed the exhaustiveness cap."""


Relation = Callable[[Hashable, Hashable], bool]


def hockey_stick(mu1: SubDist, mu2: SubDist, eps: float) -> float:
    """Least delta such that mu1(S) <= e^eps * mu2(S) + delta for all S.

    Equals sum_x max(mu1(x) - e^eps * mu2(x), 0).  DP of a pair of output
    distributions at (eps, delta) holds iff the result is at most delta.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    e = math.exp(eps)
    return math.fsum(
        max(p - e * mu2.prob(v), 0.0) for v, p in mu1.items() if p > e * mu2.prob(v)
    )


def coupling_divergence(mu1: SubDist, mu2: SubDist, phi: Relation, eps: float) -> float:
    """Least delta at which the (eps, delta)-phi-coupling of mu1, mu2 exists."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    e = math.exp(eps)
    b_vals = mu2.support()
    b_weight = [mu2.prob(b) for b in b_vals]

    # Group the left support by image bitmask over the right support.
    groups: dict[int, float] = {}
    for a, p in mu1.items():
        mask = 0
        for i, b in enumerate(b_vals):
            if phi(a, b):
                mask |= 1 << i
        groups[mask] = groups.get(mask, 0.0) + p

    # Elements with no image inflate every event for free.
    free_mass = groups.pop(0, 0.0)
    if not groups:
        return free_mass

    masks = list(groups)

    def mask_weight(mask: int) -> float:
        total = 0.0
        i = 0
        while mask:
            if mask & 1:
                total += b_weight[i]
            mask >>= 1
            i += 1
        return total

    union_all = 0
    disjoint = True
    for m in masks:
        if m & union_all:
            disjoint = False
            break
        union_all |= m

    if disjoint:
        gain = sum(
            max(w - e * mask_weight(m), 0.0) for m, w in groups.items()
        )
        return free_mass + gain

    if len(masks) > SUPPORT_CAP:
        raise SupportTooLargeError(
            f"{len(masks)} distinct image sets exceed the cap of {SUPPORT_CAP}"
        )

    # Exhaustive search over unions of image sets; the optimal event is
    # always the union of the images it activates.
    best = 0.0
    weight_cache: dict[int, float] = {}
    n = len(masks)
    for pattern in range(1 << n):
        union = 0
        for i in range(n):
            if pattern & (1 << i):
                union |= masks[i]
        if union not in weight_cache:
            weight_cache[union] = mask_weight(union)
        s_mass = free_mass + sum(
            w for m, w in groups.items() if m & ~union == 0
        )
        val = s_mass - e * weight_cache[union]
        if val > best:
            best = val
    return best


def coupling_exists(
    mu1: SubDist,
    mu2: SubDist,
    phi: Relation,
    eps: float,
    delta: float,
    tol: float = MASS_TOL,
) -> bool:
    """Decide whether the (eps, delta)-phi-coupling exists, up to ``tol``."""
    if delta >= 1.0:
        return True
    return coupling_divergence(mu1, mu2, phi, eps) <= delta + tol


def coupling_monotone_check(
    mu1: SubDist,
    mu2: SubDist,
    phi: Relation,
    eps: float,
    delta: float,
    eps2: float,
    delta2: float,
    phi2: Relation,
    tol: float = MASS_TOL,
) -> bool:
    """Whenever a coupling exists, it also exists at weakened parameters.

    Vacuously true if the original claim does not hold.  Requires
    eps2 >= eps, delta2 >= delta, and phi2 extending phi.
    """
    if eps2 < eps or delta2 < delta:
        raise ValueError("weakened parameters must dominate the original ones")
    if not coupling_exists(mu1, mu2, phi, eps, delta, tol):
        return True
    return coupling_exists(mu1, mu2, phi2, eps2, delta2, tol)


def lp_divergence(mu1: SubDist, mu2: SubDist, phi: Relation, eps: float) -> float:
    """Reference oracle: direct LP over [0,1]-valued test functions.

    Maximizes E_mu1[f] - e^eps * E_mu2[g] subject to f(a) <= g(b) for all
    related (a, b).  Values off the supports are irrelevant (optimal f is 0
    there, optimal g is 1), so the LP ranges over the supports only.
    """
    from scipy.optimize import linprog

    a_vals = mu1.support()
    b_vals = mu2.support()
    if not a_vals:
        return 0.0
    e = math.exp(eps)
    n_a, n_b = len(a_vals), len(b_vals)
    c = [-mu1.prob(a) for a in a_vals] + [e * mu2.prob(b) for b in b_vals]
    rows = []
    for i, a in enumerate(a_vals):
        for j, b in enumerate(b_vals):
            if phi(a, b):
                row = [0.0] * (n_a + n_b)
                row[i] = 1.0
                row[n_a + j] = -1.0
                rows.append(row)
    kwargs = dict(c=c, bounds=[(0.0, 1.0)] * (n_a + n_b), method="highs")
    if rows:
        kwargs.update(A_ub=rows, b_ub=[0.0] * len(rows))
    res = linprog(**kwargs)
    if not res.success:
        raise RuntimeError(f"reference LP failed: {res.message}")
    return max(0.0, -float(res.fun))


def relation_from_pairs(pairs) -> Relation:
    """Relation predicate from an explicit set of (a, b) pairs."""
    pairset = frozenset(pairs)
    return lambda a, b: (a, b) in pairset


def shift_relation(k: int) -> Relation:
    """The graph of z -> z + k."""
    return lambda z, zp: zp == z + k


def equality_relation() -> Relation:
    return lambda a, b: a == b
