"""Noise mechanisms over integer-row databases.

All mechanisms are written against the abstract noise port, so they run
identically under a real sampler and under the exhaustive branching source
used for certification.  Budget accounting convention:

* Above Threshold charges eps/2 when the noisy threshold is initialized and
  the remaining eps/2 only when a run releases ``True``.
* The sparse-vector wrapper re-initializes a fresh threshold after each
  released ``True`` while its counter lasts, for a worst case of N*eps.
* Report Noisy Max charges a constant eps regardless of the number of
  queries.
* The query cache charges the inner mechanism's cost once per distinct key.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .budget import PrivacyFilter
from .noise import NoiseSource

Database = Sequence[int]


class SensitivityError(ValueError):
    """A query's declared sensitivity violates a mechanism's precondition."""


# -- adjacency -----------------------------------------------------------


def row_hamming_adjacent(x: Database, y: Database) -> bool:
    """Databases differ in at most one row when compared as multisets."""
    cx: dict[int, int] = {}
    for r in x:
        cx[r] = cx.get(r, 0) + 1
    for r in y:
        cx[r] = cx.get(r, 0) - 1
    extra_x = sum(c for c in cx.values() if c > 0)
    extra_y = -sum(c for c in cx.values() if c < 0)
    return extra_x <= 1 and extra_y <= 1


def value_bounded_adjacent(x: Database, y: Database) -> bool:
    """Same length, pointwise absolute differences summing to at most 1."""
    if len(x) != len(y):
        return False
    return sum(abs(a - b) for a, b in zip(x, y)) <= 1


ADJACENCIES: dict[str, Callable[[Database, Database], bool]] = {
    "row-hamming": row_hamming_adjacent,
    "value-bounded": value_bounded_adjacent,
}


# -- queries ---------------------------------------------------------------


@dataclass(frozen=True)
class Query:
    """Integer-valued query with a stable key and a declared sensitivity.

    The key identifies the query for caching; closures have no useful
    value equality.
    """

    key: str
    fn: Callable[[Database], int]
    sensitivity: Fraction = Fraction(1)

    def __call__(self, db: Database) -> int:
        return self.fn(db)


def count_query(key: str, pred: Callable[[int], bool]) -> Query:
    """1-sensitive count of rows satisfying ``pred``."""
    return Query(key, lambda db: sum(1 for r in db if pred(r)), Fraction(1))


def _require_unit_sensitivity(q: Query) -> None:
    s = q.sensitivity
    if s.numerator > s.denominator:
        raise SensitivityError(f"query {q.key!r} declares sensitivity {s} > 1")


# (half, quarter) splits per scale; keyed by (num, den) since Fraction
# hashing is comparatively slow and this sits on the enumeration hot path.
_SPLIT_CACHE: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}


def _at_splits(eps: Fraction) -> tuple[Fraction, Fraction]:
    key = (eps.numerator, eps.denominator)
    hit = _SPLIT_CACHE.get(key)
    if hit is None:
        hit = _SPLIT_CACHE[key] = (eps / 2, eps / 4)
    return hit


# -- Above Threshold -------------------------------------------------------


class AboveThreshold:
    """Releases whether noisy query results exceed a noisy threshold.

    Initialization draws the noisy threshold at scale eps/2 and charges that
    half; each run draws fresh noise at scale eps/4 and charges the second
    half only when it answers ``True``.  The threshold never changes after
    initialization.  Stopping after the first ``True`` is the caller's
    obligation; see :class:`AboveThresholdStream` for a halting wrapper.
    """

    def __init__(self, ns: NoiseSource, eps, threshold: int):
        self.eps = eps if type(eps) is Fraction else Fraction(eps)
        self._half, self._quarter = _at_splits(self.eps)
        ns.charge("at-init", self._half)
        self.noisy_threshold = ns.laplace(self._half, threshold)

    def run(self, ns: NoiseSource, q: Query, db: Database) -> bool:
        _require_unit_sensitivity(q)
        x = q.fn(db)
        y = ns.laplace(self._quarter, x)
        b = self.noisy_threshold <= y
        if b:
            ns.charge("at-release", self._half)
        return b


def at_transcript(
    ns: NoiseSource, eps, threshold: int, queries: Sequence[Query], db: Database
) -> tuple[bool, ...]:
    """Run queries through one Above Threshold instance until the first True.

    This is the client discipline under which a single eps covers the whole
    interaction: the release token is consumed by the first ``True``.
    """
    at = AboveThreshold(ns, eps, threshold)
    out: list[bool] = []
    for q in queries:
        b = at.run(ns, q, db)
        out.append(b)
        if b:
            break
    return tuple(out)


class AboveThresholdStream:
    """Iterator facade over :class:`AboveThreshold` with a halted flag.

    Mirrors the guarded-iterator formulation: after the first ``True`` the
    stream raises ``StopIteration`` instead of leaning on the caller to stop.
    """

    def __init__(self, ns: NoiseSource, eps, threshold: int, queries, db: Database):
        self._ns = ns
        self._at = AboveThreshold(ns, eps, threshold)
        self._queries = iter(queries)
        self._db = db
        self.halted = False

    def __iter__(self):
        return self

    def __next__(self) -> bool:
        if self.halted:
            raise StopIteration
        q = next(self._queries)
        b = self._at.run(self._ns, q, self._db)
        self.halted = b
        return b


# -- Sparse Vector Technique ------------------------------------------------


class BudgetExhaustedError(RuntimeError):
    """Raised by the sparse-vector wrapper in halting mode after N releases."""


class SparseVector:
    """N-fold Above Threshold: re-initializes after each released ``True``.

    The counter starts at N-1 and never increases.  After the N-th ``True``
    the literal algorithm keeps answering through the stale threshold; set
    ``halt_when_exhausted`` to raise instead (certification only covers the
    transcript up to the N-th release).
    """

    def __init__(self, ns: NoiseSource, eps, threshold: int, n: int, *, halt_when_exhausted: bool = False):
        if n < 1:
            raise ValueError("n must be at least 1")
        self.eps = Fraction(eps)
        self.threshold = int(threshold)
        self.counter = n - 1
        self.releases = 0
        self.n = n
        self.halt_when_exhausted = halt_when_exhausted
        self._at = AboveThreshold(ns, self.eps, self.threshold)

    def run(self, ns: NoiseSource, q: Query, db: Database) -> bool:
        if self.halt_when_exhausted and self.releases >= self.n:
            raise BudgetExhaustedError(f"all {self.n} releases consumed")
        b = self._at.run(ns, q, db)
        if self.counter > 0 and b:
            self.counter -= 1
            self._at = AboveThreshold(ns, self.eps, self.threshold)
        if b:
            self.releases += 1
        return b


def svt_stream(
    ns: NoiseSource,
    eps,
    threshold: int,
    n: int,
    qstream: Callable[[list[bool]], Optional[Query]],
    db: Database,
) -> list[bool]:
    """Drive a sparse vector from an adaptive query stream.

    ``qstream`` receives the history of booleans (most recent first) and
    produces the next query; returning ``None`` ends the stream early.  The
    stream otherwise runs until ``n`` queries have answered ``True``.
    Returns the boolean history in chronological order.
    """
    sv = SparseVector(ns, eps, threshold, n)
    trues = 0
    history: list[bool] = []
    while trues < n:
        q = qstream(history)
        if q is None:
            break
        b = sv.run(ns, q, db)
        history.insert(0, b)
        if b:
            trues += 1
    return list(reversed(history))


# -- auto_avg ---------------------------------------------------------------


def clip_sum(bound: int, db: Database) -> int:
    """Sum of rows clipped into [0, bound]."""
    return sum(min(max(r, 0), bound) for r in db)


def create_query(bound: int) -> Query:
    """Gap between sums clipped at ``bound`` and ``bound + 1``.

    Always in [-len(db), 0] and 1-sensitive; it reaches 0 exactly when
    relaxing the clipping bound stops changing the sum.
    """
    return Query(
        f"clip-gap-{bound}",
        lambda db: clip_sum(bound, db) - clip_sum(bound + 1, db),
        Fraction(1),
    )


def clip_bound(ns: NoiseSource, bnds: Sequence[int], eps, db: Database) -> int:
    """First candidate bound whose clipped sum has stopped growing.

    Scans the candidates through one Above Threshold instance at threshold 0;
    falls back to the last candidate if none is released.
    """
    if not bnds:
        raise ValueError("bnds must be nonempty")
    if any(b2 <= b1 for b1, b2 in zip(bnds, bnds[1:])):
        raise ValueError("bnds must be strictly increasing")
    at = AboveThreshold(ns, eps, 0)
    for b in bnds:
        if at.run(ns, create_query(b), db):
            return b
    return bnds[-1]


class AutoAvgResult(NamedTuple):
    value: Fraction
    count_degenerate: bool  # noisy count was <= 0; value pinned to 0


def auto_avg(ns: NoiseSource, bnds: Sequence[int], eps, db: Database) -> AutoAvgResult:
    """Private average with a privately chosen clipping bound.

    Spends eps on the bound search, eps on the clipped sum (scale
    eps/bound for a bound-sensitive sum), and eps on the count: 3*eps total.
    A nonpositive noisy count yields the sentinel 0 with a flag; dividing is
    post-processing either way.
    """
    eps = Fraction(eps)
    bound = clip_bound(ns, bnds, eps, db)
    noisy_sum = ns.laplace(eps / bound, clip_sum(bound, db))
    ns.charge("clipped-sum", eps)
    noisy_count = ns.laplace(eps, len(db))
    ns.charge("count", eps)
    if noisy_count <= 0:
        return AutoAvgResult(Fraction(0), True)
    return AutoAvgResult(Fraction(noisy_sum, noisy_count), False)


# -- Report Noisy Max --------------------------------------------------------


def rnm(ns: NoiseSource, queries: Sequence[Query], eps, db: Database) -> int:
    """Index of the maximum noisy query result; ties break to the lowest index.

    Noise scale is eps/2 per query but the total charge is a constant eps,
    independent of the number of queries.
    """
    if not queries:
        raise ValueError("rnm needs at least one query")
    eps = Fraction(eps)
    for q in queries:
        _require_unit_sensitivity(q)
    noisy = [ns.laplace(eps / 2, q.fn(db)) for q in queries]
    ns.charge("rnm", eps)
    best = 0
    for i in range(1, len(noisy)):
        if noisy[i] > noisy[best]:
            best = i
    return best


# -- adaptive count behind a privacy filter -----------------------------------


def adaptive_count(
    ns: NoiseSource,
    eps_coarse,
    eps_precise,
    threshold: int,
    budget,
    preds: Sequence[Callable[[int], bool]],
    db: Database,
) -> list[Optional[tuple[int, Optional[int]]]]:
    """Coarse count per predicate, refined when promising, all behind a filter.

    Each coarse count costs ``eps_coarse``; when it exceeds ``threshold`` a
    precise count is attempted through a nested filter call at
    ``eps_precise``.  Refused computations yield ``None`` entries; the summed
    cost of executed thunks never exceeds ``budget``.
    """
    eps_coarse = Fraction(eps_coarse)
    eps_precise = Fraction(eps_precise)
    # Nonpositive scales draw deterministically and cost nothing.
    cost_coarse = max(eps_coarse, Fraction(0))
    cost_precise = max(eps_precise, Fraction(0))
    pf = PrivacyFilter(budget)
    results: list[Optional[tuple[int, Optional[int]]]] = []
    for pred in preds:
        exact = sum(1 for r in db if pred(r))

        def precise(exact=exact):
            ns.charge("precise-count", eps_precise)
            return ns.laplace(eps_precise, exact)

        def coarse(exact=exact):
            ns.charge("coarse-count", eps_coarse)
            c = ns.laplace(eps_coarse, exact)
            refined = pf.try_run(cost_precise, precise) if threshold < c else None
            return (c, refined)

        results.append(pf.try_run(cost_coarse, coarse))
    return results


# -- query cache ---------------------------------------------------------------


class QueryCache:
    """Memoizes noisy query results so repeated queries are free.

    A key's value never changes once stored; only the first evaluation of a
    key invokes (and pays for) the inner mechanism.
    """

    def __init__(self, add_noise: Callable[[Query, Database], int], db: Database):
        self._add_noise = add_noise
        self._db = db
        self.entries: dict[str, int] = {}

    def run(self, q: Query) -> int:
        if q.key in self.entries:
            return self.entries[q.key]
        v = self._add_noise(q, self._db)
        self.entries[q.key] = v
        return v


def map_cache(
    add_noise: Callable[[Query, Database], int], qs: Sequence[Query], db: Database
) -> list[int]:
    """Evaluate ``qs`` through one shared cache: cost scales with unique keys."""
    cache = QueryCache(add_noise, db)
    return [cache.run(q) for q in qs]


def laplace_add_noise(ns: NoiseSource, eps) -> Callable[[Query, Database], int]:
    """Standard cache inner mechanism: Laplace at scale ``eps``, charged once."""
    eps = Fraction(eps)

    def add_noise(q: Query, db: Database) -> int:
        _require_unit_sensitivity(q)
        ns.charge(f"noise:{q.key}", eps)
        return ns.laplace(eps, q.fn(db))

    return add_noise
