"""Command-line driver: run mechanisms, certify claims, dump pmf data.

Exit codes are a stable CI contract: 0 pass, 1 verification failure,
2 usage error, 3 runtime budget violation.  Rationals cross the JSON
boundary as "num/den" strings to avoid float drift.  Reports are
byte-identical across runs for a fixed (seed, config).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .budget import Credits, Ledger, OverspendError, PrivacyFilter
from .checks import (
    all_adjacent_pairs,
    all_databases,
    at_factory,
    check_dp,
    check_laplace_choice,
    check_svt_adaptive,
    laplace_release_factory,
    rnm_factory,
    run_choice_composition_suite,
)
from .couplings import coupling_divergence, lp_divergence, relation_from_pairs
from .dist import SubDist, laplace_pmf
from .enumerate import EnumConfig
from .mechanisms import (
    Query,
    SparseVector,
    adaptive_count,
    at_transcript,
    auto_avg,
    count_query,
    laplace_add_noise,
    map_cache,
    rnm,
    svt_stream,
)
from .noise import SamplingNoise
from .sampling import LaplaceSampler, goodness_of_fit

EXIT_PASS = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET_VIOLATION = 3

SCHEMA_VERSION = 1


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ValueError(f"rational expected as int or 'num/den' string, got {x!r}")


def _parse_query(desc: dict) -> Query:
    kind = desc.get("kind")
    if kind == "count-ge":
        t = int(desc["value"])
        return count_query(f"count-ge-{t}", lambda r: r >= t)
    if kind == "count-le":
        t = int(desc["value"])
        return count_query(f"count-le-{t}", lambda r: r <= t)
    if kind == "count-eq":
        t = int(desc["value"])
        return count_query(f"count-eq-{t}", lambda r: r == t)
    if kind == "count-even":
        return count_query("count-even", lambda r: r % 2 == 0)
    raise ValueError(f"unknown query kind {kind!r}")


def _parse_pred(desc: dict):
    kind = desc.get("kind")
    value = int(desc.get("value", 0))
    if kind == "ge":
        return lambda r: r >= value
    if kind == "le":
        return lambda r: r <= value
    if kind == "eq":
        return lambda r: r == value
    if kind == "even":
        return lambda r: r % 2 == 0
    raise ValueError(f"unknown predicate kind {kind!r}")


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DPV_SEED")
    return int(env) if env else 0


# -- run ------------------------------------------------------------------------


def _run_mechanism(name: str, params: dict, ns: SamplingNoise):
    db = list(params.get("db", []))
    if name == "at":
        eps = _rat(params["eps"])
        queries = [_parse_query(q) for q in params["queries"]]
        return list(at_transcript(ns, eps, int(params["T"]), queries, db))
    if name == "svt":
        eps = _rat(params["eps"])
        sv = SparseVector(ns, eps, int(params["T"]), int(params["N"]))
        return [sv.run(ns, _parse_query(q), db) for q in params["queries"]]
    if name == "svt-stream":
        eps = _rat(params["eps"])
        queries = [_parse_query(q) for q in params["queries"]]

        def qstream(bs):
            taken = len(bs)
            return queries[taken] if taken < len(queries) else None

        return svt_stream(ns, eps, int(params["T"]), int(params["N"]), qstream, db)
    if name == "auto-avg":
        res = auto_avg(ns, [int(b) for b in params["bnds"]], _rat(params["eps"]), db)
        return {"value": str(res.value), "count_degenerate": res.count_degenerate}
    if name == "rnm":
        queries = [_parse_query(q) for q in params["queries"]]
        return rnm(ns, queries, _rat(params["eps"]), db)
    if name == "adaptive-count":
        preds = [_parse_pred(p) for p in params["preds"]]
        out = adaptive_count(
            ns,
            _rat(params["eps_coarse"]),
            _rat(params["eps_precise"]),
            int(params["T"]),
            _rat(params["budget"]),
            preds,
            db,
        )
        return [None if e is None else [e[0], e[1]] for e in out]
    if name == "map-cache":
        queries = [_parse_query(q) for q in params["queries"]]
        add_noise = laplace_add_noise(ns, _rat(params["eps"]))
        return map_cache(add_noise, queries, db)
    raise ValueError(f"unknown mechanism {name!r}")


_MECHANISM_BUDGETS = {
    "at": lambda p: _rat(p["eps"]),
    "svt": lambda p: int(p["N"]) * _rat(p["eps"]),
    "svt-stream": lambda p: int(p["N"]) * _rat(p["eps"]),
    "auto-avg": lambda p: 3 * _rat(p["eps"]),
    "rnm": lambda p: _rat(p["eps"]),
    "adaptive-count": lambda p: _rat(p["budget"]),
    "map-cache": lambda p: len(p["queries"]) * _rat(p["eps"]),
}


def cmd_run(args) -> int:
    try:
        params = json.loads(args.params)
        if args.mechanism not in _MECHANISM_BUDGETS:
            raise ValueError(f"unknown mechanism {args.mechanism!r}")
        budget = (
            _rat(args.budget)
            if args.budget is not None
            else _MECHANISM_BUDGETS[args.mechanism](params)
        )
    except (ValueError, KeyError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

    ledger = Ledger(Credits(max(budget, Fraction(0))))
    ns = SamplingNoise(LaplaceSampler(_seed(args)), ledger)
    try:
        result = _run_mechanism(args.mechanism, params, ns)
    except OverspendError as err:
        print(f"budget violation: {err}", file=sys.stderr)
        _emit(
            {
                "schema": SCHEMA_VERSION,
                "command": "run",
                "params": params,
                "mechanism": args.mechanism,
                "error": "budget-violation",
                "ledger": ledger.to_jsonable(),
            },
            args.out,
        )
        return EXIT_BUDGET_VIOLATION
    except (ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "run",
            "mechanism": args.mechanism,
            "params": params,
            "seed": _seed(args),
            "result": result,
            "ledger": ledger.to_jsonable(),
            "spent": {"eps": str(ledger.spent.eps), "delta": str(ledger.spent.delta)},
        },
        args.out,
    )
    return EXIT_PASS


# -- verify -----------------------------------------------------------------------


# Enumeration radii sized to each mechanism's smallest noise scale.
_DEFAULT_RADIUS = {"laplace": 40, "at": 25, "rnm": 15, "svt": 9, "laplace-choice": 25}


def _verify_mechanism(args) -> tuple[bool, dict]:
    name = args.mechanism
    radius = args.radius if args.radius is not None else _DEFAULT_RADIUS[name]
    eps = _rat(args.eps)
    eps_check = _rat(args.at_eps) if args.at_eps is not None else None
    cfg = EnumConfig(radius=radius)

    if name == "laplace":
        query = count_query("count-ge-1", lambda r: r >= 1)
        pairs = [((0,), (1,)), ((1, 1), (1, 2)), ((2,), (2, 2))]
        rep = check_dp(
            laplace_release_factory(eps, query),
            pairs,
            eps_check if eps_check is not None else eps,
            args.delta,
            cfg,
            jobs=args.jobs,
        )
        return rep.passed, rep.to_jsonable()
    if name == "at":
        queries = [
            count_query("count-ge-2", lambda r: r >= 2),
            count_query("count-ge-1", lambda r: r >= 1),
        ]
        dbs = all_databases(args.max_len, args.max_val)
        pairs = all_adjacent_pairs(dbs)
        rep = check_dp(
            at_factory(eps, args.T, queries),
            pairs,
            eps_check if eps_check is not None else eps,
            args.delta,
            cfg,
            jobs=args.jobs,
        )
        return rep.passed, rep.to_jsonable()
    if name == "rnm":
        queries = [
            count_query("count-ge-1", lambda r: r >= 1),
            count_query("count-le-2", lambda r: r <= 2),
            count_query("count-ge-3", lambda r: r >= 3),
        ][: args.n]
        dbs = all_databases(args.max_len, args.max_val)
        pairs = all_adjacent_pairs(dbs)
        rep = check_dp(
            rnm_factory(eps, queries),
            pairs,
            eps_check if eps_check is not None else eps,
            args.delta,
            cfg,
            jobs=args.jobs,
        )
        return rep.passed, rep.to_jsonable()
    if name == "svt":
        pool = [
            count_query("count-ge-1", lambda r: r >= 1),
            count_query("count-ge-2", lambda r: r >= 2),
        ]
        pairs = [((1, 2), (2, 2))]
        rep = check_svt_adaptive(
            eps, args.T, args.n, pool, pairs, cfg, depth=args.depth,
            eps_check=eps_check,
        )
        return rep.passed, rep.to_jsonable()
    if name == "laplace-choice":
        budget = eps_check if eps_check is not None else None
        ok = check_laplace_choice(eps, args.T, 0, 1, radius, budget=budget)
        return ok, {"pass": ok, "eps": str(eps), "radius": radius}
    raise ValueError(f"unknown mechanism {name!r}")


def _verify_suite(args) -> tuple[bool, dict]:
    name = args.suite
    seed = _seed(args)
    if name == "choice-composition":
        checked, violations, rejected = run_choice_composition_suite(args.instances, seed)
        return violations == 0, {
            "suite": name,
            "instances": checked,
            "violations": violations,
            "rejected": rejected,
        }
    if name == "coupling-lp":
        import random

        rng = random.Random(seed)
        from .checks import random_subdist

        disagreements = 0
        for _ in range(args.instances):
            carrier_a = range(rng.randint(1, 4))
            carrier_b = range(rng.randint(1, 4))
            mu1 = random_subdist(rng, carrier_a)
            mu2 = random_subdist(rng, carrier_b)
            pairs = frozenset(
                (a, b) for a in carrier_a for b in carrier_b if rng.random() < 0.45
            )
            phi = relation_from_pairs(pairs)
            eps = rng.choice([0.0, 0.3, 1.0])
            if abs(
                coupling_divergence(mu1, mu2, phi, eps) - lp_divergence(mu1, mu2, phi, eps)
            ) > 1e-9:
                disagreements += 1
        return disagreements == 0, {
            "suite": name,
            "instances": args.instances,
            "disagreements": disagreements,
        }
    if name == "sampler-gof":
        results = {}
        ok = True
        for i, eps in enumerate((Fraction(1, 2), Fraction(1), Fraction(2))):
            sampler = LaplaceSampler(seed + i)
            samples = [sampler.sample(eps, 0) for _ in range(args.samples)]
            p = goodness_of_fit(samples, eps, 0)
            results[str(eps)] = p
            ok = ok and p > 0.001
        return ok, {"suite": name, "samples": args.samples, "p_values": results}
    if name == "filter-safety":
        import random

        rng = random.Random(seed)
        ok = True
        for _ in range(args.instances):
            pf = PrivacyFilter(Fraction(1))
            executed = Fraction(0)
            for _ in range(rng.randint(1, 25)):
                cost = Fraction(rng.randint(0, 40), 100)

                def thunk(c=cost):
                    nonlocal executed
                    executed += c
                    return True

                pf.try_run(cost, thunk)
            ok = ok and executed <= 1
        return ok, {"suite": name, "instances": args.instances}
    raise ValueError(f"unknown suite {name!r}")


def cmd_verify(args) -> int:
    try:
        if args.suite is not None:
            passed, body = _verify_suite(args)
        elif args.mechanism is not None:
            passed, body = _verify_mechanism(args)
        else:
            print("error: verify needs --mechanism or --suite", file=sys.stderr)
            return EXIT_USAGE
    except (ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

    payload = {"schema": SCHEMA_VERSION, "command": "verify", "pass": passed}
    payload.update({"report": body})
    _emit(payload, args.out)
    return EXIT_PASS if passed else EXIT_VERIFY_FAIL


# -- pmf --------------------------------------------------------------------------


def cmd_pmf(args) -> int:
    try:
        eps = _rat(args.eps)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    means = args.mean or [0]
    lo, hi = args.lo, args.hi
    if lo > hi:
        print("error: empty range", file=sys.stderr)
        return EXIT_USAGE
    lines = ["eps,mean,v,pmf"]
    for mean in means:
        if eps <= 0:
            lines.append(f"{args.eps},{mean},{mean},1.0")
            continue
        for v in range(lo, hi + 1):
            lines.append(f"{args.eps},{mean},{v},{laplace_pmf(eps, mean, v)!r}")
    text = "\n".join(lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_PASS


# -- filter demo --------------------------------------------------------------------


def cmd_filter_demo(args) -> int:
    try:
        budget = _rat(args.budget)
        pf = PrivacyFilter(budget)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    ns = SamplingNoise(LaplaceSampler(_seed(args)), Ledger(Credits(max(budget, Fraction(0)))))
    steps = []
    for cost in (Fraction(1, 2), Fraction(3, 10), Fraction(3, 10), Fraction(1, 10)):
        result = pf.try_run(cost, lambda c=cost: ns.laplace(c, 0))
        steps.append(
            {
                "cost": str(cost),
                "granted": result is not None,
                "value": result,
                "remaining": str(pf.remaining),
            }
        )
    _emit(
        {
            "schema": SCHEMA_VERSION,
            "command": "filter-demo",
            "budget": str(budget),
            "steps": steps,
        },
        args.out,
    )
    return EXIT_PASS


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpcert",
        description="Run discrete DP mechanisms and certify their claims at desk scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a mechanism with sampled noise")
    run_p.add_argument("--mechanism", required=True)
    run_p.add_argument("--params", required=True, help="JSON parameters")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--budget", default=None, help="ledger budget as 'num/den'")
    run_p.add_argument("--out", default=None)
    run_p.set_defaults(fn=cmd_run)

    verify_p = sub.add_parser("verify", help="certify a DP claim or run a property suite")
    verify_p.add_argument("--mechanism", default=None,
                          choices=["laplace", "at", "rnm", "svt", "laplace-choice"])
    verify_p.add_argument("--suite", default=None,
                          choices=["choice-composition", "coupling-lp", "sampler-gof", "filter-safety"])
    verify_p.add_argument("--eps", default="1")
    verify_p.add_argument("--at-eps", dest="at_eps", default=None,
                          help="epsilon to check at (defaults to the mechanism budget)")
    verify_p.add_argument("--delta", type=float, default=0.0)
    verify_p.add_argument("--T", type=int, default=1)
    verify_p.add_argument("--n", type=int, default=2)
    verify_p.add_argument("--depth", type=int, default=2)
    verify_p.add_argument("--radius", type=int, default=None,
                          help="truncation radius per draw (default sized per mechanism)")
    verify_p.add_argument("--max-len", type=int, default=2, dest="max_len")
    verify_p.add_argument("--max-val", type=int, default=3, dest="max_val")
    verify_p.add_argument("--instances", type=int, default=100)
    verify_p.add_argument("--samples", type=int, default=100_000)
    verify_p.add_argument("--seed", type=int, default=None)
    verify_p.add_argument("--jobs", type=int, default=1)
    verify_p.add_argument("--out", default=None)
    verify_p.set_defaults(fn=cmd_verify)

    suite_p = sub.add_parser("suite", help="alias for verify --suite")
    suite_p.add_argument("name", choices=["choice-composition", "coupling-lp", "sampler-gof", "filter-safety"])
    suite_p.add_argument("--instances", type=int, default=100)
    suite_p.add_argument("--samples", type=int, default=100_000)
    suite_p.add_argument("--seed", type=int, default=None)
    suite_p.add_argument("--out", default=None)

    def suite_fn(args):
        args.suite = args.name
        args.mechanism = None
        return cmd_verify(args)

    suite_p.set_defaults(fn=suite_fn)

    pmf_p = sub.add_parser("pmf", help="emit pmf values as CSV")
    pmf_p.add_argument("--eps", required=True)
    pmf_p.add_argument("--mean", type=int, action="append")
    pmf_p.add_argument("--lo", type=int, default=-8)
    pmf_p.add_argument("--hi", type=int, default=8)
    pmf_p.add_argument("--out", default=None)
    pmf_p.set_defaults(fn=cmd_pmf)

    demo_p = sub.add_parser("filter-demo", help="scripted privacy-filter walkthrough")
    demo_p.add_argument("--budget", default="1")
    demo_p.add_argument("--seed", type=int, default=None)
    demo_p.add_argument("--out", default=None)
    demo_p.set_defaults(fn=cmd_filter_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
