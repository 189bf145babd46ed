"""Command-line front end.

Subcommands: build, decode, attack, experiment, sweep, bounds.  Output
is JSON (or CSV for experiment/sweep with --format csv) on stdout or
--out; every run echoes its fully resolved configuration.  Errors leave
a machine-readable object on stderr with a distinct exit code per class:
2 usage, 3 bad parameters, 4 infeasible size, 5 failed build or
verification, 6 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Dict, List, Optional

from .bits import BitString, BoundedWeightSpace
from . import bounds as bounds_mod
from .errors import (
    ConstructionError,
    InfeasibleSizeError,
    ParameterError,
    VerificationError,
)
from .hadamard import EqualityScheme, HadamardIp, RandomLinearCode
from .harness import ADVERSARY_KINDS, AdversaryStrategy, attack, estimate_error, sweep
from .inner_product import PolySharedIp, SubstringHadamard, TableIp
from .membership import BlockCodedMembership, OneProbeMembership
from .oracle import CorruptionPattern, ProbeOracle
from .seeding import stream
from .storage import (
    load_pattern,
    load_structure,
    report_csv_text,
    save_pattern,
    save_structure,
)

SCHEMES = (
    "had-ip",
    "equality",
    "ip-table",
    "ip-poly",
    "substring",
    "mem-1p",
    "mem-composed",
)

ENV_SEED = "ECDS_SEED"


def _default_seed() -> int:
    raw = os.environ.get(ENV_SEED)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ParameterError("%s must be an integer, got %r" % (ENV_SEED, raw))


def _random_data(scheme_id: str, cfg: Dict, seed: int) -> BitString:
    rng = stream("data", seed)
    n = cfg["n"]
    if scheme_id in ("mem-1p", "mem-composed"):
        s = cfg.get("s", 1)
        support = rng.sample(range(1, n + 1), min(s, n))
        return BitString.from_indices(n, support)
    return BitString.random(n, rng)


def make_scheme(cfg: Dict, seed: int):
    """Build a scheme instance from a flat config mapping."""
    scheme_id = cfg.get("scheme")
    if scheme_id not in SCHEMES:
        raise ParameterError("unknown scheme %r (choose from %s)" % (scheme_id, ", ".join(SCHEMES)))
    if "n" not in cfg or cfg["n"] is None:
        raise ParameterError("--n is required to build a scheme")
    x = (
        BitString.from01(cfg["x"])
        if cfg.get("x")
        else _random_data(scheme_id, cfg, seed)
    )
    if x.n != cfg["n"]:
        raise ParameterError("data length does not match --n")
    if scheme_id == "had-ip":
        return HadamardIp(x)
    if scheme_id == "equality":
        if cfg.get("code") == "linear":
            length = cfg.get("code_length")
            if not length:
                raise ParameterError("--code-length is required for the linear code")
            code = RandomLinearCode(x.n, length, rng=stream("code", seed))
            return EqualityScheme(x, code=code, balanced=not cfg.get("raw", False))
        return EqualityScheme(x, balanced=not cfg.get("raw", False))
    if scheme_id == "ip-table":
        return TableIp(x, _require(cfg, "r"), cfg.get("p") or 1)
    if scheme_id == "ip-poly":
        return PolySharedIp(x, _require(cfg, "r"), cfg.get("p") or 2)
    if scheme_id == "substring":
        return SubstringHadamard(x, _require(cfg, "r"), cfg.get("t") or 1)
    if scheme_id == "mem-1p":
        st = OneProbeMembership.build(
            cfg["n"],
            _require(cfg, "s"),
            cfg.get("eps") or 0.1,
            seed=seed,
        )
        return st.instance(x)
    st = BlockCodedMembership.build(
        cfg["n"],
        _require(cfg, "s"),
        eps=cfg.get("eps") or 0.25,
        a=cfg.get("a") or 14,
        b=cfg.get("b") or 288,
        seed=seed,
    )
    return st.instance(x, decoder=cfg.get("decoder") or "block")


def _require(cfg: Dict, key: str):
    if cfg.get(key) is None:
        raise ParameterError("--%s is required for scheme %r" % (key, cfg.get("scheme")))
    return cfg[key]


def parse_query(scheme, text: str):
    if isinstance(scheme, (HadamardIp, EqualityScheme, TableIp, PolySharedIp, SubstringHadamard)):
        return BitString.from01(text)
    return int(text)


def pick_queries(scheme, selector: str, seed: int) -> List:
    """Query selection: 'all', 'sample:K', or a comma-separated list."""
    if selector == "all":
        out = list(scheme.queries())
        if len(out) > 4096:
            raise ParameterError(
                "%d queries is too many for 'all'; use sample:K" % len(out)
            )
        return out
    if selector.startswith("sample:"):
        k = int(selector.split(":", 1)[1])
        rng = stream("queries", seed)
        return [_random_query(scheme, rng) for _ in range(k)]
    return [parse_query(scheme, part) for part in selector.split(",") if part]


def _random_query(scheme, rng):
    if isinstance(scheme, EqualityScheme):
        # keep the positive query represented
        if rng.random() < 0.5:
            return scheme.x
        return BitString.random(scheme.x.n, rng)
    if isinstance(scheme, HadamardIp):
        return BitString.random(scheme.x.n, rng)
    if isinstance(scheme, (TableIp, PolySharedIp, SubstringHadamard)):
        space = BoundedWeightSpace(scheme.x.n, scheme.r)
        return space.unrank(rng.randrange(space.size()))
    from .membership import ComposedInstance

    if isinstance(scheme, ComposedInstance) and scheme.structure.good_indices:
        return rng.choice(scheme.structure.good_indices)
    return rng.randrange(1, scheme.structure.n + 1)


def _resolve_budget(args, length: int) -> int:
    if getattr(args, "budget", None) is not None:
        return args.budget
    delta = getattr(args, "delta", None) or 0.0
    return CorruptionPattern.budget(delta, length)


def _emit(args, payload: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(payload)
            if not payload.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def _config_echo(args, extra: Optional[Dict] = None) -> Dict:
    skip = {"func", "out"}
    cfg = {
        k: v for k, v in vars(args).items() if k not in skip and v is not None
    }
    if extra:
        cfg.update(extra)
    return cfg


# -- subcommand implementations ---------------------------------------


def cmd_build(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = _config_echo(args, {"seed": seed})
    scheme = make_scheme(cfg, seed)
    save_structure(args.out_file, scheme)
    report = {
        "config": cfg,
        "scheme": scheme.name,
        "params": scheme.params(),
        "length": scheme.codeword.n,
        "file": args.out_file,
    }
    build_report = getattr(getattr(scheme, "structure", None), "report", None)
    if build_report is not None:
        report["build"] = build_report.to_dict()
    _emit(args, json.dumps(report, sort_keys=True, indent=2))
    return 0


def cmd_decode(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    scheme = load_structure(args.structure)
    query = parse_query(scheme, args.query)
    pattern = CorruptionPattern.empty()
    if args.pattern:
        pattern, n = load_pattern(args.pattern)
        if n != scheme.codeword.n:
            raise ParameterError("pattern length does not match the structure")
    oracle = ProbeOracle(scheme.codeword, pattern, scheme.probe_budget(query))
    answer = scheme.decode(oracle, query, stream("decode", seed))
    out = {
        "config": _config_echo(args, {"seed": seed}),
        "scheme": scheme.name,
        "query": scheme.query_label(query),
        "answer": answer.to01() if isinstance(answer, BitString) else answer,
        "probes_used": oracle.used,
        "budget": oracle.budget,
        "pattern_weight": pattern.weight,
    }
    _emit(args, json.dumps(out, sort_keys=True, indent=2))
    return 0


def cmd_attack(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    scheme = load_structure(args.structure)
    budget = _resolve_budget(args, scheme.codeword.n)
    target = parse_query(scheme, args.target) if args.target else None
    strategy = AdversaryStrategy(
        kind=args.kind, budget=budget, seed=seed, target=target
    )
    pattern = attack(strategy, scheme, target)
    save_pattern(args.out_file, pattern, scheme.codeword.n)
    out = {
        "config": _config_echo(args, {"seed": seed, "budget": budget}),
        "scheme": scheme.name,
        "adversary": strategy.describe(),
        "weight": pattern.weight,
        "length": scheme.codeword.n,
        "file": args.out_file,
    }
    _emit(args, json.dumps(out, sort_keys=True, indent=2))
    return 0


def _run_experiment(cfg: Dict) -> "ExperimentReport":
    seed = cfg.get("seed", 0)
    if cfg.get("structure"):
        scheme = load_structure(cfg["structure"])
    else:
        scheme = make_scheme(cfg, seed)
    budget = cfg.get("budget")
    if budget is None:
        budget = CorruptionPattern.budget(cfg.get("delta", 0.0), scheme.codeword.n)
    strategy = AdversaryStrategy(
        kind=cfg.get("adversary", "none"),
        budget=budget,
        seed=seed,
        target=None,
    )
    queries = pick_queries(scheme, cfg.get("queries", "sample:16"), seed)
    return estimate_error(
        scheme,
        queries=queries,
        strategy=strategy,
        trials=cfg.get("trials", 100_000),
        seed=seed,
    )


def cmd_experiment(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = _config_echo(args, {"seed": seed})
    report = _run_experiment(cfg)
    if args.format == "csv":
        _emit(args, report_csv_text(report))
    else:
        body = report.canonical_dict()
        body["config"] = cfg
        _emit(args, json.dumps(body, sort_keys=True, indent=2))
    return 0


def cmd_sweep(args) -> int:
    with open(args.grid) as fh:
        cells = json.load(fh)
    if not isinstance(cells, list):
        raise ParameterError("grid file must hold a JSON list of cells")
    results = sweep(cells, _run_experiment)
    _emit(args, json.dumps(results, sort_keys=True, indent=2))
    return 0


def cmd_bounds(args) -> int:
    f = args.formula
    if f == "ip":
        rep = bounds_mod.ip_ds_lower_bound(args.n, args.r, args.eps, args.p or 1)
        body = rep.to_dict()
        body["structure_length_table"] = bounds_mod.ball_size(
            args.n, math.ceil(args.r / (args.p or 1))
        )
    elif f == "ip-comm":
        if args.beta is None:
            raise ParameterError("--beta is required for ip-comm")
        body = bounds_mod.ip_comm_lower_bound(args.n, args.r, args.beta).to_dict()
    elif f == "one-probe":
        if args.delta is None:
            raise ParameterError("--delta is required for one-probe")
        body = bounds_mod.one_probe_noise_threshold(args.delta, args.eps).to_dict()
    elif f == "membership":
        body = bounds_mod.membership_trivial_lb(args.n, args.s).to_dict()
    elif f == "discrepancy":
        body = bounds_mod.discrepancy_verify(
            args.n, args.r, samples=args.samples, seed=args.seed or 0
        ).to_dict()
    else:
        raise ParameterError("unknown bounds formula %r" % (f,))
    body["config"] = _config_echo(args)
    _emit(args, json.dumps(body, sort_keys=True, indent=2))
    return 0


# -- argument wiring --------------------------------------------------


def _add_scheme_flags(sp) -> None:
    sp.add_argument("--scheme", choices=SCHEMES)
    sp.add_argument("--n", type=int)
    sp.add_argument("--s", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--a", type=int)
    sp.add_argument("--b", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--x", help="explicit data bits, e.g. 0101")
    sp.add_argument("--decoder", choices=("block", "direct"))
    sp.add_argument("--code", choices=("hadamard", "linear"))
    sp.add_argument("--code-length", dest="code_length", type=int)
    sp.add_argument("--raw", action="store_true", help="equality without balancing")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ecds",
        description="Error-correcting data structures: build, corrupt, decode, measure.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a structure and save it")
    _add_scheme_flags(b)
    b.add_argument("--seed", type=int)
    b.add_argument("--out-file", required=True)
    b.add_argument("--out", help="write the report here instead of stdout")
    b.set_defaults(func=cmd_build)

    d = sub.add_parser("decode", help="answer one query from a stored structure")
    d.add_argument("--structure", required=True)
    d.add_argument("--query", required=True)
    d.add_argument("--pattern")
    d.add_argument("--seed", type=int)
    d.add_argument("--out")
    d.set_defaults(func=cmd_decode)

    a = sub.add_parser("attack", help="emit a corruption pattern for a structure")
    a.add_argument("--structure", required=True)
    a.add_argument("--kind", choices=ADVERSARY_KINDS, required=True)
    a.add_argument("--delta", type=float)
    a.add_argument("--budget", type=int)
    a.add_argument("--target")
    a.add_argument("--seed", type=int)
    a.add_argument("--out-file", required=True)
    a.add_argument("--out")
    a.set_defaults(func=cmd_attack)

    e = sub.add_parser("experiment", help="measure decoding error under an adversary")
    _add_scheme_flags(e)
    e.add_argument("--structure", help="use a stored structure instead of building")
    e.add_argument("--adversary", choices=ADVERSARY_KINDS, default="none")
    e.add_argument("--delta", type=float, default=0.0)
    e.add_argument("--budget", type=int)
    e.add_argument("--trials", type=int, default=100_000)
    e.add_argument("--queries", default="sample:16")
    e.add_argument("--seed", type=int)
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)

    w = sub.add_parser("sweep", help="run a grid of experiments")
    w.add_argument("--grid", required=True)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)

    bo = sub.add_parser("bounds", help="evaluate a bound formula")
    bo.add_argument(
        "formula",
        choices=("ip", "ip-comm", "one-probe", "membership", "discrepancy"),
    )
    bo.add_argument("--n", type=int)
    bo.add_argument("--s", type=int)
    bo.add_argument("--r", type=int)
    bo.add_argument("--p", type=int)
    bo.add_argument("--eps", type=float, default=0.0)
    bo.add_argument("--beta", type=float)
    bo.add_argument("--delta", type=float)
    bo.add_argument("--samples", type=int, default=10_000)
    bo.add_argument("--seed", type=int)
    bo.add_argument("--out")
    bo.set_defaults(func=cmd_bounds)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError) as exc:
        return _fail(exc, 3)
    except InfeasibleSizeError as exc:
        return _fail(exc, 4)
    except (ConstructionError, VerificationError) as exc:
        return _fail(exc, 5)
    except OSError as exc:
        return _fail(exc, 6)


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(
        json.dumps(
            {"error": type(exc).__name__, "message": str(exc), "code": code}
        )
        + "\n"
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
