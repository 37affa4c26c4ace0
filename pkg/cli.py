"""Command-line entry point.

    python cli.py generate --domain sp --m 8 -o sp8.txt
    python cli.py generate --culture conitzer --m 8 --n 512 --seed 7 -o con.txt
    python cli.py kemeny con.txt --k 2 --solver heuristic
    python cli.py experiment domain-sizes --seed 0
    python cli.py serve

Exit codes: 0 success, 2 bad input, 3 budget exceeded.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

import config
from core import Election, distinct_votes
from domains import DOMAIN_NAMES, named_domain
from election_file import dumps, read_election, write_election
from errors import BudgetError, InputError
from experiments import EXPERIMENTS, RunConfig, config_from_manifest, run_experiment
from sampling import CultureSpec, sample_election
from solvers import SolverConfig, solve

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 2, 3

_DOMAINS = {name.lower(): name for name in DOMAIN_NAMES}
_CULTURES = {
    "ic": "IC-full",
    "walsh": "Walsh",
    "conitzer": "Conitzer",
    "cvc": "CVC-random",
    "rbox": "rBox",
    "sc-gaps": "SC-gaps",
}


def _one_based(r) -> List[int]:
    return [c + 1 for c in r]


def cmd_generate(args) -> int:
    if args.domain:
        name = _DOMAINS.get(args.domain.lower())
        if name is None:
            raise InputError(f"unknown domain {args.domain!r}; expected one of {', '.join(DOMAIN_NAMES)}")
        election = named_domain(name, args.m, args.seed).as_election()
        label = name
    else:
        kind = _CULTURES.get(args.culture.lower())
        if kind is None:
            raise InputError(f"unknown culture {args.culture!r}; expected one of {', '.join(_CULTURES)}")
        spec = CultureSpec(kind=kind, d=args.d, r=args.r, t=args.t)
        election = sample_election(spec, args.m, args.n, seed=args.seed)
        label = kind
    if args.output:
        write_election(election, args.output)
        target = args.output
    else:
        sys.stdout.write(dumps(election))
        target = "stdout"
    distinct = len(distinct_votes(election)[0])
    print(f"{label}: {len(election.votes)} votes ({distinct} distinct), m={election.m} -> {target}",
          file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def cmd_kemeny(args) -> int:
    election: Election = read_election(args.file)
    solver = SolverConfig(method=args.solver, restarts=args.restarts, extra_ic=args.extra_ic, seed=args.seed)
    result = solve(election, args.k, solver)
    report = {
        "k": args.k,
        "method": result.method,
        "exact": result.exact,
        "score": result.score,
        "centers": [_one_based(c) for c in result.centers],
        "cluster_sizes": result.cluster_sizes(election),
    }
    if args.jsonl:
        print(json.dumps(report, sort_keys=True))
        return EXIT_OK
    print(f"score: {result.score}  ({result.method}, {'exact' if result.exact else 'heuristic'})")
    for i, (center, size) in enumerate(zip(report["centers"], report["cluster_sizes"]), start=1):
        print(f"center {i}: {' > '.join(map(str, center))}  [{size} voters]")
    return EXIT_OK


def cmd_experiment(args) -> int:
    overrides = {key: value for key, value in (
        ("seed", args.seed), ("m", args.m), ("n", args.n), ("reps", args.reps),
        ("restarts", args.restarts), ("workers", args.workers), ("output_dir", args.output_dir),
    ) if value is not None}
    if args.no_record:
        overrides["record"] = False
    if args.manifest:
        cfg = config_from_manifest(args.manifest, **overrides)
    else:
        fields = {}
        if args.config:
            try:
                fields = json.loads(Path(args.config).read_text())
            except (OSError, ValueError) as exc:
                raise InputError(f"cannot read config {args.config}: {exc}") from exc
        fields.update(overrides)
        if args.name:
            fields["experiment"] = args.name
        cfg = RunConfig(**fields)
    manifest = run_experiment(cfg)
    print(f"{cfg.experiment}: wrote {manifest}")
    return EXIT_OK


def cmd_serve(args) -> int:  # pragma: no cover
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kemeny", description="k-Kemeny diversity toolkit")
    parser.add_argument("--log-level", default=config.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a domain or a sampled election as an election file")
    source = gen.add_mutually_exclusive_group(required=True)
    source.add_argument("--domain", help=", ".join(DOMAIN_NAMES))
    source.add_argument("--culture", help=", ".join(_CULTURES))
    gen.add_argument("--m", type=int, default=8)
    gen.add_argument("--n", type=int, default=512)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--d", type=int, default=1, help="rbox dimension")
    gen.add_argument("--r", type=float, default=1.0, help="rbox half-width")
    gen.add_argument("--t", type=int, default=0, help="sc-gaps gap length")
    gen.add_argument("-o", "--output")
    gen.set_defaults(func=cmd_generate)

    kem = sub.add_parser("kemeny", help="solve k-Kemeny on an election file")
    kem.add_argument("file")
    kem.add_argument("--k", type=int, default=1)
    kem.add_argument("--solver", choices=["exact", "fpt", "sc", "heuristic", "embeddable"], default="heuristic")
    kem.add_argument("--restarts", type=int, default=10)
    kem.add_argument("--extra-ic", type=int, default=512)
    kem.add_argument("--seed", type=int, default=None)
    kem.add_argument("--jsonl", action="store_true", help="one JSON object per run")
    kem.set_defaults(func=cmd_kemeny)

    exp = sub.add_parser("experiment", help="run an experiment and write its CSV/SVG bundle")
    exp.add_argument("name", nargs="?", choices=EXPERIMENTS)
    exp.add_argument("--config", help="JSON file with RunConfig fields")
    exp.add_argument("--manifest", help="rerun from a manifest.json")
    exp.add_argument("--seed", type=int)
    exp.add_argument("--m", type=int)
    exp.add_argument("--n", type=int)
    exp.add_argument("--reps", type=int)
    exp.add_argument("--restarts", type=int)
    exp.add_argument("--workers", type=int)
    exp.add_argument("--output-dir")
    exp.add_argument("--no-record", action="store_true")
    exp.set_defaults(func=cmd_experiment)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="0.0.0.0")
    srv.add_argument("--port", type=int, default=8000)
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BudgetError as exc:
        logger.warning("Budget exceeded", extra={"budget": exc.budget, "limit": exc.limit})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
