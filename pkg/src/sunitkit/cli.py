"""Command-line front end.

Every subcommand reads an order from a JSON file (``{"poly": [...]}`` with
coefficients highest degree first, optionally ``"order_basis"``) and prints
either a short text summary or, with ``--json``, a stable JSON document that
re-parses into the object that produced it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

from . import __version__
from .apps import NotAnSUnit, NotPrincipal, class_decompose, class_group, compact_rep_of, pip
from .bigfix import DomainError, PrecisionExhausted
from .ideals import FactorTooLarge, IndexDivides, NotInvertible, PrimeIdeal, parse_ideal, primes_above
from .intlinalg import PrecisionInsufficient
from .numfield import Reducible, ZeroElement, element_to_json, field_summary, load_order
from .oracle import ControlPoint, OracleParams, eval_oracle, unit_shift
from .qsim import EnumerationBudgetExceeded, GaussParams, GridTooCoarse, enumeration_budget, hsp_scan
from .sunits import BudgetExceeded, RankDeficient, enumerate_sunits, verify_group

MAX_PRECISION_RETRIES = 4

DOMAIN_ERRORS = (
    NotAnSUnit, DomainError, FactorTooLarge, IndexDivides, NotInvertible, Reducible, ZeroElement,
    BudgetExceeded, RankDeficient, EnumerationBudgetExceeded, GridTooCoarse, PrecisionExhausted,
    PrecisionInsufficient, ArithmeticError, ValueError, OSError,
)


class UsageError(Exception):
    pass


@dataclass
class Config:
    q: int = 128
    lll_delta: float = 0.99
    budget: int = 4_000_000
    eps_slack: float = 0.02
    output: str = "text"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.q < 32:
            raise UsageError("--prec must be at least 32")
        if self.budget <= 0:
            raise UsageError("SUNITKIT_BUDGET must be positive")
        if self.threads < 1:
            raise UsageError("--threads must be positive")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _primes(order, spec: Optional[str]) -> list[PrimeIdeal]:
    if not spec:
        return []
    out: list[PrimeIdeal] = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            p = int(tok)
        except ValueError:
            raise UsageError(f"--primes expects rational primes, got {tok!r}") from None
        for P in primes_above(order, [p]):
            if P not in out:
                out.append(P)
    return out


def _need(args, name: str):
    val = getattr(args, name, None)
    if val is None:
        raise UsageError(f"--{name} is required for {args.command}")
    return val


# ---------------------------------------------------------------------------
# subcommands: each returns (json payload, text)
# ---------------------------------------------------------------------------

def cmd_field(order, args, cfg: Config):
    info = field_summary(order)
    text = (f"degree {info['degree']}, signature {tuple(info['signature'])}, "
            f"discriminant {info['discriminant']}")
    return info, text


def cmd_sunits(order, args, cfg: Config):
    S = _primes(order, args.primes)
    group = enumerate_sunits(order, S, height_bound=args.bound, seed=cfg.seed)
    if not verify_group(group):
        raise ArithmeticError("S-unit verification failed")
    lines = [f"torsion: {group.torsion} (order {group.torsion_order})"]
    lines += [f"unit: {g.element}" for g in group.units]
    lines += [f"S-unit: {g.element}  valuations {list(g.vals)}" for g in group.sgens]
    return group.to_json(), "\n".join(lines)


def cmd_classgroup(order, args, cfg: Config):
    cg = class_group(order, prime_bound_override=args.bound, seed=cfg.seed)
    text = "trivial" if cg.trivial else " x ".join(f"Z/{d}" for d in cg.invariants)
    return cg.to_json(), text


def cmd_pip(order, args, cfg: Config):
    a = parse_ideal(order, _need(args, "ideal"))
    try:
        g = pip(order, a, seed=cfg.seed)
    except NotPrincipal:
        return {"principal": False, "ideal": a.to_str()}, "not principal"
    return {"principal": True, "ideal": a.to_str(), "generator": element_to_json(g)}, f"generator {g}"


def cmd_decompose(order, args, cfg: Config):
    a = parse_ideal(order, _need(args, "ideal"))
    dec = class_decompose(order, a, prime_bound_override=args.bound, seed=cfg.seed)
    parts = [f"{P}^{e}" for P, e in zip(dec.primes, dec.exponents) if e]
    beta = dec.beta()
    text = f"beta = {beta if beta is not None else 1}; primes: {' '.join(parts) or 'none'}"
    return dec.to_json(), text


def cmd_compactrep(order, args, cfg: Config):
    alpha = order.parse_element(_need(args, "element"))
    S = _primes(order, args.primes)
    rep = compact_rep_of(alpha, S, l=args.base, q=cfg.q)
    text = "\n".join(f"gamma_{k} = {g}" for k, g in enumerate(rep.gammas))
    return rep.to_json(), text


def cmd_oracle(order, args, cfg: Config):
    S = _primes(order, args.primes)
    point = ControlPoint.parse(args.point or "", order, len(S))
    e = eval_oracle(point, OracleParams(order, S, cfg.q))
    payload = {"point": point.to_json(), "eideal": e.to_json()}
    text = "\n".join(" ".join(f"{x:+.12f}" for x in row) for row in e.to_float())
    return payload, text


def _scan_worker(job):
    spec, S_labels, controls, samples, s, nu, q, seed, eps_slack, budget = job
    os.environ["SUNITKIT_BUDGET"] = str(budget)
    from .ideals import prime_from_label
    from .numfield import order_from_spec

    order = order_from_spec(spec)
    S = [prime_from_label(order, t) for t in S_labels]
    units = [ControlPoint.from_json(c) for c in controls]
    res = hsp_scan(order, S, units, samples, GaussParams(s, nu), q=q, seed=seed, eps_slack=eps_slack)
    return res.a, res.report


def cmd_qsim(order, args, cfg: Config):
    S = _primes(order, args.primes)
    group = enumerate_sunits(order, S, seed=cfg.seed)
    gens = [group.torsion] + [g.element for g in group.free_gens]
    controls = [unit_shift(g, S, cfg.q).to_json() for g in gens]
    spec = {"poly": [str(c) for c in order.field.poly_high_first],
            "order_basis": [[str(x) for x in row] for row in order.basis]}
    labels = [P.label() for P in S]
    k = cfg.threads
    shares = [args.samples // k + (1 if i < args.samples % k else 0) for i in range(k)]
    jobs = [(spec, labels, controls, m, args.width, args.nu, min(cfg.q, 64), cfg.seed + i, cfg.eps_slack,
             cfg.budget) for i, m in enumerate(shares) if m]
    if k > 1:
        with ProcessPoolExecutor(max_workers=k) as pool:
            results = list(pool.map(_scan_worker, jobs))
    else:
        results = [_scan_worker(j) for j in jobs]
    reports = [r for _, r in results]
    payload = {
        "pairs_far": sum(r["pairs_far"] for r in reports),
        "pseudoinjectivity_failures": sum(r["pseudoinjectivity_failures"] for r in reports),
        "max_overlap": max(r["max_overlap"] for r in reports),
        "max_lipschitz_ratio": max(a for a, _ in results),
        "straddle_violations": sum(r["straddle_violations"] for r in reports),
        "r": reports[0]["r"],
        "eps": 0.75,
        "eps_slack": cfg.eps_slack,
        "s": args.width,
        "nu": args.nu,
        "backend": reports[0]["backend"],
    }
    text = (f"pairs {payload['pairs_far']}, max overlap {payload['max_overlap']:.4f}, "
            f"failures {payload['pseudoinjectivity_failures']}, "
            f"max Lipschitz ratio {payload['max_lipschitz_ratio']:.4g}, "
            f"straddle violations {payload['straddle_violations']}")
    return payload, text


COMMANDS: dict[str, Callable] = {
    "field": cmd_field,
    "sunits": cmd_sunits,
    "classgroup": cmd_classgroup,
    "pip": cmd_pip,
    "decompose": cmd_decompose,
    "compactrep": cmd_compactrep,
    "oracle": cmd_oracle,
    "qsim": cmd_qsim,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", required=True, metavar="PATH", help="order description (JSON)")
    common.add_argument("--primes", metavar="LIST", help="comma-separated rational primes; S = primes above them")
    common.add_argument("--prec", type=int, default=128, metavar="N", help="target precision q in bits")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="sunitkit", description="S-unit toolkit for number fields")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sub.add_parser("field", parents=[common], help="field and order summary")
    p = sub.add_parser("sunits", parents=[common], help="S-unit group generators")
    p.add_argument("--bound", type=float, help="height bound for the element search")
    p = sub.add_parser("classgroup", parents=[common], help="class group invariants")
    p.add_argument("--bound", type=float, help="override the prime norm bound")
    p = sub.add_parser("pip", parents=[common], help="principal ideal test")
    p.add_argument("--ideal", help='ideal, e.g. "gens:2,1+w" or "hnf:[[2,0],[1,1]]"')
    p = sub.add_parser("decompose", parents=[common], help="ideal class decomposition")
    p.add_argument("--ideal")
    p.add_argument("--bound", type=float)
    p = sub.add_parser("compactrep", parents=[common], help="compact representation of an S-unit")
    p.add_argument("--element", help='element in the order basis, e.g. "(1+w)^16"')
    p.add_argument("--base", type=int, default=2)
    p = sub.add_parser("oracle", parents=[common], help="evaluate the HSP oracle")
    p.add_argument("action", choices=["eval"])
    p.add_argument("--point", help='control point "u=..;mu=..;theta=..;v=.."')
    p = sub.add_parser("qsim", parents=[common], help="simulated lattice-state scans")
    p.add_argument("action", choices=["scan"])
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--s", "--width", dest="width", type=float, default=290.0, help="Gaussian width s")
    p.add_argument("--nu", type=float, default=0.05, help="grid spacing")
    return parser


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    if not argv:
        parser.print_usage(err)
        return 2
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_usage(err)
        return 2
    try:
        cfg = Config(q=args.prec, budget=enumeration_budget(), output="json" if args.json else "text",
                     seed=args.seed, threads=args.threads)
        order = load_order(args.field)
        for attempt in range(MAX_PRECISION_RETRIES + 1):
            try:
                payload, text = COMMANDS[args.command](order, args, cfg)
                break
            except (PrecisionExhausted, PrecisionInsufficient):
                if attempt == MAX_PRECISION_RETRIES:
                    raise
                cfg.q *= 2
    except UsageError as e:
        print(f"sunitkit: {e}", file=err)
        return 2
    except DOMAIN_ERRORS as e:
        print(f"sunitkit: {type(e).__name__}: {e}", file=err)
        return 1
    if cfg.output == "json":
        if isinstance(payload, dict):
            payload = dict(payload, command=args.command, config=asdict(cfg))
        print(_dump(payload), file=out)
    else:
        print(text, file=out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
