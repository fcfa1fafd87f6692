"""
ordervc command line.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 exact search truncated by its budget.
"""

import argparse
import json
import logging
import sys

from . import __version__
from .config import CONSTRUCTIONS, FAMILY_NAMES, FORMATS, STAR_MODES, STRATEGIES, RunConfig, resolve_threads
from .constructions import (
    ConstructionKind,
    FlipStrategy,
    StarMode,
    build_family,
    proofcheck_thm1_upper,
    thm1_shattered_set,
    verify_property_star,
)
from .enumeration import FamilySpec
from .errors import InvariantViolation, OrderVCError, OutOfRange
from .order_core import TotalOrder, compatible, linear_extension
from .serialization import (
    construction_to_dict,
    construction_to_dot,
    dumps_order,
    load_certificate,
    load_order_list,
    loads_order,
    save_certificate,
    write_text,
)
from .shattering import SearchBudget, vc_dimension, verify_certificate

logger = logging.getLogger("ordervc")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_TRUNCATED = 3


def _emit(stream, payload, config):
    if config.format == "json":
        stream.write(json.dumps(payload, indent=2) + "\n")
    else:
        width = max(len(k) for k in payload) if payload else 0
        for key, value in payload.items():
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, (list, dict)):
                continue
            stream.write(f"{key:<{width}}  {value}\n")


def _require_n(config):
    if config.n is None:
        raise OutOfRange(f"{config.command} needs --n")
    return config.n


# -- subcommands -------------------------------------------------------------

def cmd_compat(config, stream):
    if config.a is None or config.b is None:
        raise OutOfRange("compat needs --a and --b")
    a, b = loads_order(config.a), loads_order(config.b)
    stream.write(("true" if compatible(a, b) else "false") + "\n")
    return EXIT_OK


def cmd_enumerate(config, stream):
    family = FamilySpec.named(config.kind, _require_n(config))
    if config.count_only:
        stream.write(f"{len(family)}\n")
        return EXIT_OK
    for order in family:
        stream.write(dumps_order(order) + "\n")
    return EXIT_OK


def cmd_vc(config, stream, threads):
    n = _require_n(config)
    ground = FamilySpec.named(config.ground, n)
    witness = FamilySpec.named(config.witness, n)
    budget = SearchBudget(seconds=config.budget, max_candidates=config.max_candidates)
    report = vc_dimension(ground, witness, budget=budget, threads=threads)

    payload = {"n": n, "ground": config.ground, "witness": config.witness, **report.summary()}
    if report.certificate is not None:
        payload["certificate"] = [str(g) for g in report.certificate.ground]
    _emit(stream, payload, config)
    if config.format == "table":
        stream.write(report.to_frame().to_string(index=False) + "\n")
    if config.emit_cert and report.certificate is not None:
        save_certificate(config.emit_cert, report.certificate)
    if not report.search_complete:
        logger.warning("budget spent: dimension %d is a lower bound", report.dimension)
        return EXIT_TRUNCATED
    return EXIT_OK


def _construction(config):
    kind = ConstructionKind(config.which)
    if kind == ConstructionKind.THM1_LOWER:
        fam, orders = thm1_shattered_set(_require_n(config))
        return fam, orders
    fam = build_family(kind, _require_n(config))
    return fam, list(fam.closed_parts)


def cmd_construct(config, stream):
    fam, ground = _construction(config)
    if config.emit_dot:
        write_text(config.emit_dot, construction_to_dot(fam))
    if config.emit_json:
        write_text(config.emit_json, json.dumps(construction_to_dict(fam, ground), indent=2) + "\n")

    if config.format == "dot":
        stream.write(construction_to_dot(fam))
    elif config.format == "json":
        stream.write(json.dumps(construction_to_dict(fam, ground), indent=2) + "\n")
    else:
        stream.write(f"{fam.kind.value} n={fam.n}: {len(fam.parts)} parts\n")
        for label, part, g in zip(fam.labels, fam.parts, ground):
            edges = ", ".join(f"{fam.vertex_name(u)}->{fam.vertex_name(v)}" for u, v in part.sorted_edges())
            stream.write(f"  {label:<8} {edges:<30} {g}\n")
    return EXIT_OK


def cmd_verify_star(config, stream, threads):
    fam, ground = _construction(config)
    if config.mode == "sampled":
        mode = StarMode.sampled(config.count, config.seed)
    else:
        mode = StarMode.exhaustive()
    report = verify_property_star(
        fam, mode=mode, strategy=FlipStrategy(config.strategy), threads=threads, ground=ground
    )
    _emit(stream, report.to_dict(), config)
    for failure in report.failures[:10]:
        stream.write(f"FAIL mask={failure.mask}: {failure.reason}\n")
    if not report.passed or (config.strict and report.fallbacks):
        return EXIT_FAILED
    return EXIT_OK


def _as_total(order):
    if isinstance(order, TotalOrder):
        return order
    if not order.is_total:
        raise InvariantViolation(f"{order} is not a total order")
    return linear_extension(order)


def cmd_proofcheck(config, stream):
    if not config.set_path:
        raise OutOfRange("proofcheck needs --set FILE")
    orders = [_as_total(o) for o in load_order_list(config.set_path)]
    n = config.n if config.n is not None else (orders[0].n if orders else 1)
    report = proofcheck_thm1_upper(orders, FamilySpec.named(config.witness, n))
    payload = report.to_dict()
    if config.format == "table":
        payload = {k: v for k, v in payload.items() if k not in ("checks", "assignments")}
        payload.update(report.checks)
    _emit(stream, payload, config)
    if config.format == "table":
        for a in report.assignments:
            stream.write(f"  {a.order}  e_A={a.edge[0]}->{a.edge[1]}  G_A={a.witness}\n")
    if report.hypothesis_holds and not report.passed:
        return EXIT_FAILED
    return EXIT_OK


def cmd_check_cert(config, stream):
    if not config.cert_path:
        raise OutOfRange("check-cert needs --cert FILE")
    verdict = verify_certificate(load_certificate(config.cert_path))
    if verdict:
        stream.write("verified\n")
        return EXIT_OK
    stream.write(f"rejected: {verdict.reason}\n")
    return EXIT_FAILED


def cmd_reproduce(config, stream, threads):
    from .experiment_runner import ReproductionRunner

    runner = ReproductionRunner(
        max_n=config.max_n, output_dir=config.output_dir, threads=threads, seed=config.seed, stream=stream
    )
    results = runner.run_full_reproduction()
    return EXIT_OK if results["summary"]["all_passed"] else EXIT_FAILED


def run(config: RunConfig, stream=None) -> int:
    """Dispatch one command; OrderVCError propagates to the caller."""
    stream = stream or sys.stdout
    config.validate()
    threads = resolve_threads(config.threads)
    logger.debug("running %s with %d threads", config.command, threads)
    if config.command == "compat":
        return cmd_compat(config, stream)
    if config.command == "enumerate":
        return cmd_enumerate(config, stream)
    if config.command == "vc":
        return cmd_vc(config, stream, threads)
    if config.command == "construct":
        return cmd_construct(config, stream)
    if config.command == "verify-star":
        return cmd_verify_star(config, stream, threads)
    if config.command == "proofcheck":
        return cmd_proofcheck(config, stream)
    if config.command == "check-cert":
        return cmd_check_cert(config, stream)
    if config.command == "reproduce":
        return cmd_reproduce(config, stream, threads)
    raise OutOfRange(f"unknown command {config.command!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ordervc", description="VC-dimension of families of partial and total orders"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=None, help="-v for INFO, -vv for DEBUG")
    common.add_argument("--config", help="YAML file with default option values")
    common.add_argument("--threads", type=int, help="worker threads (default: $ORDERVC_THREADS or CPU count)")
    common.add_argument("--format", choices=FORMATS, help="output format")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compat", parents=[common], help="are two orders compatible?")
    p.add_argument("--a", required=True, help="order JSON")
    p.add_argument("--b", required=True, help="order JSON")

    p = sub.add_parser("enumerate", parents=[common], help="list all orders on [n]")
    p.add_argument("--kind", choices=FAMILY_NAMES)
    p.add_argument("--n", type=int)
    p.add_argument("--count-only", action="store_true", default=None)

    p = sub.add_parser("vc", parents=[common], help="exact VC-dimension search")
    p.add_argument("--ground", choices=FAMILY_NAMES)
    p.add_argument("--witness", choices=FAMILY_NAMES)
    p.add_argument("--n", type=int)
    p.add_argument("--budget", type=float, help="wall-clock seconds")
    p.add_argument("--max-candidates", type=int, help="candidate subsets to examine")
    p.add_argument("--emit-cert", metavar="FILE")

    for name, text in (("construct", "generate a construction"), ("verify-star", "check property (*)")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--which", choices=CONSTRUCTIONS)
        p.add_argument("--n", type=int)
        if name == "construct":
            p.add_argument("--emit-dot", metavar="FILE")
            p.add_argument("--emit-json", metavar="FILE")
        else:
            p.add_argument("--mode", choices=STAR_MODES)
            p.add_argument("--count", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--strategy", choices=STRATEGIES)
            p.add_argument("--strict", action="store_true", default=None, help="count fallbacks as failures")

    p = sub.add_parser("proofcheck", parents=[common], help="replay the upper-bound argument")
    p.add_argument("--set", dest="set_path", metavar="FILE", help="JSON array or JSON-lines of total orders")
    p.add_argument("--n", type=int)
    p.add_argument("--witness", choices=FAMILY_NAMES)

    p = sub.add_parser("check-cert", parents=[common], help="verify a shattering certificate")
    p.add_argument("--cert", dest="cert_path", metavar="FILE")

    p = sub.add_parser("reproduce", parents=[common], help="run the full reproduction and write reports")
    p.add_argument("--max-n", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--seed", type=int)

    return parser


def setup_logging(verbose):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose and verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_args(args)
        setup_logging(config.verbose)
        return run(config)
    except OrderVCError as exc:
        print(f"ordervc: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        print("ordervc: interrupted", file=sys.stderr)
        return 130
