"""
holx command line.

    validate FILE                      model constraint report
    interop FILE [--process ID]        system interoperability verdict
    lcim FILE [--pairs]                LCIM level per process (and per pair)
    precedence FILE [--dot]            occurrence precedence pairs or DOT graph
    transform FILE --to b2mml|ueml     meta-model transformation
    transform FILE --mapping SPEC      ... with a user mapping spec
    simulate FILE [--scenario ID]      play a scenario through the executor
    genealogy FILE HOLON               constituent tree and instance trace

Exit codes:
    0  success
    1  negative domain verdict (violations, not interoperable, failed run)
    2  input error (unreadable or invalid file, bad flag value, unknown id)
    3  internal error
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, TextIO

from pydantic import BaseModel

from api import reports
from core.analysis.interop import check_system_interop, interop_pairs
from core.analysis.lcim import classify_lcim, classify_system_lcim
from core.analysis.precedence import build_precedence, check_horizon, to_dot
from core.config_manager import ConfigManager
from core.engine.executor import COMMIT_POINTS, trace
from core.engine.scenario import ScenarioRunner
from core.errors import CapabilityMissing, ConsumedItemAbsent, DomainFault, HolxError, UnknownProcess
from core.model.holons import HolonStore
from core.model.validation import validate
from core.persistence.model_io import load_model
from core.transform.mapping import apply, compile_mapping, load_mapping_spec
from core.transform.registry import B2MML, HOLONIC, UEML, default_registry

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

TARGETS = {"b2mml": B2MML, "ueml": UEML}
DOMAIN_ERRORS = (DomainFault, CapabilityMissing, ConsumedItemAbsent)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, DOMAIN_ERRORS):
        return EXIT_NEGATIVE
    if isinstance(error, (HolxError, OSError)):
        return EXIT_INPUT
    return EXIT_INTERNAL


# ============================================================================
# ARGUMENTS
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--verbose", action="store_true", help="log INFO messages on stderr")
    common.add_argument("--config", metavar="PATH", help="settings file (default holx.json)")

    parser = argparse.ArgumentParser(prog="holx", description="Holonic manufacturing model toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", parents=[common], help="check model constraints")
    p.add_argument("file")

    p = commands.add_parser("interop", parents=[common], help="system interoperability verdict")
    p.add_argument("file")
    p.add_argument("--horizon", type=int, metavar="K")
    p.add_argument("--process", metavar="ID")

    p = commands.add_parser("lcim", parents=[common], help="LCIM classification")
    p.add_argument("file")
    p.add_argument("--pairs", action="store_true", help="also classify flow-connected process pairs")

    p = commands.add_parser("precedence", parents=[common], help="occurrence precedence relation")
    p.add_argument("file")
    p.add_argument("--horizon", type=int, metavar="K")
    p.add_argument("--dot", action="store_true", help="emit a Graphviz digraph")

    p = commands.add_parser("transform", parents=[common], help="transform into another meta-model")
    p.add_argument("file")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--to", choices=sorted(TARGETS))
    target.add_argument("--mapping", metavar="SPEC")
    p.add_argument("--out", metavar="PATH")

    p = commands.add_parser("simulate", parents=[common], help="run a scenario")
    p.add_argument("file")
    p.add_argument("--scenario", metavar="ID")
    p.add_argument("--fault", choices=COMMIT_POINTS)
    p.add_argument("--log-file", metavar="PATH")

    p = commands.add_parser("genealogy", parents=[common], help="holon genealogy and trace")
    p.add_argument("file")
    p.add_argument("holon")
    return parser


def load_config(args: argparse.Namespace) -> ConfigManager:
    return ConfigManager(args.config)


def use_color(config: ConfigManager, args: argparse.Namespace, stream: TextIO) -> bool:
    if args.json or config.color == "never":
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


# ============================================================================
# COMMANDS
# ============================================================================
# Each command returns (report, exit code). Exceptions propagate to dispatch().

def cmd_validate(args, config):
    model = load_model(args.file)
    report = reports.validate_report(validate(model))
    return report, EXIT_OK if report.ok else EXIT_NEGATIVE


def _horizon(args, config) -> int:
    return check_horizon(args.horizon if args.horizon is not None else config.horizon)


def cmd_interop(args, config):
    model = load_model(args.file)
    horizon = _horizon(args, config)
    if args.process is not None and args.process not in model.processes:
        raise UnknownProcess(args.process)
    verdict = check_system_interop(model, horizon)
    report = reports.interop_report(verdict, args.process)
    return report, EXIT_OK if report.overall else EXIT_NEGATIVE


def cmd_lcim(args, config):
    model = load_model(args.file)
    levels = {pid: classify_lcim(model, pid) for pid in model.processes}
    pairs = interop_pairs(model) if args.pairs else None
    return reports.lcim_report(levels, classify_system_lcim(model), pairs), EXIT_OK


def cmd_precedence(args, config):
    model = load_model(args.file)
    rel = build_precedence(model, _horizon(args, config))
    dot = to_dot(model, rel) if args.dot else None
    return reports.precedence_report(rel, dot), EXIT_OK


def cmd_transform(args, config):
    model = load_model(args.file)
    if args.mapping:
        mapping = compile_mapping(load_mapping_spec(args.mapping))
    else:
        mapping = default_registry().get(HOLONIC, TARGETS[args.to])
    result = apply(model, mapping)
    data = result.to_bytes()
    document = None
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(data)
        logger.info(f"[TRANSFORM] wrote {len(data)} bytes to {out}")
    else:
        document = data.decode("utf-8")
    return reports.transform_report(mapping.target.id, result, args.out, document), EXIT_OK


def cmd_simulate(args, config):
    model = load_model(args.file)
    runner = ScenarioRunner(model, clock_step_ms=config.clock_step_ms, log_file=args.log_file)
    result = runner.run(args.scenario, args.fault)
    return reports.simulate_report(result), EXIT_OK if result.ok else EXIT_NEGATIVE


def cmd_genealogy(args, config):
    model = load_model(args.file)
    root = HolonStore(model).genealogy(args.holon)
    return reports.genealogy_report(root, trace(model, args.holon)), EXIT_OK


COMMANDS: Dict[str, Callable] = {
    "validate": cmd_validate,
    "interop": cmd_interop,
    "lcim": cmd_lcim,
    "precedence": cmd_precedence,
    "transform": cmd_transform,
    "simulate": cmd_simulate,
    "genealogy": cmd_genealogy,
}


# ============================================================================
# DISPATCH
# ============================================================================

def render(report: BaseModel, command: str, as_json: bool, color: bool) -> str:
    if as_json:
        return reports.dump_json(report)
    return getattr(reports.TextRenderer(color), command)(report)


def dispatch(args: argparse.Namespace, config: ConfigManager,
             stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        report, code = COMMANDS[args.command](args, config)
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_INTERNAL:
            logger.exception(f"[CLI] {args.command} failed")
            print(f"internal error: {e}", file=stderr)
        else:
            print(f"error: {e}", file=stderr)
        return code
    stdout.write(render(report, args.command, args.json, use_color(config, args, stdout)))
    stdout.flush()
    return code


def run(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    """Parse, load settings and dispatch without touching logging handlers."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INPUT
    return dispatch(args, load_config(args), stdout, stderr)
