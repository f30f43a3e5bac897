"""
Command-line entry point.

Every command exits 0 on success, 1 on a validation error and 2 on a backend
failure. Results go to standard output and into --out; logs go to standard error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import structlog
from pydantic import ValidationError

from concept_space.loader import load_concept_spec
from config.errors import VALIDATION_EXIT, PotemkinError
from config.log import configure_logging
from config.settings import get_settings
from keystone.errors import SearchBudgetExceededError
from keystone.solver import (
    DEFAULT_NODE_BUDGET,
    enumerate_minimal_keystones,
    greedy_keystone,
    keystone_report,
    minimum_keystone,
)
from pipelines.autoeval import load_seed_questions, run_autoeval
from pipelines.benchmark_run import run_benchmark
from pipelines.config import BackendMode, RunConfig, build_oracle, load_run_config
from pipelines.errors import RunConfigError
from pipelines.expansion import run_keystone_expansion
from pipelines.incoherence import run_incoherence
from pipelines.report_model import RunReport, load_report, write_report
from report.render import render_report
from synth.generators import HumanSpaceParams, LlmSpaceParams
from synth.validity import sweep_to_frame, validity_sweep

logger = structlog.get_logger(__name__)

DEFAULT_OUT = "potemkin_out"
DEFAULT_FLIP_GRID = (0.0, 0.05, 0.1, 0.2, 0.3)


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def k_values_arg(text: str) -> list[int]:
    try:
        values = [int(k) for k in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(k < 0 for k in values):
        raise argparse.ArgumentTypeError(f"keystone sizes must be non-negative, got {text!r}")
    return values


class CliParser(argparse.ArgumentParser):
    """Usage errors are validation errors: exit 1, not argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(VALIDATION_EXIT, f"{self.prog}: error: {message}\n")


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, document) -> None:
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _emit_keystone(args: argparse.Namespace, document: dict) -> None:
    _write_json(_out_dir(args) / "keystone.json", document)
    print(json.dumps(document, indent=2, sort_keys=True))


def cmd_keystone(args: argparse.Namespace) -> None:
    concept = load_concept_spec(args.concept_spec)
    if args.mode == "greedy":
        document = keystone_report(concept, greedy_keystone(concept))
    elif args.mode == "exact":
        try:
            keystone = minimum_keystone(concept, node_budget=args.node_budget)
        except SearchBudgetExceededError as exc:
            _emit_keystone(args, keystone_report(concept, exc.incumbent))
            raise
        document = keystone_report(concept, keystone)
    else:
        enumeration = enumerate_minimal_keystones(concept, args.limit)
        document = {
            "concept_id": concept.concept_id,
            "keystones": [keystone_report(concept, k) for k in enumeration.keystones],
            "truncated": enumeration.truncated,
        }
    _emit_keystone(args, document)


def _sweep_params(args: argparse.Namespace) -> tuple[HumanSpaceParams, list[LlmSpaceParams]]:
    seed = args.seed if args.seed is not None else 0
    document: dict = {}
    if args.sweep:
        try:
            document = json.loads(Path(args.sweep).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RunConfigError(f"cannot read sweep file {args.sweep}: {exc}") from exc
    human = HumanSpaceParams(
        **{
            "n_instances": args.n_instances,
            "n_rules": args.n_rules,
            "flip_block_size": args.block_size,
            "seed": seed,
            **document.get("human", {}),
        }
    )
    grid = document.get("grid") or [{"flip_probability": p} for p in DEFAULT_FLIP_GRID]
    points = [
        LlmSpaceParams(
            **{"n_instances": human.n_instances, "n_interps": args.n_interps, "seed": seed + index, **point}
        )
        for index, point in enumerate(grid)
    ]
    return human, points


def cmd_simulate(args: argparse.Namespace) -> None:
    human, grid = _sweep_params(args)
    points = validity_sweep(human, grid)
    out = _out_dir(args)
    _write_json(
        out / "sweep.json",
        {"human": human.model_dump(mode="json"), "points": [p.model_dump(mode="json") for p in points]},
    )
    frame = sweep_to_frame(points)
    frame.to_csv(out / "sweep.csv", index=False, lineterminator="\n")
    print(frame.to_string(index=False))


def _run_config(args: argparse.Namespace) -> RunConfig:
    if not args.config:
        raise RunConfigError(f"{args.command} needs --config")
    return load_run_config(args.config, seed=args.seed, backend_mode=args.backend, parallelism=args.parallelism)


def _run_pipeline(args: argparse.Namespace, pipeline: Callable[..., RunReport], **extra) -> None:
    config = _run_config(args)
    out = _out_dir(args)
    oracle = build_oracle(config, out)
    try:
        report = pipeline(config, oracle=oracle, **extra)
    finally:
        oracle.store.compact()
    write_report(report, out)
    text = render_report(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    logger.info("🎉 Run written", out=str(out), live_calls=oracle.live_calls)


def cmd_benchmark(args: argparse.Namespace) -> None:
    _run_pipeline(args, run_benchmark)


def cmd_expansion(args: argparse.Namespace) -> None:
    _run_pipeline(args, run_keystone_expansion, k_values=args.k_values)


def cmd_incoherence(args: argparse.Namespace) -> None:
    _run_pipeline(args, run_incoherence)


def cmd_autoeval(args: argparse.Namespace) -> None:
    seeds = load_seed_questions(args.seed_questions) if args.seed_questions else None
    _run_pipeline(args, run_autoeval, seed_questions=seeds)


def cmd_report(args: argparse.Namespace) -> None:
    text = render_report(load_report(args.run))
    if args.out:
        (_out_dir(args) / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="run config JSON (mirrors RunConfig)")
    shared.add_argument("--seed", type=int, help="seed for every random choice")
    shared.add_argument("--out", help=f"output directory (default {DEFAULT_OUT})")
    shared.add_argument("--backend", choices=[mode.value for mode in BackendMode], help="override backend mode")
    shared.add_argument("--parallelism", type=int, help="concurrent (model, concept) pairs")

    parser = CliParser(prog="potemkin", description="Keystone solver and potemkin-understanding experiments")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    keystone = commands.add_parser("keystone", parents=[shared], help="solve a concept spec for keystones")
    keystone.add_argument("--concept-spec", required=True)
    keystone.add_argument("--mode", choices=["greedy", "exact", "enumerate"], default="exact")
    keystone.add_argument("--limit", type=positive_int, default=100)
    keystone.add_argument("--node-budget", type=positive_int, default=DEFAULT_NODE_BUDGET)
    keystone.set_defaults(handler=cmd_keystone)

    simulate = commands.add_parser("simulate", parents=[shared], help="synthetic framework-validity sweep")
    simulate.add_argument("--sweep", help="JSON {human: {...}, grid: [{...}]}")
    simulate.add_argument("--n-instances", type=int, default=12)
    simulate.add_argument("--n-rules", type=int, default=3)
    simulate.add_argument("--block-size", type=int, default=2)
    simulate.add_argument("--n-interps", type=int, default=200)
    simulate.set_defaults(handler=cmd_simulate)

    for name, handler, help_text in (
        ("benchmark", cmd_benchmark, "definition-gated benchmark"),
        ("expansion", cmd_expansion, "keystone expansion curve"),
        ("incoherence", cmd_incoherence, "incoherence scores"),
        ("autoeval", cmd_autoeval, "automatic lower bound"),
    ):
        command = commands.add_parser(name, parents=[shared], help=help_text)
        command.set_defaults(handler=handler)
        if name == "expansion":
            command.add_argument("--k-values", type=k_values_arg, help="comma-separated keystone sizes, e.g. 0,1,2")
        if name == "autoeval":
            command.add_argument("--seed-questions", help="seed questions JSON")

    report = commands.add_parser("report", parents=[shared], help="render a finished run")
    report.add_argument("--run", required=True, help="run directory holding report.json")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(get_settings().log_level)
    try:
        args.handler(args)
    except PotemkinError as exc:
        logger.error("❌ Command failed", command=args.command, error=type(exc).__name__)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"])
        print(f"error: {field}: {error['msg']}", file=sys.stderr)
        return VALIDATION_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
