import argparse
import logging
import os
import sys
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import dotenv
import pandas as pd
from pydantic import BaseModel, ValidationError
from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from src._default import DEFAULT_RUN_KWARGS, DEFAULT_VERIFY_KWARGS
from src.equilibrium import cooperation_conditions, oracle_agreement, sgpo, sgpo_from_weights, sgpo_kind
from src.errors import IoError, ParseError, QuantumGameError
from src.formats import (
    Command,
    ConditionReport,
    EvaluateReport,
    OutputFormat,
    RestrictedStateWeights,
    RunConfig,
    SgpoCommandReport,
    StagePayoffs,
    SweepReport,
    SweepRow,
    VerificationReport,
)
from src.payoffs import all_payoffs, closed_form_payoffs
from src.quantum import (
    PureState,
    is_product_state,
    make_pure_state,
    make_restricted_state,
    restricted_state_from_weights,
    restricted_weights,
)
from src.utils import parse_amplitudes, parse_profile, parse_weights, simplex_grid
from src.verification import run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

SWEEP_COLUMNS = [
    "w1", "w2", "w3", "w4", "x_sum", "y_sum", "cond1_value", "cond2_value",
    "cond1_class", "cond2_class", "sgpo_kind", "a_total", "b_total",
]


class _SingleLineParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors are a single line on stderr."""

    def error(self, message: str):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_default(name: str, key: str):
    value = os.getenv(name)
    return DEFAULT_RUN_KWARGS[key] if value is None else value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", nargs="+", metavar="AMP",
                        help="4 restricted or 16 general amplitudes, each 're' or 're,im' (fractions n/d allowed)")
    common.add_argument("--weights", nargs="+", metavar="W",
                        help="4 restricted weights |c1|^2..|c4|^2")
    common.add_argument("--profile", help="strategy profile 'p,q,p1,q1'")
    common.add_argument("--resolution", type=int, default=_env_default("QPD_RESOLUTION", "resolution"),
                        help="sweep simplex resolution R")
    common.add_argument("--grid-n", type=int, default=_env_default("QPD_GRID_N", "grid_n"),
                        help="grid oracle resolution N")
    common.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat],
                        default=_env_default("QPD_FORMAT", "output_format"))
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--seed", type=int, default=_env_default("QPD_SEED", "seed"))
    common.add_argument("--samples", type=int, default=_env_default("QPD_SAMPLES", "samples"),
                        help="oracle-equivalence samples for verify-classical")
    common.add_argument("--tol", type=float, default=_env_default("QPD_TOL", "tol"))
    common.add_argument("--workers", type=int, default=_env_default("QPD_WORKERS", "workers"),
                        help="process pool size for sweep")
    common.add_argument("--progress", action="store_true", help="show progress bars on stderr")
    common.add_argument("--corrupt", action="store_true",
                        help="verify-classical negative control: corrupt the payoff matrix")
    common.add_argument("--log-level", default=os.getenv("QPD_LOG_LEVEL", "WARNING"))

    parser = _SingleLineParser(
        prog="run_quantum_pd",
        description="Two-stage quantum prisoners' dilemma: payoffs, subgame-perfect outcomes, sweeps.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_SingleLineParser)
    for command, help_text in (
            (Command.EVALUATE, "stage payoffs for a state and profile"),
            (Command.SGPO, "subgame-perfect outcomes by backward induction"),
            (Command.CONDITIONS, "cooperate-then-defect conditions for restricted weights"),
            (Command.SWEEP, "conditions and SGPO over the restricted-weight simplex"),
            (Command.VERIFY_CLASSICAL, "classical-limit and density-matrix consistency checks"),
    ):
        subparsers.add_parser(command.value, parents=[common], help=help_text)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        return RunConfig(
            command=Command(args.command),
            state=args.state,
            weights=args.weights,
            profile=args.profile,
            resolution=args.resolution,
            grid_n=args.grid_n,
            output_format=OutputFormat(args.output_format),
            out=args.out,
            seed=args.seed,
            samples=args.samples,
            tol=args.tol,
            workers=args.workers,
            progress=args.progress,
            corrupt=args.corrupt,
        )
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ParseError(f"invalid configuration: {details}") from e
    except ValueError as e:
        raise ParseError(f"invalid configuration: {e}") from e


def load_state(config: RunConfig) -> Tuple[PureState, Optional[RestrictedStateWeights]]:
    """The initial state named by --state or --weights, with its restricted weights if any."""
    if (config.state is None) == (config.weights is None):
        raise ParseError("exactly one of --state or --weights is required")
    if config.weights is not None:
        weights = parse_weights(config.weights)
        return restricted_state_from_weights(weights), weights
    amplitudes = parse_amplitudes(config.state)
    state = make_restricted_state(*amplitudes) if len(amplitudes) == 4 else make_pure_state(amplitudes)
    return state, restricted_weights(state)


def cmd_evaluate(config: RunConfig) -> EvaluateReport:
    if config.profile is None:
        raise ParseError("evaluate requires --profile p,q,p1,q1")
    state, weights = load_state(config)
    profile = parse_profile(config.profile)
    density = all_payoffs(state, profile)
    closed = closed_form_payoffs(weights, profile) if weights is not None else None
    return EvaluateReport(
        amplitude_count=len(config.state) if config.state is not None else 4,
        restricted=weights is not None,
        product_state=is_product_state(state),
        profile=profile,
        density_payoffs=density,
        closed_form_payoffs=closed,
        discrepancy=density.max_abs_diff(closed) if closed is not None else None,
    )


def cmd_sgpo(config: RunConfig) -> SgpoCommandReport:
    state, weights = load_state(config)
    report = sgpo(state, tol=config.tol)
    agrees = oracle_agreement(report.stage2_game, report.stage2_equilibria, config.grid_n, config.tol) and all(
        oracle_agreement(c.stage1_game, c.stage1_equilibria, config.grid_n, config.tol)
        for c in report.continuations
    )
    if not agrees:
        logger.warning("grid oracle (N=%d) disagrees with the equilibrium enumeration", config.grid_n)
    kind, _ = sgpo_kind(report)
    return SgpoCommandReport(
        product_state=is_product_state(state),
        weights=weights,
        conditions=cooperation_conditions(weights, config.tol) if weights is not None else None,
        sgpo_kind=kind,
        grid_n=config.grid_n,
        oracle_agrees=agrees,
        report=report,
    )


def cmd_conditions(config: RunConfig) -> ConditionReport:
    _, weights = load_state(config)
    if weights is None:
        raise ParseError("conditions are defined only for restricted states")
    return cooperation_conditions(weights, config.tol)


def sweep_row(values: Tuple[float, float, float, float], tol: float) -> SweepRow:
    weights = RestrictedStateWeights.from_sequence(values)
    conditions = cooperation_conditions(weights, tol)
    kind, entry = sgpo_kind(sgpo_from_weights(weights, tol))
    a_total, b_total = entry.totals if entry is not None else (float("nan"), float("nan"))
    return SweepRow(
        w1=weights.w1,
        w2=weights.w2,
        w3=weights.w3,
        w4=weights.w4,
        x_sum=conditions.x_sum,
        y_sum=conditions.y_sum,
        cond1_value=conditions.cond1_value,
        cond2_value=conditions.cond2_value,
        cond1_class=conditions.cond1_class,
        cond2_class=conditions.cond2_class,
        sgpo_kind=kind,
        a_total=a_total,
        b_total=b_total,
    )


def cmd_sweep(config: RunConfig) -> SweepReport:
    grid = list(simplex_grid(config.resolution))
    evaluate = partial(sweep_row, tol=config.tol)
    if config.workers > 1:
        # process_map keeps input order, so rows stay canonical
        rows = process_map(
            evaluate, grid, max_workers=config.workers, chunksize=max(1, len(grid) // (4 * config.workers)),
            desc="sweep", disable=not config.progress,
        )
    else:
        rows = [evaluate(values) for values in tqdm(grid, desc="sweep", disable=not config.progress)]
    return SweepReport(resolution=config.resolution, rows=rows)


def cmd_verify_classical(config: RunConfig) -> VerificationReport:
    kwargs = DEFAULT_VERIFY_KWARGS | {"seed": config.seed, "samples": config.samples, "tol": config.tol}
    return run_verification(**kwargs, corrupt=config.corrupt, progress=config.progress)


COMMANDS: Dict[Command, Callable[[RunConfig], BaseModel]] = {
    Command.EVALUATE: cmd_evaluate,
    Command.SGPO: cmd_sgpo,
    Command.CONDITIONS: cmd_conditions,
    Command.SWEEP: cmd_sweep,
    Command.VERIFY_CLASSICAL: cmd_verify_classical,
}


def _payoff_record(source: str, payoffs: StagePayoffs) -> dict:
    return {"source": source, **payoffs.model_dump(), "a_total": payoffs.a_total, "b_total": payoffs.b_total}


def report_table(report: BaseModel) -> pd.DataFrame:
    """Flat table of a report for CSV output."""
    if isinstance(report, EvaluateReport):
        records = [_payoff_record("density", report.density_payoffs)]
        if report.closed_form_payoffs is not None:
            records.append(_payoff_record("closed-form", report.closed_form_payoffs))
        return pd.DataFrame(records)
    if isinstance(report, SgpoCommandReport):
        records = [
            {
                **entry.profile.model_dump(),
                **entry.stage_payoffs.model_dump(),
                "a_total": entry.totals[0],
                "b_total": entry.totals[1],
                "strictness": entry.strictness.value,
                "stage1_kind": entry.stage1_kind.value,
                "stage2_kind": entry.stage2_kind.value,
            }
            for entry in report.report.sgpo_profiles
        ]
        return pd.DataFrame(records, columns=[
            "p", "q", "p1", "q1", "a1", "b1", "a2", "b2", "a_total", "b_total",
            "strictness", "stage1_kind", "stage2_kind",
        ])
    if isinstance(report, ConditionReport):
        return pd.DataFrame([report.model_dump(mode="json")])
    if isinstance(report, SweepReport):
        return pd.DataFrame([row.model_dump(mode="json") for row in report.rows], columns=SWEEP_COLUMNS)
    if isinstance(report, VerificationReport):
        return pd.DataFrame([check.model_dump() for check in report.checks])
    raise TypeError(f"no table layout for {type(report).__name__}")


def _fmt(values) -> str:
    return ", ".join(f"{v:.12g}" for v in values)


def _text_payoffs(label: str, payoffs: StagePayoffs) -> str:
    return (
        f"{label}: a1={payoffs.a1:.12g} b1={payoffs.b1:.12g} a2={payoffs.a2:.12g} b2={payoffs.b2:.12g} "
        f"totals=({payoffs.a_total:.12g}, {payoffs.b_total:.12g})"
    )


def report_text(report: BaseModel) -> str:
    lines: List[str] = []
    if isinstance(report, EvaluateReport):
        lines.append(
            f"state: {report.amplitude_count} amplitudes, restricted={report.restricted}, "
            f"product={report.product_state}"
        )
        lines.append(f"profile: ({_fmt(report.profile.as_tuple())})")
        lines.append(_text_payoffs("density-matrix payoffs", report.density_payoffs))
        if report.closed_form_payoffs is not None:
            lines.append(_text_payoffs("closed-form payoffs", report.closed_form_payoffs))
            lines.append(f"max discrepancy: {report.discrepancy:.3e}")
    elif isinstance(report, SgpoCommandReport):
        sgpo_report = report.report
        if report.weights is not None:
            lines.append(f"weights: ({_fmt(report.weights.as_tuple())})")
        lines.append(f"product state: {report.product_state}")
        lines.append("stage-2 equilibria:")
        for component in sgpo_report.stage2_equilibria:
            lines.append(f"  {component.kind.value} x={component.x} y={component.y} {component.strictness.value}")
        for continuation in sgpo_report.continuations:
            lines.append(
                f"continuation {continuation.point} payoffs=({_fmt(continuation.payoffs)})"
                f"{'' if continuation.inducible else ' [segment endpoint]'}"
            )
            lines.append(f"  induced stage-1 game A={continuation.stage1_game.a} B={continuation.stage1_game.b}")
            for component in continuation.stage1_equilibria:
                lines.append(
                    f"  stage-1 {component.kind.value} x={component.x} y={component.y} {component.strictness.value}"
                )
        lines.append(f"sgpo profiles ({report.sgpo_kind.value}):")
        for entry in sgpo_report.sgpo_profiles:
            lines.append(
                f"  ({_fmt(entry.profile.as_tuple())}) totals=({_fmt(entry.totals)}) {entry.strictness.value}"
            )
        for flag in sgpo_report.flags:
            lines.append(f"note: {flag}")
        lines.append(f"grid oracle N={report.grid_n}: {'agrees' if report.oracle_agrees else 'DISAGREES'}")
    elif isinstance(report, ConditionReport):
        lines.append(f"x_sum=|c1|^2+|c2|^2={report.x_sum:.12g} y_sum=|c2|^2+|c4|^2={report.y_sum:.12g}")
        lines.append(f"cond1 (stage-2 defection): {report.cond1_value:.12g} {report.cond1_class.value}")
        lines.append(f"cond2 (stage-1 cooperation): {report.cond2_value:.12g} {report.cond2_class.value}")
    elif isinstance(report, SweepReport):
        lines.append(report_table(report).to_string(index=False))
    elif isinstance(report, VerificationReport):
        for check in report.checks:
            lines.append(
                f"{check.name}: max error {check.max_error:.3e} (tol {check.tolerance:.1e}, "
                f"{check.samples} samples) {'pass' if check.passed else 'FAIL'}"
            )
        lines.append("all checks passed" if report.passed else "verification FAILED")
    else:
        raise TypeError(f"no text layout for {type(report).__name__}")
    return "\n".join(lines) + "\n"


def render(report: BaseModel, output_format: OutputFormat) -> str:
    if output_format is OutputFormat.JSON:
        return report.model_dump_json(indent=2, exclude_none=True) + "\n"
    if output_format is OutputFormat.CSV:
        return report_table(report).to_csv(index=False, lineterminator="\n")
    return report_text(report)


def write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e.strerror or e}") from e


def main(argv: Optional[List[str]] = None) -> int:
    dotenv.load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = config_from_args(args)
        report = COMMANDS[config.command](config)
        write_output(render(report, config.output_format), config.out)
    except QuantumGameError as e:
        message = " ".join(str(e).split())
        print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE

    if isinstance(report, VerificationReport) and not report.passed:
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK
