"""Command-line front end for campaigns.

Subcommands:

* ``run`` — execute a campaign described by a JSON config file, with
  flag overrides for the common knobs.
* ``replay`` — re-execute a recorded campaign from its transcripts into
  a fresh output directory; output is byte-identical to the source run.
* ``report`` — regenerate the report artifacts of an existing campaign
  directory from its per-run results.
* ``compare`` — paired statistical comparison of two campaign reports.

On success each subcommand prints one JSON summary line to stdout and
exits 0.  On failure the process prints one machine-readable JSON error
record to stderr — ``{"error": <exception class>, "message": <text>}`` —
and exits 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from playprobe.harness import (
    AGENT_KINDS,
    CampaignConfig,
    compare_reports,
    emit_report,
    load_campaign,
    run_campaign,
)
from playprobe.llm import canonical_json

PROVIDER_MODES = ("scripted", "replay", "remote")


def _print(payload: dict) -> None:
    sys.stdout.write(canonical_json(payload) + "\n")


def _load_config(args: argparse.Namespace) -> CampaignConfig:
    """Config file first, then flag overrides on top."""
    if args.config:
        cfg = CampaignConfig.load(args.config)
    elif args.agent:
        cfg = CampaignConfig(agent_kind=args.agent)
    else:
        raise UsageError(
            "no_config", "pass --config FILE or at least --agent KIND")

    overrides: dict = {}
    if args.agent:
        overrides["agent_kind"] = args.agent
    if args.personality:
        overrides["personalities"] = tuple(args.personality)
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    if args.turns is not None:
        overrides["max_turns"] = args.turns
    if args.plan_iterations is not None:
        overrides["max_plan_iterations"] = args.plan_iterations
    if args.rules:
        overrides["rules_path"] = args.rules
    if args.out:
        overrides["output_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.level_cap is not None:
        overrides["level_cap"] = args.level_cap

    provider = dict(cfg.provider)
    if args.provider_mode:
        provider = {"mode": args.provider_mode}
    if args.provider_source:
        provider["source"] = args.provider_source
    if args.record:
        provider["record"] = True
    overrides["provider"] = provider

    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _summary(report: dict, output_dir: str) -> dict:
    return {
        "output_dir": output_dir,
        "agent_kind": report["agent_kind"],
        "run_count": report["run_count"],
        "union_coverage": report["aggregate"]["union_coverage"],
        "mean_combinatorial_coverage":
            report["aggregate"]["combinatorial_coverage"]["mean"],
        "mean_navigation_coverage":
            report["aggregate"]["navigation_coverage"]["mean"],
    }


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    report = run_campaign(cfg)
    _print(_summary(report, cfg.output_dir))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    source = Path(args.source)
    cfg, _ = load_campaign(source)
    cfg = replace(
        cfg,
        provider={"mode": "replay", "source": str(source)},
        output_dir=args.out,
        workers=args.workers if args.workers is not None else 1,
    )
    cfg.validate()
    report = run_campaign(cfg)
    _print(_summary(report, cfg.output_dir))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    campaign_dir = Path(args.campaign)
    cfg, results = load_campaign(campaign_dir)
    report = emit_report(cfg, results, campaign_dir)
    _print(_summary(report, str(campaign_dir)))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    reports = []
    for campaign in (args.a, args.b):
        path = Path(campaign) / "report.json"
        with open(path, "r", encoding="utf-8") as fh:
            reports.append(json.load(fh))
    comparison = compare_reports(reports[0], reports[1])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(comparison) + "\n")
    _print(comparison)
    return 0


class UsageError(Exception):
    """Usage-level failure with a stable error code."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """Argument errors become JSON error records like every other failure."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError("usage", message)


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="campaign config JSON file")
    sub.add_argument("--agent", choices=sorted(AGENT_KINDS),
                     help="agent kind (overrides config)")
    sub.add_argument("--personality", action="append",
                     help="trait name; repeat the flag for several "
                          "(overrides config)")
    sub.add_argument("--repeats", type=int, help="repeats per personality")
    sub.add_argument("--turns", type=int, help="max game turns per run")
    sub.add_argument("--plan-iterations", type=int,
                     help="max plan iterations per run")
    sub.add_argument("--rules", help="combination rule file")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--workers", type=int, help="parallel run workers")
    sub.add_argument("--level-cap", type=int,
                     help="navigation coverage counts only the first N levels")
    sub.add_argument("--provider-mode", choices=PROVIDER_MODES,
                     help="chat provider mode")
    sub.add_argument("--provider-source",
                     help="campaign directory holding transcripts "
                          "(replay mode)")
    sub.add_argument("--record", action="store_true",
                     help="save chat transcripts next to each run")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="playprobe",
        description="Personality-driven game-testing campaigns.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_p = subparsers.add_parser("run", help="execute a campaign")
    _add_run_flags(run_p)
    run_p.set_defaults(fn=cmd_run)

    replay_p = subparsers.add_parser(
        "replay", help="re-execute a recorded campaign from its transcripts")
    replay_p.add_argument("--source", required=True,
                          help="recorded campaign directory")
    replay_p.add_argument("--out", required=True,
                          help="output directory for the replayed campaign")
    replay_p.add_argument("--workers", type=int, help="parallel run workers")
    replay_p.set_defaults(fn=cmd_replay)

    report_p = subparsers.add_parser(
        "report", help="regenerate report artifacts for a campaign directory")
    report_p.add_argument("--campaign", required=True,
                          help="campaign directory")
    report_p.set_defaults(fn=cmd_report)

    compare_p = subparsers.add_parser(
        "compare", help="paired statistical comparison of two campaigns")
    compare_p.add_argument("--a", required=True,
                           help="campaign directory (tested as the larger)")
    compare_p.add_argument("--b", required=True, help="campaign directory")
    compare_p.add_argument("--out", help="also write the comparison JSON here")
    compare_p.set_defaults(fn=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        record = {"error": exc.code, "message": str(exc)}
    except Exception as exc:  # noqa: BLE001 — the CLI contract is a JSON
        # error record and a nonzero exit for every failure.
        record = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(canonical_json(record) + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
