#!/usr/bin/env python3
"""Run a personality campaign and a smart-monkey baseline side by side.

Everything runs against the deterministic scripted chat provider, so
the whole demo is reproducible offline.  Prints both campaign
aggregates plus the paired one-tailed comparison (personality agent
tested as the larger side).
"""

import argparse
import json
from pathlib import Path

from playprobe.harness import CampaignConfig, compare_reports, run_campaign
from playprobe.personality import TRAIT_ORDER


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="campaigns/scripted_demo",
                        help="root directory for both campaigns")
    parser.add_argument("--turns", type=int, default=250,
                        help="max game turns per run")
    parser.add_argument("--repeats", type=int, default=1,
                        help="repeats per personality slot")
    parser.add_argument("--rules", default=None,
                        help="combination rule file (default: built-in rules)")
    args = parser.parse_args()

    root = Path(args.out)
    shared = dict(personalities=TRAIT_ORDER, repeats=args.repeats,
                  max_turns=args.turns, rules_path=args.rules,
                  provider={"mode": "scripted"})

    reports = {}
    for kind in ("mimic", "smart_monkey"):
        cfg = CampaignConfig(agent_kind=kind,
                             output_dir=str(root / kind), **shared)
        reports[kind] = run_campaign(cfg)
        agg = reports[kind]["aggregate"]
        print(f"{kind}: {reports[kind]['run_count']} runs, "
              f"union coverage {agg['union_coverage']:.3f}, "
              f"mean combinatorial {agg['combinatorial_coverage']['mean']:.3f}, "
              f"mean navigation {agg['navigation_coverage']['mean']:.3f}")

    comparison = compare_reports(reports["mimic"], reports["smart_monkey"])
    print("paired comparison (personality agent vs smart monkey):")
    print(json.dumps(comparison, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
