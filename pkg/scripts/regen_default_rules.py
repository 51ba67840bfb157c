#!/usr/bin/env python3
"""Regenerate configs/combination_rules.json from the built-in rules.

The shipped rule file is a plain serialization of
``default_combination_rules()``; rerunning this script after changing
the defaults keeps the two in lockstep.
"""

import argparse
from pathlib import Path

from playprobe.metrics import (default_combination_rules,
                               enumerate_combinations, save_rules)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out",
                        default=str(Path(__file__).resolve().parent.parent
                                    / "configs" / "combination_rules.json"),
                        help="destination rule file")
    args = parser.parse_args()

    rules = default_combination_rules()
    save_rules(rules, args.out)
    total, _ = enumerate_combinations(rules)
    print(f"wrote {len(rules)} rules ({total} combinations) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
