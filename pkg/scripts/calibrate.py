#!/usr/bin/env python3
"""Calibration run for the decay-criterion fixtures.

The testing-lemma statement is a limit with no rate, and the localized
order drop comes with no quantified gap, so the acceptance thresholds are
finite proxies.  This script runs both suites at the acceptance
parameters and records the observed values next to the thresholds in
src/strataops/fixtures/calibration.json.  Re-run after changing anything
that affects the numerics:

    python scripts/calibrate.py
"""
from __future__ import annotations

import datetime
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from strataops.geometry import derive_config
from strataops.verify import localization_suite, rlambda_suite, rlambda_unitarity_check

FIXTURE = (
    pathlib.Path(__file__).resolve().parents[1]
    / "src"
    / "strataops"
    / "fixtures"
    / "calibration.json"
)


def main() -> int:
    cfg = derive_config(3, {1, 2}, {1, 3})

    rl = rlambda_suite(cfg, lambdas=(4.0, 16.0, 64.0), n_points=64, half_width=10.0)
    unit = rlambda_unitarity_check()
    loc = localization_suite(cfg, n_points=64)

    fixture = {
        "generated": datetime.date.today().isoformat(),
        "config": {"n": 3, "S1": [1, 2], "S2": [1, 3]},
        "rlambda": {
            "lambdas": [4.0, 16.0, 64.0],
            "n_points": 64,
            "half_width": 10.0,
            "final_residual_ratio_max": 0.1,
            "require_strict_decrease": True,
            "recorded": {
                name: {
                    "residuals": vals["residuals"],
                    "input_norm": vals["input_norm"],
                    "ratios": [r / vals["input_norm"] for r in vals["residuals"]],
                }
                for name, vals in rl["values"].items()
            },
            "unitarity_recorded": unit["values"]["norm_rel_errors"],
        },
        "localization": {
            "lambdas": [2.0, 4.0, 8.0, 16.0],
            "n_points": 64,
            "min_drop": 0.7,
            "max_gap": 0.1,
            "recorded": loc["values"],
        },
        "all_passed": bool(rl["pass"] and unit["pass"] and loc["pass"]),
    }
    FIXTURE.write_text(json.dumps(fixture, indent=2, default=float) + "\n")
    print(f"wrote {FIXTURE}")
    print(f"rlambda pass={rl['pass']} unitarity pass={unit['pass']} localization pass={loc['pass']}")
    return 0 if fixture["all_passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
